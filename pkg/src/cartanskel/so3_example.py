"""Built-in worked example: SO(3) x R+ acting through an affine extension.

The Klein pair is g = so(3) + R with h the rotations fixing the first axis;
alpha sends the so(3) parameters (a, b) and the scaling x to translations
and the remaining rotation parameter c to the gl(3) block

    [[0, -c, 0], [c, 0, 0], [0, 0, 0]],

an extension into (R^3 + gl(3), Gl(3), Ad).  Its holonomy algebra is the
so(2) line, the compatible metrics are diag(e^m1, e^m1, e^m2), and exactly
the m2-direction is an orbit of the automorphism action, leaving
diag(e^m1, e^m1, 1) as the non-equivalent representatives.
"""

from __future__ import annotations

from .exactmat import Mat, Q0, Q1, Subspace, unit_vec
from .extension import KleinModel, SkeletonMorphism
from .liealg import LinearMap, builtin
from .riemann import Classification, classify_metrics
from .skeleton import affine_skeleton


def rotation_scaling_klein() -> KleinModel:
    """(so(3) + R, SO(2)): h is spanned by the third so(3) basis vector."""
    g, _ = builtin("so3_plus_R")
    h = Subspace.from_vectors(4, [unit_vec(4, 2)])
    return KleinModel(g=g, h=h)


def rotation_scaling_extension() -> SkeletonMorphism:
    """The extension of (so(3) + R, SO(2)) into (R^3 + gl(3), Gl(3))."""
    klein = rotation_scaling_klein()
    target = affine_skeleton(3)
    # k coordinates: t1, t2, t3, then E11..E33 row-major.
    alpha_cols = [
        [1, 0, 0] + [0] * 9,  # a -> t1
        [0, 1, 0] + [0] * 9,  # b -> t2
        [0, 0, 0, 0, -1, 0, 1, 0, 0, 0, 0, 0],  # c -> E21 - E12
        [0, 0, 1] + [0] * 9,  # x -> t3
    ]
    alpha = LinearMap(Mat.from_rows(alpha_cols).transpose())
    dj = LinearMap(Mat.from_rows([[0, -1, 0, 1, 0, 0, 0, 0, 0]]).transpose())
    return SkeletonMorphism(source=klein, target=target, alpha=alpha, dj=dj)


def so2_line() -> Subspace:
    """span{E21 - E12} inside vectorized gl(3)."""
    data = [Q0] * 9
    data[3] = Q1
    data[1] = -Q1
    return Subspace.from_vectors(9, [data])


def run(step: float = 1e-4) -> Classification:
    """Classify the metrics sharing the connection of this extension."""
    return classify_metrics(rotation_scaling_extension(), step=step)
