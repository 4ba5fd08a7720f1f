"""Morphisms and extensions of skeletons with their curvature and torsion.

Sign convention, fixed throughout the package: with the Maurer-Cartan
normalization d omega(om^-1 X, om^-1 Y) = -[X, Y], the curvature of the
homogeneous geometry induced by a morphism alpha is

    kappa(X, Y) = [alpha X, alpha Y]_k - alpha([X, Y]_g) = R_alpha(X, Y),

so a Lie-homomorphic alpha yields a flat extension.  The ambient bracket on
k must be declared on the target skeleton (``k_algebra``) for curvature to
be available.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import InvariantError
from .exactmat import Mat, Q0, Subspace, Vec, inverse, rank, solve, sub_vec, vec
from .liealg import LieAlgebra, LinearMap
from .skeleton import Skeleton


@dataclass(frozen=True)
class KleinModel:
    """Algebra-level Klein pair (g, h): a Lie algebra with a subalgebra."""

    g: LieAlgebra
    h: Subspace
    h_algebra: LieAlgebra = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.h.ambient != self.g.dim:
            raise ValueError("h must be a subspace of g's coordinate space")
        basis = self.h.basis_vectors()
        structure = []
        for x in basis:
            plane = []
            for y in basis:
                b = self.g.bracket(x, y)
                coords = _coords_in(self.h, b)
                if coords is None:
                    raise InvariantError("h is not closed under the bracket of g")
                plane.append(list(coords))
            structure.append(plane)
        labels = [f"h{i + 1}" for i in range(self.h.dim)]
        object.__setattr__(self, "h_algebra", LieAlgebra(structure, labels))

    def skeleton(self) -> Skeleton:
        """The Klein skeleton (g, H, Ad) of this pair, with ambient bracket g."""
        lift = self.h.basis.transpose()
        drho = tuple(self.g.ad(lift.col(i)) for i in range(self.h.dim))
        return Skeleton(
            k_dim=self.g.dim,
            l=self.h_algebra,
            l_embed=LinearMap(lift),
            drho=drho,
            k_algebra=self.g,
            k_labels=self.g.labels,
        )


def _coords_in(space: Subspace, v: Sequence[Fraction]) -> Vec | None:
    return space.coordinates(v)


@dataclass(frozen=True)
class SkeletonMorphism:
    """Morphism (alpha, dj) from the Klein skeleton of ``source`` to ``target``."""

    source: KleinModel
    target: Skeleton
    alpha: LinearMap
    dj: LinearMap

    def __post_init__(self):
        if self.alpha.src_dim != self.source.g.dim or self.alpha.dst_dim != self.target.k_dim:
            raise ValueError("alpha must map g coordinates to k coordinates")
        if self.dj.src_dim != self.source.h.dim or self.dj.dst_dim != self.target.l.dim:
            raise ValueError("dj must map h coordinates to l coordinates")

    def h_complement(self) -> list[int]:
        """Canonical complement of h in g: non-pivot coordinates of h's basis."""
        return self.source.h.complement_coords()


def validate_morphism(m: SkeletonMorphism) -> list[str]:
    """Exact checks: alpha extends dj and is equivariant for the h-action."""
    bad: list[str] = []
    emb = m.target.l_embed
    for i in range(m.source.h.dim):
        h_vec = m.source.h.basis.row(i)
        if m.alpha.apply(h_vec) != emb.apply(m.dj.matrix.col(i)):
            bad.append(f"alpha does not extend dj on h basis vector {i}")
    g = m.source.g
    for i in range(m.source.h.dim):
        x = m.source.h.basis.row(i)
        rho_op = m.target.drho_of(m.dj.matrix.col(i))
        for j in range(g.dim):
            y = [Q0] * g.dim
            y[j] = 1
            lhs = m.alpha.apply(g.bracket(x, y))
            rhs = rho_op.apply(m.alpha.matrix.col(j))
            if lhs != rhs:
                bad.append(
                    f"equivariance fails for h basis vector {i} against g basis "
                    f"vector {j}: alpha(ad(X)Y) != drho(dj X)(alpha Y)"
                )
    return bad


def is_extension(m: SkeletonMorphism) -> bool:
    """Valid morphism inducing an isomorphism g/h -> k/l."""
    if validate_morphism(m):
        return False
    if m.source.g.dim - m.source.h.dim != m.target.k_dim - m.target.l.dim:
        return False
    image = Subspace.from_vectors(
        m.target.k_dim,
        [m.alpha.matrix.col(j) for j in range(m.source.g.dim)],
    )
    return (image + m.target.l_space()).dim == m.target.k_dim


def identity_morphism(klein: KleinModel) -> SkeletonMorphism:
    """The identity extension of a Klein skeleton onto itself."""
    return SkeletonMorphism(
        source=klein,
        target=klein.skeleton(),
        alpha=LinearMap(Mat.identity(klein.g.dim)),
        dj=LinearMap(Mat.identity(klein.h.dim)),
    )


def _target_bracket(m: SkeletonMorphism) -> LieAlgebra:
    if m.target.k_algebra is None:
        raise InvariantError("target has no declared bracket")
    return m.target.k_algebra


def r_alpha(m: SkeletonMorphism, x: Sequence[Fraction], y: Sequence[Fraction]) -> Vec:
    """[alpha x, alpha y]_k - alpha([x, y]_g): failure of alpha to be a homomorphism."""
    kb = _target_bracket(m)
    ax, ay = m.alpha.apply(x), m.alpha.apply(y)
    return sub_vec(kb.bracket(ax, ay), m.alpha.apply(m.source.g.bracket(x, y)))


def is_homomorphism(m: SkeletonMorphism) -> bool:
    g = m.source.g
    for i in range(g.dim):
        for j in range(i + 1, g.dim):
            ei = [Q0] * g.dim
            ei[i] = 1
            ej = [Q0] * g.dim
            ej[j] = 1
            if any(x != 0 for x in r_alpha(m, ei, ej)):
                return False
    return True


@dataclass(frozen=True)
class CurvatureMap:
    """Curvature evaluated on a fixed complement of h in g.

    ``complement`` lists the g-coordinates used as coset representatives;
    values[(i, j)] is kappa on the (i, j) pair of complement basis vectors,
    as a vector in k.  ``span`` is the exact span of all values.
    """

    complement: tuple[int, ...]
    values: dict[tuple[int, int], Vec]
    span: Subspace

    def value_span(self) -> Subspace:
        return self.span


def curvature_homogeneous(
    m: SkeletonMorphism, complement: Sequence[int] | None = None
) -> CurvatureMap:
    """Curvature of the induced homogeneous geometry on all complement pairs.

    Requires an extension and a declared bracket on k.  The complement
    defaults to the canonical one; for targets whose drho is the restriction
    of ad_k the values do not depend on that choice (tested, not assumed).
    """
    _target_bracket(m)
    if not is_extension(m):
        raise InvariantError("curvature requires a valid extension")
    comp = tuple(complement) if complement is not None else tuple(m.h_complement())
    g_dim = m.source.g.dim
    values: dict[tuple[int, int], Vec] = {}
    vecs = []
    for a in range(len(comp)):
        for b in range(a + 1, len(comp)):
            x = [Q0] * g_dim
            x[comp[a]] = 1
            y = [Q0] * g_dim
            y[comp[b]] = 1
            v = r_alpha(m, x, y)
            values[(a, b)] = v
            vecs.append(v)
    return CurvatureMap(comp, values, Subspace.from_vectors(m.target.k_dim, vecs))


def torsion_component(
    m: SkeletonMorphism, complement: Sequence[int] | None = None
) -> CurvatureMap:
    """Projection of the curvature onto the invariant translation part.

    Only affine-type targets declare that part (``translation_dim``); the
    projection is taken along the embedded l.
    """
    n = m.target.translation_dim
    if n is None:
        raise InvariantError("target has no declared invariant complement")
    kappa = curvature_homogeneous(m, complement)
    proj_values = {key: v[:n] + (Q0,) * (m.target.k_dim - n) for key, v in kappa.values.items()}
    span = Subspace.from_vectors(m.target.k_dim, list(proj_values.values()))
    return CurvatureMap(kappa.complement, proj_values, span)


def compose(outer: SkeletonMorphism, inner: SkeletonMorphism) -> SkeletonMorphism:
    """Composition (alpha2 . alpha1, dj2 . dj1) of composable morphisms.

    The source of ``outer`` must be the Klein model of ``inner``'s target:
    same ambient algebra and h equal to the embedded l.
    """
    t = inner.target
    if t.k_algebra is None or outer.source.g != t.k_algebra:
        raise InvariantError("outer source algebra does not match inner target")
    if outer.source.h != t.l_space():
        raise InvariantError("outer source subalgebra does not match inner target l")
    h2 = outer.source.h
    cols = []
    for i in range(t.l.dim):
        coords = h2.coordinates(t.l_embed.matrix.col(i))
        if coords is None:  # pragma: no cover - excluded by the h check above
            raise InvariantError("inner target l does not embed into outer source h")
        cols.append(coords)
    transfer = Mat.from_rows(cols).transpose()
    return SkeletonMorphism(
        source=inner.source,
        target=outer.target,
        alpha=LinearMap(outer.alpha.matrix * inner.alpha.matrix),
        dj=LinearMap(outer.dj.matrix * transfer * inner.dj.matrix),
    )
