"""Finite-dimensional real Lie algebras given by exact structure constants.

Basis conventions are fixed once and for all so that matrices from the
literature can be transcribed verbatim:

* gl(n): E_ij in row-major order, labelled 1-indexed ("E11", "E12", ...).
* so(n): E_ij - E_ji for i > j, ordered lexicographically in (i, j).
* co(n): the so(n) basis followed by the identity ("I").
* affine(n) = R^n + gl(n): translations "t1".."tn" first, then the gl(n)
  basis; realized in (n+1)x(n+1) matrices with the translation in the first
  column below a zero top row.
* euclidean(n) = R^n + so(n): same layout inside affine(n).
* so3_plus_R: so(3) followed by a central scaling generator "scale".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import InvariantError
from .exactmat import (
    Mat,
    Q0,
    Q1,
    SpanBuilder,
    Subspace,
    Vec,
    commutator,
    frac,
    kernel,
    solve,
    unit_vec,
    vec,
)


@dataclass(frozen=True)
class LinearMap:
    """Linear map between coordinate spaces; columns are images of basis vectors."""

    matrix: Mat

    @property
    def src_dim(self) -> int:
        return self.matrix.cols

    @property
    def dst_dim(self) -> int:
        return self.matrix.rows

    def apply(self, v: Sequence[Fraction]) -> Vec:
        return self.matrix.apply(v)

    def compose(self, other: "LinearMap") -> "LinearMap":
        return LinearMap(self.matrix * other.matrix)

    def is_injective(self) -> bool:
        return kernel(self.matrix).dim == 0


class LieAlgebra:
    """Lie algebra with bracket [e_i, e_j] = sum_k c[i][j][k] e_k.

    Antisymmetry and the Jacobi identity are verified exactly at
    construction; bad structure constants are rejected immediately.
    """

    __slots__ = ("dim", "structure", "labels")

    def __init__(self, structure, labels: Sequence[str] | None = None):
        structure = tuple(
            tuple(tuple(frac(x) for x in row) for row in plane) for plane in structure
        )
        dim = len(structure)
        for plane in structure:
            if len(plane) != dim or any(len(row) != dim for row in plane):
                raise ValueError("structure constants must form a dim^3 array")
        if labels is None:
            labels = tuple(f"e{i + 1}" for i in range(dim))
        else:
            labels = tuple(labels)
            if len(labels) != dim:
                raise ValueError("label count does not match dimension")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "structure", structure)
        object.__setattr__(self, "labels", labels)
        self._check_antisymmetry()
        self._check_jacobi()

    def __setattr__(self, *a):  # pragma: no cover - guard only
        raise AttributeError("LieAlgebra is immutable")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LieAlgebra)
            and self.structure == other.structure
            and self.labels == other.labels
        )

    def __hash__(self) -> int:
        return hash(self.structure)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"LieAlgebra(dim {self.dim}: {', '.join(self.labels)})"

    def _check_antisymmetry(self) -> None:
        c = self.structure
        for i in range(self.dim):
            for j in range(i, self.dim):
                for k in range(self.dim):
                    if c[i][j][k] != -c[j][i][k]:
                        raise InvariantError(
                            f"structure constants not antisymmetric at ({i},{j},{k})"
                        )

    def _check_jacobi(self) -> None:
        for i, j, k in itertools.combinations(range(self.dim), 3):
            acc = list(self.bracket(unit_vec(self.dim, i), self.structure[j][k]))
            for t, x in enumerate(
                self.bracket(unit_vec(self.dim, j), self.structure[k][i])
            ):
                acc[t] += x
            for t, x in enumerate(
                self.bracket(unit_vec(self.dim, k), self.structure[i][j])
            ):
                acc[t] += x
            if any(x != 0 for x in acc):
                raise InvariantError(f"Jacobi identity fails on basis triple ({i},{j},{k})")

    def bracket(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> Vec:
        if len(x) != self.dim or len(y) != self.dim:
            raise ValueError("bracket arguments must have length dim")
        out = [Q0] * self.dim
        c = self.structure
        for i, xi in enumerate(x):
            if not xi:
                continue
            ci = c[i]
            for j, yj in enumerate(y):
                if not yj:
                    continue
                f = xi * yj
                for k, cijk in enumerate(ci[j]):
                    if cijk:
                        out[k] += f * cijk
        return tuple(out)

    def ad(self, x: Sequence[Fraction]) -> Mat:
        """Matrix of ad(x): y -> [x, y]."""
        cols = [self.bracket(x, unit_vec(self.dim, j)) for j in range(self.dim)]
        data = [cols[j][i] for i in range(self.dim) for j in range(self.dim)]
        return Mat(self.dim, self.dim, data)

    def describe(self, v: Sequence[Fraction]) -> str:
        """Human-readable linear combination of basis labels."""
        terms = []
        for coeff, label in zip(vec(v), self.labels):
            if coeff == 0:
                continue
            if coeff == 1:
                terms.append(("+", label))
            elif coeff == -1:
                terms.append(("-", label))
            elif coeff > 0:
                terms.append(("+", f"{coeff}*{label}"))
            else:
                terms.append(("-", f"{-coeff}*{label}"))
        if not terms:
            return "0"
        sign, first = terms[0]
        out = (first if sign == "+" else "-" + first)
        for sign, term in terms[1:]:
            out += f" {sign} {term}"
        return out


@dataclass(frozen=True)
class MatrixRealization:
    """Faithful realization of a LieAlgebra inside gl(m).

    Verified at construction: the embedding is injective and turns brackets
    into matrix commutators on the whole basis.
    """

    algebra: LieAlgebra
    size: int
    images: tuple[Mat, ...]

    def __post_init__(self):
        if len(self.images) != self.algebra.dim:
            raise ValueError("one image matrix per basis element required")
        for im in self.images:
            if im.rows != self.size or im.cols != self.size:
                raise ValueError("image matrices must be size x size")
        flat = Subspace.from_vectors(
            self.size * self.size, [im.data for im in self.images]
        )
        if flat.dim != self.algebra.dim:
            raise InvariantError("matrix realization is not injective")
        for i in range(self.algebra.dim):
            for j in range(i + 1, self.algebra.dim):
                lhs = self.embed(
                    self.algebra.bracket(
                        unit_vec(self.algebra.dim, i), unit_vec(self.algebra.dim, j)
                    )
                )
                rhs = commutator(self.images[i], self.images[j])
                if lhs != rhs:
                    raise InvariantError(
                        f"realization does not preserve bracket on pair ({i},{j})"
                    )

    def embed(self, x: Sequence[Fraction]) -> Mat:
        acc = Mat.zeros(self.size, self.size)
        for coeff, im in zip(vec(x), self.images):
            if coeff:
                acc = acc + coeff * im
        return acc


def structure_from_matrices(mats: Sequence[Mat], labels: Sequence[str] | None = None):
    """LieAlgebra + realization from a linearly independent matrix basis.

    The span must be closed under commutators; coordinates of each
    commutator are recovered by one exact solve.
    """
    if not mats:
        return LieAlgebra((), labels or ()), MatrixRealization(LieAlgebra((), ()), 0, ())
    m = mats[0].rows
    coord = Mat.from_rows([list(mat.data) for mat in mats]).transpose()
    dim = len(mats)
    structure = [[[Q0] * dim for _ in range(dim)] for _ in range(dim)]
    for i in range(dim):
        for j in range(i + 1, dim):
            comm = commutator(mats[i], mats[j])
            coeffs, _ = solve(coord, comm.data)
            if coeffs is None:
                raise InvariantError("matrix span is not closed under commutators")
            structure[i][j] = list(coeffs)
            structure[j][i] = [-x for x in coeffs]
    alg = LieAlgebra(structure, labels)
    return alg, MatrixRealization(alg, m, tuple(mats))


def _unit_mat(n: int, i: int, j: int) -> Mat:
    data = [Q0] * (n * n)
    data[i * n + j] = Q1
    return Mat(n, n, data)


def gl_basis_mats(n: int) -> list[Mat]:
    return [_unit_mat(n, i, j) for i in range(n) for j in range(n)]


def gl_labels(n: int) -> list[str]:
    return [f"E{i + 1}{j + 1}" for i in range(n) for j in range(n)]


def so_basis_mats(n: int) -> list[Mat]:
    return [
        _unit_mat(n, i, j) - _unit_mat(n, j, i)
        for i in range(n)
        for j in range(i)
    ]


def so_labels(n: int) -> list[str]:
    return [f"E{i + 1}{j + 1}-E{j + 1}{i + 1}" for i in range(n) for j in range(i)]


def _affine_mat(n: int, translation: Sequence[Fraction], linear: Mat) -> Mat:
    """(n+1)x(n+1) block matrix with zero top row, translation in column 0."""
    data = [Q0] * ((n + 1) * (n + 1))
    for i in range(n):
        data[(i + 1) * (n + 1)] = translation[i]
        for j in range(n):
            data[(i + 1) * (n + 1) + (j + 1)] = linear.at(i, j)
    return Mat(n + 1, n + 1, data)


def _affine_basis(n: int, linear_part: Sequence[Mat]) -> list[Mat]:
    mats = [_affine_mat(n, unit_vec(n, i), Mat.zeros(n, n)) for i in range(n)]
    mats.extend(_affine_mat(n, (Q0,) * n, lm) for lm in linear_part)
    return mats


def translation_labels(n: int) -> list[str]:
    return [f"t{i + 1}" for i in range(n)]


@lru_cache(maxsize=None)
def builtin(name: str, n: int | None = None):
    """Named Lie algebra with a faithful matrix realization.

    Supported names: gl, so, co, affine, euclidean, so3_plus_R.  The
    euclidean algebra R^n + so(n) is included because it is the Klein
    algebra of the flat Riemannian models.
    """
    if name == "so3_plus_R":
        so3, real3 = builtin("so", 3)
        mats = []
        for im in real3.images:
            data = [Q0] * 16
            for i in range(3):
                for j in range(3):
                    data[i * 4 + j] = im.at(i, j)
            mats.append(Mat(4, 4, data))
        scale = [Q0] * 16
        scale[15] = Q1
        mats.append(Mat(4, 4, scale))
        return structure_from_matrices(mats, list(so_labels(3)) + ["scale"])
    if n is None or n < 1:
        raise ValueError(f"builtin('{name}') requires n >= 1")
    if name == "gl":
        return structure_from_matrices(gl_basis_mats(n), gl_labels(n))
    if name == "so":
        return structure_from_matrices(so_basis_mats(n), so_labels(n))
    if name == "co":
        mats = so_basis_mats(n) + [Mat.identity(n)]
        return structure_from_matrices(mats, so_labels(n) + ["I"])
    if name == "affine":
        mats = _affine_basis(n, gl_basis_mats(n))
        return structure_from_matrices(mats, translation_labels(n) + gl_labels(n))
    if name == "euclidean":
        mats = _affine_basis(n, so_basis_mats(n))
        return structure_from_matrices(mats, translation_labels(n) + so_labels(n))
    raise ValueError(f"unknown builtin Lie algebra '{name}'")


def subalgebra_closure(g: LieAlgebra, generators: Subspace) -> Subspace:
    """Smallest bracket-closed subspace of g containing the generators."""
    if generators.ambient != g.dim:
        raise ValueError("generators must live in the algebra's coordinate space")
    builder = SpanBuilder(g.dim)
    worklist = []
    for v in generators.basis_vectors():
        if builder.add(v):
            worklist.append(v)
    while worklist:
        new = worklist.pop()
        for other in [row for row in builder.rows]:
            b = g.bracket(new, tuple(other))
            if builder.add(b):
                worklist.append(b)
    return builder.to_subspace()


def _stability_kernel(g: LieAlgebra, sub: Subspace, quotient: Mat | None) -> Subspace:
    """{x : [x, s] in target for all basis s}, target = sub (or 0 if quotient None)."""
    rows: list[Mat] = []
    for s in sub.basis_vectors():
        move = -g.ad(s)  # x -> [x, s]
        rows.append(quotient * move if quotient is not None else move)
    if not rows:
        return Subspace.full(g.dim)
    return kernel(Mat.vstack(*rows))


def normalizer_in(amb: LieAlgebra, sub: Subspace) -> Subspace:
    """Normalizer {x : [x, sub] subset of sub} of a subspace, exactly."""
    return _stability_kernel(amb, sub, sub.quotient_map())


def centralizer_in(amb: LieAlgebra, sub: Subspace) -> Subspace:
    """Centralizer {x : [x, sub] = 0} of a subspace, exactly."""
    return _stability_kernel(amb, sub, None)


def is_derivation(g: LieAlgebra, d: Mat) -> bool:
    """Exact check of d[x,y] = [dx,y] + [x,dy] on all basis pairs."""
    if d.rows != g.dim or d.cols != g.dim:
        raise ValueError("derivation candidate has wrong shape")
    for i in range(g.dim):
        for j in range(i + 1, g.dim):
            ei, ej = unit_vec(g.dim, i), unit_vec(g.dim, j)
            lhs = d.apply(g.structure[i][j])
            rhs = [
                a + b
                for a, b in zip(g.bracket(d.apply(ei), ej), g.bracket(ei, d.apply(ej)))
            ]
            if list(lhs) != rhs:
                return False
    return True


def is_lie_automorphism(g: LieAlgebra, a: Mat) -> bool:
    """Exact check that a is invertible and a[x,y] = [ax, ay] on all basis pairs."""
    if a.rows != g.dim or a.cols != g.dim:
        raise ValueError("automorphism candidate has wrong shape")
    if kernel(a).dim != 0:
        return False
    for i in range(g.dim):
        for j in range(i + 1, g.dim):
            ei, ej = unit_vec(g.dim, i), unit_vec(g.dim, j)
            lhs = a.apply(g.structure[i][j])
            rhs = g.bracket(a.apply(ei), a.apply(ej))
            if lhs != rhs:
                return False
    return True
