"""Skeletons (k, L, rho) at the Lie-algebra level and their intrinsic invariants.

A skeleton is stored through its infinitesimal data: the ambient space k of
dimension ``k_dim``, the Lie algebra ``l`` of L embedded by ``l_embed``, and
one operator ``drho[i]`` on k per basis element of l.  Finitely many
non-identity components of L may be declared through ``component_reps``:
pairs (operator of rho(l0) on k, automorphism Ad(l0) of l).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InvariantError
from .exactmat import (
    Mat,
    Q0,
    Q1,
    Subspace,
    commutator,
    inverse,
    kernel,
    solve,
    unit_vec,
    vec,
)
from .liealg import (
    LieAlgebra,
    LinearMap,
    builtin,
    gl_basis_mats,
    is_lie_automorphism,
    so_basis_mats,
    structure_from_matrices,
    translation_labels,
)


@dataclass(frozen=True)
class Skeleton:
    """Infinitesimal skeleton data with optional ambient bracket and metadata.

    ``k_algebra`` declares a Lie bracket on the ambient space when one exists
    (Klein-type and affine-type skeletons); it is required by curvature
    computations only.  ``translation_dim``/``l_matrices`` record the affine
    structure (k = R^n + l with l realized inside gl(n)) used by the
    Riemannian pipeline.
    """

    k_dim: int
    l: LieAlgebra
    l_embed: LinearMap
    drho: tuple[Mat, ...]
    component_reps: tuple[tuple[Mat, Mat], ...] = ()
    k_algebra: LieAlgebra | None = None
    k_labels: tuple[str, ...] | None = None
    translation_dim: int | None = None
    l_matrices: tuple[Mat, ...] | None = None

    def __post_init__(self):
        if self.l_embed.dst_dim != self.k_dim or self.l_embed.src_dim != self.l.dim:
            raise ValueError("l_embed must map l coordinates into k coordinates")
        if len(self.drho) != self.l.dim:
            raise ValueError("one drho operator per l basis element required")
        for m in self.drho:
            if m.rows != self.k_dim or m.cols != self.k_dim:
                raise ValueError("drho operators must be k_dim x k_dim")
        for op, auto in self.component_reps:
            if op.rows != self.k_dim or op.cols != self.k_dim:
                raise ValueError("component representative operator has wrong shape")
            if auto.rows != self.l.dim or auto.cols != self.l.dim:
                raise ValueError("component representative automorphism has wrong shape")
        if self.k_algebra is not None and self.k_algebra.dim != self.k_dim:
            raise ValueError("k_algebra dimension does not match k_dim")
        if self.k_labels is not None and len(self.k_labels) != self.k_dim:
            raise ValueError("k_labels length does not match k_dim")
        if self.l_matrices is not None and len(self.l_matrices) != self.l.dim:
            raise ValueError("one gl-realization matrix per l basis element required")

    def drho_of(self, x: Sequence[Fraction]) -> Mat:
        """Operator drho(x) for an l-coordinate vector x."""
        if len(x) != self.l.dim:
            raise ValueError("l-coordinate vector has wrong length")
        acc = Mat.zeros(self.k_dim, self.k_dim)
        for coeff, op in zip(vec(x), self.drho):
            if coeff:
                acc = acc + coeff * op
        return acc

    def l_space(self) -> Subspace:
        """The embedded copy of l inside k."""
        cols = [self.l_embed.matrix.col(j) for j in range(self.l.dim)]
        return Subspace.from_vectors(self.k_dim, cols)

    def label_of(self, v: Sequence[Fraction]) -> str:
        labels = self.k_labels or tuple(f"k{i + 1}" for i in range(self.k_dim))
        parts = []
        for coeff, label in zip(vec(v), labels):
            if coeff == 0:
                continue
            if coeff == 1:
                parts.append(("+", label))
            elif coeff == -1:
                parts.append(("-", label))
            elif coeff > 0:
                parts.append(("+", f"{coeff}*{label}"))
            else:
                parts.append(("-", f"{-coeff}*{label}"))
        if not parts:
            return "0"
        sign, first = parts[0]
        out = first if sign == "+" else "-" + first
        for sign, term in parts[1:]:
            out += f" {sign} {term}"
        return out


def validate(s: Skeleton) -> list[str]:
    """Exact check of all skeleton invariants; returns named violations."""
    bad: list[str] = []
    if not s.l_embed.is_injective():
        bad.append("l_embed is not injective")
    emb = s.l_embed.matrix
    for i in range(s.l.dim):
        for j in range(i + 1, s.l.dim):
            bracket_ij = s.l.structure[i][j]
            if s.drho_of(bracket_ij) != commutator(s.drho[i], s.drho[j]):
                bad.append(
                    f"drho is not a Lie algebra map on basis pair ({i},{j}): "
                    f"drho([{s.l.labels[i]},{s.l.labels[j]}]) != [drho({s.l.labels[i]}),drho({s.l.labels[j]})]"
                )
    for i in range(s.l.dim):
        for j in range(s.l.dim):
            lhs = s.drho[i].apply(emb.col(j))
            rhs = emb.apply(s.l.structure[i][j])
            if lhs != rhs:
                bad.append(
                    f"drho does not restrict to ad on basis pair ({i},{j}): "
                    f"drho({s.l.labels[i]})({s.l.labels[j]}) != [{s.l.labels[i]},{s.l.labels[j]}]"
                )
    l_space = s.l_space()
    for idx, (op, auto) in enumerate(s.component_reps):
        try:
            op_inv = inverse(op)
        except ValueError:
            bad.append(f"component representative {idx}: operator not invertible")
            continue
        if not is_lie_automorphism(s.l, auto):
            bad.append(f"component representative {idx}: paired map is not a Lie automorphism")
            continue
        for j in range(s.l.dim):
            if op.apply(emb.col(j)) != emb.apply(auto.col(j)):
                bad.append(
                    f"component representative {idx}: operator does not restrict "
                    f"to the paired automorphism on {s.l.labels[j]}"
                )
                break
        else:
            if not all(l_space.contains(op.apply(b)) for b in l_space.basis_vectors()):
                bad.append(f"component representative {idx}: operator does not normalize l")
            for j in range(s.l.dim):
                if op * s.drho[j] * op_inv != s.drho_of(auto.col(j)):
                    bad.append(
                        f"component representative {idx}: conjugation does not "
                        f"match drho(Ad) on {s.l.labels[j]}"
                    )
                    break
    if s.l_matrices is not None:
        for i in range(s.l.dim):
            for j in range(i + 1, s.l.dim):
                expected = Mat.zeros(s.l_matrices[0].rows, s.l_matrices[0].cols)
                for coeff, m in zip(s.l.structure[i][j], s.l_matrices):
                    if coeff:
                        expected = expected + coeff * m
                if commutator(s.l_matrices[i], s.l_matrices[j]) != expected:
                    bad.append(f"l_matrices do not realize the bracket on pair ({i},{j})")
    return bad


def _refine(s: Skeleton, n: Subspace, action_cols: list[Mat]) -> Subspace:
    """One step of X in n with [l, X] in n and drho(X)(k) in embedded n."""
    if n.dim == 0:
        return n
    lift = n.basis.transpose()  # l.dim x n.dim, columns = basis of n
    n_emb = Subspace.from_vectors(
        s.k_dim, [s.l_embed.apply(b) for b in n.basis_vectors()]
    )
    q_l = n.quotient_map()
    q_k = n_emb.quotient_map()
    blocks = []
    for y in range(s.l.dim):
        ad_y = s.l.ad(unit_vec(s.l.dim, y))
        blocks.append(q_l * (ad_y * lift))
    for d in action_cols:
        blocks.append(q_k * (d * lift))
    coeffs = kernel(Mat.vstack(*blocks)) if blocks else Subspace.full(n.dim)
    vectors = [lift.apply(c) for c in coeffs.basis_vectors()]
    return Subspace.from_vectors(s.l.dim, vectors)


def _drho_action_columns(s: Skeleton) -> list[Mat]:
    """For each k-basis vector e_j the matrix X -> drho(X)(e_j), X in l-coords."""
    cols = []
    for j in range(s.k_dim):
        data = [Q0] * (s.k_dim * s.l.dim)
        for i, op in enumerate(s.drho):
            col = op.col(j)
            for r in range(s.k_dim):
                data[r * s.l.dim + i] = col[r]
        cols.append(Mat(s.k_dim, s.l.dim, data))
    return cols


def kernel_ideal(s: Skeleton) -> Subspace:
    """Greatest ideal n of l with drho(n)(k) inside the embedded n.

    Computed as the greatest fixpoint of the refinement map starting from
    all of l; each step solves one exact linear system, and the dimension
    strictly decreases until the fixpoint is reached.
    """
    action = _drho_action_columns(s)
    n = Subspace.full(s.l.dim)
    for _ in range(s.l.dim + 1):
        refined = _refine(s, n, action)
        if refined == n:
            return n
        n = refined
    raise InvariantError("kernel ideal fixpoint failed to terminate")  # pragma: no cover


def is_effective(s: Skeleton) -> bool:
    return kernel_ideal(s).dim == 0


@dataclass(frozen=True)
class SkeletonQuotient:
    """Effective quotient together with the projection/section bookkeeping."""

    skeleton: Skeleton
    kernel: Subspace
    k_proj: LinearMap
    k_section: LinearMap
    l_proj: LinearMap
    l_section: LinearMap


def effective_quotient_with_maps(s: Skeleton) -> SkeletonQuotient:
    """Quotient by the kernel ideal; the result is always effective.

    Quotient coordinates are the non-pivot coordinates of the canonical
    bases of the kernel (in l) and its embedding (in k), which makes the
    construction deterministic.
    """
    n = kernel_ideal(s)
    if n.dim == 0:
        ident_k = LinearMap(Mat.identity(s.k_dim))
        ident_l = LinearMap(Mat.identity(s.l.dim))
        return SkeletonQuotient(s, n, ident_k, ident_k, ident_l, ident_l)
    n_emb = Subspace.from_vectors(s.k_dim, [s.l_embed.apply(b) for b in n.basis_vectors()])
    qk, sk = n_emb.quotient_map(), n_emb.section_map()
    ql, sl = n.quotient_map(), n.section_map()
    new_l_dim = s.l.dim - n.dim
    structure = []
    for i in range(new_l_dim):
        plane = []
        xi = sl.col(i)
        for j in range(new_l_dim):
            plane.append(list(ql.apply(s.l.bracket(xi, sl.col(j)))))
        structure.append(plane)
    surviving_l = n.complement_coords()
    new_l = LieAlgebra(structure, [s.l.labels[c] for c in surviving_l])
    new_embed = LinearMap(qk * s.l_embed.matrix * sl)
    new_drho = tuple(qk * s.drho_of(sl.col(i)) * sk for i in range(new_l_dim))
    reps = []
    for idx, (op, auto) in enumerate(s.component_reps):
        if not all(n_emb.contains(op.apply(b)) for b in n_emb.basis_vectors()):
            raise InvariantError(
                f"component representative {idx} does not preserve the kernel"
            )
        reps.append((qk * op * sk, ql * auto * sl))
    labels = None
    if s.k_labels is not None:
        labels = tuple(s.k_labels[c] for c in n_emb.complement_coords())
    out = Skeleton(
        k_dim=s.k_dim - n.dim,
        l=new_l,
        l_embed=new_embed,
        drho=new_drho,
        component_reps=tuple(reps),
        k_labels=labels,
    )
    problems = validate(out)
    if problems:
        raise InvariantError("effective quotient is not a valid skeleton: " + "; ".join(problems))
    if kernel_ideal(out).dim != 0:
        raise InvariantError("effective quotient failed to be effective")
    return SkeletonQuotient(out, n, LinearMap(qk), LinearMap(sk), LinearMap(ql), LinearMap(sl))


def effective_quotient(s: Skeleton) -> Skeleton:
    return effective_quotient_with_maps(s).skeleton


def iext_algebra(s: Skeleton) -> Subspace:
    """Lie algebra of infinitesimal self-extensions inside gl(k).

    Solves, by one exact linear system, for the operators alpha on k with
    [alpha, drho(l)] inside drho(l) and drho(alpha . X) = [alpha, drho(X)]
    for all X in l; the result is returned with its canonical basis in
    vectorized (row-major) gl(k) coordinates.
    """
    if not is_effective(s):
        raise InvariantError("iext requires an effective skeleton")
    k, ld = s.k_dim, s.l.dim
    n_alpha = k * k
    n_aux = ld * ld
    emb = s.l_embed.matrix
    rows_per_block = ld * (k + k * k)
    if ld == 0:
        return Subspace.full(n_alpha)
    columns: list[list[Fraction]] = []
    for r in range(k):
        for c in range(k):
            col = [Q0] * rows_per_block
            base = 0
            for i in range(ld):
                col[base + r] = emb.at(c, i)
                base += k
            for i in range(ld):
                d = s.drho[i]
                for t in range(k):
                    col[base + r * k + t] += d.at(c, t)
                    col[base + t * k + c] -= d.at(t, r)
                base += k * k
            columns.append(col)
    for i0 in range(ld):
        for j0 in range(ld):
            col = [Q0] * rows_per_block
            base = i0 * k
            for t in range(k):
                col[base + t] = -emb.at(t, j0)
            base = ld * k + i0 * k * k
            d = s.drho[j0]
            for t in range(k * k):
                col[base + t] = -d.data[t]
            columns.append(col)
    big = Mat(rows_per_block, n_alpha + n_aux, [Q0] * (rows_per_block * (n_alpha + n_aux)))
    data = list(big.data)
    for j, col in enumerate(columns):
        for r, x in enumerate(col):
            if x:
                data[r * (n_alpha + n_aux) + j] = x
    system = Mat(rows_per_block, n_alpha + n_aux, data)
    sols = kernel(system)
    return Subspace.from_vectors(n_alpha, [v[:n_alpha] for v in sols.basis_vectors()])


@dataclass(frozen=True)
class ExtGroupElement:
    """Candidate bijective self-extension: operator on k plus induced map on l."""

    alpha: Mat
    induced_l_auto: Mat


def _invariant_filtration(s: Skeleton) -> list[Subspace]:
    """Ascending chain from the embedded l, saturated under all drho images."""
    chain = []
    current = s.l_space()
    while True:
        chain.append(current)
        grown = current
        for b in current.basis_vectors():
            for op in s.drho:
                grown = grown + Subspace.from_vectors(s.k_dim, [op.apply(b)])
        if grown == current:
            return chain
        current = grown


def _component_log_matches(s: Skeleton, e_mat: Mat) -> bool:
    """Heuristic identity-component test: principal log lands in drho(l).

    The candidate must fix the canonical filtration exactly; its principal
    logarithm is computed in floating point (tolerance 1e-9) and its
    coefficients are rationalized by continued fractions (denominators up
    to 10**6) before the reconstruction is compared.
    """
    for space in _invariant_filtration(s):
        for b in space.basis_vectors():
            if not space.contains(e_mat.apply(b)):
                return False
    import numpy as np
    from scipy.linalg import logm

    ef = np.array([[float(e_mat.at(i, j)) for j in range(e_mat.cols)] for i in range(e_mat.rows)])
    log_e = logm(ef)
    if np.max(np.abs(np.imag(log_e))) > 1e-9:
        return False
    log_e = np.real(log_e)
    if s.l.dim == 0:
        return bool(np.max(np.abs(log_e)) <= 1e-9)
    basis = np.array([[float(x) for x in op.data] for op in s.drho]).T
    target = log_e.reshape(-1)
    coeffs, *_ = np.linalg.lstsq(basis, target, rcond=None)
    if np.max(np.abs(basis @ coeffs - target)) > 1e-9:
        return False
    rational = [Fraction(float(c)).limit_denominator(10**6) for c in coeffs]
    recon = basis @ np.array([float(c) for c in rational])
    return bool(np.max(np.abs(recon - target)) <= 1e-9)


def verify_ext_candidate(s: Skeleton, e: ExtGroupElement) -> list[str]:
    """Exact verification of the infinitesimal Ext-element conditions.

    When component representatives are declared, conjugation by alpha must
    carry each representative to a listed one (or the identity) up to the
    heuristic identity-component check; callers should surface the
    "component check: heuristic" caveat alongside these diagnostics.
    """
    bad: list[str] = []
    try:
        alpha_inv = inverse(e.alpha)
    except ValueError:
        return ["alpha is not invertible"]
    emb = s.l_embed.matrix
    if not is_lie_automorphism(s.l, e.induced_l_auto):
        bad.append("induced map on l is not a Lie algebra automorphism")
    for j in range(s.l.dim):
        if e.alpha.apply(emb.col(j)) != emb.apply(e.induced_l_auto.col(j)):
            bad.append(
                f"alpha does not restrict to the induced automorphism on {s.l.labels[j]}"
            )
            break
    for j in range(s.l.dim):
        lhs = s.drho_of(e.induced_l_auto.col(j))
        rhs = e.alpha * s.drho[j] * alpha_inv
        if lhs != rhs:
            bad.append(
                f"extension condition fails on {s.l.labels[j]}: "
                "drho(induced X) != alpha drho(X) alpha^-1"
            )
            break
    if not bad and s.component_reps:
        candidates = [Mat.identity(s.k_dim)] + [op for op, _ in s.component_reps]
        for idx, (op, _) in enumerate(s.component_reps):
            conj = e.alpha * op * alpha_inv
            ok = False
            for rep in candidates:
                try:
                    rep_inv = inverse(rep)
                except ValueError:
                    continue
                if _component_log_matches(s, conj * rep_inv):
                    ok = True
                    break
            if not ok:
                bad.append(
                    f"component representative {idx}: conjugate not matched to any "
                    "listed component (heuristic check)"
                )
    return bad


def affine_skeleton(
    n: int,
    l_sub: Sequence[Mat] | None = None,
    component_reps: tuple[tuple[Mat, Mat], ...] = (),
) -> Skeleton:
    """Skeleton (R^n + l, L, Ad) for a commutator-closed l inside gl(n).

    ``l_sub`` is a basis of the gl(n) subalgebra (default: all of gl(n));
    drho is the restriction of the affine adjoint action, the translations
    come first, and the ambient bracket of R^n + l is attached so that
    curvature and torsion are available.
    """
    gl_alg, _ = builtin("gl", n)
    mats = list(l_sub) if l_sub is not None else gl_basis_mats(n)
    labels = [gl_alg.describe(m.data) for m in mats]
    l_alg, _ = structure_from_matrices(mats, labels)
    d = l_alg.dim
    k_dim = n + d
    embed_data = [Q0] * (k_dim * d)
    for i in range(d):
        embed_data[(n + i) * d + i] = Q1
    l_embed = LinearMap(Mat(k_dim, d, embed_data))
    drho = []
    for i in range(d):
        ad_i = l_alg.ad(unit_vec(d, i))
        data = [Q0] * (k_dim * k_dim)
        for r in range(n):
            for c in range(n):
                data[r * k_dim + c] = mats[i].at(r, c)
        for r in range(d):
            for c in range(d):
                data[(n + r) * k_dim + (n + c)] = ad_i.at(r, c)
        drho.append(Mat(k_dim, k_dim, data))
    structure = [[[Q0] * k_dim for _ in range(k_dim)] for _ in range(k_dim)]
    for i in range(d):
        for a in range(n):
            col = mats[i].col(a)
            for r in range(n):
                structure[n + i][a][r] = col[r]
                structure[a][n + i][r] = -col[r]
        for j in range(d):
            for t in range(d):
                structure[n + i][n + j][n + t] = l_alg.structure[i][j][t]
    k_labels = translation_labels(n) + labels
    k_algebra = LieAlgebra(structure, k_labels)
    return Skeleton(
        k_dim=k_dim,
        l=l_alg,
        l_embed=l_embed,
        drho=tuple(drho),
        component_reps=component_reps,
        k_algebra=k_algebra,
        k_labels=tuple(k_labels),
        translation_dim=n,
        l_matrices=tuple(mats),
    )


def orthogonal_component_rep(n: int) -> tuple[Mat, Mat]:
    """Reflection component of O(n) acting on R^n + so(n): diag(-1, 1, ..., 1)."""
    sigma = Mat.identity(n)
    data = list(sigma.data)
    data[0] = -Q1
    sigma = Mat(n, n, data)
    so_mats = so_basis_mats(n)
    d = len(so_mats)
    coord = Mat.from_rows([list(m.data) for m in so_mats]).transpose()
    auto_cols = []
    for m in so_mats:
        img = sigma * m * sigma
        sol, _ = solve(coord, img.data)
        if sol is None:
            raise InvariantError("reflection does not preserve so(n)")
        auto_cols.append(sol)
    auto = Mat.from_rows(auto_cols).transpose()
    k_dim = n + d
    op_data = [Q0] * (k_dim * k_dim)
    for i in range(n):
        for j in range(n):
            op_data[i * k_dim + j] = sigma.at(i, j)
    for i in range(d):
        for j in range(d):
            op_data[(n + i) * k_dim + (n + j)] = auto.at(i, j)
    return Mat(k_dim, k_dim, op_data), auto


def euclidean_skeleton(n: int, with_reflection: bool = False) -> Skeleton:
    """The skeleton (R^n + so(n), O(n), Ad) of the flat Riemannian models."""
    reps = (orthogonal_component_rep(n),) if with_reflection else ()
    return affine_skeleton(n, so_basis_mats(n), component_reps=reps)
