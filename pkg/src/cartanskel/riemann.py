"""Classification of Riemannian metrics sharing a Levi-Civita connection.

Pipeline for a homogeneous torsion-free geometry given by an extension into
an affine-type skeleton (R^n + l, L, Ad):

1. holonomy algebra of the induced connection (exact),
2. metrizability test hol inside so(n) (exact, algebra level),
3. the space Z of symmetric-exponential metrics commuting with the
   holonomy (exact solve, then floats),
4. infinitesimal automorphisms of the effective extended skeleton built
   from the holonomy base and s = normalizer of hol (exact),
5. the tau-action of those automorphisms on Z via polar decomposition and
   a central-difference rank computation of the orbit (floats).

Exact-to-float boundary: steps 1-4 and the Z basis are rational; only
exp/log/polar and the orbit rank use doubles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .autos import AMap, ExtendedSkeleton, build_a_map, build_rho_s, infinitesimal_autos
from .errors import InvariantError, NumericError
from .exactmat import Mat, Q0, SpanBuilder, Subspace, kernel, solve, vec
from .extension import SkeletonMorphism, curvature_homogeneous, is_extension, validate_morphism
from .liealg import LinearMap, builtin, normalizer_in
from .skeleton import Skeleton, SkeletonQuotient, affine_skeleton, effective_quotient_with_maps

SYM_TOL = 1e-12
EIGEN_OFF_TOL = 1e-13
SPD_EIG_TOL = 1e-12
DET_TOL = 1e-12
ORBIT_RANK_REL_TOL = 1e-6
Z_COORD_TOL = 1e-8


class SymMatF:
    """Symmetric double-precision matrix; asymmetry beyond 1e-12 is rejected."""

    __slots__ = ("n", "mat")

    def __init__(self, mat, tol: float = SYM_TOL):
        mat = np.asarray(mat, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("SymMatF requires a square matrix")
        asym = float(np.max(np.abs(mat - mat.T))) if mat.size else 0.0
        if asym > tol:
            raise NumericError(f"matrix is not symmetric (asymmetry {asym:.3e})")
        self.n = mat.shape[0]
        self.mat = (mat + mat.T) / 2.0

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"SymMatF({self.mat!r})"


def jacobi_eigen(m: SymMatF, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi rotations: eigenvalues (ascending) and orthogonal V.

    Sweeps run until every off-diagonal entry is below 1e-13 relative to the
    Frobenius norm.  Columns of V are eigenvectors with a deterministic sign
    (largest component positive).
    """
    a = m.mat.copy()
    n = m.n
    v = np.eye(n)
    if n == 0:
        return np.zeros(0), v
    scale = max(float(np.linalg.norm(a)), 1.0)
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off = max(off, abs(a[p, q]))
        if off <= EIGEN_OFF_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    else:  # pragma: no cover - convergence is quadratic
        raise NumericError("Jacobi eigenvalue iteration did not converge")
    eigvals = np.diag(a).copy()
    order = np.argsort(eigvals, kind="stable")
    eigvals = eigvals[order]
    v = v[:, order]
    for j in range(n):
        i = int(np.argmax(np.abs(v[:, j])))
        if v[i, j] < 0:
            v[:, j] = -v[:, j]
    return eigvals, v


def _sym_apply(m: SymMatF, f, require_positive: bool, what: str) -> SymMatF:
    eigvals, v = jacobi_eigen(m)
    if require_positive and np.any(eigvals <= SPD_EIG_TOL):
        raise NumericError(f"{what} requires a positive-definite matrix")
    return SymMatF(v @ np.diag([f(x) for x in eigvals]) @ v.T, tol=1e-9)


def spd_exp(m: SymMatF) -> SymMatF:
    return _sym_apply(m, math.exp, False, "spd_exp")


def spd_log(m: SymMatF) -> SymMatF:
    return _sym_apply(m, math.log, True, "spd_log")


def spd_sqrt(m: SymMatF) -> SymMatF:
    return _sym_apply(m, math.sqrt, True, "spd_sqrt")


def polar_decompose(m) -> tuple[SymMatF, np.ndarray]:
    """m = P Q with P symmetric positive definite and Q orthogonal.

    P is spd_sqrt(m m^T); Q is cleaned up by a few Newton steps so the
    reconstruction holds to round-off even for moderately ill-conditioned
    input, after which P is recomputed as m Q^T.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("polar decomposition requires a square matrix")
    det = float(np.linalg.det(m))
    if abs(det) <= DET_TOL:
        raise NumericError("matrix is numerically singular")
    p0 = spd_sqrt(SymMatF(m @ m.T, tol=1e-6))
    q = np.linalg.solve(p0.mat, m)
    for _ in range(4):
        err = float(np.max(np.abs(q.T @ q - np.eye(m.shape[0]))))
        if err < 1e-14:
            break
        q = 0.5 * (q + np.linalg.inv(q).T)
    p = SymMatF(m @ q.T, tol=1e-6)
    return p, q


def _gl_part(sk: Skeleton, v) -> Mat:
    """gl(n) matrix carried by the l-coordinates of a k-vector."""
    n = sk.translation_dim
    mats = sk.l_matrices
    acc = Mat.zeros(n, n)
    for coeff, m in zip(vec(v)[n:], mats):
        if coeff:
            acc = acc + coeff * m
    return acc


def _require_affine(sk: Skeleton) -> int:
    if sk.translation_dim is None or sk.l_matrices is None:
        raise InvariantError("target is not an affine-type skeleton")
    return sk.translation_dim


def holonomy_of_extension(m: SkeletonMorphism) -> Subspace:
    """Holonomy algebra of the induced invariant connection, inside gl(n).

    Span of the gl(n)-parts of the curvature, saturated under bracketing
    with the gl(n)-parts of alpha(g); exact, canonical basis.
    """
    n = _require_affine(m.target)
    kappa = curvature_homogeneous(m)
    builder = SpanBuilder(n * n)
    worklist = []
    for value in kappa.values.values():
        part = _gl_part(m.target, value)
        if builder.add(part.data):
            worklist.append(part)
    lam = [
        _gl_part(m.target, m.alpha.matrix.col(j)) for j in range(m.source.g.dim)
    ]
    while worklist:
        current = worklist.pop()
        for lz in lam:
            b = lz * current - current * lz
            if builder.add(b.data):
                worklist.append(b)
    return builder.to_subspace()


def metrizability_check(hol: Subspace) -> bool:
    """hol inside so(n): every basis matrix is antisymmetric (exact).

    This is the algebra-level criterion; for disconnected holonomy groups
    the component representatives must be checked separately (reported as a
    caveat by the classification driver).
    """
    n = math.isqrt(hol.ambient)
    if n * n != hol.ambient:
        raise ValueError("holonomy subspace must live in vectorized gl(n)")
    for b in hol.basis_vectors():
        mat = Mat(n, n, b)
        if mat + mat.transpose() != Mat.zeros(n, n):
            return False
    return True


@dataclass(frozen=True)
class MetricFamily:
    """Basis of {Y symmetric : [Y, hol] = 0}, exact and as floats."""

    n: int
    hol: Subspace
    z_exact: tuple[Mat, ...]
    z_basis: tuple[np.ndarray, ...] = field(compare=False)
    component_constrained: bool = False

    @property
    def dim(self) -> int:
        return len(self.z_exact)


def metric_space_z(hol: Subspace, component_reps=()) -> MetricFamily:
    """Solve [Y, h] = 0 over symmetric Y for every h in hol, exactly.

    ``component_reps`` are additional n x n rational matrices (one per
    non-identity holonomy component); Y must commute with each of them.
    """
    n = math.isqrt(hol.ambient)
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    sym_basis = []
    for (i, j) in pairs:
        data = [Q0] * (n * n)
        data[i * n + j] = data[i * n + j] + 1
        data[j * n + i] = data[j * n + i] + (1 if i != j else 0)
        sym_basis.append(Mat(n, n, data))
    constraints = [Mat(n, n, b) for b in hol.basis_vectors()]
    constraints.extend(component_reps)
    rows = []
    for c in constraints:
        for r in range(n):
            for s_ in range(n):
                rows.append(
                    [(y * c - c * y).at(r, s_) for y in sym_basis]
                )
    if rows:
        coeffs = kernel(Mat.from_rows(rows))
    else:
        coeffs = Subspace.full(len(pairs))
    z_exact = []
    for cvec in coeffs.basis_vectors():
        acc = Mat.zeros(n, n)
        for coeff, y in zip(cvec, sym_basis):
            if coeff:
                acc = acc + coeff * y
        z_exact.append(acc)
    z_float = tuple(
        np.array([[float(m_.at(i, j)) for j in range(n)] for i in range(n)])
        for m_ in z_exact
    )
    return MetricFamily(
        n=n,
        hol=hol,
        z_exact=tuple(z_exact),
        z_basis=z_float,
        component_constrained=bool(component_reps),
    )


def tau_apply(p, y: SymMatF) -> SymMatF:
    """Right action Y -> Y_p defined by p^-1 exp(Y) = exp(Y_p) k^-1."""
    p = np.asarray(p, dtype=float)
    if abs(float(np.linalg.det(p))) <= DET_TOL:
        raise NumericError("tau requires an invertible matrix")
    m = np.linalg.inv(p) @ spd_exp(y).mat
    pos, _ = polar_decompose(m)
    return spd_log(pos)


@dataclass(frozen=True)
class RiemannReduction:
    """Holonomy reduction bookkeeping for one extension.

    Carries the holonomy base skeleton, the extended skeleton built from
    s = normalizer of hol, its effective quotient, and the induced
    extension of the original Klein pair into that quotient.
    """

    morphism: SkeletonMorphism
    n: int
    hol: Subspace
    normalizer: Subspace
    hol_mats: tuple[Mat, ...]
    norm_mats: tuple[Mat, ...]
    base: Skeleton
    ext: ExtendedSkeleton
    quotient: SkeletonQuotient
    morphism_eff: SkeletonMorphism
    s_as_normalizer: tuple[Mat, ...]

    def n_component(self, v) -> Mat:
        """Normalizer-of-hol component of a vector in the quotient's k."""
        lifted = self.quotient.k_section.apply(v)
        k_base = self.base.k_dim
        acc = Mat.zeros(self.n, self.n)
        for coeff, hm in zip(lifted[self.n : k_base], self.hol_mats):
            if coeff:
                acc = acc + coeff * hm
        for coeff, nm in zip(lifted[k_base:], self.s_as_normalizer):
            if coeff:
                acc = acc + coeff * nm
        return acc


def _s_image_op(nmat: Mat, hol_mats: tuple[Mat, ...], k_base: int, n: int) -> Mat:
    """Operator of ad(N) on R^n + hol: block diag(N, ad_N restricted to hol)."""
    data = [Q0] * (k_base * k_base)
    for r in range(n):
        for c in range(n):
            data[r * k_base + c] = nmat.at(r, c)
    if hol_mats:
        coord = Mat.from_rows([list(h.data) for h in hol_mats]).transpose()
        for j, h in enumerate(hol_mats):
            comm = nmat * h - h * nmat
            sol, _ = solve(coord, comm.data)
            if sol is None:
                raise InvariantError("normalizer element does not preserve hol")
            for r in range(len(hol_mats)):
                data[(n + r) * k_base + (n + j)] = sol[r]
    return Mat(k_base, k_base, data)


def reduce_to_holonomy(m: SkeletonMorphism) -> RiemannReduction:
    """Build the effective extended skeleton of the holonomy reduction.

    Valid for every extension into an affine-type target: the gl(n)-parts
    of alpha(g) normalize the holonomy algebra by construction, so the
    induced morphism into the effective quotient always exists.
    """
    n = _require_affine(m.target)
    if not is_extension(m):
        raise InvariantError("holonomy reduction requires a valid extension")
    hol = holonomy_of_extension(m)
    gl_alg, _ = builtin("gl", n)
    norm = normalizer_in(gl_alg, hol)
    hol_mats = tuple(Mat(n, n, b) for b in hol.basis_vectors())
    norm_mats = tuple(Mat(n, n, b) for b in norm.basis_vectors())
    base = affine_skeleton(n, hol_mats)
    k_base = base.k_dim
    s_ops = [_s_image_op(nm, hol_mats, k_base, n) for nm in norm_mats]
    s_space = Subspace.from_vectors(k_base * k_base, [op.data for op in s_ops])
    ext = build_rho_s(base, s_space)
    img_coord = (
        Mat.from_rows([list(op.data) for op in s_ops]).transpose()
        if s_ops
        else Mat.zeros(k_base * k_base, 0)
    )
    s_as_norm = []
    for sm in ext.s_mats:
        sol, _ = solve(img_coord, sm.data)
        if sol is None:
            raise InvariantError("s basis element is not an image of the normalizer")
        acc = Mat.zeros(n, n)
        for coeff, nm in zip(sol, norm_mats):
            if coeff:
                acc = acc + coeff * nm
        s_as_norm.append(acc)
    quotient = effective_quotient_with_maps(ext.result)
    alpha_cols = []
    dj_cols = []
    ld = base.l.dim
    total_ext = ext.result.k_dim
    for j in range(m.source.g.dim):
        col = m.alpha.matrix.col(j)
        glp = _gl_part(m.target, col)
        coords = s_space.coordinates(
            _s_image_op(glp, hol_mats, k_base, n).data
        )
        if coords is None:
            raise InvariantError(
                "alpha's gl-part does not normalize the holonomy algebra"
            )
        ext_vec = list(col[:n]) + [Q0] * ld + list(coords)
        assert len(ext_vec) == total_ext
        alpha_cols.append(quotient.k_proj.apply(ext_vec))
    for i in range(m.source.h.dim):
        dj_gl = Mat.zeros(n, n)
        for coeff, lm in zip(m.dj.matrix.col(i), m.target.l_matrices):
            if coeff:
                dj_gl = dj_gl + coeff * lm
        coords = s_space.coordinates(_s_image_op(dj_gl, hol_mats, k_base, n).data)
        if coords is None:
            raise InvariantError("dj does not land in the normalizer of hol")
        lext_vec = [Q0] * ld + list(coords)
        dj_cols.append(quotient.l_proj.apply(lext_vec))
    m_eff = SkeletonMorphism(
        source=m.source,
        target=quotient.skeleton,
        alpha=LinearMap(Mat.from_rows([list(c) for c in alpha_cols]).transpose()),
        dj=LinearMap(
            Mat.from_rows([list(c) for c in dj_cols]).transpose()
            if dj_cols
            else Mat.zeros(quotient.skeleton.l.dim, 0)
        ),
    )
    problems = validate_morphism(m_eff)
    if problems or not is_extension(m_eff):
        raise InvariantError(
            "induced morphism into the effective quotient is not an extension: "
            + "; ".join(problems)
        )
    return RiemannReduction(
        morphism=m,
        n=n,
        hol=hol,
        normalizer=norm,
        hol_mats=hol_mats,
        norm_mats=norm_mats,
        base=base,
        ext=ext,
        quotient=quotient,
        morphism_eff=m_eff,
        s_as_normalizer=tuple(s_as_norm),
    )


def restrict_to_holonomy(m: SkeletonMorphism) -> SkeletonMorphism:
    """Restriction of an extension to its holonomy base (R^n + hol, Hol).

    Requires the gl(n)-parts of alpha(g) to lie in hol (the geometry's
    isotropy sits inside its holonomy); raises otherwise.
    """
    n = _require_affine(m.target)
    hol = holonomy_of_extension(m)
    hol_mats = tuple(Mat(n, n, b) for b in hol.basis_vectors())
    base = affine_skeleton(n, hol_mats)
    cols = []
    for j in range(m.source.g.dim):
        col = m.alpha.matrix.col(j)
        glp = _gl_part(m.target, col)
        coords = hol.coordinates(glp.data)
        if coords is None:
            raise InvariantError("alpha's gl-parts do not lie in the holonomy algebra")
        cols.append(list(col[:n]) + list(coords))
    dj_cols = []
    for i in range(m.source.h.dim):
        dj_gl = Mat.zeros(n, n)
        for coeff, lm in zip(m.dj.matrix.col(i), m.target.l_matrices):
            if coeff:
                dj_gl = dj_gl + coeff * lm
        coords = hol.coordinates(dj_gl.data)
        if coords is None:
            raise InvariantError("dj does not land in the holonomy algebra")
        dj_cols.append(list(coords))
    return SkeletonMorphism(
        source=m.source,
        target=base,
        alpha=LinearMap(Mat.from_rows(cols).transpose()),
        dj=LinearMap(
            Mat.from_rows(dj_cols).transpose()
            if dj_cols
            else Mat.zeros(base.l.dim, 0)
        ),
    )


@dataclass
class OrbitResult:
    """Orbit structure of the automorphism action on the metric space Z."""

    orbit_dim: int | None
    complement: list[np.ndarray]
    representatives: list[np.ndarray]
    ranks: list[int]
    caveats: list[str]
    singular_values: list[float]


def orbit_space(
    fam: MetricFamily,
    auto_algebra: Subspace,
    reduction: RiemannReduction,
    step: float = 1e-4,
) -> OrbitResult:
    """Orbit dimension of the tau-action, a complement, and representatives.

    For each automorphism generator the normalizer component is exponentiated
    with parameter +-step and the induced motion in Z-coordinates is
    central-differenced at several base points (Y = 0 and each basis element
    halved).  Ranks at all base points must agree; otherwise the result
    reports "orbit structure non-uniform" instead of a classification.
    """
    caveats: list[str] = []
    mdim = fam.dim
    if mdim == 0:
        return OrbitResult(0, [], [], [], ["metric space Z is trivial"], [])
    coord_mat = np.stack([b.reshape(-1) for b in fam.z_basis], axis=1)

    def z_coords(y: SymMatF) -> np.ndarray:
        sol, residual, *_ = np.linalg.lstsq(coord_mat, y.mat.reshape(-1), rcond=None)
        recon = coord_mat @ sol
        if float(np.max(np.abs(recon - y.mat.reshape(-1)))) > Z_COORD_TOL:
            raise NumericError("tau image left the span of Z (numerically)")
        return sol

    gens = auto_algebra.basis_vectors()
    n_parts = []
    for g in gens:
        comp = reduction.n_component(g)
        n_parts.append(
            np.array(
                [[float(comp.at(i, j)) for j in range(fam.n)] for i in range(fam.n)]
            )
        )
    base_points = [SymMatF(np.zeros((fam.n, fam.n)))]
    base_points.extend(SymMatF(0.5 * b) for b in fam.z_basis)
    ranks = []
    motion_at_zero: np.ndarray | None = None
    sigmas: list[float] = []
    for bp_index, bp in enumerate(base_points):
        cols = []
        for npart in n_parts:
            if float(np.max(np.abs(npart))) < 1e-15:
                cols.append(np.zeros(mdim))
                continue
            plus = tau_apply(expm(step * npart), bp)
            minus = tau_apply(expm(-step * npart), bp)
            cols.append((z_coords(plus) - z_coords(minus)) / (2.0 * step))
        motion = np.stack(cols, axis=1) if cols else np.zeros((mdim, 0))
        svals = np.linalg.svd(motion, compute_uv=False) if motion.size else np.zeros(0)
        smax = float(svals[0]) if len(svals) else 0.0
        if smax < 1e-12:
            rank = 0
        else:
            rank = int(np.sum(svals > ORBIT_RANK_REL_TOL * smax))
        ranks.append(rank)
        if bp_index == 0:
            motion_at_zero = motion
            sigmas = [float(s) for s in svals]
    if len(set(ranks)) > 1:
        return OrbitResult(
            None, [], [], ranks, caveats + ["orbit structure non-uniform"], sigmas
        )
    rank = ranks[0]
    u, svals, _ = (
        np.linalg.svd(motion_at_zero)
        if motion_at_zero.size
        else (np.eye(mdim), np.zeros(0), None)
    )
    complement = []
    for j in range(rank, mdim):
        col = u[:, j].copy()
        i = int(np.argmax(np.abs(col)))
        if col[i] < 0:
            col = -col
        complement.append(col)
    representatives = []
    if complement:
        for col in complement:
            y = sum(c * b for c, b in zip(col, fam.z_basis))
            representatives.append(spd_exp(SymMatF(y)).mat)
    else:
        representatives.append(np.eye(fam.n))
        caveats.append("all metrics in Z are equivalent")
    caveats.append(
        "identifications by discrete normalizer components are reported, not resolved"
    )
    return OrbitResult(rank, complement, representatives, ranks, caveats, sigmas)


@dataclass
class Classification:
    """End-to-end result of the metric classification pipeline."""

    reduction: RiemannReduction
    metrizable: bool
    family: MetricFamily | None
    autos: Subspace
    orbit: OrbitResult | None
    caveats: list[str]

    @property
    def hol_dim(self) -> int:
        return self.reduction.hol.dim

    @property
    def autos_dim(self) -> int:
        return self.autos.dim


def classify_metrics(
    m: SkeletonMorphism, component_reps=(), step: float = 1e-4
) -> Classification:
    """Full pipeline; see the module docstring for the steps.

    The automorphism space is computed in all cases; Z and the orbit are
    only computed when the holonomy algebra is metrizable.
    """
    red = reduce_to_holonomy(m)
    caveats = [
        "automorphisms are infinitesimal; completeness is not decided",
    ]
    ext0 = build_rho_s(
        red.quotient.skeleton,
        Subspace.zero(red.quotient.skeleton.k_dim ** 2),
    )
    amap = build_a_map(red.morphism_eff, ext0)
    autos = infinitesimal_autos(amap)
    bound = red.n + len(red.ext.s_mats)
    if autos.dim > bound:
        raise InvariantError(
            f"automorphism dimension {autos.dim} exceeds the bound {bound}"
        )
    metrizable = metrizability_check(red.hol)
    if red.morphism.target.component_reps or red.base.component_reps:
        caveats.append(
            "holonomy component representatives are not derived automatically; "
            "metrizability is decided at the algebra level only"
        )
    family = None
    orbit = None
    if metrizable:
        family = metric_space_z(red.hol, component_reps)
        orbit = orbit_space(family, autos, red, step)
        caveats.extend(orbit.caveats)
    else:
        caveats.append("holonomy is not contained in so(n); no metric shares this connection")
    return Classification(
        reduction=red,
        metrizable=metrizable,
        family=family,
        autos=autos,
        orbit=orbit,
        caveats=caveats,
    )
