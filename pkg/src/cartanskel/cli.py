"""Command-line entry point: run task lists from JSON problem files.

Usage:
    cartan-skel run FILE [--json] [--task NAME] [--tolerance-report]

Exit codes: 0 ok, 2 parse error, 3 invariant violation, 4 numeric failure.
Output is deterministic for a given input file: all bases use the fixed
coordinate orderings, rationals are printed as "p/q", and the JSON report
round-trips through json.loads/json.dumps unchanged.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import so3_example
from .autos import build_a_map, build_rho_s, flat_model_auto_filter, infinitesimal_autos
from .errors import CartanError, InvariantError, NumericError, ParseError
from .exactmat import Mat, Subspace, frac
from .extension import (
    KleinModel,
    SkeletonMorphism,
    curvature_homogeneous,
    is_extension,
    torsion_component,
    validate_morphism,
)
from .liealg import LieAlgebra, LinearMap, builtin
from .riemann import (
    DET_TOL,
    EIGEN_OFF_TOL,
    ORBIT_RANK_REL_TOL,
    SPD_EIG_TOL,
    SYM_TOL,
    Z_COORD_TOL,
    classify_metrics,
)
from .skeleton import (
    Skeleton,
    affine_skeleton,
    effective_quotient,
    euclidean_skeleton,
    iext_algebra,
    kernel_ideal,
    validate,
)

TASK_KINDS = (
    "validate",
    "kernel",
    "effective-quotient",
    "iext",
    "curvature",
    "torsion",
    "autos",
    "flat-autos",
    "riemann-classify",
    "example-so3",
)

TOLERANCES = {
    "symmetry": SYM_TOL,
    "jacobi_offdiagonal": EIGEN_OFF_TOL,
    "spd_eigenvalue": SPD_EIG_TOL,
    "determinant": DET_TOL,
    "orbit_rank_relative": ORBIT_RANK_REL_TOL,
    "z_coordinate_residual": Z_COORD_TOL,
}


def _fail(path: str, message: str) -> ParseError:
    return ParseError(f"{path}: {message}")


def _parse_frac(x, path: str) -> Fraction:
    try:
        return frac(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise _fail(path, f"bad rational {x!r}: {exc}") from None


def _parse_matrix(rows, path: str) -> Mat:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise _fail(path, "expected a non-empty list of rows")
    width = len(rows[0])
    parsed = []
    for i, r in enumerate(rows):
        if len(r) != width:
            raise _fail(path, f"row {i} has length {len(r)}, expected {width}")
        parsed.append([_parse_frac(x, f"{path}[{i}]") for x in r])
    return Mat.from_rows(parsed)


def _fmt_vec(v) -> list[str]:
    return [str(x) for x in v]


def _fmt_mat(m: Mat) -> list[list[str]]:
    return [[str(x) for x in m.row(i)] for i in range(m.rows)]


def _fmt_float(x: float) -> str:
    return f"{x:.12g}"


class Problem:
    """Parsed problem file: named objects plus the task list."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise ParseError("top level must be a JSON object")
        self.algebras: dict[str, LieAlgebra] = {}
        self.skeletons: dict[str, Skeleton] = {}
        self.morphisms: dict[str, SkeletonMorphism] = {}
        self.s_subspaces: dict[str, list[Mat]] = {}
        for name, spec in (raw.get("lie_algebras") or {}).items():
            self.algebras[name] = self._build_algebra(spec, f"lie_algebras/{name}")
        for name, spec in (raw.get("skeletons") or {}).items():
            self.skeletons[name] = self._build_skeleton(spec, f"skeletons/{name}")
        for name, spec in (raw.get("morphisms") or {}).items():
            self.morphisms[name] = self._build_morphism(spec, f"morphisms/{name}")
        for name, spec in (raw.get("s_subspaces") or {}).items():
            self.s_subspaces[name] = self._build_s(spec, f"s_subspaces/{name}")
        tasks = raw.get("tasks")
        if not isinstance(tasks, list):
            raise ParseError("tasks: expected a list of task records")
        self.tasks = []
        for i, t in enumerate(tasks):
            if not isinstance(t, dict) or "task" not in t:
                raise _fail(f"tasks[{i}]", "expected an object with a 'task' field")
            if t["task"] not in TASK_KINDS:
                raise _fail(f"tasks[{i}]", f"unknown task kind {t['task']!r}")
            self.tasks.append(t)

    def _build_algebra(self, spec, path: str) -> LieAlgebra:
        if not isinstance(spec, dict):
            raise _fail(path, "expected an object")
        if "builtin" in spec:
            name = spec["builtin"]
            n = spec.get("n")
            try:
                alg, _ = builtin(name, n)
            except (ValueError, CartanError) as exc:
                raise _fail(path, str(exc)) from None
            return alg
        if "structure" not in spec:
            raise _fail(path, "need 'builtin' or 'structure'")
        structure = spec["structure"]
        try:
            parsed = [
                [[_parse_frac(x, path) for x in row] for row in plane]
                for plane in structure
            ]
            return LieAlgebra(parsed, spec.get("labels"))
        except InvariantError as exc:
            raise _fail(path, str(exc)) from None

    def _build_skeleton(self, spec, path: str) -> Skeleton:
        if not isinstance(spec, dict):
            raise _fail(path, "expected an object")
        if "builtin" in spec:
            kind = spec["builtin"]
            n = spec.get("n")
            if not isinstance(n, int) or n < 1:
                raise _fail(path, "builtin skeletons require an integer n >= 1")
            if kind == "euclidean":
                return euclidean_skeleton(n, bool(spec.get("with_reflection")))
            if kind == "affine":
                return affine_skeleton(n)
            if kind == "affine_sub":
                gens = spec.get("l_generators")
                if not isinstance(gens, list) or not gens:
                    raise _fail(path, "affine_sub requires l_generators")
                mats = [_parse_matrix(g, f"{path}/l_generators[{i}]") for i, g in enumerate(gens)]
                for m in mats:
                    if m.rows != n or m.cols != n:
                        raise _fail(path, "l_generators must be n x n matrices")
                span = Subspace.from_vectors(n * n, [m.data for m in mats])
                basis = [Mat(n, n, b) for b in span.basis_vectors()]
                try:
                    return affine_skeleton(n, basis)
                except (InvariantError, ValueError) as exc:
                    raise _fail(path, str(exc)) from None
            raise _fail(path, f"unknown builtin skeleton {kind!r}")
        for key in ("k_dim", "l", "l_embed", "drho"):
            if key not in spec:
                raise _fail(path, f"missing field {key!r}")
        l_name = spec["l"]
        if l_name not in self.algebras:
            raise _fail(path, f"unknown lie_algebras reference {l_name!r}")
        l_alg = self.algebras[l_name]
        k_dim = spec["k_dim"]
        embed = _parse_matrix(spec["l_embed"], f"{path}/l_embed")
        drho_raw = spec["drho"]
        if not isinstance(drho_raw, list) or len(drho_raw) != l_alg.dim:
            raise _fail(path, "drho must list one k x k matrix per l basis element")
        drho = tuple(
            _parse_matrix(dm, f"{path}/drho[{i}]") for i, dm in enumerate(drho_raw)
        )
        reps = []
        for i, rep in enumerate(spec.get("component_reps") or []):
            reps.append(
                (
                    _parse_matrix(rep["operator"], f"{path}/component_reps[{i}]/operator"),
                    _parse_matrix(rep["l_auto"], f"{path}/component_reps[{i}]/l_auto"),
                )
            )
        k_algebra = None
        if "k_bracket" in spec:
            if spec["k_bracket"] not in self.algebras:
                raise _fail(path, f"unknown lie_algebras reference {spec['k_bracket']!r}")
            k_algebra = self.algebras[spec["k_bracket"]]
        try:
            return Skeleton(
                k_dim=k_dim,
                l=l_alg,
                l_embed=LinearMap(embed),
                drho=drho,
                component_reps=tuple(reps),
                k_algebra=k_algebra,
            )
        except ValueError as exc:
            raise _fail(path, str(exc)) from None

    def _build_morphism(self, spec, path: str) -> SkeletonMorphism:
        if not isinstance(spec, dict):
            raise _fail(path, "expected an object")
        for key in ("g", "h", "target", "alpha", "dj"):
            if key not in spec:
                raise _fail(path, f"missing field {key!r}")
        if spec["g"] not in self.algebras:
            raise _fail(path, f"unknown lie_algebras reference {spec['g']!r}")
        if spec["target"] not in self.skeletons:
            raise _fail(path, f"unknown skeletons reference {spec['target']!r}")
        g = self.algebras[spec["g"]]
        h_rows = spec["h"]
        if not isinstance(h_rows, list):
            raise _fail(path, "h must be a list of g-coordinate vectors")
        h_vectors = [
            [_parse_frac(x, f"{path}/h[{i}]") for x in row] for i, row in enumerate(h_rows)
        ]
        for row in h_vectors:
            if len(row) != g.dim:
                raise _fail(path, "h vectors must have length dim g")
        try:
            klein = KleinModel(g=g, h=Subspace.from_vectors(g.dim, h_vectors))
            return SkeletonMorphism(
                source=klein,
                target=self.skeletons[spec["target"]],
                alpha=LinearMap(_parse_matrix(spec["alpha"], f"{path}/alpha")),
                dj=LinearMap(_parse_matrix(spec["dj"], f"{path}/dj")),
            )
        except (InvariantError, ValueError) as exc:
            raise _fail(path, str(exc)) from None

    def _build_s(self, spec, path: str) -> list[Mat]:
        if not isinstance(spec, dict) or "generators" not in spec:
            raise _fail(path, "expected an object with 'generators'")
        gens = spec["generators"]
        if not isinstance(gens, list) or not gens:
            raise _fail(path, "generators must be a non-empty list of square matrices")
        mats = [_parse_matrix(g, f"{path}/generators[{i}]") for i, g in enumerate(gens)]
        size = mats[0].rows
        for m in mats:
            if m.rows != size or m.cols != size:
                raise _fail(path, "generators must be square matrices of equal size")
        return mats


def _skeleton_arg(problem: Problem, task: dict, idx: int) -> tuple[str, Skeleton]:
    name = task.get("skeleton")
    if name not in problem.skeletons:
        raise _fail(f"tasks[{idx}]", f"unknown skeletons reference {name!r}")
    return name, problem.skeletons[name]


def _morphism_arg(problem: Problem, task: dict, idx: int) -> tuple[str, SkeletonMorphism]:
    name = task.get("morphism")
    if name not in problem.morphisms:
        raise _fail(f"tasks[{idx}]", f"unknown morphisms reference {name!r}")
    return name, problem.morphisms[name]


def _s_subspace_for(problem: Problem, task: dict, idx: int, k_dim: int) -> Subspace:
    name = task.get("s")
    if name is None:
        return Subspace.zero(k_dim * k_dim)
    if name not in problem.s_subspaces:
        raise _fail(f"tasks[{idx}]", f"unknown s_subspaces reference {name!r}")
    mats = problem.s_subspaces[name]
    if mats[0].rows != k_dim:
        raise _fail(
            f"tasks[{idx}]",
            f"s generators act on dimension {mats[0].rows}, expected {k_dim}",
        )
    return Subspace.from_vectors(k_dim * k_dim, [m.data for m in mats])


def _labelled_basis(sk: Skeleton, space: Subspace) -> list[str]:
    return [sk.label_of(v) for v in space.basis_vectors()]


def run_task(problem: Problem, task: dict, idx: int) -> dict:
    kind = task["task"]
    report = {
        "task": kind,
        "name": task.get("name", kind),
        "inputs": {k: v for k, v in task.items() if k not in ("task", "name")},
        "results": {"dims": {}, "bases": {}, "notes": [], "caveats": []},
    }
    res = report["results"]
    if kind == "validate":
        name, sk = _skeleton_arg(problem, task, idx)
        violations = validate(sk)
        if violations:
            raise InvariantError(f"skeleton {name!r}: " + "; ".join(violations))
        n = kernel_ideal(sk)
        res["dims"]["kernel"] = n.dim
        res["notes"].append(f"effective: {'yes' if n.dim == 0 else 'no'}, kernel dim {n.dim}")
    elif kind == "kernel":
        name, sk = _skeleton_arg(problem, task, idx)
        n = kernel_ideal(sk)
        res["dims"]["kernel"] = n.dim
        res["bases"]["kernel"] = [_fmt_vec(v) for v in n.basis_vectors()]
        res["notes"].append(
            "kernel basis in l coordinates: "
            + (", ".join(sk.l.describe(v) for v in n.basis_vectors()) or "0")
        )
    elif kind == "effective-quotient":
        name, sk = _skeleton_arg(problem, task, idx)
        out = effective_quotient(sk)
        res["dims"]["k"] = out.k_dim
        res["dims"]["l"] = out.l.dim
        res["notes"].append(f"quotient skeleton: k dim {out.k_dim}, l dim {out.l.dim}")
    elif kind == "iext":
        name, sk = _skeleton_arg(problem, task, idx)
        space = iext_algebra(sk)
        res["dims"]["iext"] = space.dim
        res["bases"]["iext"] = [_fmt_vec(v) for v in space.basis_vectors()]
        res["notes"].append(f"iext dim {space.dim} inside gl({sk.k_dim})")
    elif kind == "curvature":
        name, m = _morphism_arg(problem, task, idx)
        kappa = curvature_homogeneous(m)
        res["dims"]["span"] = kappa.span.dim
        res["bases"]["span"] = [_fmt_vec(v) for v in kappa.span.basis_vectors()]
        for (a, b), v in sorted(kappa.values.items()):
            res["notes"].append(
                f"kappa(e{kappa.complement[a] + 1}, e{kappa.complement[b] + 1}) = "
                + m.target.label_of(v)
            )
    elif kind == "torsion":
        name, m = _morphism_arg(problem, task, idx)
        tors = torsion_component(m)
        res["dims"]["span"] = tors.span.dim
        res["bases"]["span"] = [_fmt_vec(v) for v in tors.span.basis_vectors()]
        res["notes"].append(
            "torsion-free" if tors.span.dim == 0 else "torsion is nonzero"
        )
    elif kind == "autos":
        name, m = _morphism_arg(problem, task, idx)
        violations = validate_morphism(m)
        if violations or not is_extension(m):
            raise InvariantError(f"morphism {name!r} is not an extension: " + "; ".join(violations))
        s = _s_subspace_for(problem, task, idx, m.target.k_dim)
        ext = build_rho_s(m.target, s)
        autos = infinitesimal_autos(build_a_map(m, ext))
        res["dims"]["ambient"] = ext.result.k_dim
        res["dims"]["autos"] = autos.dim
        res["bases"]["autos"] = [_fmt_vec(v) for v in autos.basis_vectors()]
        res["notes"].append(
            "infinitesimal automorphisms: "
            + (", ".join(_labelled_basis(ext.result, autos)) or "0")
        )
        res["caveats"].append("infinitesimal only; completeness not decided")
    elif kind == "flat-autos":
        g_name = task.get("g")
        if g_name not in problem.algebras:
            raise _fail(f"tasks[{idx}]", f"unknown lie_algebras reference {g_name!r}")
        g = problem.algebras[g_name]
        h_rows = task.get("h")
        if not isinstance(h_rows, list):
            raise _fail(f"tasks[{idx}]", "flat-autos requires h vectors")
        h_vectors = [[_parse_frac(x, f"tasks[{idx}]/h") for x in row] for row in h_rows]
        klein = KleinModel(g=g, h=Subspace.from_vectors(g.dim, h_vectors))
        s = _s_subspace_for(problem, task, idx, g.dim)
        ext = build_rho_s(klein.skeleton(), s)
        kept = flat_model_auto_filter(ext, klein)
        res["dims"]["s"] = len(ext.s_mats)
        res["dims"]["retained"] = kept.dim
        res["bases"]["retained"] = [_fmt_vec(v) for v in kept.basis_vectors()]
        res["notes"].append(f"derivation directions retained: {kept.dim} of {len(ext.s_mats)}")
    elif kind == "riemann-classify":
        name, m = _morphism_arg(problem, task, idx)
        reps = [
            _parse_matrix(r, f"tasks[{idx}]/component_reps[{i}]")
            for i, r in enumerate(task.get("component_reps") or [])
        ]
        cls = classify_metrics(m, component_reps=reps, step=float(task.get("step", 1e-4)))
        _fill_classification(res, cls)
    elif kind == "example-so3":
        cls = so3_example.run()
        _fill_classification(res, cls)
        res["notes"].insert(
            0,
            f"hol dim {cls.hol_dim}; Z dim {cls.family.dim}; autos dim {cls.autos.dim}; "
            f"orbit dim {cls.orbit.orbit_dim}; representatives diag(e^{{m1}}, e^{{m1}}, 1)",
        )
    return report


def _fill_classification(res: dict, cls) -> None:
    red = cls.reduction
    res["dims"]["holonomy"] = red.hol.dim
    res["dims"]["normalizer"] = red.normalizer.dim
    res["dims"]["autos"] = cls.autos.dim
    res["bases"]["holonomy"] = [_fmt_vec(v) for v in red.hol.basis_vectors()]
    res["bases"]["autos"] = [_fmt_vec(v) for v in cls.autos.basis_vectors()]
    res["notes"].append(f"metrizable: {'yes' if cls.metrizable else 'no'}")
    if cls.family is not None:
        res["dims"]["z_space"] = cls.family.dim
        res["bases"]["z_space"] = [_fmt_mat(m) for m in cls.family.z_exact]
    if cls.orbit is not None:
        res["dims"]["orbit"] = cls.orbit.orbit_dim
        res["notes"].append(
            "non-equivalent directions in Z coordinates: "
            + (
                "; ".join(
                    "(" + ", ".join(_fmt_float(x) for x in c) + ")"
                    for c in cls.orbit.complement
                )
                or "none"
            )
        )
        for rep in cls.orbit.representatives:
            rows = [
                "[" + ", ".join(_fmt_float(x) for x in row) + "]" for row in rep
            ]
            res["notes"].append("representative: [" + ", ".join(rows) + "]")
    res["caveats"].extend(cls.caveats)


def _print_text(reports: list[dict], out) -> None:
    for rep in reports:
        print(f"== task {rep['name']} ({rep['task']})", file=out)
        for key, value in sorted(rep["results"]["dims"].items()):
            print(f"  {key} dim: {value}", file=out)
        for key, rows in sorted(rep["results"]["bases"].items()):
            print(f"  {key} basis:", file=out)
            for v in rows:
                print(f"    {v}", file=out)
        for note in rep["results"]["notes"]:
            print(f"  note: {note}", file=out)
        for caveat in rep["results"]["caveats"]:
            print(f"  caveat: {caveat}", file=out)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="cartan-skel")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run the tasks in a JSON problem file")
    run_p.add_argument("file")
    run_p.add_argument("--json", action="store_true", help="emit a JSON report")
    run_p.add_argument("--task", help="only run tasks with this name or kind")
    run_p.add_argument(
        "--tolerance-report",
        action="store_true",
        help="include the numeric tolerances in the report",
    )
    args = parser.parse_args(argv)
    out = sys.stdout
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{args.file}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        problem = Problem(raw)
        tasks = problem.tasks
        if args.task:
            tasks = [
                t for t in tasks if t.get("name", t["task"]) == args.task or t["task"] == args.task
            ]
            if not tasks:
                raise ParseError(f"no task named {args.task!r} in {args.file}")
        reports = [run_task(problem, t, i) for i, t in enumerate(tasks)]
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    payload = {"format_version": "1", "reports": reports}
    if args.tolerance_report:
        payload["tolerances"] = {k: _fmt_float(v) for k, v in sorted(TOLERANCES.items())}
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True), file=out)
    else:
        _print_text(reports, out)
        if args.tolerance_report:
            for k, v in sorted(TOLERANCES.items()):
                print(f"tolerance {k} = {_fmt_float(v)}", file=out)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
