"""Command-line interface and JSON persistence.

Subcommands mirror the run modes: solve, posdim, refine, param, member,
sample.  All numeric output is serialized as decimal strings so
extended-precision coordinates survive transport, and a fixed seed makes
repeat runs byte-identical.  Exit codes: 0 success, 1 parse/validation
error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .algebra import Rng, extended_precision
from .errors import (
    CorruptFile,
    DecompositionIncomplete,
    DimensionMismatch,
    NotHomogeneous,
    NotSquare,
    ParseError,
    PathFailure,
    RefinementDiverged,
    SchemaVersionMismatch,
)
from .parser import parse_complex_literal, parse_input_file, render_problem
from .polysys import LinearSlice, PolySystem, empty_slice
from .witness import (
    NumericalVariety,
    WitnessSet,
    membership_test,
    numerical_irreducible_decomposition,
    sample as sample_witness,
)
from .zerodim import (
    SolutionPoint,
    parameter_homotopy,
    refine_solutions,
    zero_dim_solve,
)

SCHEMA_VERSION = 1

_USAGE_ERRORS = (ParseError, CorruptFile, SchemaVersionMismatch, DimensionMismatch,
                 NotSquare, NotHomogeneous, ValueError)
_NUMERIC_ERRORS = (RefinementDiverged, DecompositionIncomplete, PathFailure)


@dataclass
class RunRequest:
    """One validated CLI invocation."""

    mode: str
    problem_path: str
    seed: int = 0
    out_path: str | None = None
    projective_flag: bool = False
    affine_flag: bool = False
    digits: int | None = None
    solutions_path: str | None = None
    values: str | None = None
    decomposition_path: str | None = None
    points: list = field(default_factory=list)
    dim: int | None = None
    index: int | None = None
    count: int | None = None


# -- number formatting ---------------------------------------------------------

def _fmt_real(x) -> str:
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 33)
    x = float(x)
    return repr(x)


def _fmt_complex(z) -> dict:
    if isinstance(z, mpmath.mpc):
        return {"re": _fmt_real(z.real), "im": _fmt_real(z.imag)}
    z = complex(z)
    return {"re": _fmt_real(z.real), "im": _fmt_real(z.imag)}


def _read_complex(d):
    with extended_precision():
        return mpmath.mpc(mpmath.mpf(d["re"]), mpmath.mpf(d["im"]))


def _solution_json(sp: SolutionPoint) -> dict:
    return {
        "conditionNumber": _fmt_real(sp.condition_number),
        "coordinates": [_fmt_complex(c) for c in sp.coordinates],
        "cycleNumber": sp.cycle_number,
        "functionResidual": _fmt_real(sp.function_residual),
        "lastT": _fmt_real(sp.last_t),
        "maxPrecisionBits": sp.max_precision_bits,
        "multiplicity": sp.multiplicity,
        "newtonResidual": _fmt_real(sp.newton_residual),
        "solutionNumber": sp.solution_number,
    }


def _solution_from_json(d, projective=False) -> SolutionPoint:
    try:
        return SolutionPoint(
            coordinates=tuple(_read_complex(c) for c in d["coordinates"]),
            condition_number=float(d["conditionNumber"]),
            cycle_number=int(d["cycleNumber"]),
            function_residual=float(d["functionResidual"]),
            last_t=float(d["lastT"]),
            max_precision_bits=int(d["maxPrecisionBits"]),
            newton_residual=float(d["newtonResidual"]),
            solution_number=int(d["solutionNumber"]),
            multiplicity=int(d.get("multiplicity", 1)),
            is_projective=projective,
        )
    except (KeyError, TypeError) as exc:
        raise CorruptFile(f"malformed solution object: {exc}") from exc


# -- decomposition persistence ---------------------------------------------------

def decomposition_to_json(nv: NumericalVariety) -> dict:
    components = []
    for dim in nv.dims():
        for ws in nv.components[dim]:
            components.append({
                "dim": dim,
                "index": ws.component_index,
                "degree": ws.degree,
                "slice": {
                    "coefficients": [[_fmt_complex(c) for c in row]
                                     for row in np.atleast_2d(ws.slice.coefficients)]
                    if ws.slice.codim else [],
                    "constants": [_fmt_complex(c) for c in ws.slice.constants],
                },
                "points": [[_fmt_complex(c) for c in p] for p in ws.points],
            })
    return {
        "schemaVersion": SCHEMA_VERSION,
        "seed": nv.seed,
        "projective": nv.is_projective,
        "patch": [_fmt_complex(c) for c in nv.patch] if nv.patch is not None else None,
        "system": render_problem(nv.system, nv.is_projective),
        "components": components,
    }


def decomposition_from_json(data: dict) -> NumericalVariety:
    if not isinstance(data, dict) or "schemaVersion" not in data:
        raise CorruptFile("not a decomposition file")
    if data["schemaVersion"] != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"schema version {data['schemaVersion']} not supported (expected {SCHEMA_VERSION})")
    try:
        spec = parse_input_file(data["system"], "<embedded>")
        system = spec.system
        projective = bool(data["projective"])
        patch = (np.array([complex(_read_complex(c)) for c in data["patch"]])
                 if data.get("patch") is not None else None)
        components: dict[int, list[WitnessSet]] = {}
        for comp in data["components"]:
            dim = int(comp["dim"])
            rows = comp["slice"]["coefficients"]
            if rows:
                coeffs = np.array([[complex(_read_complex(c)) for c in row]
                                   for row in rows])
                consts = np.array([complex(_read_complex(c))
                                   for c in comp["slice"]["constants"]])
                slice_ = LinearSlice(coeffs, consts)
            else:
                slice_ = empty_slice(system.num_vars)
            points = [np.array([complex(_read_complex(c)) for c in p])
                      for p in comp["points"]]
            if len(points) != int(comp["degree"]):
                raise CorruptFile("degree does not match the stored point count")
            ws = WitnessSet(system=system, slice=slice_, points=points,
                            dimension=dim, component_index=int(comp["index"]),
                            is_projective=projective, patch=patch)
            components.setdefault(dim, []).append(ws)
        for sets in components.values():
            sets.sort(key=lambda w: w.component_index)
        return NumericalVariety(components=components, system=system,
                                seed=int(data["seed"]), is_projective=projective,
                                patch=patch)
    except SchemaVersionMismatch:
        raise
    except ParseError as exc:
        raise CorruptFile(f"embedded system does not parse: {exc}") from exc
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorruptFile(f"malformed decomposition: {exc}") from exc


def write_decomposition(nv: NumericalVariety, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dumps(decomposition_to_json(nv)))


def read_decomposition(path: str) -> NumericalVariety:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise CorruptFile(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"{path} is not valid JSON: {exc}") from exc
    return decomposition_from_json(data)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- request handling ------------------------------------------------------------

def _load_problem(req: RunRequest):
    try:
        with open(req.problem_path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CorruptFile(f"cannot read {req.problem_path}: {exc}") from exc
    spec = parse_input_file(text, req.problem_path)
    if req.affine_flag and spec.declared_projective:
        raise DimensionMismatch(
            "--affine conflicts with the file's 'projective;' statement")
    projective = req.projective_flag or (spec.declared_projective and not req.affine_flag)
    return spec, projective


def _systems_match(a: PolySystem, b: PolySystem) -> bool:
    return (a.variables == b.variables and a.parameters == b.parameters
            and len(a.polys) == len(b.polys)
            and all(p == q for p, q in zip(a.polys, b.polys)))


def _parse_point(text: str, expected_len: int):
    parts = [s for s in text.split(",")]
    if len(parts) != expected_len:
        raise DimensionMismatch(
            f"point {text!r} has {len(parts)} coordinates, expected {expected_len}")
    return [parse_complex_literal(s.strip()) for s in parts]


def dispatch(req: RunRequest) -> tuple[int, str]:
    """Run one request; returns (exit code, JSON output)."""
    if req.mode == "solve":
        spec, projective = _load_problem(req)
        sols = zero_dim_solve(spec.system, projective=projective, seed=req.seed)
        payload = {
            "schemaVersion": SCHEMA_VERSION,
            "mode": "solve",
            "seed": req.seed,
            "projective": projective,
            "solutions": [_solution_json(sp) for sp in sols],
        }
        return 0, _dumps(payload)

    if req.mode == "posdim":
        spec, projective = _load_problem(req)
        nv = numerical_irreducible_decomposition(
            spec.system, projective=projective, seed=req.seed)
        return 0, _dumps(decomposition_to_json(nv))

    if req.mode == "refine":
        spec, _ = _load_problem(req)
        try:
            with open(req.solutions_path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CorruptFile(f"cannot read solutions: {exc}") from exc
        if not isinstance(data, dict) or "solutions" not in data:
            raise CorruptFile("solutions file has no 'solutions' array")
        points = [_solution_from_json(d) for d in data["solutions"]]
        refined = refine_solutions(spec.system, points, req.digits)
        payload = {
            "schemaVersion": SCHEMA_VERSION,
            "mode": "refine",
            "digits": req.digits,
            "solutions": [_solution_json(sp) for sp in refined],
        }
        return 0, _dumps(payload)

    if req.mode == "param":
        spec, _ = _load_problem(req)
        if not spec.system.parameters:
            raise DimensionMismatch("param mode needs a file with a 'params' statement")
        tuples = []
        for chunk in req.values.split(";"):
            chunk = chunk.strip()
            if chunk:
                tuples.append([parse_complex_literal(s.strip())
                               for s in chunk.split(",")])
        if not tuples:
            raise DimensionMismatch("--values contained no parameter tuples")
        result = parameter_homotopy(spec.system, list(spec.system.parameters),
                                    tuples, seed=req.seed)
        payload = {
            "schemaVersion": SCHEMA_VERSION,
            "mode": "param",
            "seed": req.seed,
            "parameterTuples": [[_fmt_complex(v) for v in t] for t in tuples],
            "startParameters": [_fmt_complex(v) for v in result.start_parameters],
            "pathsPerTuple": result.paths_per_tuple,
            "solutionSets": [[_solution_json(sp) for sp in sols]
                             for sols in result.solution_sets],
        }
        return 0, _dumps(payload)

    if req.mode == "member":
        spec, _ = _load_problem(req)
        nv = read_decomposition(req.decomposition_path)
        if not _systems_match(spec.system, nv.system):
            raise DimensionMismatch(
                "decomposition was computed from a different system than FILE")
        pts = [_parse_point(p, nv.system.num_vars) for p in req.points]
        memberships = membership_test(nv, pts)
        payload = {
            "schemaVersion": SCHEMA_VERSION,
            "mode": "member",
            "points": [[_fmt_complex(c) for c in p] for p in pts],
            "memberships": [[f"{dim}/{idx}" for dim, idx in hits]
                            for hits in memberships],
        }
        return 0, _dumps(payload)

    if req.mode == "sample":
        spec, _ = _load_problem(req)
        nv = read_decomposition(req.decomposition_path)
        if not _systems_match(spec.system, nv.system):
            raise DimensionMismatch(
                "decomposition was computed from a different system than FILE")
        sets = nv.components.get(req.dim, [])
        if not 0 <= req.index < len(sets):
            raise DimensionMismatch(
                f"no component {req.dim}/{req.index} in the decomposition")
        pts = sample_witness(sets[req.index], req.count, Rng(req.seed))
        payload = {
            "schemaVersion": SCHEMA_VERSION,
            "mode": "sample",
            "seed": req.seed,
            "dim": req.dim,
            "index": req.index,
            "count": req.count,
            "points": [[_fmt_complex(c) for c in p] for p in pts],
        }
        return 0, _dumps(payload)

    raise ValueError(f"unknown mode {req.mode!r}")


# -- argument parsing --------------------------------------------------------------

class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="polypath",
                             description="Polynomial system solving by homotopy continuation")
    sub = parser.add_subparsers(dest="mode", required=True)

    def common(p, seed=True, out=True, proj=False):
        p.add_argument("file", help="problem file (see the input grammar in the README)")
        if proj:
            group = p.add_mutually_exclusive_group()
            group.add_argument("--projective", action="store_true",
                               help="solve on a generic affine chart of projective space")
            group.add_argument("--affine", action="store_true",
                               help="force an affine run even if the file says projective")
        if seed:
            p.add_argument("--seed", type=int, default=0)
        if out:
            p.add_argument("--out", help="write JSON here instead of stdout")

    common(sub.add_parser("solve", help="all isolated solutions"), proj=True)
    common(sub.add_parser("posdim", help="numerical irreducible decomposition"), proj=True)

    p = sub.add_parser("refine", help="sharpen solutions to many digits")
    common(p, seed=False)
    p.add_argument("--solutions", required=True, help="JSON produced by 'solve'")
    p.add_argument("--digits", type=int, required=True)

    p = sub.add_parser("param", help="two-stage parameter homotopy")
    common(p)
    p.add_argument("--values", required=True,
                   help="semicolon-separated tuples of comma-separated complex literals")

    p = sub.add_parser("member", help="test points against a decomposition")
    common(p, seed=False, out=True)
    p.add_argument("--decomposition", required=True)
    p.add_argument("--point", action="append", default=[], required=True,
                   help="comma-separated coordinates; repeatable")

    p = sub.add_parser("sample", help="sample points from one component")
    common(p)
    p.add_argument("--decomposition", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    return parser


def _request_from_args(args) -> RunRequest:
    return RunRequest(
        mode=args.mode,
        problem_path=args.file,
        seed=getattr(args, "seed", 0),
        out_path=getattr(args, "out", None),
        projective_flag=getattr(args, "projective", False),
        affine_flag=getattr(args, "affine", False),
        digits=getattr(args, "digits", None),
        solutions_path=getattr(args, "solutions", None),
        values=getattr(args, "values", None),
        decomposition_path=getattr(args, "decomposition", None),
        points=getattr(args, "point", []),
        dim=getattr(args, "dim", None),
        index=getattr(args, "index", None),
        count=getattr(args, "count", None),
    )


def _error_payload(exc) -> str:
    info = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    if isinstance(exc, ParseError):
        info["error"]["line"] = exc.line
        info["error"]["column"] = exc.column
    return _dumps(info)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1

    req = _request_from_args(args)
    try:
        code, output = dispatch(req)
    except _NUMERIC_ERRORS as exc:
        sys.stdout.write(_error_payload(exc))
        return 2
    except _USAGE_ERRORS as exc:
        sys.stdout.write(_error_payload(exc))
        return 1

    if req.out_path:
        with open(req.out_path, "w", encoding="utf-8") as fh:
            fh.write(output)
    else:
        sys.stdout.write(output)
    return code


if __name__ == "__main__":
    sys.exit(main())
