"""Command-line surface: analyze, check, steady, evolve, support, scan, dump-fixture.

Exit codes: 0 success (or property holds), 1 property does not hold,
2 invalid input, 3 internal inconsistency or numerical failure.  With
``--json`` everything on stdout is a single JSON document; logs go to
stderr.  Tolerances come from flags or ``QMS_TOL_*`` environment variables.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, dynamics, jsonio, models
from .gksl import GkslModel, dump_model, gauge_transform, load_model, vectorize
from .operator_core import (
    InternalInconsistencyError,
    NumericalFailureError,
    QmsError,
    Tolerances,
    ValidationError,
    hermitian_part,
)

__all__ = ["AnalysisReport", "build_report", "main"]

EXIT_OK = 0
EXIT_PROPERTY_FALSE = 1
EXIT_INVALID_INPUT = 2
EXIT_INTERNAL = 3

CHECK_PROPERTIES = (
    "irreducible",
    "primitive",
    "positivity-improving",
    "peripheral",
    "subharmonic",
)


@dataclass
class AnalysisReport:
    """Full battery outcome; inconsistencies are recorded, never reconciled."""

    model: dict
    tolerances: dict
    verdicts: dict
    invariant_density: list | None
    kernel_dim: int | None
    space_dims: dict
    spectrum: dict | None
    errors: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _load_any_model(spec: str, tol: Tolerances) -> tuple[GkslModel, str]:
    path = Path(spec)
    if path.exists():
        return load_model(path, tol), str(path)
    try:
        return models.standard_fixture(spec, tol), f"fixture:{spec.upper()}"
    except ValidationError:
        raise ValidationError(
            f"{spec!r} is neither a readable model file nor a known fixture name"
        ) from None


def _tolerances_from_args(args) -> Tolerances:
    return Tolerances.from_env(
        rank=args.tol_rank,
        psd=args.tol_psd,
        trace=args.tol_trace,
        eq=args.tol_eq,
        spectral=args.tol_spec,
    )


def build_report(model: GkslModel, tol: Tolerances, source: str = "") -> AnalysisReport:
    """Run the whole battery and collect verdicts, spaces and the spectrum."""
    verdicts: dict[str, dict | None] = {}
    errors: list[dict] = []

    def attempt(name, fn):
        try:
            return fn()
        except (InternalInconsistencyError, NumericalFailureError) as exc:
            errors.append({"stage": name, "kind": type(exc).__name__, "message": str(exc)})
            return None

    irreducible = attempt("irreducible", lambda: analysis.check_irreducibility(model, tol))
    primitive = attempt("primitive", lambda: analysis.check_primitivity(model, tol))
    positivity = attempt(
        "positivity_improving", lambda: analysis.check_positivity_improving(model, tol)
    )
    peripheral = attempt(
        "peripheral_trivial", lambda: analysis.check_peripheral_triviality(model, tol)
    )
    spectrum = attempt("spectrum", lambda: analysis.peripheral_spectrum(model, tol))
    fixed = attempt("fixed_points", lambda: analysis.fixed_point_space(model, tol))
    dfs = attempt(
        "decoherence_free", lambda: analysis.decoherence_free_subalgebra(model, tol)
    )
    reversible = attempt("reversible", lambda: analysis.reversible_subalgebra(model, tol))
    kernel_density = attempt(
        "invariant_density", lambda: analysis.invariant_density_space(model, tol)
    )

    booleans = {}
    for name, verdict in (
        ("irreducible", irreducible),
        ("primitive", primitive),
        ("positivity_improving", positivity),
        ("peripheral_trivial", peripheral),
    ):
        verdicts[name] = verdict.to_dict() if verdict is not None else None
        if verdict is not None:
            booleans[name] = verdict.value
    if len(set(booleans.values())) > 1:
        errors.append(
            {
                "stage": "equivalence_web",
                "kind": "InternalInconsistencyError",
                "message": f"verdicts disagree: {booleans}",
            }
        )

    density_json = None
    kernel_dim = None
    if kernel_density is not None:
        kernel, density = kernel_density
        kernel_dim = kernel.dim
        if density is not None:
            density_json = jsonio.matrix_to_json(density)
    return AnalysisReport(
        model={"source": source, "dim": model.dim, "jumps": len(model.jumps)},
        tolerances=asdict(tol),
        verdicts=verdicts,
        invariant_density=density_json,
        kernel_dim=kernel_dim,
        space_dims={
            "fixed_points": fixed.dim if fixed is not None else None,
            "decoherence_free": dfs.dim if dfs is not None else None,
            "reversible": reversible.dim if reversible is not None else None,
        },
        spectrum=spectrum.to_dict() if spectrum is not None else None,
        errors=errors,
    )


def _emit_json(document: dict, json_path: str | None) -> None:
    text = json.dumps(document, indent=2)
    if json_path:
        Path(json_path).write_text(text + "\n")
    print(text)


def _cmd_analyze(args) -> int:
    tol = _tolerances_from_args(args)
    model, source = _load_any_model(args.model, tol)
    report = build_report(model, tol, source)
    if args.json is not None:
        _emit_json(report.to_dict(), args.json or None)
    else:
        print(f"model: {source} (dim {model.dim}, {len(model.jumps)} jumps)")
        for name, verdict in report.verdicts.items():
            shown = "error" if verdict is None else str(verdict["value"]).lower()
            print(f"  {name:22s} {shown}")
        print(f"  kernel dimension       {report.kernel_dim}")
        for name, dim in report.space_dims.items():
            print(f"  dim {name:18s} {dim}")
        for err in report.errors:
            _log(f"error in {err['stage']}: {err['message']}")
    return EXIT_INTERNAL if report.errors else EXIT_OK


def _cmd_check(args) -> int:
    tol = _tolerances_from_args(args)
    model, source = _load_any_model(args.model, tol)
    prop = args.property
    if prop == "irreducible":
        verdict = analysis.check_irreducibility(model, tol)
    elif prop == "primitive":
        verdict = analysis.check_primitivity(model, tol)
    elif prop == "positivity-improving":
        verdict = analysis.check_positivity_improving(model, tol)
    elif prop == "peripheral":
        verdict = analysis.check_peripheral_triviality(model, tol)
    elif prop == "subharmonic":
        if not args.p:
            raise ValidationError("--property subharmonic requires --p <projection.json>")
        p = jsonio.json_to_matrix(json.loads(Path(args.p).read_text()))
        verdict = analysis.is_subharmonic(model, p, tol)
    else:
        raise ValidationError(f"unknown property {prop!r}")
    detail = " ".join(f"{k}={_fmt(v)}" for k, v in verdict.residuals.items())
    print(f"model={source} property={prop} value={str(verdict.value).lower()} "
          f"criterion={verdict.criterion} {detail}".rstrip())
    return EXIT_OK if verdict.value else EXIT_PROPERTY_FALSE


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _cmd_steady(args) -> int:
    tol = _tolerances_from_args(args)
    model, source = _load_any_model(args.model, tol)
    kernel, density = analysis.invariant_density_space(model, tol)
    document = {
        "model": source,
        "kernel_dim": kernel.dim,
        "invariant_density": jsonio.matrix_to_json(density),
    }
    if args.json is not None:
        _emit_json(document, args.json or None)
    else:
        print(f"model={source} kernel_dim={kernel.dim}")
        print(json.dumps(document["invariant_density"]))
    return EXIT_OK


def _parse_grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValidationError("--grid expects t0:t1:steps")
    try:
        t0, t1, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ValidationError(f"bad --grid value {spec!r}") from exc
    if steps < 1 or t1 < t0 or t0 < 0.0:
        raise ValidationError(f"bad --grid value {spec!r}")
    return np.linspace(t0, t1, steps)


def _cmd_evolve(args) -> int:
    tol = _tolerances_from_args(args)
    model, source = _load_any_model(args.model, tol)
    state = jsonio.json_to_matrix(json.loads(Path(args.state).read_text()))
    target = None
    if args.target:
        target = jsonio.json_to_matrix(json.loads(Path(args.target).read_text()))
    grid = _parse_grid(args.grid)
    profile = dynamics.relaxation_profile(model, state, grid, target=target, tol=tol)
    lines = ["t,distance"] + [
        f"{t:.12g},{d:.12g}" for t, d in zip(profile.times, profile.distances)
    ]
    if args.csv:
        Path(args.csv).write_text("\n".join(lines) + "\n")
        _log(f"wrote {args.csv}")
    if args.json is not None:
        _emit_json(
            {
                "model": source,
                "times": list(profile.times),
                "distances": list(profile.distances),
            },
            args.json or None,
        )
    elif not args.csv:
        print("\n".join(lines))
    return EXIT_OK


def _cmd_support(args) -> int:
    tol = _tolerances_from_args(args)
    model, source = _load_any_model(args.model, tol)
    psi = jsonio.json_to_vector(json.loads(Path(args.psi).read_text()))
    algebraic = analysis.support_reachable_space(model, psi, tol)
    oracle = dynamics.numerical_support_oracle(model, psi, args.t, tol)
    print(
        f"model={source} t={args.t:g} algebraic_dim={algebraic.dim} "
        f"oracle_dim={oracle.dim}"
    )
    if algebraic.dim != oracle.dim:
        if args.t <= 1.0:
            _log("support dimensions disagree at small time: numerical breakdown")
            return EXIT_INTERNAL
        _log(
            "support dimensions disagree at large time; exponentially small "
            "eigenvalues may have fallen below the rank cutoff (oracle limit)"
        )
    return EXIT_OK


def _instance_seeds(master: int, count: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(master).generate_state(count)]


def _scan_instance(n: int, k: int, seed: int, tol: Tolerances) -> dict:
    model = models.random_gksl(n, k, seed, tol)
    record: dict = {"seed": seed, "violations": []}
    try:
        irreducible = analysis.check_irreducibility(model, tol).value
        primitive = analysis.check_primitivity(model, tol)
        positivity = analysis.check_positivity_improving(model, tol).value
        peripheral = analysis.check_peripheral_triviality(model, tol).value
        record.update(
            irreducible=irreducible,
            primitive=primitive.value,
            positivity_improving=positivity,
            peripheral_trivial=peripheral,
        )
        flags = {irreducible, primitive.value, positivity, peripheral}
        if len(flags) > 1:
            record["violations"].append("equivalence-web")

        min_eig = primitive.residuals["density_min_eigenvalue"]
        if min_eig > 1e-6:
            fixed = analysis.fixed_point_space(model, tol)
            if (fixed.dim == 1) != irreducible:
                record["violations"].append("fixed-point-dimension")

        rng = np.random.default_rng(seed)
        mixing = models.haar_unitary(k, rng)
        shifts = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        transformed = gauge_transform(model, mixing=mixing, shifts=shifts, tol=tol)
        for side in ("heisenberg", "schrodinger"):
            gap = np.abs(
                vectorize(model, side).matrix - vectorize(transformed, side).matrix
            ).max()
            if gap > 1e-10:
                record["violations"].append(f"gauge-{side}")
        if analysis.check_irreducibility(transformed, tol).value != irreducible:
            record["violations"].append("gauge-verdict")

        psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        psi = psi / np.linalg.norm(psi)
        alg_dim = analysis.support_reachable_space(model, psi, tol).dim
        oracle_dim = dynamics.numerical_support_oracle(model, psi, 0.1, tol).dim
        if alg_dim != oracle_dim:
            record["violations"].append("support-oracle")
    except (InternalInconsistencyError, NumericalFailureError) as exc:
        record["violations"].append(f"{type(exc).__name__}: {exc}")
    return record


def _cmd_scan(args) -> int:
    tol = _tolerances_from_args(args)
    if args.count < 1:
        raise ValidationError("--count must be at least 1")
    seeds = _instance_seeds(args.seed, args.count)
    records = []
    bad = []
    for i, seed in enumerate(seeds):
        record = _scan_instance(args.n, args.k, seed, tol)
        records.append(record)
        status = "ok" if not record["violations"] else ",".join(record["violations"])
        if args.json is None:
            print(
                f"instance={i} seed={seed} "
                f"irreducible={str(record.get('irreducible', 'error')).lower()} "
                f"primitive={str(record.get('primitive', 'error')).lower()} "
                f"positivity={str(record.get('positivity_improving', 'error')).lower()} "
                f"peripheral={str(record.get('peripheral_trivial', 'error')).lower()} "
                f"status={status}"
            )
        if record["violations"]:
            bad.append(record)
    consistent = len(records) - len(bad)
    summary = {
        "n": args.n,
        "k": args.k,
        "count": args.count,
        "seed": args.seed,
        "consistent": consistent,
        "violations": [
            {"seed": r["seed"], "violations": r["violations"]} for r in bad
        ],
    }
    if args.json is not None:
        _emit_json(summary, args.json or None)
    else:
        print(f"summary: {consistent}/{len(records)} consistent")
        for r in bad:
            _log(f"violation at seed {r['seed']}: {r['violations']}")
    return EXIT_INTERNAL if bad else EXIT_OK


def _cmd_dump_fixture(args) -> int:
    tol = _tolerances_from_args(args)
    model = models.standard_fixture(args.name, tol)
    print(dump_model(model))
    return EXIT_OK


def _add_tolerance_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("tolerances (defaults via QMS_TOL_*)")
    group.add_argument("--tol-rank", type=float, default=None)
    group.add_argument("--tol-psd", type=float, default=None)
    group.add_argument("--tol-trace", type=float, default=None)
    group.add_argument("--tol-eq", type=float, default=None)
    group.add_argument("--tol-spec", type=float, default=None, dest="tol_spec")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qms",
        description="Analysis toolkit for finite-dimensional GKSL quantum Markov semigroups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run the full verdict battery on a model")
    p.add_argument("model", help="model JSON file or fixture name")
    p.add_argument("--json", nargs="?", const="", default=None, metavar="OUT")
    _add_tolerance_flags(p)
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("check", help="check one property, exit 0/1")
    p.add_argument("model")
    p.add_argument("--property", required=True, choices=CHECK_PROPERTIES)
    p.add_argument("--p", default=None, help="projection JSON for subharmonic")
    p.add_argument("--psi", default=None, help="vector JSON (unused placeholders accepted)")
    _add_tolerance_flags(p)
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("steady", help="invariant density and kernel dimension")
    p.add_argument("model")
    p.add_argument("--json", nargs="?", const="", default=None, metavar="OUT")
    _add_tolerance_flags(p)
    p.set_defaults(fn=_cmd_steady)

    p = sub.add_parser("evolve", help="trace-distance profile along a time grid")
    p.add_argument("model")
    p.add_argument("--state", required=True, help="initial density JSON")
    p.add_argument("--grid", required=True, help="t0:t1:steps")
    p.add_argument("--target", default=None, help="target density JSON")
    p.add_argument("--csv", default=None, help="write CSV here instead of stdout")
    p.add_argument("--json", nargs="?", const="", default=None, metavar="OUT")
    _add_tolerance_flags(p)
    p.set_defaults(fn=_cmd_evolve)

    p = sub.add_parser("support", help="algebraic support vs evolution oracle")
    p.add_argument("model")
    p.add_argument("--psi", required=True, help="vector JSON")
    p.add_argument("--t", type=float, default=0.1)
    _add_tolerance_flags(p)
    p.set_defaults(fn=_cmd_support)

    p = sub.add_parser("scan", help="consistency scan over seeded random models")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", nargs="?", const="", default=None, metavar="OUT")
    _add_tolerance_flags(p)
    p.set_defaults(fn=_cmd_scan)

    p = sub.add_parser("dump-fixture", help="print a fixture in the model JSON schema")
    p.add_argument("name")
    _add_tolerance_flags(p)
    p.set_defaults(fn=_cmd_dump_fixture)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as exc:
        _log(f"invalid input: {exc}")
        return EXIT_INVALID_INPUT
    except (InternalInconsistencyError, NumericalFailureError) as exc:
        _log(f"internal failure: {exc}")
        return EXIT_INTERNAL
    except QmsError as exc:
        _log(f"error: {exc}")
        return EXIT_INTERNAL
    except json.JSONDecodeError as exc:
        _log(f"invalid JSON: {exc}")
        return EXIT_INVALID_INPUT
    except FileNotFoundError as exc:
        _log(f"missing file: {exc}")
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
