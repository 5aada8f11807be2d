"""Command-line front end: ``nldistill {eval,distill,optimize,simulate}``.

Exit codes: 0 success, 1 domain or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .box import (
    BITS,
    DEFAULT_TOL,
    CondProbTable,
    DomainError,
    EtaGammaParams,
    InvalidTableError,
    chsh,
    classify,
    correlators,
    eta_gamma_of,
    from_eta_gamma,
    marginals,
    pr_box,
    signalling_residual,
    white_noise_box,
)
from .distill import iterate_distill, xor_wire
from .optimize import (
    EmptyRegionError,
    boundary_search,
    consistency_report,
    gain_grid,
    grid_search,
    optimum_dict,
)
from .quantum import planar_frame, singlet_box, tlm_slack
from .simulate import (
    DegenerateCountsError,
    NoiseModel,
    report_table,
    run_experiment,
    visibility_for_chsh,
)
from .svg import gain_heatmap, planar_boundary

# rounded inputs such as eta=0.019, gamma=0.164 overshoot the arcsine bound by ~4e-3
CLI_QUANTUM_TOL = 5e-3

DATA_ERRORS = (
    DomainError,
    InvalidTableError,
    DegenerateCountsError,
    EmptyRegionError,
    OSError,
    json.JSONDecodeError,
    KeyError,
)


class UsageError(Exception):
    pass


# -- box I/O -----------------------------------------------------------------


def load_box(spec: str) -> CondProbTable:
    """Read a box from JSON or CSV.

    Experiment reports are accepted too; ``report.json#P1`` selects a table
    (default ``Pd``).
    """
    path, _, name = spec.partition("#")
    text = Path(path).read_text()
    label = Path(path).stem
    if path.endswith(".csv"):
        rows = list(csv.DictReader(io.StringIO(text)))
        if rows and "box" in rows[0]:
            which = name or "Pd"
            rows = [r for r in rows if r["box"] == which]
            if not rows:
                raise InvalidTableError(f"no table {which!r} in {path}")
            label = which
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["x", "y", "a", "b", "p"], extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)
        return CondProbTable.from_csv(buf.getvalue(), label)
    data = json.loads(text)
    if "p" in data:
        return CondProbTable.from_dict(data)
    if "tables" in data:
        which = name or "Pd"
        if which not in data["tables"]:
            raise InvalidTableError(f"no table {which!r} in {path}")
        return CondProbTable(np.asarray(data["tables"][which], dtype=float), which)
    raise InvalidTableError(f"{path} holds neither a box nor an experiment report")


def write_box(box: CondProbTable, path: str) -> None:
    text = box.to_csv() if path.endswith(".csv") else box.to_json() + "\n"
    Path(path).write_text(text)


def _add_source_args(p: argparse.ArgumentParser, multi_box: bool = False) -> None:
    g = p.add_argument_group("box source (exactly one)")
    if multi_box:
        g.add_argument("--box", action="append", metavar="FILE",
                       help="box JSON/CSV; give twice for two different boxes")
    else:
        g.add_argument("--box", metavar="FILE", help="box JSON or CSV file")
    g.add_argument("--eta", type=float, help="family parameter eta (needs --gamma)")
    g.add_argument("--gamma", type=float, help="family parameter gamma (needs --eta)")
    g.add_argument("--phi", type=float, metavar="DEG", help="planar singlet frame angle in degrees")
    g.add_argument("--visibility", type=float, default=1.0, help="singlet visibility for --phi")
    g.add_argument("--pr", action="store_true", help="the PR box")
    g.add_argument("--white-noise", action="store_true", help="the uniform box")


def _sources(args) -> list[CondProbTable]:
    boxes = args.box if isinstance(args.box, list) else ([args.box] if args.box else [])
    chosen = []
    if boxes:
        chosen.append("box")
    if args.eta is not None or args.gamma is not None:
        if args.eta is None or args.gamma is None:
            raise UsageError("--eta and --gamma must be given together")
        chosen.append("eta/gamma")
    if args.phi is not None:
        chosen.append("phi")
    if args.pr:
        chosen.append("pr")
    if args.white_noise:
        chosen.append("white-noise")
    if len(chosen) != 1:
        raise UsageError(f"give exactly one box source, got {chosen or 'none'}")
    kind = chosen[0]
    if kind == "box":
        return [load_box(b) for b in boxes]
    if kind == "eta/gamma":
        return [from_eta_gamma(EtaGammaParams(args.eta, args.gamma), "family")]
    if kind == "phi":
        return [singlet_box(planar_frame(math.radians(args.phi)), args.visibility).with_label(
            f"singlet phi={args.phi}deg")]
    if kind == "pr":
        return [pr_box()]
    return [white_noise_box()]


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _render(metrics: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(metrics, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric", "value"])
        for k, v in _flatten(metrics):
            w.writerow([k, v])
        return buf.getvalue()
    lines = []
    for k, v in _flatten(metrics):
        lines.append(f"{k:<28} {v}")
    return "\n".join(lines) + "\n"


def _flatten(d: dict, prefix: str = ""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        else:
            yield key, v


# -- commands ----------------------------------------------------------------


def box_metrics(P: CondProbTable, tol: float, quantum_tol: float) -> dict:
    out = {"label": P.label, "class": str(classify(P, tol, quantum_tol))}
    if not P.is_valid(tol):
        raise InvalidTableError("table is not a normalized probability table")
    c = correlators(P, tol)
    alice, bob = marginals(P, tol)
    out["chsh"] = chsh(P, tol)
    out["correlators"] = {f"C{x}{y}": float(c[s]) for s, (x, y) in enumerate(BITS)}
    out["marginals"] = {
        f"xy={x}{y}": {"alice_a0": float(alice[s, 0]), "bob_b0": float(bob[s, 0])}
        for s, (x, y) in enumerate(BITS)
    }
    out["signalling_residual"] = signalling_residual(P)
    out["arcsine_slack"] = tlm_slack(np.clip(c, -1.0, 1.0))
    fam = eta_gamma_of(P, max(tol, 1e-9))
    if fam is not None:
        out["family"] = {"eta": fam.eta, "gamma": fam.gamma}
    return out


def cmd_eval(args) -> int:
    (P,) = _sources(args)[:1]
    metrics = box_metrics(P, args.tol, args.quantum_tol)
    _emit(_render(metrics, args.format), args.out)
    return 0


def cmd_distill(args) -> int:
    boxes = _sources(args)
    if len(boxes) > 2:
        raise UsageError("distill takes at most two boxes")
    P1, P2 = boxes[0], boxes[-1]
    if args.iterations:
        fam = eta_gamma_of(P1, args.tol)
        if fam is None or (len(boxes) == 2 and not P1.allclose(P2, args.tol)):
            raise DomainError("--iterations needs a single box from the (eta, gamma) family")
        traj = iterate_distill(fam, args.iterations)
        rows = [{"step": k, "eta": p.eta, "gamma": p.gamma, "chsh": n} for k, (p, n) in enumerate(traj)]
        if args.format == "json":
            sys.stdout.write(json.dumps(rows, indent=2) + "\n")
        else:
            sep = "," if args.format == "csv" else "  "
            sys.stdout.write(sep.join(["step", "eta", "gamma", "chsh"]) + "\n")
            for r in rows:
                sys.stdout.write(sep.join([str(r["step"]), f"{r['eta']:.6f}", f"{r['gamma']:.6f}",
                                           f"{r['chsh']:.6f}"]) + "\n")
    Pd = xor_wire(P1, P2, args.tol).with_label("distilled")
    n1, n2, nd = chsh(P1, args.tol), chsh(P2, args.tol), chsh(Pd, args.tol)
    metrics = {"chsh_P1": n1, "chsh_P2": n2, "chsh_distilled": nd, "gain": nd - max(n1, n2)}
    fam = eta_gamma_of(Pd, max(args.tol, 1e-9))
    if fam is not None:
        metrics["distilled_family"] = {"eta": fam.eta, "gamma": fam.gamma}
    sys.stdout.write(_render(metrics, args.format))
    if args.out:
        write_box(Pd, args.out)
    return 0


def cmd_optimize(args) -> int:
    lo, hi = math.radians(args.phi_lo), math.radians(args.phi_hi)
    report: dict = {"settings": {"mode": args.mode, "resolution": args.resolution, "tol": args.tol,
                                 "phi_lo_deg": args.phi_lo, "phi_hi_deg": args.phi_hi,
                                 "phi_tol_deg": args.phi_tol}}
    phi_tol = math.radians(args.phi_tol)
    optimum = None
    if args.mode == "both":
        rep = consistency_report(args.resolution, args.tol, lo, hi, phi_tol)
        report.update(rep.to_dict())
        optimum = rep.grid.params
    elif args.mode == "grid":
        g = grid_search(args.resolution, args.tol)
        report["grid"] = optimum_dict(g)
        optimum = g.params
    else:
        b = boundary_search(lo, hi, phi_tol)
        report["boundary"] = optimum_dict(b)
        optimum = b.params
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.format == "text":
        for key in ("grid", "boundary"):
            if key in report:
                r = report[key]
                extra = f"  phi*={r['phi_deg']:.4f} deg" if "phi_deg" in r else ""
                print(f"{key:<9} eta*={r['eta']:.6f}  gamma*={r['gamma']:.6f}  "
                      f"gain={r['gain']:.6f}  slack={r['arcsine_slack']:+.2e}{extra}")
        if args.out:
            Path(args.out).write_text(text)
    else:
        _emit(text, args.out)

    if args.grid_csv or args.svg:
        eta, gamma, values, feasible = gain_grid(args.resolution, args.tol)
        if args.grid_csv:
            with open(args.grid_csv, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["eta", "gamma", "gain", "feasible"])
                for i, e in enumerate(eta):
                    for j, g in enumerate(gamma):
                        w.writerow([repr(float(e)), repr(float(g)), repr(float(values[i, j])),
                                    int(feasible[i, j])])
        if args.svg:
            se, sg, sv, sf = gain_grid(args.svg_resolution, args.tol)
            Path(args.svg).write_text(gain_heatmap(
                se, sg, sv, sf, planar_boundary(), optimum.as_tuple() if optimum else None))
    return 0


def cmd_simulate(args) -> int:
    phi = math.radians(args.phi)
    vis = args.visibility
    if args.target_chsh is not None:
        vis = visibility_for_chsh(args.target_chsh, phi)
    noise = NoiseModel(vis, math.radians(args.jitter), args.background)
    report = run_experiment(phi, noise, args.shots_pair, args.shots_fourfold, args.seed)
    table_csv = report_table(report, "csv")
    if args.out:
        Path(args.out + ".json").write_text(report.to_json() + "\n")
        Path(args.out + ".csv").write_text(table_csv)
    if args.format == "json":
        sys.stdout.write(report.to_json() + "\n")
    elif args.format == "csv":
        sys.stdout.write(table_csv)
    else:
        sys.stdout.write(report_table(report, "text"))
        for name, label in (("P1", "box 1"), ("P2", "box 2"), ("Pd", "distilled")):
            print(f"N({name}) = {report.estimates[name]}   [{label}]")
        print(f"distillation gap: {report.significance:.2f} combined standard errors")
        for flag in report.flags:
            print(f"warning: {flag}")
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (prefix for simulate)")
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("--seed", type=int, default=0, help="random seed")

    parser = argparse.ArgumentParser(prog="nldistill", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="metrics of one box")
    _add_source_args(p)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--quantum-tol", type=float, default=CLI_QUANTUM_TOL,
                   help="tolerance of the arcsine quantum criterion")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("distill", parents=[common], help="XOR-wire two boxes")
    _add_source_args(p, multi_box=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--iterations", type=int, default=0, help="print an n-step self-wiring trajectory")
    p.set_defaults(func=cmd_distill)

    p = sub.add_parser("optimize", parents=[common], help="maximize the distillation gain")
    p.add_argument("--mode", choices=("grid", "boundary", "both"), default="both")
    p.add_argument("--resolution", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-9, help="arcsine feasibility tolerance")
    p.add_argument("--phi-lo", type=float, default=5.0, metavar="DEG")
    p.add_argument("--phi-hi", type=float, default=25.0, metavar="DEG")
    p.add_argument("--phi-tol", type=float, default=math.degrees(1e-6), metavar="DEG")
    p.add_argument("--grid-csv", metavar="FILE", help="dump the full gain grid")
    p.add_argument("--svg", metavar="FILE", help="write a gain heatmap")
    p.add_argument("--svg-resolution", type=int, default=120)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", parents=[common], help="emulate the counting experiment")
    p.add_argument("--phi", type=float, default=15.95, metavar="DEG")
    vis = p.add_mutually_exclusive_group()
    vis.add_argument("--visibility", type=float, default=1.0)
    vis.add_argument("--target-chsh", type=float, help="pick the visibility giving this single-box CHSH")
    p.add_argument("--jitter", type=float, default=0.0, metavar="DEG", help="angle jitter sigma")
    p.add_argument("--background", type=float, default=0.0, help="double-pair fraction of four-folds")
    p.add_argument("--shots-pair", type=int, default=10**6)
    p.add_argument("--shots-fourfold", type=int, default=10**5)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except DATA_ERRORS as exc:
        print(f"nldistill: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
