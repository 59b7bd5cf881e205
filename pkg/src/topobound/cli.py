"""Command-line entry point: ``topobound <subcommand> ...``.

Exit codes: 0 success, 2 unknown subcommand, 3 invalid parameters,
4 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from statistics import median
from typing import Sequence

from topobound import __version__
from topobound.codes import DISTANCE_BUDGET, StabilizerCode, build_code, distance, load_code
from topobound.correctability import (
    clean,
    is_correctable,
    lemma1_sweep,
    logical_count_on,
)
from topobound.errors import ResourceBudgetError, TopoboundError
from topobound.lattice import Region
from topobound.report import ParseError, linear_fit, power_law_fit, read_table, render_document, render_table
from topobound.rng import trial_rng, trial_seed

EXIT_OK = 0
EXIT_UNKNOWN_COMMAND = 2
EXIT_INVALID = 3
EXIT_BUDGET = 4

SUBCOMMANDS = (
    "code", "region", "clean", "lemma1-sweep", "encode-lightcone", "prep-dissipative",
    "uncertainty", "prep-correlations", "summary",
)
LOGICAL_NAMES = {"X1": (0, 0), "Z1": (0, 1), "X2": (1, 0), "Z2": (1, 1), "X3": (2, 0), "Z3": (2, 1)}


class UsageError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _int_list(text: str) -> list[int]:
    """Parse ``"3..6"``, ``"3,4,5"`` or ``"4"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty list {text!r}")
    return out


def _cell(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(","))


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _fraction(text: str) -> float:
    value = float(text)
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError("fraction must lie in [0, 1]")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=0, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp header line")

    code_opts = argparse.ArgumentParser(add_help=False)
    code_opts.add_argument("--code", default="toric2d", help="builtin code: toric2d or toric3d")
    code_opts.add_argument("--L", type=int, default=3, help="linear lattice size")
    code_opts.add_argument("--code-file", help="code JSON document (overrides --code)")
    code_opts.add_argument("--distance-budget", type=int, default=DISTANCE_BUDGET,
                           help="maximum subsets enumerated by the exact distance search")

    parser = _Parser(prog="topobound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"topobound {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    code = sub.add_parser("code", help="code construction queries")
    code_sub = code.add_subparsers(dest="action", parser_class=_Parser)
    info = code_sub.add_parser("info", parents=[common, code_opts], help="n, k, d and xi of a code")
    info.add_argument("--no-distance", action="store_true", help="skip the exact distance")
    code_sub.add_parser("distance", parents=[common, code_opts], help="exact distance with witness")

    region = sub.add_parser("region", help="region queries")
    region_sub = region.add_subparsers(dest="action", parser_class=_Parser)
    corr = region_sub.add_parser("correctable", parents=[common, code_opts], help="erasure test")
    _region_args(corr)

    cl = sub.add_parser("clean", parents=[common, code_opts], help="clean a logical off a region")
    cl.add_argument("--logical", default="Z1", choices=sorted(LOGICAL_NAMES))
    _region_args(cl)

    sw = sub.add_parser("lemma1-sweep", parents=[common], help="cube correctability sweep")
    sw.add_argument("--code", default="toric2d")
    sw.add_argument("--L", type=_int_list, default=[3, 4, 5, 6], help='sizes, e.g. "3..6"')

    el = sub.add_parser("encode-lightcone", parents=[common], help="light-cone distinguishability")
    el.add_argument("--code", default="toric2d", choices=("toric2d",))
    el.add_argument("--L", type=int, default=8)
    el.add_argument("--encoder", default="staircase", choices=("staircase",))
    el.add_argument("--depth-fraction", type=_fraction, default=1.0)
    el.add_argument("--depth", type=int, help="explicit truncation depth (overrides the fraction)")
    el.add_argument("--trials", type=int, default=1, help="randomized placements of A")

    pd = sub.add_parser("prep-dissipative", parents=[common], help="defect-clearing Monte Carlo")
    pd.add_argument("--L", type=_int_list, default=[8])
    pd.add_argument("--dynamics", choices=("sweep", "diffusive"), default="sweep")
    pd.add_argument("--trials", type=int, default=1000)

    un = sub.add_parser("uncertainty", parents=[common], help="entropic bounds on random ground states")
    un.add_argument("--code", default="toric2d", choices=("toric2d",))
    un.add_argument("--L", type=int, default=2)
    un.add_argument("--samples", type=int, default=1000)

    pc = sub.add_parser("prep-correlations", parents=[common], help="strip correlations after preparation")
    pc.add_argument("--L", type=int, default=8)
    pc.add_argument("--encoder", default="staircase", choices=("staircase",))
    pc.add_argument("--depth-fraction", type=_fraction, default=1.0)
    pc.add_argument("--depth", type=int)
    pc.add_argument("--separation-fraction", type=_fraction, default=0.5)
    pc.add_argument("--trials", type=int, default=1, help="randomized encoder origins and strip columns")

    sm = sub.add_parser("summary", help="aggregate CSV outputs")
    sm.add_argument("paths", nargs="+")
    return parser


def _region_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--region", help="comma-separated qubit indices")
    p.add_argument("--cube-center", type=_cell, help="cell coordinates, e.g. 0,0")
    p.add_argument("--cube-size", type=int)


def _load(args) -> StabilizerCode:
    if getattr(args, "code_file", None):
        return load_code(Path(args.code_file).read_text())
    if args.L < 2:
        raise UsageError("--L must be at least 2")
    return build_code(args.code, args.L)


def _region(args, code: StabilizerCode) -> Region:
    if args.region is not None:
        return Region.parse(args.region, code.lattice)
    if args.cube_center is None or args.cube_size is None:
        raise UsageError("give --region or both --cube-center and --cube-size")
    return code.lattice.cube(args.cube_center, args.cube_size)


def _config(args) -> dict:
    skip = {"out", "format", "no_timestamp"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_table(args, rows: list[dict], columns: Sequence[str]) -> None:
    fmt = args.format or "csv"
    _emit(args, render_table(rows, columns, _config(args), fmt, not args.no_timestamp))


def _emit_doc(args, payload: dict) -> None:
    if args.format == "csv":
        _emit_table(args, [payload], list(payload))
    else:
        _emit(args, render_document(payload, _config(args), not args.no_timestamp))


def cmd_code_info(args) -> None:
    code = _load(args)
    payload = {"name": code.name, "n": code.n, "k": code.k, "num_generators": code.num_generators,
               "xi": code.xi}
    if not args.no_distance:
        cert = distance(code, budget=args.distance_budget)
        payload.update({"d": cert.d, "distance_method": cert.method})
    _emit_doc(args, payload)


def cmd_code_distance(args) -> None:
    code = _load(args)
    cert = distance(code, budget=args.distance_budget)
    _emit_doc(args, {"name": code.name, "n": code.n, "k": code.k, "d": cert.d,
                     "witness": str(cert.witness), "method": cert.method})


def cmd_region_correctable(args) -> None:
    code = _load(args)
    region = _region(args, code)
    _emit_doc(args, {"region": str(region), "size": len(region),
                     "correctable": is_correctable(code, region),
                     "logical_classes_inside": logical_count_on(code, region)})


def cmd_clean(args) -> None:
    code = _load(args)
    pair, which = LOGICAL_NAMES[args.logical]
    if pair >= code.k:
        raise UsageError(f"{args.logical} does not exist for k = {code.k}")
    P = code.logical_pairs[pair][which]
    region = _region(args, code)
    res = clean(code, P, region)
    cert = "".join(str(int(b)) for b in res.stabilizer_certificate)
    _emit_doc(args, {"region": str(region), "original": str(res.original), "cleaned": str(res.cleaned),
                     "certificate": cert, "disjoint": res.cleaned.support.isdisjoint(region.sites),
                     "weight_before": res.original.weight, "weight_after": res.cleaned.weight})


def cmd_lemma1(args) -> None:
    rows = []
    for L in args.L:
        code = build_code(args.code, L)
        result = lemma1_sweep(code)
        for r in result.rows:
            rows.append({"code": args.code, "L": L, "R": r.R, "all_correctable": r.all_correctable,
                         "num_cubes_tested": r.num_cubes_tested, "R_star": result.R_star})
    _emit_table(args, rows, ["code", "L", "R", "all_correctable", "num_cubes_tested", "R_star"])


def _truncation(args, full_depth: int) -> int:
    if args.depth is not None:
        if args.depth < 0:
            raise UsageError("--depth must be non-negative")
        return min(args.depth, full_depth)
    return int(round(args.depth_fraction * full_depth))


def cmd_encode_lightcone(args) -> None:
    from topobound.dynamics.encoders import encoder_toric_2d, toric_input_sites
    from topobound.dynamics.experiment import theorem1_experiment

    if args.trials < 1:
        raise UsageError("--trials must be positive")
    code = build_code(args.code, args.L)
    rows = []
    for t in range(args.trials):
        if args.trials == 1:
            origin = (0, 0)
        else:
            origin = tuple(int(v) for v in trial_rng(args.seed, t).integers(0, args.L, size=2))
        full = encoder_toric_2d(args.L, origin, code.lattice)
        A = code.lattice.region(toric_input_sites(args.L, origin))
        depth = _truncation(args, full.depth)
        rep = theorem1_experiment(code, full.truncated(depth), A, reference=full)
        rows.append({"L": args.L, "depth": depth, "R": rep.R, "dBA": rep.dBA,
                     "cone_hits_A": rep.cone_hits_A, "D_full": rep.D_full, "D_loc": rep.D_loc,
                     "trial": t, "seed": trial_seed(args.seed, t), "origin_x": origin[0],
                     "origin_y": origin[1], "full_depth": full.depth, "cone_speed": rep.cone_speed})
    _emit_table(args, rows, ["L", "depth", "R", "dBA", "cone_hits_A", "D_full", "D_loc", "trial", "seed",
                             "origin_x", "origin_y", "full_depth", "cone_speed"])


def cmd_prep_dissipative(args) -> None:
    from topobound.dynamics.defects import dissipative_prep_mc

    if args.trials < 1 or min(args.L) < 2:
        raise UsageError("need --trials >= 1 and --L >= 2")
    rows = []
    for L in args.L:
        for r in dissipative_prep_mc(L, args.dynamics, args.trials, args.seed):
            rows.append(vars(r))
    _emit_table(args, rows, ["L", "dynamics", "trial", "seed", "initial_defects", "steps_to_clear",
                             "lower_bound"])


def cmd_uncertainty(args) -> None:
    from topobound.uncertainty import (
        anyon_basis,
        entropic_bound,
        eq5_check,
        ground_space,
        maassen_uffink_check,
        random_ground_state,
        s_matrix_numeric,
    )

    code = build_code(args.code, args.L)
    V = ground_space(code, seed=args.seed)
    S = s_matrix_numeric(code, V)
    bound = entropic_bound(S)
    b1, b2 = anyon_basis(code, 1, V), anyon_basis(code, 2, V)
    rows = []
    for i in range(args.samples):
        psi = random_ground_state(V, trial_rng(args.seed, i))
        h1, h2, _ = maassen_uffink_check(psi, b1, b2, bound)
        _, _, total = eq5_check(code, psi)
        rows.append({"sample": i, "H1": h1, "H2": h2, "bound": bound, "eq5_sum": total})
    _emit_table(args, rows, ["sample", "H1", "H2", "bound", "eq5_sum"])


def cmd_prep_correlations(args) -> None:
    from topobound.dynamics.encoders import prep_toric_2d
    from topobound.uncertainty import theorem2_experiment

    L = args.L
    code = build_code("toric2d", L)
    offset = int(round(args.separation_fraction * L))
    if offset <= 0 or offset >= L:
        raise UsageError("--separation-fraction must place the second strip on a different column")
    rows = []
    for t in range(args.trials):
        if args.trials == 1:
            origin, column = (0, 0), 0
        else:
            vals = trial_rng(args.seed, t).integers(0, L, size=3)
            origin, column = (int(vals[0]), int(vals[1])), int(vals[2])
        prep = prep_toric_2d(L, origin, code.lattice)
        depth = _truncation(args, prep.depth)
        rep = theorem2_experiment(code, prep.truncated(depth), 1, column=column, offset=offset)
        rows.append({"L": L, "depth": depth, "separation": rep.separation, "cones_disjoint": rep.cones_disjoint,
                     "corr": rep.corr, "H1": rep.H1, "H2": rep.H2, "Hjoint": rep.Hjoint,
                     "mutual_info": rep.mutual_info, "trial": t, "seed": trial_seed(args.seed, t)})
    _emit_table(args, rows, ["L", "depth", "separation", "cones_disjoint", "corr", "H1", "H2", "Hjoint",
                             "mutual_info", "trial", "seed"])


def report_summary(paths: Sequence[str]) -> str:
    """Human-readable aggregates of CSV outputs."""
    lines = []
    for path in paths:
        table = read_table(path)
        cols = set(table.columns)
        rows = table.rows
        lines.append(f"== {path}: {len(rows)} rows")
        if not rows:
            continue
        if "steps_to_clear" in cols:
            for dyn in sorted({r["dynamics"] for r in rows}):
                sizes = sorted({r["L"] for r in rows if r["dynamics"] == dyn})
                meds = []
                for L in sizes:
                    steps = [r["steps_to_clear"] for r in rows if r["dynamics"] == dyn and r["L"] == L]
                    meds.append(median(steps))
                    lines.append(f"{dyn} L={L}: trials={len(steps)} median={median(steps)} max={max(steps)} "
                                 f"max steps_to_clear / L = {max(steps) / L:.3f}")
                if len(sizes) >= 2 and min(meds) > 0:
                    gamma, r2 = power_law_fit(sizes, meds)
                    lines.append(f"{dyn}: median steps ~ L^{gamma:.3f} (R^2 = {r2:.3f})")
        elif "R_star" in cols:
            by_L = {}
            for r in rows:
                by_L[r["L"]] = r["R_star"]
            for L, rs in sorted(by_L.items()):
                lines.append(f"L={L}: R*={rs}")
            if len(by_L) >= 2:
                slope, _, r2 = linear_fit(list(by_L), list(by_L.values()))
                lines.append(f"R*(L) slope = {slope:.3f} (R^2 = {r2:.3f})")
        elif "D_full" in cols:
            exceptions = sum(1 for r in rows if not r["cone_hits_A"] and r["D_full"] != 0)
            values = sorted({r["D_full"] for r in rows})
            lines.append(f"D_full values: {values}; cone misses A in "
                         f"{sum(1 for r in rows if not r['cone_hits_A'])} rows; exceptions: {exceptions}")
        elif "eq5_sum" in cols:
            mu = sum(1 for r in rows if r["H1"] + r["H2"] < r["bound"] - 1e-9)
            eq5 = sum(1 for r in rows if r["eq5_sum"] > 1 + 1e-9)
            lines.append(f"entropic-bound violations: {mu}; moment-sum violations: {eq5}; "
                         f"min H1+H2 = {min(r['H1'] + r['H2'] for r in rows):.6f}")
        elif "mutual_info" in cols:
            bad = sum(1 for r in rows if r["cones_disjoint"] and abs(r["mutual_info"]) > 1e-12)
            lines.append(f"disjoint-cone rows: {sum(1 for r in rows if r['cones_disjoint'])}; "
                         f"nonzero mutual information among them: {bad}")
        else:
            lines.append("unrecognized table; columns: " + ",".join(table.columns))
    return "\n".join(lines) + "\n"


def cmd_summary(args) -> None:
    sys.stdout.write(report_summary(args.paths))


COMMANDS = {
    ("code", "info"): cmd_code_info,
    ("code", "distance"): cmd_code_distance,
    ("region", "correctable"): cmd_region_correctable,
    ("clean", None): cmd_clean,
    ("lemma1-sweep", None): cmd_lemma1,
    ("encode-lightcone", None): cmd_encode_lightcone,
    ("prep-dissipative", None): cmd_prep_dissipative,
    ("uncertainty", None): cmd_uncertainty,
    ("prep-correlations", None): cmd_prep_correlations,
    ("summary", None): cmd_summary,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, dispatch, and map failures to exit codes."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    positional = [a for a in argv if not a.startswith("-")]
    if positional and positional[0] not in SUBCOMMANDS:
        sys.stderr.write(parser.format_usage())
        sys.stderr.write(f"topobound: error: unknown subcommand {positional[0]!r}\n")
        return EXIT_UNKNOWN_COMMAND
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage() + "topobound: error: a subcommand is required",
                             EXIT_UNKNOWN_COMMAND)
        key = (args.command, getattr(args, "action", None))
        if key not in COMMANDS:
            raise UsageError(f"topobound {args.command}: missing or unknown action", EXIT_UNKNOWN_COMMAND)
        COMMANDS[key](args)
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip() + "\n")
        return exc.code
    except ParseError as exc:
        sys.stderr.write(f"topobound: parse error: {exc}\n")
        return EXIT_INVALID
    except ResourceBudgetError as exc:
        sys.stderr.write(f"topobound: resource budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except (TopoboundError, ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"topobound: error: {type(exc).__name__}: {exc}\n")
        return EXIT_INVALID
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
