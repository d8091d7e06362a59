"""Command-line front end.

Exit codes: 0 success / positive verdict, 1 negative verdict, 2 error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .abcmi import AbcmiReport, check_abcmi
from .distribution import JointPmf
from .errors import MwrcError
from .imeasure import compute_atoms
from .problem import ProblemFile, load_problem
from .rates import (
    RegionReport,
    assign_rates,
    check_conditions,
    intersection_feasible,
    kappa_star,
    min_feasible_kappa,
)
from .simulator import MODES, SimConfig, run_sim
from .subsets import full_mask, label, nonempty

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


def fmt(x: float) -> str:
    return f"{x:.9f}"


def _round(obj: Any) -> Any:
    """Round every float to 9 decimals so reports are stable across platforms."""
    if isinstance(obj, float):
        return round(obj, 9) + 0.0
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dump_json(report: dict) -> str:
    return json.dumps(_round(report), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------- reports

def _entropy_section(pmf: JointPmf) -> dict:
    return {label(S): float(pmf.subset_entropies[S]) for S in nonempty(pmf.L)}


def _abcmi_section(rep: AbcmiReport) -> dict:
    return {
        "overall": rep.overall,
        "negative_atom": rep.negative_atom,
        "weights": [
            {
                "K": r.K,
                "mu_max": r.mu_max,
                "mu_min": r.mu_min,
                "allowed_ratio_bound": r.allowed_ratio_bound,
                "satisfied": r.satisfied,
                "negative_atom": r.negative_atom,
            }
            for r in rep.records
        ],
    }


def _region_section(rep: RegionReport) -> dict:
    return {
        "C1": rep.c1,
        "C2": rep.c2,
        "constraints": [
            {"S": label(r.S), "lhs": r.lhs, "rhs": r.rhs, "slack": r.slack} for r in rep.records
        ],
    }


def _lines_abcmi(rep: AbcmiReport) -> list[str]:
    out = [f"ABCMI: {'pass' if rep.overall else 'fail'}"]
    if not rep.records:
        out.append("  (vacuous for L = 2)")
    for r in rep.records:
        flag = " negative-atom" if r.negative_atom else ""
        out.append(
            f"  K={r.K}  mu_max={fmt(r.mu_max)}  mu_min={fmt(r.mu_min)}  "
            f"bound={fmt(r.allowed_ratio_bound)}  {'ok' if r.satisfied else 'VIOLATED'}{flag}"
        )
    return out


def _lines_region(rep: RegionReport) -> list[str]:
    out = [f"C1: {'pass' if rep.c1 else 'fail'}   C2: {'pass' if rep.c2 else 'fail'}"]
    for r in rep.records:
        out.append(f"  S={label(r.S):<12} sum r={fmt(r.lhs)}  H(W_S|W_S^c)={fmt(r.rhs)}  slack={fmt(r.slack)}")
    return out


def _rates_line(r) -> str:
    return "r = (" + ", ".join(fmt(v) for v in r.r) + ")"


# --------------------------------------------------------------- commands

def cmd_analyze(prob: ProblemFile, args) -> tuple[int, dict, list[str]]:
    pmf, ch = prob.source, prob.channel
    atoms = compute_atoms(pmf)
    ab = check_abcmi(atoms)
    r = assign_rates(atoms)
    region = check_conditions(pmf, r)
    ks = kappa_star(pmf, ch)
    report = {
        "L": pmf.L,
        "alphabet_sizes": list(pmf.alphabet_sizes),
        "entropies": _entropy_section(pmf),
        "atoms": {label(K): v for K, v in atoms.items()},
        "abcmi": _abcmi_section(ab),
        "rates": {"r": list(r.r), "clamped": [i + 1 for i in r.clamped],
                  "negative": [i + 1 for i in r.negative]},
        "region": _region_section(region),
        "kappa_star": ks,
    }
    lines = [f"L = {pmf.L}, alphabet sizes {list(pmf.alphabet_sizes)}", "Entropies H(W_S):"]
    lines += [f"  {label(S):<14} {fmt(pmf.subset_entropies[S])}" for S in nonempty(pmf.L)]
    lines.append("Atoms mu*(a(K)):")
    lines += [f"  {label(K):<14} {fmt(v)}" for K, v in atoms.items()]
    lines += _lines_abcmi(ab)
    lines.append(_rates_line(r))
    lines += _lines_region(region)
    lines.append(f"kappa* = {fmt(ks)}")
    return EXIT_OK, report, lines


def cmd_abcmi(prob: ProblemFile, args):
    ab = check_abcmi(compute_atoms(prob.source))
    return (EXIT_OK if ab.overall else EXIT_NEGATIVE), {"abcmi": _abcmi_section(ab)}, _lines_abcmi(ab)


def cmd_rates(prob: ProblemFile, args):
    r = assign_rates(compute_atoms(prob.source))
    region = check_conditions(prob.source, r)
    report = {"rates": {"r": list(r.r), "clamped": [i + 1 for i in r.clamped],
                        "negative": [i + 1 for i in r.negative]},
              "region": _region_section(region)}
    ok = region.c1 and region.c2 and not r.negative
    return (EXIT_OK if ok else EXIT_NEGATIVE), report, [_rates_line(r)] + _lines_region(region)


def cmd_kappa(prob: ProblemFile, args):
    pmf, ch = prob.source, prob.channel
    ks = kappa_star(pmf, ch)
    caps = ch.capacities()
    full = full_mask(pmf.L)
    per_user = []
    for i in range(pmf.L):
        num = float(pmf.subset_entropies[full] - pmf.subset_entropies[1 << i])
        per_user.append({"user": i + 1, "numerator": num, "capacity": caps[i], "ratio": num / caps[i]})
    kmin = min_feasible_kappa(pmf, ch)
    report = {"kappa_star": ks, "per_user": per_user, "kappa_min_feasible": kmin}
    lines = [f"kappa* = {fmt(ks)}"]
    lines += [
        f"  user {u['user']}: H(rest|W_i)={fmt(u['numerator'])}  capacity={fmt(u['capacity'])}  ratio={fmt(u['ratio'])}"
        for u in per_user
    ]
    lines.append(
        "smallest kappa with intersecting regions: "
        + (fmt(kmin) if kmin is not None else "none within search range")
    )
    return EXIT_OK, report, lines


def _kappas(args, prob: ProblemFile) -> list[float]:
    raw = args.kappa if args.kappa is not None else prob.simulation.get("kappa")
    if raw is None:
        raise MwrcError("--kappa is required")
    try:
        vals = [float(v) for v in str(raw).split(",")]
    except ValueError as exc:
        raise MwrcError(f"--kappa: {exc}") from exc
    if args.relative:
        ks = kappa_star(prob.source, prob.channel)
        vals = [v * ks for v in vals]
    if any(not v > 0 for v in vals):
        raise MwrcError(f"kappa must be positive, got {vals}")
    return vals


def cmd_feasible(prob: ProblemFile, args):
    vals = _kappas(args, prob)
    if len(vals) != 1:
        raise MwrcError("feasible takes a single --kappa value")
    kappa = vals[0]
    res = intersection_feasible(prob.source, prob.channel, kappa)
    report = {"kappa": kappa, "feasible": res.feasible,
              "witness": list(res.witness.r) if res.witness else None}
    lines = [f"kappa = {fmt(kappa)}: {'feasible' if res.feasible else 'infeasible'}"]
    if res.witness:
        lines.append("witness " + _rates_line(res.witness))
    return (EXIT_OK if res.feasible else EXIT_NEGATIVE), report, lines


def cmd_simulate(prob: ProblemFile, args):
    sim = prob.simulation
    m = args.m if args.m is not None else sim.get("m", 6)
    trials = args.trials if args.trials is not None else sim.get("trials", 1000)
    seed = args.seed if args.seed is not None else sim.get("seed", 0)
    mode = args.mode if args.mode is not None else sim.get("mode", "ideal-channel")
    ks = kappa_star(prob.source, prob.channel)
    rows = []
    for kappa in _kappas(args, prob):
        cfg = SimConfig(m=m, kappa=kappa, trials=trials, seed=seed, mode=mode, dither=not args.no_dither)
        res = run_sim(prob.source, prob.channel, cfg)
        row = res.to_dict()
        row["kappa_over_kappa_star"] = kappa / ks if ks > 0 else None
        rows.append(row)
    report = {
        "config": {"m": m, "trials": trials, "seed": seed, "mode": rows[0]["mode"],
                   "dither": not args.no_dither},
        "kappa_star": ks,
        "runs": rows,
    }
    lines = [f"m={m} trials={trials} seed={seed} mode={rows[0]['mode']}  kappa*={fmt(ks)}",
             f"{'kappa':>12} {'kappa/k*':>12} {'n':>4} {'bits':>10} {'delivered':>9} "
             f"{'pe':>12} {'wilson_lo':>12} {'wilson_hi':>12}"]
    for row in rows:
        ratio = row["kappa_over_kappa_star"]
        delivered = "-" if row["delivered"] is None else ("yes" if row["delivered"] else "no")
        lines.append(
            f"{fmt(row['kappa']):>12} {(fmt(ratio) if ratio is not None else '-'):>12} {row['n']:>4} "
            f"{','.join(map(str, row['bits'])):>10} {delivered:>9} {fmt(row['pe_overall']):>12} "
            f"{fmt(row['wilson_interval'][0]):>12} {fmt(row['wilson_interval'][1]):>12}"
        )
        lines.append("    per-user pe: " + ", ".join(fmt(p) for p in row["pe_per_user"]))
    return EXIT_OK, report, lines


COMMANDS: dict[str, Callable] = {
    "analyze": cmd_analyze,
    "abcmi": cmd_abcmi,
    "rates": cmd_rates,
    "kappa": cmd_kappa,
    "feasible": cmd_feasible,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mwrc",
        description="Correlated sources over the finite-field multi-way relay channel.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("problem", help="JSON problem file")
        p.add_argument("--out", help="write the machine-readable report (JSON) here")
        return p

    add("analyze", "entropies, atoms, ABCMI, rates, C1/C2 and kappa*")
    add("abcmi", "ABCMI verdict (exit 1 on fail)")
    add("rates", "atom-based rate tuple and region check (exit 1 on fail)")
    add("kappa", "threshold kappa* and the smallest kappa with intersecting regions")
    for name, help_ in (("feasible", "do the source and kappa-scaled channel regions intersect?"),
                        ("simulate", "Monte Carlo run of the dithered separation scheme")):
        p = add(name, help_)
        p.add_argument("--kappa", help="channel uses per source symbol"
                       + (" (comma list for a sweep)" if name == "simulate" else ""))
        p.add_argument("--relative", action="store_true",
                       help="interpret --kappa as multiples of kappa*")
        if name == "simulate":
            p.add_argument("--m", type=int, help="source block length")
            p.add_argument("--trials", type=int)
            p.add_argument("--seed", type=int)
            p.add_argument("--mode", choices=MODES + ("ideal", "symbol"))
            p.add_argument("--no-dither", action="store_true",
                           help="send undithered bin indices")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        prob = load_problem(args.problem)
        code, report, lines = COMMANDS[args.command](prob, args)
    except MwrcError as exc:
        name = type(exc).__name__
        msg = str(exc)
        print(f"error: {msg if name in ('MwrcError', 'ProblemFileError') else f'{name}: {msg}'}",
              file=sys.stderr)
        return EXIT_ERROR
    print("\n".join(lines))
    if args.out:
        Path(args.out).write_text(dump_json({"command": args.command, **report}))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
