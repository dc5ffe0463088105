"""Command-line front end.

Subcommands: sample, test, ldlr, phase-diagram, find-balanced. Flags may be
preloaded from a key=value config file (--config); explicit flags win. Exit
codes: 0 success, 2 invalid arguments, 3 budget exceeded, 4 regime or
feasibility error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Dict, List, Optional, Sequence

from .balanced import BalancedMotif, find_balanced_motif, motif_from_json_dict
from .errors import (
    BudgetExceededError,
    InfeasibleError,
    InvalidArgumentError,
    RegimeError,
)
from .hypergraph import parse_hypergraph_text, write_hypergraph_text
from .ldlr import (
    build_conditioning_spec,
    conditional_ldlr_exact_tiny,
    ldlr_norm_bruteforce,
    ldlr_norm_exact,
)
from .models import derive_params, sample_aux, sample_null, sample_planted
from .stats import classify_regime, estimate_separation, threshold_test

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3
EXIT_REGIME = 4


def _read_config(path: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidArgumentError(f"bad config line: {raw!r}")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(args: argparse.Namespace, casts: Dict[str, type]) -> None:
    """Fill still-unset (None) argument slots from the config file, if any."""
    if not getattr(args, "config", None):
        return
    for key, raw in _read_config(args.config).items():
        if key not in casts:
            raise InvalidArgumentError(f"unknown config key {key!r}")
        if getattr(args, key, None) is None:
            setattr(args, key, casts[key](raw))


def _float_list(text: str) -> List[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _int_list(text: str) -> List[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_param_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="key=value file supplying defaults")
    sp.add_argument("--n", type=int)
    sp.add_argument("--r", type=int)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")


PARAM_CASTS: Dict[str, type] = {
    "n": int,
    "r": int,
    "alpha": float,
    "beta": float,
    "gamma": float,
    "seed": int,
    "trials": int,
    "degree": int,
    "delta": float,
    "out": str,
    "format": str,
    "model": str,
    "stat": str,
    "mode": str,
    "input": str,
    "motif_file": str,
    "alpha_grid": str,
    "gamma_grid": str,
    "n_grid": str,
}


def _require(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise InvalidArgumentError(f"--{name.replace('_', '-')} is required")


def _params_from_args(args: argparse.Namespace):
    _require(args, "n", "r", "alpha", "beta", "gamma")
    return derive_params(args.n, args.r, args.alpha, args.beta, args.gamma)


def cmd_sample(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    _require(args, "seed")
    if args.model == "null":
        hg = sample_null(params, args.seed)
        text = write_hypergraph_text(hg)
    elif args.model == "planted":
        sample = sample_planted(params, args.seed)
        hg = sample.Y.to_hypergraph()
        z_line = "Z: " + " ".join(str(v) for v in sorted(sample.Z))
        text = write_hypergraph_text(hg, comments=[z_line])
    else:
        aux, Y = sample_aux(params, args.seed)
        hg = Y.to_hypergraph()
        signs = " ".join("1" if u > 0 else "-1" for u in aux.u)
        text = write_hypergraph_text(hg, comments=[f"u-signs: {signs}"])
    _emit(text, args.out)
    return EXIT_OK


def _resolve_motif(args: argparse.Namespace) -> BalancedMotif:
    if getattr(args, "motif_file", None):
        with open(args.motif_file, "r", encoding="utf-8") as fh:
            return motif_from_json_dict(json.load(fh))
    _require(args, "alpha", "beta", "gamma", "r")
    return find_balanced_motif(args.alpha, args.beta, args.gamma, args.r)


def cmd_test(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    statistic = "edge"
    motif: Optional[BalancedMotif] = None
    if args.stat == "motif":
        motif = _resolve_motif(args)
        statistic = motif
    if args.input:
        with open(args.input, "r", encoding="utf-8") as fh:
            hg, _ = parse_hypergraph_text(fh.read())
        result = threshold_test(hg, params, statistic)
        payload = {
            "statistic": result.statistic,
            "threshold": result.threshold,
            "decision": result.decision,
        }
        if motif is not None:
            payload["motif"] = motif.to_json_dict()
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
        return EXIT_OK
    _require(args, "trials", "seed")
    report = estimate_separation(params, statistic, args.trials, args.seed)
    if (args.format or "json") == "csv":
        _emit(report.to_csv(), args.out)
    else:
        payload = report.to_json_dict()
        if motif is not None:
            payload["motif"] = motif.to_json_dict()
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_ldlr(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    _require(args, "degree")
    mode = args.mode or "exact"
    if mode == "exact":
        result = ldlr_norm_exact(params, args.degree)
    elif mode == "bruteforce":
        result = ldlr_norm_bruteforce(params, args.degree)
    elif mode == "conditional":
        if args.delta is None:
            raise InvalidArgumentError("delta required for conditional mode")
        spec = build_conditioning_spec(params, args.delta, args.degree)
        result = conditional_ldlr_exact_tiny(params, spec)
    else:
        raise InvalidArgumentError(f"unknown mode {mode!r}")
    if (args.format or "json") == "csv":
        _emit(result.to_csv(), args.out)
    else:
        _emit(result.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_phase_diagram(args: argparse.Namespace) -> int:
    _require(args, "r", "beta", "alpha_grid", "gamma_grid", "n_grid")
    alphas = _float_list(args.alpha_grid)
    gammas = _float_list(args.gamma_grid)
    ns = _int_list(args.n_grid)
    degree = args.degree if args.degree is not None else 10
    trials = args.trials or 0
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["alpha", "gamma", "n", "regime", "ldlr_minus_1", "separation", "sep_se"]
    )
    for alpha in alphas:
        for gamma in gammas:
            for n in ns:
                try:
                    regime = classify_regime(alpha, args.beta, gamma, args.r)
                    params = derive_params(n, args.r, alpha, args.beta, gamma)
                except InvalidArgumentError:
                    writer.writerow([alpha, gamma, n, "invalid", "", "", ""])
                    continue
                ldlr = ldlr_norm_exact(params, degree)
                sep = se = ""
                if trials > 0:
                    _require(args, "seed")
                    report = estimate_separation(params, "edge", trials, args.seed)
                    sep = repr(report.separation)
                    se = repr(report.mean_planted_se)
                writer.writerow(
                    [alpha, gamma, n, regime, repr(ldlr.value_minus_one), sep, se]
                )
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_find_balanced(args: argparse.Namespace) -> int:
    _require(args, "alpha", "beta", "gamma", "r")
    motif = find_balanced_motif(args.alpha, args.beta, args.gamma, args.r)
    _emit(motif.to_json() + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="denselab",
        description="Planted dense subhypergraph detection laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="draw one hypergraph and write it out")
    _add_param_flags(sp)
    sp.add_argument("--model", choices=["null", "planted", "aux"], default="null")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("test", help="threshold test or separation experiment")
    _add_param_flags(sp)
    sp.add_argument("--stat", choices=["edge", "motif"], default="edge")
    sp.add_argument("--input", help="hypergraph text file for a single decision")
    sp.add_argument("--motif-file", dest="motif_file", help="motif JSON from find-balanced")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--format", choices=["json", "csv"])
    sp.set_defaults(func=cmd_test)

    sp = sub.add_parser("ldlr", help="low-degree likelihood-ratio norm")
    _add_param_flags(sp)
    sp.add_argument("--degree", type=int)
    sp.add_argument("--mode", choices=["exact", "bruteforce", "conditional"])
    sp.add_argument("--delta", type=float)
    sp.add_argument("--format", choices=["json", "csv"])
    sp.set_defaults(func=cmd_ldlr)

    sp = sub.add_parser("phase-diagram", help="regime/LDLR sweep over a grid")
    _add_param_flags(sp)
    sp.add_argument("--alpha-grid", dest="alpha_grid")
    sp.add_argument("--gamma-grid", dest="gamma_grid")
    sp.add_argument("--n-grid", dest="n_grid")
    sp.add_argument("--degree", type=int)
    sp.add_argument("--trials", type=int)
    sp.set_defaults(func=cmd_phase_diagram)

    sp = sub.add_parser("find-balanced", help="balanced motif for the given regime")
    _add_param_flags(sp)
    sp.set_defaults(func=cmd_find_balanced)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, PARAM_CASTS)
        return args.func(args)
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (RegimeError, InfeasibleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGIME


if __name__ == "__main__":
    sys.exit(main())
