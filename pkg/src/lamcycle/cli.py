"""Command line front end.

Every capability is a subcommand with deterministic, machine-readable
output: --format table (default), csv, or json. Sweeps stream csv or
json-lines. Data goes to stdout or --output; progress goes to stderr only.
Exit codes: 0 success, 1 domain error (a range guard or failed check),
2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .arith import factor, lambda_iter, phi_iter
from .chains import build_nj, ell_chain, lambda_chain, sophie_germain_chain
from .cycles import (
    BRUTE_FORCE_CAP,
    census_bruteforce,
    census_structural,
    cycle_count_upper_bound,
    unit_cycles_lower_bound,
)
from .errors import FactorizationError, RangeError
from .stats import (
    HCutoff,
    default_cutoff,
    h_prime_partial_sum,
    moments,
    pi_progression,
    reciprocal_prime_sum,
    small_prime_weight,
    small_prime_weight_depth,
)
from .sweep import SweepConfig, SweepRun, write_csv, write_jsonl

CONFIG_ENV = "LAMCYCLE_CONFIG"

_SWEEP_KEYS = {"segment_size": int, "sample_stride": int, "cutoff_q": int, "jobs": int}


def _load_config_defaults() -> dict:
    """key=value sweep defaults from the file named by LAMCYCLE_CONFIG."""
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    out = {}
    with open(path) as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {raw!r} is not key=value")
            key, val = (part.strip() for part in line.split("=", 1))
            if key in _SWEEP_KEYS:
                out[key] = _SWEEP_KEYS[key](val)
            else:
                raise ValueError(f"unknown config key {key!r}")
    return out


class _Out:
    """Owns the data stream; table/csv/json rendering helpers."""

    def __init__(self, args):
        self.fmt = args.format
        self.path = args.output
        self.fh = open(self.path, "w") if self.path else sys.stdout

    def close(self):
        if self.path:
            self.fh.close()

    def emit(self, report: dict, table_lines: list[str]):
        if self.fmt == "json":
            self.fh.write(json.dumps(report) + "\n")
        elif self.fmt == "csv":
            flat = _flatten(report)
            self.fh.write(",".join(flat) + "\n")
            self.fh.write(",".join(_csv_cell(report[k] if "." not in k else _dig(report, k))
                                    for k in flat) + "\n")
        else:
            self.fh.write("\n".join(table_lines) + "\n")


def _flatten(report: dict, prefix: str = "") -> list[str]:
    keys = []
    for k, v in report.items():
        if isinstance(v, dict):
            keys.extend(_flatten(v, f"{prefix}{k}."))
        elif isinstance(v, list):
            continue  # row lists render through json, not one-line csv
        else:
            keys.append(f"{prefix}{k}")
    return keys


def _dig(report: dict, dotted: str):
    cur = report
    for part in dotted.split("."):
        cur = cur[part]
    return cur


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _fraction_fields(fr) -> dict:
    return {"numerator": fr.numerator, "denominator": fr.denominator,
            "value": fr.numerator / fr.denominator}


# -- subcommand bodies -------------------------------------------------------

def _cmd_factor(args, out: _Out):
    fn = factor(args.n)
    report = {"n": args.n, "factors": [list(pe) for pe in fn.factors],
              "display": str(fn)}
    out.emit(report, [f"{args.n} = {fn}"])


def _cmd_lambda(args, out: _Out):
    lam = lambda_iter(args.n, 1)
    report = {"n": args.n, "lambda": lam.value,
              "factors": [list(pe) for pe in lam.factors]}
    out.emit(report, [f"lambda({args.n}) = {lam.value} = {lam}"])


def _cmd_lambda_iter(args, out: _Out):
    fn = phi_iter(args.n, args.k) if args.phi else lambda_iter(args.n, args.k)
    name = "phi" if args.phi else "lambda"
    report = {"n": args.n, "k": args.k, "map": name, "value": fn.value,
              "factors": [list(pe) for pe in fn.factors]}
    out.emit(report, [str(fn.value)])


def _cmd_chain(args, out: _Out):
    trace = ell_chain(args.n) if args.map == "ell" else lambda_chain(args.n)
    out.emit(trace.to_dict(), [trace.render()])


def _cmd_cycles(args, out: _Out):
    census = census_structural(args.ell, args.n)
    report = census.to_dict()
    lines = [f"power map x^{args.ell} mod {args.n}"]
    for d, t, c in census.as_sorted_items():
        lines.append(f"  d={d}: {c} cycle(s) of length {t}")
    lines.append(f"total cycles: {census.total_cycles}")
    if args.verify:
        if args.n > BRUTE_FORCE_CAP:
            raise RangeError(f"--verify needs n <= {BRUTE_FORCE_CAP}")
        other = census_bruteforce(args.ell, args.n)
        match = other.as_sorted_items() == census.as_sorted_items()
        report["oracle"] = "MATCH" if match else "MISMATCH"
        lines.append(f"oracle: {report['oracle']}")
        if not match:
            out.emit(report, lines)
            raise RangeError("structural census disagrees with brute force")
    out.emit(report, lines)


def _cmd_bounds(args, out: _Out):
    census = census_structural(args.ell, args.n)
    lo, c1, lo_holds = unit_cycles_lower_bound(args.ell, args.n, census)
    hi, total, hi_holds = cycle_count_upper_bound(args.ell, args.n, census)
    report = {
        "ell": args.ell, "n": args.n,
        "unit_cycles": c1, "lower_bound": _fraction_fields(lo),
        "lower_holds": lo_holds,
        "total_cycles": total, "upper_bound": _fraction_fields(hi),
        "upper_holds": hi_holds,
    }
    lines = [
        f"unit cycles C1 = {c1} >= {lo} : {'ok' if lo_holds else 'VIOLATED'}",
        f"total cycles C = {total} <= {hi} : {'ok' if hi_holds else 'VIOLATED'}",
    ]
    out.emit(report, lines)
    if not (lo_holds and hi_holds):
        raise RangeError("a proved bound failed; inputs outside supported range?")


def _cmd_sweep(args, out: _Out):
    cfg = SweepConfig(
        x_limit=args.x, segment_size=args.segment_size,
        sample_stride=args.sample_stride, cutoff_q=args.cutoff_q,
        jobs=args.jobs, checkpoint_path=args.checkpoint,
    )
    progress = sys.stderr if out.path else None
    if args.density_only:
        run = SweepRun(cfg)
        for _ in run.segments():
            pass
        report = {"x": cfg.x_limit, "cutoff_q": cfg.cutoff, "seen": run.seen,
                  "mismatches": run.mismatches, "density": run.density}
        out.emit(report, [f"density({cfg.x_limit}, Q={cfg.cutoff}) = "
                          f"{run.mismatches}/{run.seen} = {run.density:.6f}"])
        return
    if args.format == "json":
        write_jsonl(cfg, out.fh, progress=progress)
    elif args.format in ("csv", "table"):
        write_csv(cfg, out.fh, meta=not args.no_meta, progress=progress)
    else:
        raise RangeError(f"sweep cannot emit {args.format}")


def _cmd_moments(args, out: _Out):
    cutoff = HCutoff(args.cutoff_q if args.cutoff_q else default_cutoff(args.x))
    rep = moments(args.x, cutoff, tk_stride=args.tk_stride)
    report = rep.to_dict()
    lines = [
        f"x = {rep.x}, Q = {rep.cutoff_q}",
        f"M1 = {rep.m1:.6f} (predicted {rep.predicted_m1:.6f})",
        f"M2 = {rep.m2:.6f}",
        f"tk_lhs = {rep.tk_lhs:.6f}, scale x*M2 = {rep.tk_rhs_scale:.6f}, "
        f"ratio = {rep.tk_ratio:.6f}",
    ]
    if args.hp_t:
        actual, predicted = h_prime_partial_sum(args.hp_t, cutoff)
        report["h_prime_partial_sum"] = {"t": args.hp_t, "actual": actual,
                                         "predicted": predicted}
        lines.append(f"sum h(p), p <= {args.hp_t}: {actual:.3f} "
                     f"(predicted {predicted:.3f})")
    if args.recip_m:
        eps = None if args.recip_eps == "none" else float(args.recip_eps)
        actual, predicted = reciprocal_prime_sum(args.recip_m, args.x, eps)
        report["reciprocal_prime_sum"] = {"m": args.recip_m, "actual": actual,
                                          "predicted": predicted}
        lines.append(f"sum 1/p over p = 1 mod {args.recip_m}, p <= {args.x}: "
                     f"{actual:.6f} (predicted {predicted:.6f})")
    out.emit(report, lines)


def _cmd_h(args, out: _Out):
    cutoff = HCutoff(args.cutoff_q)
    value = small_prime_weight(args.n, cutoff)
    report = {"n": args.n, "cutoff_q": args.cutoff_q, "h": value}
    out.emit(report, [repr(value)])


def _cmd_hk(args, out: _Out):
    cutoff = HCutoff(args.cutoff_q)
    value = small_prime_weight_depth(args.n, args.k, cutoff)
    report = {"n": args.n, "k": args.k, "cutoff_q": args.cutoff_q, "h_k": value}
    out.emit(report, [repr(value)])


def _cmd_nj(args, out: _Out):
    rep = build_nj(args.j, args.exponent)
    length = rep.chain_length()
    bound = 2 + args.j / math.log(2)
    report = rep.to_dict()
    report.update(chain_length=length, chain_bound=bound,
                  lambda_divides=rep.lambda_divides_nj())
    lines = [
        f"j = {args.j}: {rep.count} primes up to {rep.sieve_limit}, "
        f"log N = {rep.log_value:.3f}",
        f"L = {length} <= {bound:.3f}; lambda divides lcm(1..j): "
        f"{'yes' if report['lambda_divides'] else 'NO'}",
    ]
    out.emit(report, lines)


def _cmd_sophie(args, out: _Out):
    rules = []
    for rule in args.rule or ["2x+1"]:
        if rule == "2x+1":
            rules.append((2, 1))
        elif rule == "4x+1":
            rules.append((4, 1))
        else:
            raise RangeError(f"unknown rule {rule!r}; use 2x+1 or 4x+1")
    chain = sophie_germain_chain(args.start, args.max_len, rules, args.budget)
    report = {"start": args.start, "max_len": args.max_len,
              "rules": args.rule or ["2x+1"], "chain": chain,
              "length": len(chain)}
    shown = " → ".join(str(p) for p in chain)
    out.emit(report, [f"{shown} (length {len(chain)})"])


def _cmd_progression(args, out: _Out):
    count = pi_progression(args.t, args.modulus, args.residue)
    report = {"t": args.t, "modulus": args.modulus, "residue": args.residue,
              "count": count}
    out.emit(report, [str(count)])


# -- wiring ------------------------------------------------------------------

def _build_parser(sweep_defaults: dict) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lamcycle",
        description="iterated Carmichael lambda statistics and power-map cycles")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        p.add_argument("--format", choices=("table", "csv", "json"),
                       default="table")
        p.add_argument("--output", help="write data here instead of stdout")
        return p

    p = add("factor", _cmd_factor, help="factor an integer")
    p.add_argument("--n", type=int, required=True)

    p = add("lambda", _cmd_lambda, help="Carmichael lambda")
    p.add_argument("--n", type=int, required=True)

    p = add("lambda-iter", _cmd_lambda_iter, help="iterated lambda (or phi)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--phi", action="store_true", help="iterate phi instead")

    p = add("chain", _cmd_chain, help="descent chain to 1")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--map", choices=("lambda", "ell"), default="lambda")

    p = add("cycles", _cmd_cycles, help="cycle census of x -> x^ell mod n")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--verify", action="store_true",
                   help="cross-check against brute force")

    p = add("bounds", _cmd_bounds, help="proved cycle-count bounds")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--n", type=int, required=True)

    p = add("sweep", _cmd_sweep, help="stream lambda/phi iterates over [1, x]")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--segment-size", type=int,
                   default=sweep_defaults.get("segment_size", 1 << 20))
    p.add_argument("--sample-stride", type=int,
                   default=sweep_defaults.get("sample_stride", 1))
    p.add_argument("--cutoff-q", type=int,
                   default=sweep_defaults.get("cutoff_q"))
    p.add_argument("--jobs", type=int, default=sweep_defaults.get("jobs"))
    p.add_argument("--checkpoint", help="resumable checkpoint path")
    p.add_argument("--no-meta", action="store_true",
                   help="suppress the timestamp comment line")
    p.add_argument("--density-only", action="store_true",
                   help="report only the large-prime mismatch density")

    p = add("moments", _cmd_moments, help="weight moments and related sums")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--cutoff-q", type=int, default=0,
                   help="default: floor((log log x)^2)")
    p.add_argument("--tk-stride", type=int, default=1)
    p.add_argument("--hp-t", type=int, default=0,
                   help="also report sum of h(p) for p <= this")
    p.add_argument("--recip-m", type=int, default=0,
                   help="also report sum of 1/p over p = 1 mod m")
    p.add_argument("--recip-eps", default="0.1",
                   help="range guard exponent for --recip-m, or 'none'")

    p = add("h", _cmd_h, help="small-prime weight of n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cutoff-q", type=int, required=True)

    p = add("hk", _cmd_hk, help="depth-k small-prime weight")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--cutoff-q", type=int, required=True)

    p = add("nj", _cmd_nj, help="product of primes p with p-1 | lcm(1..j)")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--exponent", type=float, default=3.29)

    p = add("sophie", _cmd_sophie, help="prime chains under 2x+1 / 4x+1")
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--max-len", type=int, default=16)
    p.add_argument("--rule", action="append",
                   help="2x+1 or 4x+1; repeatable (default: 2x+1)")
    p.add_argument("--budget", type=int, default=10**7,
                   help="primality-test budget for the search")

    p = add("progression", _cmd_progression,
            help="count primes p <= t with p = a mod n")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--modulus", type=int, required=True)
    p.add_argument("--residue", type=int, required=True)

    return parser


def main(argv=None) -> int:
    try:
        defaults = _load_config_defaults()
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    parser = _build_parser(defaults)
    args = parser.parse_args(argv)
    out = _Out(args)
    try:
        args.fn(args, out)
    except (RangeError, FactorizationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
