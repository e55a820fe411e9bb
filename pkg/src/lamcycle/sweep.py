"""Segmented sweep of lambda(lambda(n)), phi(phi(n)) and friends over [1, x].

The kernel factors whole segments at once (that is what makes it fast), so
sample_stride thins which n become records and enter the accumulators; it
does not reduce sieve work. Workers hold their own segment buffers; results
merge in ascending segment order, so output and accumulators are
deterministic for a fixed config regardless of the worker count.
"""
from __future__ import annotations

import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Iterator, TextIO

import numpy as np

from . import kernels
from .errors import RangeError
from .stats import RATIO_FLOOR, default_cutoff, normal_order_ratio

MIN_SEGMENT = 1 << 16

CSV_HEADER = "n,lambda,lambda_lambda,phi_phi,h,ratio_R,mismatch"


@dataclass(frozen=True)
class SweepConfig:
    x_limit: int
    segment_size: int = 1 << 20
    sample_stride: int = 1
    cutoff_q: int | None = None  # None: floor((log log x)^2)
    jobs: int | None = None  # None: one worker per available cpu
    checkpoint_path: str | None = None

    def __post_init__(self):
        if self.x_limit < 2:
            raise RangeError(f"x_limit must be >= 2, got {self.x_limit}")
        if self.segment_size < MIN_SEGMENT:
            raise RangeError(f"segment_size must be >= {MIN_SEGMENT}")
        if self.sample_stride < 1:
            raise RangeError("sample_stride must be >= 1")
        if self.cutoff_q is not None and self.cutoff_q < 2:
            raise RangeError("cutoff_q must be >= 2")
        if self.jobs is not None and self.jobs < 1:
            raise RangeError("jobs must be >= 1")

    @property
    def cutoff(self) -> int:
        if self.cutoff_q is not None:
            return self.cutoff_q
        return default_cutoff(self.x_limit)

    def segment_count(self) -> int:
        return (self.x_limit + self.segment_size - 1) // self.segment_size


@dataclass(frozen=True)
class SweepRecord:
    n: int
    lambda_n: int
    lambda_lambda_n: int
    phi_phi_n: int
    h_n: float
    ratio_r: float | None  # None below the n >= 5e6 guard
    large_prime_mismatch: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "lambda": self.lambda_n,
            "lambda_lambda": self.lambda_lambda_n,
            "phi_phi": self.phi_phi_n,
            "h": self.h_n,
            "ratio_R": self.ratio_r,
            "mismatch": self.large_prime_mismatch,
        }

    def to_csv_row(self) -> str:
        ratio = "" if self.ratio_r is None else repr(self.ratio_r)
        flag = "true" if self.large_prime_mismatch else "false"
        return (f"{self.n},{self.lambda_n},{self.lambda_lambda_n},"
                f"{self.phi_phi_n},{self.h_n!r},{ratio},{flag}")


def factor_segment(lo: int, hi: int, segment_size: int = 1 << 22):
    """Factorizations of every n in [lo, hi) as (prime, exponent) tuples.

    Convenience surface over the streaming kernel; spans above segment_size
    are rejected rather than silently buffered.
    """
    if lo < 1 or hi <= lo:
        raise RangeError(f"need 1 <= lo < hi, got [{lo}, {hi})")
    if hi - lo > segment_size:
        raise RangeError(f"span {hi - lo} exceeds segment_size {segment_size}")
    kern = kernels.get()
    base = kern.sieve_primes(math.isqrt(hi - 1) + 1)
    offsets, fp, fe = kern.factor_range(lo, hi, base)
    out = []
    for i in range(hi - lo):
        a, b = offsets[i], offsets[i + 1]
        out.append(tuple(zip(fp[a:b].tolist(), fe[a:b].tolist())))
    return out


# worker state lives at module level so fork-based pools inherit it cheaply
_POOL_STATE: dict = {}


def _segment_bounds(config: SweepConfig, index: int) -> tuple[int, int]:
    lo = 1 + index * config.segment_size
    return lo, min(lo + config.segment_size, config.x_limit + 1)


def _pool_init(table, base_primes, qs, qlogs):
    kern = kernels.get()
    _POOL_STATE["scratch"] = kern.make_sweep_scratch(table, qs, qlogs)
    _POOL_STATE["base"] = base_primes
    _POOL_STATE["kern"] = kern


def _pool_run(args):
    index, lo, hi = args
    kern = _POOL_STATE["kern"]
    out = kern.sweep_segment(lo, hi, _POOL_STATE["scratch"], _POOL_STATE["base"])
    return index, out


class SweepRun:
    """One sweep execution: owns the tables, the pool, the accumulators and
    the optional checkpoint. Iterate segments() for raw arrays or records()
    for SweepRecord objects."""

    def __init__(self, config: SweepConfig):
        self.config = config
        self.seen = 0
        self.mismatches = 0
        self.next_segment = 0
        if config.checkpoint_path and os.path.exists(config.checkpoint_path):
            self._load_checkpoint()

    # -- checkpointing -----------------------------------------------------

    _CKPT_KEYS = ("x_limit", "segment_size", "sample_stride", "cutoff_q")

    def _load_checkpoint(self):
        with open(self.config.checkpoint_path) as f:
            data = json.load(f)
        for key in self._CKPT_KEYS:
            if data.get(key) != getattr(self.config, key):
                raise ValueError(
                    f"checkpoint {self.config.checkpoint_path} was written for "
                    f"{key}={data.get(key)}, config has {getattr(self.config, key)}")
        self.next_segment = data["next_segment"]
        self.seen = data["seen"]
        self.mismatches = data["mismatches"]

    def _write_checkpoint(self):
        path = self.config.checkpoint_path
        if not path:
            return
        data = {key: getattr(self.config, key) for key in self._CKPT_KEYS}
        data.update(next_segment=self.next_segment, seen=self.seen,
                    mismatches=self.mismatches)
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".ckpt")
        with os.fdopen(fd, "w") as f:
            json.dump(data, f)
        os.replace(tmp, path)

    # -- execution ---------------------------------------------------------

    def _tasks(self):
        for index in range(self.next_segment, self.config.segment_count()):
            lo, hi = _segment_bounds(self.config, index)
            yield index, lo, hi

    def segments(self):
        """Yield (lo, hi, lam, lamlam, phiphi, h, mismatch) in ascending
        order, updating accumulators and checkpoint after each segment."""
        cfg = self.config
        kern = kernels.get()
        table = kern.pminus1_table(cfg.x_limit + 1)
        base = kern.sieve_primes(math.isqrt(cfg.x_limit) + 1)
        qs = kern.sieve_primes(cfg.cutoff)
        qlogs = np.log(qs.astype(np.float64))
        jobs = cfg.jobs if cfg.jobs is not None else (os.cpu_count() or 1)
        jobs = min(jobs, max(1, cfg.segment_count() - self.next_segment))

        if jobs > 1:
            import multiprocessing as mp

            ctx = mp.get_context("fork")
            with ctx.Pool(jobs, initializer=_pool_init,
                          initargs=(table, base, qs, qlogs)) as pool:
                for index, out in pool.imap(_pool_run, self._tasks()):
                    yield self._account(index, out)
        else:
            _pool_init(table, base, qs, qlogs)
            for args in self._tasks():
                index, out = _pool_run(args)
                yield self._account(index, out)

    def _account(self, index, out):
        lo, hi = _segment_bounds(self.config, index)
        lam, lamlam, phiphi, h, mism = out
        stride = self.config.sample_stride
        if stride == 1:
            self.seen += hi - lo
            self.mismatches += int(np.count_nonzero(mism))
        else:
            picked = (np.arange(lo, hi) - 1) % stride == 0
            self.seen += int(np.count_nonzero(picked))
            self.mismatches += int(np.count_nonzero(mism & picked))
        self.next_segment = index + 1
        self._write_checkpoint()
        return lo, hi, lam, lamlam, phiphi, h, mism

    def records(self) -> Iterator[SweepRecord]:
        stride = self.config.sample_stride
        for lo, hi, lam, lamlam, phiphi, h, mism in self.segments():
            for i in range(0 if (lo - 1) % stride == 0 else stride - (lo - 1) % stride,
                           hi - lo, stride):
                n = lo + i
                ll = int(lamlam[i])
                yield SweepRecord(
                    n=n,
                    lambda_n=int(lam[i]),
                    lambda_lambda_n=ll,
                    phi_phi_n=int(phiphi[i]),
                    h_n=float(h[i]),
                    ratio_r=normal_order_ratio(n, ll) if n >= RATIO_FLOOR else None,
                    large_prime_mismatch=bool(mism[i]),
                )

    @property
    def density(self) -> float:
        return self.mismatches / self.seen if self.seen else 0.0


def sweep(config: SweepConfig) -> Iterator[SweepRecord]:
    """Stream SweepRecord for every sampled n <= x_limit in ascending order."""
    return SweepRun(config).records()


def exception_density(x: int, cutoff_q: int | None = None,
                      segment_size: int = 1 << 20, jobs: int | None = 1) -> float:
    """Fraction of n <= x where some prime q > Q divides phi(phi(n)) but not
    lambda(lambda(n))."""
    if x < 100:
        raise RangeError(f"exception_density wants x >= 100, got {x}")
    run = SweepRun(SweepConfig(x_limit=x, segment_size=max(segment_size, MIN_SEGMENT),
                               cutoff_q=cutoff_q, jobs=jobs))
    for _ in run.segments():
        pass
    return run.density


def _meta_line(config: SweepConfig) -> str:
    import datetime

    stamp = datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return (f"# generated {stamp} x_limit={config.x_limit} "
            f"cutoff_q={config.cutoff} stride={config.sample_stride}")


def write_csv(config: SweepConfig, out: TextIO, meta: bool = True,
              progress: TextIO | None = None) -> SweepRun:
    """Stream the sweep as CSV. On sink failure the checkpoint (if configured)
    already holds the last completed segment, so a rerun resumes there."""
    run = SweepRun(config)
    if run.next_segment == 0:
        if meta:
            out.write(_meta_line(config) + "\n")
        out.write(CSV_HEADER + "\n")
    done = 0
    for lo, hi, lam, lamlam, phiphi, h, mism in run.segments():
        lines = []
        stride = config.sample_stride
        start = 0 if (lo - 1) % stride == 0 else stride - (lo - 1) % stride
        for i in range(start, hi - lo, stride):
            n = lo + i
            ll = int(lamlam[i])
            r = normal_order_ratio(n, ll) if n >= RATIO_FLOOR else None
            ratio = "" if r is None else repr(r)
            flag = "true" if mism[i] else "false"
            lines.append(f"{n},{int(lam[i])},{ll},{int(phiphi[i])},"
                         f"{float(h[i])!r},{ratio},{flag}")
        if lines:
            out.write("\n".join(lines) + "\n")
        done += 1
        if progress is not None:
            print(f"segment {run.next_segment}/{config.segment_count()} done",
                  file=progress, flush=True)
    return run


def write_jsonl(config: SweepConfig, out: TextIO,
                progress: TextIO | None = None) -> SweepRun:
    run = SweepRun(config)
    for rec in run.records():
        out.write(json.dumps(rec.to_dict()) + "\n")
    if progress is not None:
        print(f"wrote {run.seen} records", file=progress, flush=True)
    return run
