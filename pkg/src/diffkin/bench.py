"""Throughput measurement: batched FK ops/s across batch sizes.

One "op" is one configuration's final base-to-end transform.  Input batches
are pregenerated outside the timed region, the first calls are discarded as
warm-up, and every measurement runs at least a minimum wall time and
iteration count.  The baseline is the naive sequential implementation
evaluated one configuration at a time.
"""

from __future__ import annotations

import os
import platform
import time
from dataclasses import dataclass

import numpy as np

from . import naive

__all__ = ["BenchMeasurement", "BenchReport", "run_bench", "measure_baseline"]

# Input pools are sized by bytes, not entry count, so every batch size cycles
# through a comparably cache-cold input stream; a fixed small pool would stay
# cache-resident for small batches and flatter them against large ones.
_POOL_BYTES = 4 << 20
_POOL_MIN = 8
_POOL_MAX = 1024
_WARMUP_CALLS = 3


def _pool_count(bytes_per_input):
    if bytes_per_input <= 0:
        return _POOL_MIN
    return int(min(max(_POOL_BYTES // bytes_per_input, _POOL_MIN), _POOL_MAX))


@dataclass(frozen=True)
class BenchMeasurement:
    batch_size: int
    iterations: int
    seconds: float
    ops_per_sec: float


@dataclass(frozen=True)
class BenchReport:
    measurements: tuple  # of BenchMeasurement, in batch-size order
    baseline_ops_per_sec: float | None
    machine: str
    threads: str  # requested thread override, or 'default'

    def ratios(self):
        """Batched-to-baseline speedup per measurement (None without baseline)."""
        if not self.baseline_ops_per_sec:
            return None
        return [m.ops_per_sec / self.baseline_ops_per_sec for m in self.measurements]


def _machine_descriptor():
    return f"{platform.machine()} {platform.system()} python{platform.python_version()} numpy{np.__version__}"


def _theta_pool(rng, batch_size, m):
    count = _pool_count(batch_size * m * 8)
    return [rng.uniform(-np.pi, np.pi, size=batch_size * m) for _ in range(count)]


def _timed_loop(call, pool, min_seconds, min_iterations):
    for i in range(_WARMUP_CALLS):
        call(pool[i % len(pool)])
    iterations = 0
    start = time.perf_counter()
    elapsed = 0.0
    while iterations < min_iterations or elapsed < min_seconds:
        call(pool[iterations % len(pool)])
        iterations += 1
        elapsed = time.perf_counter() - start
    return iterations, elapsed


def _best_timed_loop(call, pool, min_seconds, min_iterations, repeats):
    # Repeat the full measurement and keep the fastest repetition.  Each
    # repetition independently satisfies the minimum-iteration and minimum
    # wall-time requirements; taking the best filters out scheduler noise
    # that would otherwise make throughput curves non-reproducible.
    best = None
    for _ in range(max(int(repeats), 1)):
        iterations, seconds = _timed_loop(call, pool, min_seconds, min_iterations)
        if best is None or iterations / seconds > best[0] / best[1]:
            best = (iterations, seconds)
    return best


def measure_baseline(chain, min_seconds=0.5, min_iterations=10, rng_seed=0, repeats=3):
    """Sequential single-configuration FK throughput (ops/s)."""
    rng = np.random.default_rng(rng_seed)
    pool = [row.tolist() for row in rng.uniform(-np.pi, np.pi, size=(_POOL_MIN, max(chain.m, 0)))]
    iterations, seconds = _best_timed_loop(
        lambda thetas: naive.fk_single(chain, thetas), pool, min_seconds, min_iterations, repeats
    )
    return iterations / seconds


def run_bench(
    engine_factory,
    batch_sizes,
    min_seconds=0.5,
    min_iterations=10,
    rng_seed=0,
    with_baseline=True,
    repeats=3,
) -> BenchReport:
    """Measure forward throughput for each batch size.

    ``engine_factory`` maps a batch size to a ready FkEngine; constructing
    the engine, drawing the input pool, and warm-up all happen outside the
    timed region.  Each batch size is measured ``repeats`` times and the
    fastest repetition is reported.
    """
    measurements = []
    chain = None
    for b in sorted(int(b) for b in batch_sizes):
        if b < 1:
            raise ValueError(f"batch size must be positive, got {b}")
        engine = engine_factory(b)
        chain = engine.chain
        rng = np.random.default_rng(rng_seed)
        pool = _theta_pool(rng, b, engine.m)
        iterations, seconds = _best_timed_loop(engine.forward, pool, min_seconds, min_iterations, repeats)
        measurements.append(
            BenchMeasurement(
                batch_size=b,
                iterations=iterations,
                seconds=seconds,
                ops_per_sec=b * iterations / seconds,
            )
        )
    baseline = None
    if with_baseline and chain is not None:
        baseline = measure_baseline(
            chain, min_seconds=min_seconds, min_iterations=min_iterations, rng_seed=rng_seed, repeats=repeats
        )
    return BenchReport(
        measurements=tuple(measurements),
        baseline_ops_per_sec=baseline,
        machine=_machine_descriptor(),
        threads=os.environ.get("DIFFKIN_NUM_THREADS", "default"),
    )
