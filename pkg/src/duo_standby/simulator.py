"""Monte Carlo oracle for the system lifetime.

Each replication runs the alternating-service event loop directly: the active
server works, the other is under repair (no repair is pending during the very
first work period), and the system dies when a server fails while its partner
is still in repair.  Replication ``i`` draws from a counter-based stream keyed
by ``(seed, i)``, so results do not depend on how replications are split
across threads.

The event loop lives in the compiled ``_sim_core`` extension when it is
available and falls back to ``_sim_py`` otherwise.  Set
``DUO_STANDBY_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _sim_py
from .transform import SystemModel

try:
    if os.environ.get("DUO_STANDBY_PURE_PYTHON") == "1":
        raise ImportError("pure Python backend requested")
    from . import _sim_core
except ImportError:
    _sim_core = None

__all__ = [
    "BACKEND",
    "DEFAULT_MAX_CYCLES",
    "Lifetime",
    "LifetimeSample",
    "SimulationSummary",
    "LstEstimate",
    "SurvivalEstimate",
    "available_backends",
    "simulate_lifetime",
    "simulate_lifetimes",
    "estimate_mean",
    "estimate_lst",
    "estimate_survival",
]

BACKEND = "compiled" if _sim_core is not None else "python"
DEFAULT_MAX_CYCLES = 1_000_000


class Lifetime(NamedTuple):
    lifetime: float
    cycles: int
    censored: bool


@dataclass(frozen=True)
class SimulationSummary:
    n: int
    seed: int
    max_cycles: int
    mean: float
    variance: float
    std_error: float
    ci95: tuple[float, float]
    censored_count: int

    @property
    def label(self) -> str:
        return "exact" if self.censored_count == 0 else "censored"


class LstEstimate(NamedTuple):
    estimate: float
    std_error: float
    censored_count: int


class SurvivalEstimate(NamedTuple):
    t: float
    fraction: float
    std_error: float
    horizon_exceeded: bool


def available_backends() -> list[str]:
    return ["compiled", "python"] if _sim_core is not None else ["python"]


def _kernel(backend):
    backend = backend or BACKEND
    if backend == "compiled":
        if _sim_core is None:
            raise RuntimeError("compiled simulation core is not built")
        return _sim_core.simulate_block
    if backend == "python":
        return _sim_py.simulate_block
    raise ValueError(f"unknown backend {backend!r}")


def _servers(model):
    model = model.canonical()
    return (model.work1, model.work2), (model.repair1, model.repair2)


def simulate_lifetime(model: SystemModel, rng, max_cycles: int = DEFAULT_MAX_CYCLES) -> Lifetime:
    """Run one replication with the given uniform source (anything with ``random()``)."""
    if max_cycles < 1:
        raise ValueError(f"max_cycles must be >= 1, got {max_cycles!r}")
    work, repair = _servers(model)
    return Lifetime(*_sim_py.run_lifetime(work, repair, rng, max_cycles))


@dataclass(frozen=True)
class LifetimeSample:
    """Raw replication output, indexed by replication number."""

    seed: int
    max_cycles: int
    lifetimes: np.ndarray
    cycles: np.ndarray
    censored: np.ndarray

    @property
    def n(self) -> int:
        return len(self.lifetimes)

    @property
    def censored_count(self) -> int:
        return int(np.count_nonzero(self.censored))

    def summary(self) -> SimulationSummary:
        n = self.n
        # fsum is exactly rounded, hence independent of any evaluation order
        mean = math.fsum(self.lifetimes) / n
        variance = math.fsum((self.lifetimes - mean) ** 2) / (n - 1)
        se = math.sqrt(variance / n)
        return SimulationSummary(
            n, self.seed, self.max_cycles, mean, variance, se,
            (mean - 1.96 * se, mean + 1.96 * se), self.censored_count,
        )

    def lst(self, s: float) -> LstEstimate:
        if not s > 0:
            raise ValueError(f"s must be > 0, got {s!r}")
        # censored replications contribute exp(-s * time so far), an upper bound
        vals = np.exp(-s * self.lifetimes)
        n = self.n
        mean = math.fsum(vals) / n
        variance = math.fsum((vals - mean) ** 2) / (n - 1)
        return LstEstimate(mean, math.sqrt(variance / n), self.censored_count)

    def survival(self, ts: Sequence[float]) -> list[SurvivalEstimate]:
        n = self.n
        censored_times = self.lifetimes[self.censored.astype(bool)]
        out = []
        for t in ts:
            frac = int(np.count_nonzero(self.lifetimes > t)) / n
            ambiguous = bool(np.any(censored_times <= t))
            out.append(SurvivalEstimate(float(t), frac, math.sqrt(frac * (1.0 - frac) / n), ambiguous))
        return out


def simulate_lifetimes(model: SystemModel, n: int, seed: int,
                       max_cycles: int = DEFAULT_MAX_CYCLES, *, workers: int = 1,
                       backend: str | None = None) -> LifetimeSample:
    """Run replications 0..n-1, optionally split over ``workers`` threads."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    if max_cycles < 1:
        raise ValueError(f"max_cycles must be >= 1, got {max_cycles!r}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers!r}")
    kernel = _kernel(backend)
    work, repair = _servers(model)
    lifetimes = np.empty(n, dtype=np.float64)
    cycles = np.empty(n, dtype=np.int64)
    censored = np.empty(n, dtype=np.uint8)

    def run(lo, hi):
        kernel(work, repair, seed, lo, hi - lo, max_cycles,
               lifetimes[lo:hi], cycles[lo:hi], censored[lo:hi])

    bounds = np.linspace(0, n, min(workers, n) + 1).astype(int)
    if len(bounds) == 2:
        run(0, n)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
            for f in futures:
                f.result()
    return LifetimeSample(seed, max_cycles, lifetimes, cycles, censored)


def estimate_mean(model: SystemModel, n: int, seed: int,
                  max_cycles: int = DEFAULT_MAX_CYCLES, **kw) -> SimulationSummary:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n!r}")
    return simulate_lifetimes(model, n, seed, max_cycles, **kw).summary()


def estimate_lst(model: SystemModel, s: float, n: int, seed: int,
                 max_cycles: int = DEFAULT_MAX_CYCLES, **kw) -> LstEstimate:
    """Sample mean of exp(-s tau) and its standard error."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n!r}")
    if not s > 0:
        raise ValueError(f"s must be > 0, got {s!r}")
    return simulate_lifetimes(model, n, seed, max_cycles, **kw).lst(s)


def estimate_survival(model: SystemModel, ts: Sequence[float], n: int, seed: int,
                      max_cycles: int = DEFAULT_MAX_CYCLES, **kw) -> list[SurvivalEstimate]:
    """Empirical P(tau > t) with binomial standard errors.

    ``horizon_exceeded`` marks points where some censored replication stopped
    at or before t, so its true lifetime could lie on either side.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n!r}")
    return simulate_lifetimes(model, n, seed, max_cycles, **kw).survival(ts)
