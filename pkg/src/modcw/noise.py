"""Ornstein-Uhlenbeck multiplicative Rabi-amplitude noise and ensembles.

The relative fluctuation xi(t) follows a stationary OU process: both
tone amplitudes are scaled by the same (1 + xi(t)), sampled at the
segment boundaries of the discretized drive (the correlation time of
interest, ~0.5 ms, is enormous against segment durations, so holding xi
within a segment is exact for all practical purposes).

``p`` is the stationary standard deviation of xi.  The paper this model
reproduces never defines its noise amplitude; this interpretation is the
plainest reading and is pinned here - the reported robustness
percentages depend on it, which is why the harness ships a p-sweep
preset for empirical calibration.

Gaussian variates come from numpy's Philox counter-based generator,
seeded per realization from (master_seed, scan_index, realization), so
ensembles are deterministic and independent of worker scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dynamics import PropagationResult, SimulationTask, propagate_periodic_cached, segment_durations

RNG_IDENTITY = f"numpy.random.Philox via SeedSequence(master_seed, scan_index, realization); numpy {np.__version__}"


class NoiseError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseSpec:
    """OU parameters and ensemble bookkeeping."""

    tau: float  # s, correlation time
    p: float  # dimensionless, stationary std of the relative fluctuation
    runs: int
    master_seed: int

    def __post_init__(self):
        if self.tau <= 0:
            raise NoiseError("tau must be positive")
        if not (0.0 <= self.p < 0.2):
            raise NoiseError("p must be in [0, 0.2)")
        if self.runs < 1:
            raise NoiseError("runs must be >= 1")


@dataclass(frozen=True)
class NoisePath:
    """One realization: xi sampled at the segment boundaries of the drive."""

    durations: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        if len(self.durations) != len(self.xi):
            raise NoiseError("durations and xi must have equal length")


def ou_step(xi: float, dt: float, tau: float, p: float, gaussian: float) -> float:
    """Exact OU update over dt: xi e^{-dt/tau} + p sqrt(1 - e^{-2dt/tau}) g."""
    if dt <= 0:
        raise NoiseError("dt must be positive")
    a = np.exp(-dt / tau)
    return xi * a + p * np.sqrt(1.0 - a * a) * gaussian


def ou_path(durations: np.ndarray, tau: float, p: float,
            rng: np.random.Generator) -> NoisePath:
    """Stationary-initialized OU path; xi[k] applies to segment k.

    xi[0] ~ N(0, p^2) at the first boundary; each subsequent boundary is
    one exact OU step over the preceding segment's duration.
    """
    durations = np.asarray(durations, dtype=float)
    n = len(durations)
    xi = np.empty(n)
    if n == 0:
        return NoisePath(durations, xi)
    g = rng.standard_normal(n)
    x = p * g[0]
    xi[0] = x
    for k in range(1, n):
        a = np.exp(-durations[k - 1] / tau)
        x = x * a + p * np.sqrt(1.0 - a * a) * g[k]
        xi[k] = x
    return NoisePath(durations, xi)


def realization_rng(master_seed: int, scan_index: int, realization: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(scan_index, realization))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class EnsembleResult:
    mean: float
    stderr: float
    runs: int
    signals: np.ndarray


def _one_realization(args) -> tuple[int, float]:
    task, noise, scan_index, r = args
    durations = segment_durations(task)
    rng = realization_rng(noise.master_seed, scan_index, r)
    path = ou_path(durations, noise.tau, noise.p, rng)
    res = propagate_periodic_cached(replace(task, noise_xi=path.xi))
    return r, res.signal


def ensemble_signal(task: SimulationTask, noise: NoiseSpec,
                    scan_index: int = 0, workers: int = 1) -> EnsembleResult:
    """Mean and standard error of the signal over OU realizations.

    Realization r is seeded from (master_seed, scan_index, r); the mean
    uses numpy's pairwise reduction over the realization-ordered array,
    so the result is bit-identical however the work is scheduled
    (realizations are independent parallel units).
    """
    base = replace(task, noise_tau=noise.tau)
    if noise.p == 0.0:
        res = propagate_periodic_cached(base)
        return EnsembleResult(mean=res.signal, stderr=0.0, runs=noise.runs,
                              signals=np.full(noise.runs, res.signal))
    jobs = [(base, noise, scan_index, r) for r in range(noise.runs)]
    signals = np.empty(noise.runs)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        from multiprocessing import get_context
        with ProcessPoolExecutor(max_workers=workers,
                                 mp_context=get_context("spawn")) as pool:
            for r, sig in pool.map(_one_realization, jobs):
                signals[r] = sig
    else:
        for job in jobs:
            r, sig = _one_realization(job)
            signals[r] = sig
    mean = float(np.mean(signals))
    if noise.runs > 1:
        stderr = float(np.std(signals, ddof=1) / np.sqrt(noise.runs))
    else:
        stderr = 0.0
    return EnsembleResult(mean=mean, stderr=stderr, runs=noise.runs, signals=signals)
