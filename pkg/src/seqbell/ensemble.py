"""Monte Carlo ensembles of independent runs and their C(a',b') statistics."""
from __future__ import annotations

import dataclasses
import logging
import os
from dataclasses import dataclass, field
from numbers import Integral, Real
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from sklearn.utils import check_scalar

from .core import make_bec_ancilla
from .protocol import (
    A_PRIME_B_PRIME,
    SCHEDULE_MODES,
    RunRecord,
    make_schedule,
    run_experiment,
    run_experiment_fresh,
)

logger = logging.getLogger(__name__)

MODES = ("reused", "fresh")
THREADS_ENV = "SEQBELL_THREADS"
_BLOCK = 250


@dataclass(frozen=True)
class SimulationConfig:
    n_ancilla: int = 1
    pairs: int = 400
    runs: int = 10_000
    mode: str = "reused"
    schedule_mode: str = "balanced"
    master_seed: int = 0
    bin_width: float = 0.02
    trunc_eps: float = 0.0

    def __post_init__(self):
        check_scalar(self.n_ancilla, "n_ancilla", Integral, min_val=0)
        check_scalar(self.pairs, "pairs", Integral, min_val=1)
        check_scalar(self.runs, "runs", Integral, min_val=1)
        check_scalar(self.master_seed, "master_seed", Integral, min_val=0, max_val=2**64 - 1)
        check_scalar(self.bin_width, "bin_width", Real, min_val=0, max_val=2,
                     include_boundaries="right")
        check_scalar(self.trunc_eps, "trunc_eps", Real, min_val=0)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.schedule_mode not in SCHEDULE_MODES:
            raise ValueError(
                f"schedule_mode must be one of {SCHEDULE_MODES}, got {self.schedule_mode!r}"
            )
        if self.schedule_mode == "balanced" and self.pairs % 4:
            raise ValueError("M must be divisible by 4")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})


@dataclass(frozen=True)
class Histogram:
    """Probability density over bins ``[edges[k], edges[k+1])`` covering [-1, 1]."""

    edges: np.ndarray
    density: np.ndarray
    count: int

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def integral(self) -> float:
        return float(np.sum(self.density * self.widths))


@dataclass
class EnsembleResult:
    config: SimulationConfig
    records: List[RunRecord] = field(repr=False)
    histogram: Histogram = field(repr=False)
    mean_c: float
    std_c: float
    violation_probability: float
    mean_s: float

    @property
    def c_values(self) -> np.ndarray:
        return np.array([r.c_apbp for r in self.records])

    @property
    def correlators(self) -> np.ndarray:
        """``(runs, 4)`` array of per-run correlators."""
        return np.array([r.correlators for r in self.records])


def histogram(values: Sequence[float], bin_width: float = 0.02) -> Histogram:
    """Density histogram of correlator values with bins anchored at -1.

    Bins are left-closed; the last bin also holds the value 1 and is clipped to
    end at 1 when ``bin_width`` does not divide 2.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("cannot build a histogram from no values")
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    if values.min() < -1 or values.max() > 1:
        raise ValueError("correlator values must lie in [-1, 1]")
    n_bins = int(np.ceil(round(2 / bin_width, 9)))
    edges = np.round(-1 + bin_width * np.arange(n_bins + 1), 12)
    edges[-1] = 1.0
    idx = np.clip(np.searchsorted(edges, values, side="right") - 1, 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    density = counts / (values.size * np.diff(edges))
    return Histogram(edges=edges, density=density, count=int(values.size))


def summary_stats(records: Sequence[RunRecord]):
    """``(mean_c, std_c, violation_probability, mean_s)`` over runs.

    ``std_c`` is the population standard deviation; violation means
    ``C(a',b') > 0`` strictly.
    """
    if len(records) == 0:
        raise ValueError("no run records")
    c = np.array([r.correlators[A_PRIME_B_PRIME] for r in records])
    s = np.array([r.s_value for r in records])
    return float(c.mean()), float(c.std()), float(np.mean(c > 0)), float(s.mean())


def run_seed(master_seed: int, run_index: int) -> np.random.SeedSequence:
    """Seed of run ``run_index``: ``SeedSequence(master_seed, spawn_key=(run_index,))``.

    This is the same stream ``SeedSequence(master_seed).spawn(...)`` would give
    the run, computed without spawning the preceding ones.
    """
    return np.random.SeedSequence(master_seed, spawn_key=(run_index,))


def _run_block(config: SimulationConfig, indices: range) -> List[RunRecord]:
    anc0 = make_bec_ancilla(config.n_ancilla) if config.mode == "reused" else None
    records = []
    for index in indices:
        rng = np.random.default_rng(run_seed(config.master_seed, index))
        schedule = make_schedule(config.pairs, config.schedule_mode, rng)
        if anc0 is None:
            records.append(run_experiment_fresh(config.n_ancilla, schedule, rng))
        else:
            records.append(run_experiment(anc0, schedule, rng, trunc_eps=config.trunc_eps))
    return records


def resolve_workers(n_jobs: Optional[int] = None) -> int:
    """Worker count from ``n_jobs``, else ``$SEQBELL_THREADS``, else CPU count."""
    if n_jobs is None:
        env = os.environ.get(THREADS_ENV)
        n_jobs = int(env) if env else os.cpu_count() or 1
    if n_jobs < 0:
        n_jobs = max(1, (os.cpu_count() or 1) + 1 + n_jobs)
    return max(1, int(n_jobs))


def run_ensemble(config: SimulationConfig, n_jobs: Optional[int] = None) -> EnsembleResult:
    """Execute ``config.runs`` independent runs and summarize C(a',b').

    Runs are split into fixed blocks by index, so the result does not depend
    on the number of workers.
    """
    workers = resolve_workers(n_jobs)
    blocks = [range(k, min(k + _BLOCK, config.runs)) for k in range(0, config.runs, _BLOCK)]
    logger.info("running %d runs in %d blocks on %d workers", config.runs, len(blocks), workers)
    if workers == 1 or len(blocks) == 1:
        chunks = [_run_block(config, b) for b in blocks]
    else:
        chunks = Parallel(n_jobs=workers)(delayed(_run_block)(config, b) for b in blocks)
    records = [r for chunk in chunks for r in chunk]
    mean_c, std_c, p_violation, mean_s = summary_stats(records)
    return EnsembleResult(
        config=config,
        records=records,
        histogram=histogram([r.c_apbp for r in records], config.bin_width),
        mean_c=mean_c,
        std_c=std_c,
        violation_probability=p_violation,
        mean_s=mean_s,
    )
