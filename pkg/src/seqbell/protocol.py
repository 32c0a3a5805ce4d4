"""One CHSH run: basis schedule, sequential pair measurements, correlators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import (
    BASES,
    OUTCOMES,
    AncillaState,
    branch_weights,
    coherence_of,
    make_bec_ancilla,
    next_pair_coherence,
    outcome_probabilities,
)

#: basis combinations in the fixed order used by counts and correlators
COMBINATIONS: Tuple[Tuple[str, str], ...] = (
    ("a", "b"),
    ("a", "b'"),
    ("a'", "b"),
    ("a'", "b'"),
)
AB, AB_PRIME, A_PRIME_B, A_PRIME_B_PRIME = range(4)
SCHEDULE_MODES = ("balanced", "uniform")

_SAME = np.array([i * j == 1 for i, j in OUTCOMES])


@dataclass(frozen=True)
class BasisSchedule:
    """Basis combination (index into :data:`COMBINATIONS`) for each pair."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.int8)
        if entries.ndim != 1 or entries.size == 0:
            raise ValueError("schedule must be a non-empty 1-d sequence")
        if entries.min() < 0 or entries.max() > 3:
            raise ValueError("schedule entries must index the four combinations")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    @classmethod
    def from_labels(cls, combos: Sequence[Tuple[str, str]]) -> "BasisSchedule":
        return cls([COMBINATIONS.index(tuple(c)) for c in combos])

    @property
    def combinations(self):
        return [COMBINATIONS[k] for k in self.entries]


@dataclass(frozen=True)
class RunRecord:
    """Outcome counts and derived CHSH quantities of a single run.

    ``counts[c, o]`` counts outcome ``OUTCOMES[o]`` under combination ``c``.
    ``coherence_trace``, when recorded, holds the next-pair coherence of the
    ancilla just before each pair is prepared.
    """

    counts: np.ndarray = field(repr=False)
    correlators: np.ndarray
    s_value: float
    violated_chsh: bool
    violated_reduced: bool
    coherence_trace: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def pairs(self) -> int:
        return int(self.counts.sum())

    @property
    def c_apbp(self) -> float:
        return float(self.correlators[A_PRIME_B_PRIME])


def make_schedule(m: int, mode: str = "balanced", rng=None) -> BasisSchedule:
    """Draw the basis combinations for ``m`` pairs.

    ``balanced`` shuffles exactly ``m / 4`` copies of each combination;
    ``uniform`` picks every entry independently.
    """
    rng = np.random.default_rng(rng)
    if int(m) != m or m < 1:
        raise ValueError(f"number of pairs must be a positive integer, got {m}")
    if mode == "balanced":
        if m % 4:
            raise ValueError("M must be divisible by 4")
        return BasisSchedule(rng.permutation(np.repeat(np.arange(4), m // 4)))
    if mode == "uniform":
        return BasisSchedule(rng.integers(0, 4, size=m))
    raise ValueError(f"unknown schedule mode {mode!r}")


def compute_correlators(counts: np.ndarray) -> np.ndarray:
    """``(n_same - n_diff) / n`` for each combination."""
    counts = np.asarray(counts)
    totals = counts.sum(axis=1)
    if (totals == 0).any():
        missing = [COMBINATIONS[k] for k in np.flatnonzero(totals == 0)]
        raise ValueError(f"unsampled correlator for {missing}")
    same = counts[:, _SAME].sum(axis=1)
    return (2 * same - totals) / totals


def chsh_s(correlators: Sequence[float]) -> float:
    """``|-C(a,b) + C(a,b') + C(a',b) + C(a',b')|``."""
    c_ab, c_abp, c_apb, c_apbp = correlators
    return abs(-c_ab + c_abp + c_apb + c_apbp)


def _record(counts, trace=None) -> RunRecord:
    correlators = compute_correlators(counts)
    s = chsh_s(correlators)
    return RunRecord(
        counts=counts,
        correlators=correlators,
        s_value=s,
        violated_chsh=bool(s > 2),
        violated_reduced=bool(correlators[A_PRIME_B_PRIME] > 0),
        coherence_trace=trace,
    )


def _combo_bases(combo: int):
    label_a, label_b = COMBINATIONS[combo]
    return BASES[label_a], BASES[label_b]


def run_experiment(
    anc0: AncillaState,
    schedule: BasisSchedule,
    rng=None,
    trunc_eps: float = 0.0,
    record_trace: bool = False,
) -> RunRecord:
    """Measure ``len(schedule)`` pairs prepared one after another from ``anc0``.

    Each pair is injected into the current ancilla, measured in the scheduled
    bases and the collapsed ancilla is carried over to the next pair. One
    uniform draw per pair is taken up front, so the outcomes coincide with
    chaining :func:`~seqbell.core.inject` and
    :func:`~seqbell.core.measure_pair` on the same generator.

    Only the ancilla amplitude profile matters for later pairs, and it changes
    shape only when both bases are rotated. The kernel therefore tracks the
    nonzero profile and skips plain index shifts.
    """
    rng = np.random.default_rng(rng)
    entries = schedule.entries
    uniforms = rng.random(len(entries))

    profile = np.trim_zeros(np.asarray(anc0.amp, dtype=complex))
    gamma = coherence_of(profile)
    counts = np.zeros((4, 4), dtype=np.int64)
    trace = np.full(len(entries), gamma, dtype=complex) if record_trace else None

    bases = [_combo_bases(c) for c in range(4)]
    weights = [
        [branch_weights(ba, bb, i, j) for i, j in OUTCOMES] for ba, bb in bases
    ]
    rotated = np.zeros(len(entries), dtype=bool)
    for c, (ba, bb) in enumerate(bases):
        mask = entries == c
        if all(w_eg == 0 or w_ge == 0 for w_eg, w_ge in weights[c]):
            # outcome statistics of these pairs do not depend on the ancilla
            cdf = np.cumsum(outcome_probabilities(0, ba.theta, bb.theta))
            picked = np.searchsorted(cdf, uniforms[mask] * cdf[-1], side="right")
            counts[c] = np.bincount(np.minimum(picked, 3), minlength=4)
        else:
            rotated |= mask

    zz = [-math.cos(2 * ba.theta) * math.cos(2 * bb.theta) for ba, bb in bases]
    xx = [math.sin(2 * ba.theta) * math.sin(2 * bb.theta) for ba, bb in bases]
    for k in np.flatnonzero(rotated):
        combo = entries[k]
        # p(i, j) = (1 + i j E) / 4, inverse CDF over OUTCOMES order
        p_same = (1 + zz[combo] + gamma.real * xx[combo]) / 4
        u = uniforms[k]
        if u < p_same:
            o = 0
        elif u < 0.5:
            o = 1
        elif u < 1 - p_same:
            o = 2
        else:
            o = 3
        counts[combo, o] += 1
        w_eg, w_ge = weights[combo][o]
        shifted = np.empty(len(profile) + 1, dtype=complex)
        shifted[0] = 0
        shifted[1:] = w_eg * profile
        shifted[:-1] += w_ge * profile
        profile = np.trim_zeros(shifted)
        if trunc_eps > 0:
            kept = np.trim_zeros(np.where(np.abs(profile) < trunc_eps, 0, profile))
            if kept.size:
                profile = kept
        profile = profile / math.sqrt(np.vdot(profile, profile).real)
        gamma = coherence_of(profile)
        if record_trace:
            trace[k + 1:] = gamma

    return _record(counts, trace)


def run_experiment_fresh(n: int, schedule: BasisSchedule, rng=None) -> RunRecord:
    """Measure independent pairs, each prepared from a new ``n``-particle ancilla."""
    rng = np.random.default_rng(rng)
    gamma = next_pair_coherence(make_bec_ancilla(n))
    entries = schedule.entries
    uniforms = rng.random(len(entries))
    counts = np.zeros((4, 4), dtype=np.int64)
    for c in range(4):
        ba, bb = _combo_bases(c)
        cdf = np.cumsum(outcome_probabilities(gamma, ba.theta, bb.theta))
        u = uniforms[entries == c]
        picked = np.minimum(np.searchsorted(cdf, u * cdf[-1], side="right"), 3)
        counts[c] = np.bincount(picked, minlength=4)
    return _record(counts)
