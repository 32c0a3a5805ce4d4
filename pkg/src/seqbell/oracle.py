"""Brute-force references: the whole multipartite state, exact outcome
distributions by enumeration, and the general two-qubit concurrence.

Everything here is exponential in the number of pairs and meant for small
cross-checks of the sequential simulator.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
from scipy.stats import binom

from .core import (
    BASES,
    OUTCOMES,
    AncillaState,
    TwoQubitDensity,
    branch_weights,
    inject,
    outcome_distribution,
)
from .protocol import A_PRIME_B_PRIME, COMBINATIONS, BasisSchedule

MAX_AMPLITUDES = 10**6

Outcome = Tuple[int, int]
OutcomeDistribution = Dict[Tuple[Outcome, ...], float]


@dataclass(frozen=True)
class MultipartiteState:
    """Ancilla plus ``pairs`` target pairs before any measurement.

    ``amp[L, n_1, ..., n_M]`` is the amplitude of
    ``|L, N + M - L>_anc (x) |n_1, 1 - n_1> (x) ... (x) |n_M, 1 - n_M>`` where
    ``n_k = 1`` means the left target of pair ``k`` is excited.
    """

    n_ancilla: int
    pairs: int
    amp: np.ndarray = field(repr=False)


def build_full_state(n: int, m: int) -> MultipartiteState:
    """Amplitudes of the unmeasured ``N``-ancilla, ``M``-pair state.

    Terms with different ``j`` but equal ``j + sum(n_k)`` share the same
    ancilla ket and are merged onto one basis label.
    """
    if n < 0 or m < 1:
        raise ValueError("need n >= 0 and m >= 1")
    if (n + m + 1) * 2**m > MAX_AMPLITUDES:
        raise ValueError(f"state with N={n}, M={m} exceeds {MAX_AMPLITUDES} amplitudes")
    p = binom.pmf(np.arange(n + 1), n, 0.5)
    bits = np.indices((2,) * m).reshape(m, -1).sum(axis=0)
    amp = np.zeros((n + m + 1, 2**m))
    for left in range(n + m + 1):
        j = left - bits
        ok = (j >= 0) & (j <= n)
        amp[left, ok] = np.sqrt(p[j[ok]] / 2**m)
    return MultipartiteState(n, m, amp.reshape((n + m + 1,) + (2,) * m).astype(complex))


def exact_outcome_distribution(
    full: MultipartiteState, schedule: BasisSchedule
) -> OutcomeDistribution:
    """Probability of every outcome sequence by projecting the full state.

    Pairs are measured in schedule order; each measurement contracts that
    pair's axis with the outcome's overlaps. Branches of probability exactly
    zero are pruned.
    """
    if len(schedule) != full.pairs:
        raise ValueError("schedule length must equal the number of pairs")
    combos = [COMBINATIONS[c] for c in schedule.entries]
    result: OutcomeDistribution = {}

    def recurse(state, depth, prefix):
        if depth == full.pairs:
            result[prefix] = float(np.vdot(state, state).real)
            return
        ba, bb = BASES[combos[depth][0]], BASES[combos[depth][1]]
        for i, j in OUTCOMES:
            w_eg, w_ge = branch_weights(ba, bb, i, j)
            # axis 1 is the earliest unmeasured pair; index 0 is |ge>, 1 is |eg>
            projected = np.tensordot(state, np.array([w_ge, w_eg]), axes=([1], [0]))
            if np.vdot(projected, projected).real == 0:
                continue
            recurse(projected, depth + 1, prefix + ((i, j),))

    recurse(full.amp, 0, ())
    return result


def sequential_outcome_distribution(
    anc0: AncillaState, schedule: BasisSchedule
) -> OutcomeDistribution:
    """Same distribution via repeated inject/measure on the ancilla alone."""
    combos = [COMBINATIONS[c] for c in schedule.entries]
    result: OutcomeDistribution = {}

    def recurse(anc, depth, prob, prefix):
        if depth == len(combos):
            result[prefix] = prob
            return
        ba, bb = BASES[combos[depth][0]], BASES[combos[depth][1]]
        for outcome, (p, post) in outcome_distribution(inject(anc), ba, bb).items():
            if p == 0:
                continue
            recurse(post, depth + 1, prob * p, prefix + (outcome,))

    recurse(anc0, 0, 1.0, ())
    return result


def total_variation(p: OutcomeDistribution, q: OutcomeDistribution) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def violation_probability(dist: OutcomeDistribution, schedule: BasisSchedule) -> float:
    """Exact probability that C(a',b') > 0 over the run.

    Raises if the schedule has no (a', b') pair.
    """
    positions = np.flatnonzero(schedule.entries == A_PRIME_B_PRIME)
    if positions.size == 0:
        raise ValueError("unsampled correlator for (a', b')")
    total = 0.0
    for sequence, prob in dist.items():
        products = sum(sequence[k][0] * sequence[k][1] for k in positions)
        if products > 0:
            total += prob
    return total


_SIGMA_YY = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])


def wootters_concurrence(rho) -> float:
    """Concurrence ``max(0, l1 - l2 - l3 - l4)`` of a two-qubit density matrix.

    ``l_k`` are the decreasing square roots of the eigenvalues of
    ``rho (sy x sy) rho* (sy x sy)``.
    """
    if not isinstance(rho, TwoQubitDensity):
        rho = TwoQubitDensity(np.asarray(rho, dtype=complex))
    m = rho.matrix
    r = m @ _SIGMA_YY @ m.conj() @ _SIGMA_YY
    lam = np.sqrt(np.abs(np.sort(np.linalg.eigvals(r).real)[::-1]))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))
