"""Shared two-mode ancilla, pair injection and projective pair measurement.

Target-pair kets use the basis order ``(gg, ge, eg, ee)``; the first letter is
the left target. An ancilla amplitude ``amp[k]`` belongs to the Fock state
``|k, total - k>`` (``k`` particles in the left mode).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import binom

NORM_TOL = 1e-9

#: outcome order used everywhere (inverse-CDF sampling, count tables)
OUTCOMES: Tuple[Tuple[int, int], ...] = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AncillaState:
    """Pure state of the shared two-mode ancilla with ``total`` particles."""

    total: int
    amp: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = _frozen(self.amp)
        object.__setattr__(self, "amp", amp)
        if self.total < 0 or amp.shape != (self.total + 1,):
            raise ValueError(
                f"amplitude length {amp.shape} does not match total={self.total}"
            )
        norm = float(np.vdot(amp, amp).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"ancilla state not normalized (norm^2={norm})")

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amp) ** 2


@dataclass(frozen=True)
class MeasurementBasis:
    """Real measurement basis at angle ``theta``.

    Outcome +1 is ``cos(theta)|g> + sin(theta)|e>`` and outcome -1 is
    ``sin(theta)|g> - cos(theta)|e>``.
    """

    label: str
    theta: float

    def overlap_g(self, outcome: int) -> float:
        """``<u_outcome|g>``."""
        return math.cos(self.theta) if outcome == 1 else math.sin(self.theta)

    def overlap_e(self, outcome: int) -> float:
        """``<u_outcome|e>``."""
        return math.sin(self.theta) if outcome == 1 else -math.cos(self.theta)

    def vectors(self) -> np.ndarray:
        """Rows are the +1 and -1 basis vectors in ``(g, e)`` components."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, s], [s, -c]])


A = MeasurementBasis("a", 0.0)
A_PRIME = MeasurementBasis("a'", math.pi / 3)
B = MeasurementBasis("b", 0.0)
B_PRIME = MeasurementBasis("b'", math.pi / 3)
BASES = {basis.label: basis for basis in (A, A_PRIME, B, B_PRIME)}


@dataclass(frozen=True)
class JointPairState:
    """Ancilla entangled with one freshly prepared target pair.

    ``amp_eg[m]`` and ``amp_ge[m]`` are the amplitudes of
    ``|m, total - m>|eg>`` and ``|m, total - m>|ge>``.
    """

    total: int
    amp_eg: np.ndarray = field(repr=False)
    amp_ge: np.ndarray = field(repr=False)

    def __post_init__(self):
        eg, ge = _frozen(self.amp_eg), _frozen(self.amp_ge)
        object.__setattr__(self, "amp_eg", eg)
        object.__setattr__(self, "amp_ge", ge)
        if eg.shape != (self.total + 1,) or ge.shape != (self.total + 1,):
            raise ValueError("branch amplitude lengths must equal total + 1")
        norm = float(np.vdot(eg, eg).real + np.vdot(ge, ge).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"joint state not normalized (norm^2={norm})")


@dataclass(frozen=True)
class TwoQubitDensity:
    """4x4 density matrix of a target pair in basis ``(gg, ge, eg, ee)``."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = _frozen(self.matrix)
        object.__setattr__(self, "matrix", rho)
        if rho.shape != (4, 4):
            raise ValueError("two-qubit density matrix must be 4x4")
        if not np.allclose(rho, rho.conj().T, atol=1e-12, rtol=0):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > 1e-12:
            raise ValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise ValueError("density matrix is not positive semidefinite")

    @property
    def coherence(self) -> complex:
        """Twice the ``(eg, ge)`` element."""
        return complex(2 * self.matrix[2, 1])


def make_bec_ancilla(n: int, phases: Optional[Sequence[float]] = None) -> AncillaState:
    """Ancilla of ``n`` particles split binomially between the two modes.

    Parameters
    ----------
    n : int
        Number of ancilla particles, ``n >= 0``.
    phases : sequence of float, optional
        Phase ``phi_j`` attached to ``|j, n - j>``; zero by default.
    """
    if int(n) != n or n < 0:
        raise ValueError(f"ancilla particle number must be a non-negative integer, got {n}")
    n = int(n)
    weights = binom.pmf(np.arange(n + 1), n, 0.5)
    amp = np.sqrt(weights).astype(complex)
    if phases is not None:
        phases = np.asarray(phases, dtype=float)
        if phases.shape != (n + 1,):
            raise ValueError(f"expected {n + 1} phases, got {phases.shape[0]}")
        amp = amp * np.exp(1j * phases)
    return AncillaState(n, amp / np.linalg.norm(amp))


def make_custom_ancilla(amplitudes: Sequence[complex]) -> AncillaState:
    """Normalized ancilla state from arbitrary amplitudes over the left count."""
    amp = np.asarray(amplitudes, dtype=complex).ravel()
    if amp.size == 0:
        raise ValueError("empty amplitude vector")
    norm = np.linalg.norm(amp)
    if norm == 0:
        raise ValueError("zero state")
    return AncillaState(amp.size - 1, amp / norm)


def coherence_of(amp: np.ndarray) -> complex:
    """``sum_k amp[k] * conj(amp[k + 1])`` for a raw amplitude vector."""
    if len(amp) < 2:
        return 0j
    return complex(np.vdot(amp[1:], amp[:-1]))


def next_pair_coherence(anc: AncillaState) -> complex:
    """Coherence of the pair the ancilla would prepare next.

    Equals the off-diagonal element (times two) of the reduced pair density
    produced by :func:`inject`. For the binomial ancilla this is
    ``sum_j sqrt(P_j P_{j+1})``.
    """
    return coherence_of(anc.amp)


def pair_density_matrix(gamma: complex) -> TwoQubitDensity:
    """Reduced pair state with equal ``ge``/``eg`` weight and coherence ``gamma``."""
    gamma = complex(gamma)
    if abs(gamma) > 1 + 1e-12:
        raise ValueError(f"unphysical coherence |gamma|={abs(gamma)} > 1")
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = rho[2, 2] = 0.5
    rho[2, 1] = gamma / 2
    rho[1, 2] = gamma.conjugate() / 2
    return TwoQubitDensity(rho)


def inject(anc: AncillaState) -> JointPairState:
    """Prepare one target pair and inject the flying particle into the ancilla.

    The flying particle lands in the left mode on the ``eg`` branch and in the
    right mode on the ``ge`` branch, so the returned state has ``total + 1``
    particles.
    """
    c = anc.amp / math.sqrt(2)
    zero = np.zeros(1, dtype=complex)
    return JointPairState(
        anc.total + 1,
        amp_eg=np.concatenate([zero, c]),
        amp_ge=np.concatenate([c, zero]),
    )


def reduced_pair_density(joint: JointPairState) -> TwoQubitDensity:
    """Trace the ancilla out of ``joint``."""
    eg, ge = joint.amp_eg, joint.amp_ge
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = np.vdot(ge, ge).real
    rho[2, 2] = np.vdot(eg, eg).real
    rho[2, 1] = np.vdot(ge, eg)
    rho[1, 2] = np.vdot(eg, ge)
    return TwoQubitDensity(rho / np.trace(rho).real)


def branch_weights(
    basis_a: MeasurementBasis, basis_b: MeasurementBasis, i: int, j: int
) -> Tuple[float, float]:
    """Overlaps ``(<u_i v_j|eg>, <u_i v_j|ge>)`` of an outcome with both branches."""
    return (
        basis_a.overlap_e(i) * basis_b.overlap_g(j),
        basis_a.overlap_g(i) * basis_b.overlap_e(j),
    )


def outcome_distribution(
    joint: JointPairState, basis_a: MeasurementBasis, basis_b: MeasurementBasis
) -> Dict[Tuple[int, int], Tuple[float, Optional[AncillaState]]]:
    """Born probabilities and post-measurement ancilla for each outcome pair.

    Returns a mapping ``(i, j) -> (probability, ancilla)``; the ancilla is
    ``None`` for outcomes of probability exactly zero.
    """
    result = {}
    for i, j in OUTCOMES:
        w_eg, w_ge = branch_weights(basis_a, basis_b, i, j)
        projected = w_eg * joint.amp_eg + w_ge * joint.amp_ge
        p = float(np.vdot(projected, projected).real)
        post = None
        if p > 0:
            post = AncillaState(joint.total, projected / math.sqrt(p))
        result[(i, j)] = (p, post)
    return result


def sample_outcome(probabilities: Sequence[float], u: float) -> int:
    """Index into :data:`OUTCOMES` picked by inverse CDF at uniform ``u``."""
    cdf = np.cumsum(probabilities)
    idx = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(idx, len(cdf) - 1)


def measure_pair(
    joint: JointPairState,
    basis_a: MeasurementBasis,
    basis_b: MeasurementBasis,
    rng: np.random.Generator,
) -> Tuple[int, int, AncillaState]:
    """Sample one outcome pair and return it with the collapsed ancilla.

    Consumes exactly one ``rng.random()`` draw.
    """
    dist = outcome_distribution(joint, basis_a, basis_b)
    k = sample_outcome([dist[o][0] for o in OUTCOMES], rng.random())
    i, j = OUTCOMES[k]
    return i, j, dist[(i, j)][1]


def correlator_exact(gamma: complex, theta_a: float, theta_b: float) -> float:
    """Expectation of ``sigma_a x sigma_b`` for :func:`pair_density_matrix` states."""
    gamma = complex(gamma)
    if abs(gamma) > 1 + 1e-12:
        raise ValueError(f"unphysical coherence |gamma|={abs(gamma)} > 1")
    return (
        -math.cos(2 * theta_a) * math.cos(2 * theta_b)
        + gamma.real * math.sin(2 * theta_a) * math.sin(2 * theta_b)
    )


def outcome_probabilities(gamma: complex, theta_a: float, theta_b: float) -> np.ndarray:
    """``p(i, j) = (1 + i j E) / 4`` in :data:`OUTCOMES` order."""
    e = correlator_exact(gamma, theta_a, theta_b)
    return np.array([(1 + i * j * e) / 4 for i, j in OUTCOMES])


def truncate(anc: AncillaState, eps: float) -> AncillaState:
    """Zero amplitudes smaller than ``eps`` in modulus and renormalize."""
    if eps <= 0:
        return anc
    amp = np.where(np.abs(anc.amp) < eps, 0, anc.amp)
    if not amp.any():
        return anc
    return AncillaState(anc.total, amp / np.linalg.norm(amp))
