"""Quantum and classical Fisher information for multi-mode Ramsey interferometers.

The forward model is a single particle entering mode ``i``, split by ``U_1``,
phase-shifted by ``diag(exp(1j * phi))`` and recombined by ``U_2``:

    p(m | theta) = |<m| U_2 diag(exp(1j * phi(theta))) U_1 |i>|^2
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FisherMatrix, ParametrizationMap, ProbeState, phases_from_params
from .errors import InvalidArgument, SingularFisherMatrix

COND_LIMIT = 1e12


def _matrix(M) -> np.ndarray:
    return np.asarray(getattr(M, "entries", M))


@dataclass(frozen=True)
class RamseyProtocol:
    """Splitter, combiner, input port and phase map of one interferometer.

    The combiner is stored separately from the splitter, so non-Ramsey
    combiners (or complex splitters) can be expressed as well.
    """

    splitter: np.ndarray
    combiner: np.ndarray
    input_mode: int
    map: ParametrizationMap

    def __post_init__(self):
        U1 = _matrix(self.splitter)
        U2 = _matrix(self.combiner)
        n = self.map.D + 1
        if U1.shape != (n, n) or U2.shape != (n, n):
            raise InvalidArgument(
                f"splitter {U1.shape} and combiner {U2.shape} must both be {n}x{n}"
            )
        if not 0 <= self.input_mode < n:
            raise InvalidArgument(f"input_mode {self.input_mode} outside 0..{n - 1}")
        for name, M in (("splitter", U1), ("combiner", U2)):
            M = np.array(M, copy=True)
            M.setflags(write=False)
            object.__setattr__(self, name, M)

    @property
    def D(self) -> int:
        return self.map.D

    @property
    def probe(self) -> ProbeState:
        return ProbeState(self.splitter[:, self.input_mode])


def ramsey(splitter, input_mode: int, pmap: ParametrizationMap) -> RamseyProtocol:
    """Ramsey protocol: the combiner is the inverse ``U_1^dagger`` of the splitter."""
    U = _matrix(splitter)
    return RamseyProtocol(U, U.conj().T, input_mode, pmap)


def qfim_pure(probe: ProbeState, pmap: ParametrizationMap, N: float = 1.0) -> FisherMatrix:
    """QFIM of ``N`` unentangled copies of the phase-shifted probe.

    ``F[l, n] = 4N [sum_k J_kl J_kn w_k - (sum_k J_kl w_k)(sum_k J_kn w_k)]``
    with ``w_k = |alpha_k|^2``; the phases of the amplitudes drop out.
    """
    w = probe.populations
    J = pmap.jacobian
    if w.size != J.shape[0]:
        raise InvalidArgument(f"probe has {w.size} modes, map expects {J.shape[0]}")
    mean = J.T @ w
    F = 4.0 * N * ((J.T * w) @ J - np.outer(mean, mean))
    return FisherMatrix(0.5 * (F + F.T), particle_count=N, kind="quantum")


def qfim_poisson(probe: ProbeState, pmap: ParametrizationMap, mean_N: float) -> FisherMatrix:
    """QFIM for a Poisson-distributed particle number with mean ``mean_N``.

    Exact for an incoherent mixture of unentangled product states: the
    N-particle QFIMs add with weights ``Q_N`` and ``sum_N Q_N N = mean_N``.
    """
    if mean_N <= 0:
        raise InvalidArgument("mean_N must be positive")
    single = qfim_pure(probe, pmap, 1.0).entries
    return FisherMatrix(single * mean_N, particle_count=mean_N, kind="quantum")


def qcrb_total_variance(F: FisherMatrix) -> float:
    """``Tr[F^-1]``, the total-variance bound.

    Raises:
        SingularFisherMatrix: if the condition number exceeds 1e12.
    """
    M = F.entries if isinstance(F, FisherMatrix) else np.atleast_2d(np.asarray(F, dtype=float))
    if not np.all(np.isfinite(M)):
        raise SingularFisherMatrix(np.inf)
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularFisherMatrix(float(cond))
    return float(np.trace(np.linalg.inv(M)))


def _amplitudes(proto: RamseyProtocol, theta):
    phi = np.asarray(phases_from_params(proto.map, theta))
    shifted = np.exp(1j * phi) * proto.splitter[:, proto.input_mode]
    return proto.combiner @ shifted, shifted


def output_probabilities(proto: RamseyProtocol, theta) -> np.ndarray:
    """Detection probabilities ``p(m | theta)`` for every output mode."""
    amp, _ = _amplitudes(proto, theta)
    return np.abs(amp) ** 2


def probability_jacobian(proto: RamseyProtocol, theta) -> np.ndarray:
    """Exact ``dp(m|theta)/dtheta_l`` as a (D+1) x D matrix.

    Uses ``d psi / d theta_l = U_2 diag(1j * J[:, l] * exp(1j * phi)) U_1 |i>``.
    """
    amp, shifted = _amplitudes(proto, theta)
    dpsi = proto.combiner @ (1j * proto.map.jacobian * shifted[:, None])
    return 2.0 * np.real(np.conj(amp)[:, None] * dpsi)


def cfim(proto: RamseyProtocol, theta, N: float = 1.0, floor: float = 1e-12) -> FisherMatrix:
    """Classical Fisher information of population detection.

    Modes with ``p < floor`` whose derivative row is also below ``sqrt(floor)``
    carry no information and are skipped. Other modes with tiny ``p`` enter
    with ``p`` clamped to ``floor``, so the matrix stays finite; genuine
    divergence then shows up as ill-conditioning.
    """
    p = output_probabilities(proto, theta)
    dp = probability_jacobian(proto, theta)
    dead = (p <= floor) & (np.abs(dp).max(axis=1) <= np.sqrt(floor))
    p, dp = np.maximum(p[~dead], floor), dp[~dead]
    F = N * (dp / p[:, None]).T @ dp
    return FisherMatrix(0.5 * (F + F.T), particle_count=N, kind="classical")


def taylor_probabilities(proto: RamseyProtocol, theta) -> np.ndarray:
    """Second-order expansion of ``p(m|theta)`` around zero phase.

    Assumes the combiner is ``U_1^dagger``; only the splitter is used.
    """
    U = proto.splitter
    i = proto.input_mode
    f = np.asarray(phases_from_params(proto.map, theta))
    Ud = U.conj().T
    # a[m, k] = <m|U^dag|k><k|U|i>
    a = Ud * U[:, i][None, :]
    lin = a @ f
    p = np.abs(lin) ** 2
    w = np.abs(Ud[i, :]) ** 2
    p[i] = 1.0 + (w @ f) ** 2 - w @ f**2
    return p
