"""Value types for multi-mode interferometry: probes, phase maps, real unitaries.

Modes are indexed 0..D. A parametrization maps the D parameters of interest
to the D+1 mode phases through ``phi = offsets + jacobian @ theta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, InvalidParametrization, NotOrthogonal

NORM_TOL = 1e-12
RANK_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ProbeState:
    """Single-particle superposition ``sum_k alpha_k |k>`` after the splitter."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amps.size < 2:
            raise InvalidArgument("a probe needs at least two modes")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidArgument(f"probe is not normalized (sum |alpha|^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def from_populations(cls, populations) -> ProbeState:
        """Probe with non-negative real amplitudes ``sqrt(p_k)``."""
        p = np.asarray(populations, dtype=float)
        if np.any(p < 0):
            raise InvalidArgument("populations must be non-negative")
        return cls(np.sqrt(p).astype(complex))

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def D(self) -> int:
        return self.amplitudes.size - 1


@dataclass(frozen=True)
class ParametrizationMap:
    """Linear map ``phi_k = c_k + sum_l J[k, l] theta_l``."""

    offsets: np.ndarray
    jacobian: np.ndarray

    def __post_init__(self):
        J = np.asarray(self.jacobian, dtype=float)
        if J.ndim != 2 or J.shape[0] != J.shape[1] + 1:
            raise InvalidParametrization(f"jacobian must be (D+1) x D, got shape {J.shape}")
        if np.linalg.matrix_rank(J, tol=RANK_TOL) != J.shape[1]:
            raise InvalidParametrization("jacobian is rank deficient")
        c = np.asarray(self.offsets, dtype=float).ravel()
        if c.size != J.shape[0]:
            raise InvalidParametrization(f"expected {J.shape[0]} offsets, got {c.size}")
        object.__setattr__(self, "jacobian", _frozen(J))
        object.__setattr__(self, "offsets", _frozen(c))

    @property
    def D(self) -> int:
        return self.jacobian.shape[1]

    def phases(self, theta) -> PhaseVector:
        return phases_from_params(self, theta)


@dataclass(frozen=True)
class OrthogonalMatrix:
    """Real unitary ``U`` (``U @ U.T == I``)."""

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(np.asarray(self.entries, dtype=float)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class FisherMatrix:
    """Symmetric PSD information matrix with the particle number already folded in."""

    entries: np.ndarray
    particle_count: float = 1.0
    kind: str = field(default="quantum", compare=False)

    def __post_init__(self):
        F = np.atleast_2d(np.asarray(self.entries, dtype=float))
        if F.shape[0] != F.shape[1]:
            raise InvalidArgument(f"Fisher matrix must be square, got {F.shape}")
        if self.particle_count <= 0:
            raise InvalidArgument("particle_count must be positive")
        scale = max(np.abs(F).max(initial=0.0), 1e-300)
        if np.abs(F - F.T).max(initial=0.0) > 1e-10 * scale:
            raise InvalidArgument("Fisher matrix is not symmetric")
        if np.all(np.isfinite(F)) and F.size:
            ev = np.linalg.eigvalsh(0.5 * (F + F.T))
            if ev[0] < -1e-10 * max(abs(ev[-1]), 1e-300):
                raise InvalidArgument(f"Fisher matrix is not PSD (min eigenvalue {ev[0]:.3e})")
        object.__setattr__(self, "entries", _frozen(F))

    @property
    def D(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class PhaseVector:
    phases: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.phases, dtype=float).ravel()
        if not np.all(np.isfinite(p)):
            raise InvalidArgument("phases must be finite")
        object.__setattr__(self, "phases", _frozen(p))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.phases, dtype=dtype)


def make_parametrization(
    kind: str,
    D: int,
    custom_jacobian=None,
    gauge_mode: int | None = None,
    reference_mode: int = 0,
    offsets=None,
) -> ParametrizationMap:
    """Build a phase map for one of the standard parameter choices.

    Args:
        kind: ``"theta_ref"`` (``theta_k = phi_k - phi_ref``), ``"phi_neighbor"``
            (``theta_k = phi_k - phi_{k-1}``) or ``"custom"``.
        D: number of parameters.
        custom_jacobian: (D+1) x D matrix, required for ``"custom"``.
        gauge_mode: mode whose phase is pinned to zero. Only the choice of the
            free global phase changes; the parameters keep their meaning.
            Defaults to the reference mode.
        reference_mode: reference mode for ``"theta_ref"``. The parameters
            address the remaining modes in increasing index order.
        offsets: constant phases ``c_k`` (default zero).
    """
    if int(D) != D or D < 1:
        raise InvalidArgument(f"D must be a positive integer, got {D!r}")
    D = int(D)
    if kind == "theta_ref":
        if not 0 <= reference_mode <= D:
            raise InvalidArgument(f"reference_mode {reference_mode} outside 0..{D}")
        J = np.zeros((D + 1, D))
        others = [k for k in range(D + 1) if k != reference_mode]
        for col, k in enumerate(others):
            J[k, col] = 1.0
        default_gauge = reference_mode
    elif kind == "phi_neighbor":
        J = np.tril(np.ones((D + 1, D)), k=-1)
        default_gauge = 0
    elif kind == "custom":
        if custom_jacobian is None:
            raise InvalidParametrization("custom parametrization needs a jacobian")
        J = np.asarray(custom_jacobian, dtype=float)
        if J.shape != (D + 1, D):
            raise InvalidParametrization(f"custom jacobian must be {(D + 1, D)}, got {J.shape}")
        default_gauge = None
    else:
        raise InvalidArgument(f"unknown parametrization kind {kind!r}")

    gauge = default_gauge if gauge_mode is None else gauge_mode
    if gauge is not None:
        if not 0 <= gauge <= D:
            raise InvalidArgument(f"gauge_mode {gauge} outside 0..{D}")
        # a common phase on every mode is unobservable
        J = J - J[gauge]
    c = np.zeros(D + 1) if offsets is None else offsets
    return ParametrizationMap(offsets=c, jacobian=J)


def phases_from_params(pmap: ParametrizationMap, theta) -> PhaseVector:
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size != pmap.D:
        raise InvalidArgument(f"expected {pmap.D} parameters, got {theta.size}")
    return PhaseVector(pmap.offsets + pmap.jacobian @ theta)


def validate_orthogonal(M, tol: float = 1e-12) -> OrthogonalMatrix:
    """Check that ``M`` is real and orthogonal and return it as such.

    Raises:
        NotOrthogonal: with the failing check and the size of the violation.
    """
    M = np.asarray(getattr(M, "entries", M))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidArgument(f"matrix must be square, got shape {M.shape}")
    imag = float(np.abs(np.imag(M)).max(initial=0.0))
    if imag > tol:
        raise NotOrthogonal("imaginary", imag, tol)
    R = np.real(M).astype(float)
    dev = float(np.abs(R @ R.T - np.eye(R.shape[0])).max(initial=0.0))
    if dev > tol:
        raise NotOrthogonal("orthogonality", dev, tol)
    return OrthogonalMatrix(R)
