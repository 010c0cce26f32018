"""Real splitting transformations: beam-splitter cascades and spin rotations.

Spin sublevels are laid out in descending order, mode index ``j = F - m``, so
that ``exp(-i F_y chi)`` for F = 1 reads in the (|+1>, |0>, |-1>) basis:

    [[(1+c)/2, -s/sqrt2, (1-c)/2],
     [  s/sqrt2,    c,  -s/sqrt2],
     [(1-c)/2,  s/sqrt2, (1+c)/2]]
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .core import OrthogonalMatrix, ProbeState, validate_orthogonal
from .errors import InvalidArgument, ZeroResidual

ZERO_POP = 1e-15


def _twice(x) -> int:
    """``2x`` as an int, rejecting values that are not half-integers."""
    t = 2 * float(x)
    r = int(round(t))
    if abs(t - r) > 1e-9:
        raise InvalidArgument(f"{x!r} is not a half-integer")
    return r


@dataclass(frozen=True)
class CascadeAngles:
    """Beam-splitter angles: ``cos^2(eta_k)`` is the reflectance of splitter k."""

    etas: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.etas, dtype=float).ravel()
        if np.any(e < 0) or np.any(e > np.pi / 2):
            raise InvalidArgument("cascade angles must lie in [0, pi/2]")
        e.setflags(write=False)
        object.__setattr__(self, "etas", e)

    @property
    def D(self) -> int:
        return self.etas.size


@dataclass(frozen=True)
class SpinRotationSpec:
    """Single rotation ``exp(-i F_y chi)`` starting from ``|F, initial_m>``,
    with ``|F, reference_m>`` as the phase reference."""

    F: float
    chi: float
    initial_m: float | None = None
    reference_m: float | None = None

    def __post_init__(self):
        twoF = _twice(self.F)
        if twoF < 0:
            raise InvalidArgument("F must be non-negative")
        for name in ("initial_m", "reference_m"):
            m = getattr(self, name)
            if m is None:
                # lowest non-negative sublevel: 0, or 1/2 for half-integer F
                m = (twoF % 2) / 2
                object.__setattr__(self, name, m)
            if abs(_twice(m)) > twoF or (_twice(m) - twoF) % 2:
                raise InvalidArgument(f"{name}={m} is not a sublevel of F={self.F}")

    @property
    def dim(self) -> int:
        return _twice(self.F) + 1

    def index(self, m) -> int:
        return spin_index(self.F, m)


def spin_index(F, m) -> int:
    """Mode index of sublevel ``m`` (descending order, ``F - m``)."""
    return (_twice(F) - _twice(m)) // 2


def spin_levels(F) -> np.ndarray:
    """Sublevels ``m`` in mode order: ``F, F-1, ..., -F``."""
    twoF = _twice(F)
    return (twoF - 2 * np.arange(twoF + 1)) / 2.0


def bs_cascade_angles(target) -> CascadeAngles:
    """Splitter angles that deposit ``|alpha_k|^2`` into mode k.

    ``cos^2 eta_1 = w_0`` and ``cos^2 eta_k = w_{k-1} / (1 - w_0 - ... - w_{k-2})``.
    Once the residual is exhausted the remaining splitters are set to zero.
    """
    w = target.populations if isinstance(target, ProbeState) else np.abs(np.asarray(target)) ** 2
    D = w.size - 1
    etas = np.zeros(D)
    residual = 1.0
    for k in range(1, D + 1):
        remaining = float(np.sum(w[k - 1 :]))
        if residual < ZERO_POP:
            if remaining > ZERO_POP:
                raise ZeroResidual(
                    f"splitter {k}: residual {residual:.3e} but {remaining:.3e} still to place"
                )
            etas[k - 1] = 0.0
            continue
        c2 = min(max(w[k - 1] / residual, 0.0), 1.0)
        etas[k - 1] = math.acos(math.sqrt(c2))
        residual -= w[k - 1]
    return CascadeAngles(etas)


def givens(dim: int, k: int, eta: float) -> np.ndarray:
    """Real rotation on modes (k-1, k) with ``+sin`` below the diagonal."""
    G = np.eye(dim)
    c, s = math.cos(eta), math.sin(eta)
    G[k - 1, k - 1] = G[k, k] = c
    G[k, k - 1] = s
    G[k - 1, k] = -s
    return G


def bs_cascade_unitary(angles: CascadeAngles) -> OrthogonalMatrix:
    """Product ``U^(D) ... U^(1)`` of nearest-neighbour splitters."""
    etas = angles.etas if isinstance(angles, CascadeAngles) else np.asarray(angles, dtype=float)
    dim = etas.size + 1
    U = np.eye(dim)
    for k, eta in enumerate(etas, start=1):
        U = givens(dim, k, eta) @ U
    return validate_orthogonal(U, tol=1e-12)


def wigner_small_d(F, m_row, m_col, chi: float) -> float:
    """Wigner small-d element ``d^F_{m_row, m_col}(chi)`` (factorial sum)."""
    j2, a2, b2 = _twice(F), _twice(m_row), _twice(m_col)
    if abs(a2) > j2 or abs(b2) > j2 or (j2 - a2) % 2 or (j2 - b2) % 2:
        raise InvalidArgument(f"invalid indices F={F}, m'={m_row}, m={m_col}")
    jpa, jma = (j2 + a2) // 2, (j2 - a2) // 2
    jpb, jmb = (j2 + b2) // 2, (j2 - b2) // 2
    amb = (a2 - b2) // 2
    pref = math.sqrt(
        math.factorial(jpa) * math.factorial(jma) * math.factorial(jpb) * math.factorial(jmb)
    )
    c, s = math.cos(chi / 2), math.sin(chi / 2)
    total = 0.0
    for k in range(max(0, -amb), min(jpb, jma) + 1):
        den = (
            math.factorial(jpb - k)
            * math.factorial(k)
            * math.factorial(amb + k)
            * math.factorial(jma - k)
        )
        sign = -1.0 if (amb + k) % 2 else 1.0
        total += sign * c ** (jpb + jma - 2 * k) * s ** (amb + 2 * k) / den
    return pref * total


def wigner_d_matrix(F, chi: float) -> np.ndarray:
    """Full d-matrix in mode order (rows/columns ``m = F, ..., -F``)."""
    m = spin_levels(F)
    return np.array([[wigner_small_d(F, a, b, chi) for b in m] for a in m])


def _fy_eigenbasis(F):
    """Eigenpairs of ``F_y`` as ``(lam, W)`` with ``F_y = W diag(lam) W^dagger``.

    With ``P = diag(1j**j)`` one has ``F_y = P F_x P^dagger`` and ``F_x`` is a
    real symmetric tridiagonal matrix, so ``W = P V`` with ``V`` real.
    """
    m = spin_levels(F)
    F = float(F)
    # <m+1|F_+|m> / 2 for the lower state of each adjacent pair
    lower = m[1:]
    off = 0.5 * np.sqrt(F * (F + 1) - lower * (lower + 1))
    lam, V = eigh_tridiagonal(np.zeros(m.size), off)
    return lam, (1j ** np.arange(m.size))[:, None] * V


def spin_rotation(spec: SpinRotationSpec) -> OrthogonalMatrix:
    """``exp(-i F_y chi)`` assembled from the eigendecomposition of ``F_y``."""
    if spec.dim == 1:
        return OrthogonalMatrix(np.eye(1))
    lam, W = _fy_eigenbasis(spec.F)
    U = (W * np.exp(-1j * lam * spec.chi)) @ W.conj().T
    return validate_orthogonal(U, tol=1e-12)


def spin_rotation_batch(F, chis) -> np.ndarray:
    """``exp(-i F_y chi)`` for an array of angles, shape ``(len(chis), 2F+1, 2F+1)``."""
    chis = np.atleast_1d(np.asarray(chis, dtype=float))
    if _twice(F) == 0:
        return np.ones((chis.size, 1, 1))
    lam, W = _fy_eigenbasis(F)
    U = np.einsum("ik,ck,jk->cij", W, np.exp(-1j * np.outer(chis, lam)), W.conj())
    return U.real


def random_orthogonal(dim: int, seed: int) -> OrthogonalMatrix:
    """Haar-distributed orthogonal matrix from QR of a seeded Gaussian matrix."""
    if dim < 1:
        raise InvalidArgument("dim must be positive")
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
    Q = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
    return validate_orthogonal(Q, tol=1e-12)


def random_unitary(dim: int, seed: int) -> np.ndarray:
    """Haar-distributed complex unitary (generally not orthogonal)."""
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))
