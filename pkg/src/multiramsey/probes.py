"""Optimal probe states and closed-form variance bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .core import ParametrizationMap, ProbeState, make_parametrization
from .errors import InvalidArgument, NonConvergence, ZeroAmplitude

ZERO_POP = 1e-15
SCHEMES = ("simultaneous_opt", "individual", "indirect_jacobian", "osrs", "custom")


@dataclass(frozen=True)
class BoundReport:
    scheme: str
    D: int
    N: float
    total_variance: float

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InvalidArgument(f"unknown scheme {self.scheme!r}")
        if not self.total_variance > 0:
            raise InvalidArgument("total_variance must be positive")


def _check_D(D) -> int:
    if int(D) != D or D < 1:
        raise InvalidArgument(f"D must be a positive integer, got {D!r}")
    return int(D)


def _check_N(N) -> float:
    if not N > 0:
        raise InvalidArgument(f"N must be positive, got {N!r}")
    return float(N)


def variance_bound_theta(probe: ProbeState, N: float = 1.0, reference: int = 0) -> float:
    """Total-variance QCRB for ``theta_k = phi_k - phi_ref``.

    ``(1/N) [D / (4 w_ref) + sum_{k != ref} 1 / (4 w_k)]`` with ``w = |alpha|^2``.
    """
    N = _check_N(N)
    w = probe.populations if isinstance(probe, ProbeState) else np.asarray(probe, dtype=float)
    D = w.size - 1
    small = np.flatnonzero(w < ZERO_POP)
    if small.size:
        raise ZeroAmplitude(int(small[0]), float(w[small[0]]))
    others = np.delete(w, reference)
    return (D / (4.0 * w[reference]) + np.sum(1.0 / (4.0 * others))) / N


def optimal_probe_theta(D: int) -> ProbeState:
    """Optimal populations for reference-mode phases: the reference mode
    carries ``sqrt(D)`` times the population of each other mode."""
    D = _check_D(D)
    s = math.sqrt(D)
    w = np.full(D + 1, 1.0 / (D + s))
    w[0] = s / (D + s)
    return ProbeState.from_populations(w)


def qcrb_theta_opt(D: int, N: float = 1.0) -> float:
    D, N = _check_D(D), _check_N(N)
    return (D + math.sqrt(D)) ** 2 / (4.0 * N)


def qcrb_individual(D: int, N: float = 1.0) -> float:
    """Bound for D independent two-mode interferometers sharing N particles."""
    D, N = _check_D(D), _check_N(N)
    return D * D / N


def optimal_probe_phi(D: int) -> ProbeState:
    """Optimal populations for neighbouring-mode phase differences."""
    D = _check_D(D)
    if D == 1:
        return ProbeState.from_populations([0.5, 0.5])
    denom = math.sqrt(2.0) * (D - 1) + 2.0
    w = np.full(D + 1, math.sqrt(2.0) / denom)
    w[0] = w[-1] = 1.0 / denom
    return ProbeState.from_populations(w)


def qcrb_phi_opt(D: int, N: float = 1.0) -> float:
    D, N = _check_D(D), _check_N(N)
    return (math.sqrt(2.0) * (D - 1) + 2.0) ** 2 / (4.0 * N)


def indirect_phi_bound(D: int, N: float = 1.0) -> float:
    """Bound on neighbouring differences derived from reference-mode estimates
    made with the theta-optimal probe."""
    D, N = _check_D(D), _check_N(N)
    s = math.sqrt(D)
    return ((1.0 + s) ** 2 + 2.0 * (D - 1) * (s + D)) / (4.0 * N)


def indirect_bound(fisher, jacobian) -> float:
    """``Tr[J F^-1 J^T]`` for derived parameters with ``J = d(new)/d(old)``."""
    F = np.asarray(getattr(fisher, "entries", fisher), dtype=float)
    J = np.atleast_2d(np.asarray(jacobian, dtype=float))
    return float(np.trace(J @ np.linalg.solve(F, J.T)))


def neighbor_from_reference_jacobian(D: int) -> np.ndarray:
    """``d varphi_k / d theta_l`` for ``varphi_k = theta_k - theta_{k-1}`` (``theta_0 = 0``)."""
    D = _check_D(D)
    return np.eye(D) - np.eye(D, k=-1)


def _trace_inverse_and_grad(w: np.ndarray, J: np.ndarray):
    mean = J.T @ w
    F = 4.0 * ((J.T * w) @ J - np.outer(mean, mean))
    Finv = np.linalg.inv(F)
    F2 = Finv @ Finv
    # d Tr[F^-1] / d w_k = -Tr[F^-1 (dF/dw_k) F^-1]
    grad = -4.0 * (np.einsum("kl,lm,km->k", J, F2, J) - 2.0 * J @ (F2 @ mean))
    return float(np.trace(Finv)), grad


def optimize_probe_numeric(
    pmap: ParametrizationMap | str,
    D: int | None = None,
    seed: int = 0,
    max_iter: int = 100_000,
    patience: int = 50,
    rtol: float = 1e-12,
) -> ProbeState:
    """Minimize ``Tr[(F^Q)^-1]`` over the probability simplex.

    Populations are written as a softmax of free logits, which keeps them
    positive and normalized; BFGS with the analytic gradient does the rest.
    Converged once the objective improves by less than ``rtol`` (relative)
    over ``patience`` iterations.

    Raises:
        NonConvergence: after ``max_iter`` iterations; ``best`` holds the
            best probe found.
    """
    if isinstance(pmap, str):
        pmap = make_parametrization(pmap, _check_D(D))
    J = pmap.jacobian
    n = J.shape[0]
    if D is not None and _check_D(D) != n - 1:
        raise InvalidArgument(f"map has D={n - 1}, got D={D}")
    if n == 2:
        return ProbeState.from_populations([0.5, 0.5])

    def softmax(z):
        e = np.exp(z - z.max())
        return e / e.sum()

    def objective(z):
        w = softmax(z)
        try:
            val, g = _trace_inverse_and_grad(w, J)
        except np.linalg.LinAlgError:
            return np.inf, np.zeros_like(z)
        if not np.isfinite(val) or val <= 0:
            return np.inf, np.zeros_like(z)
        return val, w * (g - w @ g)

    rng = np.random.default_rng(seed)
    z0 = 0.01 * rng.standard_normal(n)
    history: list[float] = []
    best = {"z": z0, "f": objective(z0)[0]}

    def callback(intermediate_result):
        f = float(intermediate_result.fun)
        history.append(f)
        if f < best["f"]:
            best["z"], best["f"] = np.array(intermediate_result.x), f
        if len(history) > patience:
            old = history[-patience - 1]
            if old - f <= rtol * abs(f):
                raise StopIteration

    res = minimize(
        objective,
        z0,
        jac=True,
        method="BFGS",
        callback=callback,
        options={"maxiter": max_iter, "gtol": 1e-14},
    )
    if res.fun < best["f"]:
        best["z"], best["f"] = res.x, res.fun
    probe = ProbeState.from_populations(softmax(best["z"]))
    if res.nit >= max_iter:
        raise NonConvergence(f"no convergence after {max_iter} iterations", best=probe)
    return probe
