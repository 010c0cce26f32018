"""One-step spin-rotation bounds and the noisy Monte-Carlo estimation pipeline.

A Monte-Carlo run draws the atom number (fixed or Poisson), distributes the
atoms multinomially over the output modes, adds Gaussian detection noise per
mode and estimates the phases by maximum likelihood. Every random stage has
its own generator seeded from ``(seed, *stream, run, stage)``, so results do
not depend on execution order or on the number of worker processes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .core import make_parametrization
from .errors import (
    DegenerateLikelihood,
    InvalidArgument,
    SingularFisherMatrix,
    ZeroAmplitude,
)
from .fisher import RamseyProtocol, cfim, output_probabilities, qcrb_total_variance, ramsey
from .probes import qcrb_individual, variance_bound_theta
from .synthesis import (
    SpinRotationSpec,
    spin_index,
    spin_levels,
    spin_rotation,
    spin_rotation_batch,
    wigner_small_d,
)

STAGE_ATOMS, STAGE_COUNTS, STAGE_NOISE = 0, 1, 2
MAX_GRID_POINTS = 5_000_000


@dataclass(frozen=True)
class DetectionModel:
    sigma: float = 0.0
    atom_count: int = 10_000
    poisson: bool = False

    def __post_init__(self):
        if self.sigma < 0:
            raise InvalidArgument("sigma must be non-negative")
        if int(self.atom_count) != self.atom_count or self.atom_count < 1:
            raise InvalidArgument("atom_count must be a positive integer")


@dataclass(frozen=True)
class MleConfig:
    """Coarse-grid plus simplex search for the likelihood maximum."""

    grid_points: int = 101
    domain: tuple = (0.0, math.pi)
    refine_iters: int = 200
    prob_floor: float = 1e-12
    xatol: float = 1e-6

    def __post_init__(self):
        if self.grid_points < 2:
            raise InvalidArgument("grid_points must be at least 2")
        if self.refine_iters < 1:
            raise InvalidArgument("refine_iters must be positive")

    def bounds(self, D: int) -> list[tuple[float, float]]:
        dom = np.asarray(self.domain, dtype=float)
        if dom.shape == (2,):
            dom = np.tile(dom, (D, 1))
        if dom.shape != (D, 2) or np.any(dom[:, 1] <= dom[:, 0]):
            raise InvalidArgument(f"domain must be one interval or {D} intervals")
        return [(float(lo), float(hi)) for lo, hi in dom]


@dataclass(frozen=True)
class ExperimentConfig:
    protocol: RamseyProtocol
    truth: tuple
    detection: DetectionModel = DetectionModel()
    runs: int = 1000
    seed: int = 0
    mle: MleConfig = MleConfig()
    stream: tuple = ()

    def __post_init__(self):
        truth = tuple(float(t) for t in np.ravel(self.truth))
        if len(truth) != self.protocol.D:
            raise InvalidArgument(f"truth needs {self.protocol.D} values, got {len(truth)}")
        object.__setattr__(self, "truth", truth)
        if self.runs < 1:
            raise InvalidArgument("runs must be at least 1")
        if self.seed < 0 or self.seed >= 2**64:
            raise InvalidArgument("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class VarianceEstimate:
    """Mean-squared error about the truth, summed over parameters."""

    total_variance: float
    per_parameter: np.ndarray
    mean_estimate: np.ndarray
    zeta_db: float
    estimates: np.ndarray = field(repr=False, compare=False, default=None)
    squared_errors: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def std_error(self) -> float:
        """Standard error of ``total_variance`` over runs."""
        s = self.squared_errors
        if s is None or s.size < 2:
            return math.nan
        return float(np.std(s, ddof=1) / math.sqrt(s.size))

    @property
    def zeta_std_error_db(self) -> float:
        return 10.0 / math.log(10.0) * self.std_error / self.total_variance


def zeta_db(variance: float, reference_variance: float) -> float:
    """Sensitivity gain in dB over a reference: ``-10 log10(var / ref)``."""
    if not variance > 0 or not reference_variance > 0:
        raise InvalidArgument("variances must be positive")
    return -10.0 * math.log10(variance / reference_variance) + 0.0


# one-step rotation scheme


def osrs_protocol(spec: SpinRotationSpec) -> RamseyProtocol:
    """Ramsey protocol with ``U = exp(-i F_y chi)``, input ``|F, m_i>`` and
    phases measured relative to ``|F, m_0>``."""
    U = spin_rotation(spec)
    D = spec.dim - 1
    if D < 1:
        raise InvalidArgument("spin F=0 has no phases to estimate")
    pmap = make_parametrization("theta_ref", D, reference_mode=spec.index(spec.reference_m))
    return ramsey(U, spec.index(spec.initial_m), pmap)


def osrs_populations(spec: SpinRotationSpec) -> np.ndarray:
    """``|d^F_{m_i, m}(chi)|^2`` in mode order."""
    return np.array(
        [wigner_small_d(spec.F, spec.initial_m, m, spec.chi) ** 2 for m in spin_levels(spec.F)]
    )


def osrs_variance(spec: SpinRotationSpec, N: float = 1.0) -> float:
    """Total-variance QCRB of the rotated spin state.

    Raises:
        ZeroAmplitude: if some sublevel is unpopulated.
    """
    return variance_bound_theta(
        osrs_populations(spec), N, reference=spec.index(spec.reference_m)
    )


def osrs_optimize(F, m_0=0, chi_grid: int = 2001):
    """Best rotation angle and initial sublevel for the one-step scheme.

    Scans ``chi`` on an interior grid of ``(0, pi)`` for every ``m_i``, then
    refines the grid minimum by golden-section search. Ties go to the smaller
    angle, then the smaller ``m_i``.

    Returns:
        ``(chi, m_i, variance)``
    """
    chis = math.pi * np.arange(1, chi_grid + 1) / (chi_grid + 1)
    ref = spin_index(F, m_0)
    D = len(spin_levels(F)) - 1
    rotations = spin_rotation_batch(F, chis)
    candidates = []
    for m_i in sorted(spin_levels(F)):
        w = rotations[:, :, spin_index(F, m_i)] ** 2
        with np.errstate(divide="ignore"):
            inv = np.where(w > 1e-15, 1.0 / (4.0 * np.maximum(w, 1e-300)), np.inf)
        var = (D - 1) * inv[:, ref] + inv.sum(axis=1)
        if not np.any(np.isfinite(var)):
            continue

        def f(chi, m_i=m_i):
            try:
                return osrs_variance(SpinRotationSpec(F, chi, m_i, m_0))
            except ZeroAmplitude:
                return math.inf

        # every grid local minimum that ties with the best one gets refined
        padded = np.concatenate(([np.inf], var, [np.inf]))
        local = (var <= padded[:-2]) & (var <= padded[2:])
        for j in np.flatnonzero(local & (var <= var.min() * (1 + 1e-6))):
            best_chi, best_var = float(chis[j]), f(float(chis[j]))
            if 0 < j < chi_grid - 1:
                try:
                    res = minimize_scalar(
                        f, bracket=(chis[j - 1], chis[j], chis[j + 1]), method="golden", tol=1e-10
                    )
                    if res.fun < best_var:
                        best_chi, best_var = float(res.x), float(res.fun)
                except ValueError:
                    pass
            candidates.append((best_var, best_chi, float(m_i)))
    if not candidates:
        raise ZeroAmplitude(ref, 0.0)
    best = min(c[0] for c in candidates)
    tied = [c for c in candidates if c[0] <= best * (1 + 1e-10)]
    var, chi, m_i = min(tied, key=lambda c: (c[1], c[2]))
    return chi, m_i, var


# sampling and estimation


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def sample_counts(probs, atom_count: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial distribution of ``atom_count`` atoms over the output modes."""
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    return rng.multinomial(int(atom_count), p / p.sum())


def apply_detection_noise(counts, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add independent zero-mean Gaussian noise of width ``sigma`` to each mode.

    The result is left real-valued: no rounding, no clamping.
    """
    counts = np.asarray(counts, dtype=float)
    if sigma == 0:
        return counts.copy()
    return counts + rng.normal(0.0, sigma, size=counts.shape)


@dataclass(frozen=True)
class LikelihoodGrid:
    """Log-probabilities of a protocol tabulated on the coarse search grid."""

    points: np.ndarray
    log_probs: np.ndarray
    steps: np.ndarray
    bounds: list

    @classmethod
    def build(cls, protocol: RamseyProtocol, cfg: MleConfig) -> LikelihoodGrid:
        D = protocol.D
        bounds = cfg.bounds(D)
        if cfg.grid_points**D > MAX_GRID_POINTS:
            raise InvalidArgument(
                f"{cfg.grid_points}^{D} grid points is too many; lower grid_points"
            )
        axes = [np.linspace(lo, hi, cfg.grid_points) for lo, hi in bounds]
        mesh = np.meshgrid(*axes, indexing="ij")
        points = np.stack([m.ravel() for m in mesh], axis=1)
        probs = _batch_probabilities(protocol, points)
        log_probs = np.log(np.maximum(probs, cfg.prob_floor))
        steps = np.array([(hi - lo) / (cfg.grid_points - 1) for lo, hi in bounds])
        return cls(points, log_probs, steps, bounds)


def _batch_probabilities(protocol: RamseyProtocol, thetas: np.ndarray) -> np.ndarray:
    phi = protocol.map.offsets + thetas @ protocol.map.jacobian.T
    alpha = protocol.splitter[:, protocol.input_mode]
    amp = (np.exp(1j * phi) * alpha) @ protocol.combiner.T
    return np.abs(amp) ** 2


def _neg_log_likelihood(protocol: RamseyProtocol, weights, floor: float):
    alpha = protocol.splitter[:, protocol.input_mode]
    U2 = protocol.combiner
    J = protocol.map.jacobian
    c = protocol.map.offsets

    def nll(theta):
        amp = U2 @ (np.exp(1j * (c + J @ theta)) * alpha)
        p = amp.real**2 + amp.imag**2
        return -float(weights @ np.log(np.maximum(p, floor)))

    return nll


def mle_estimate(
    noisy_counts,
    protocol: RamseyProtocol,
    cfg: MleConfig = MleConfig(),
    grid: LikelihoodGrid | None = None,
) -> np.ndarray:
    """Maximize ``sum_m w_m log p(m|theta)`` with ``w_m = max(N_m, 0)``.

    A coarse grid locates the global basin; Nelder-Mead polishes it inside
    the search domain.

    Raises:
        DegenerateLikelihood: if every weight is zero.
    """
    counts = np.asarray(noisy_counts, dtype=float)
    if counts.size != protocol.D + 1:
        raise InvalidArgument(f"expected {protocol.D + 1} counts, got {counts.size}")
    w = np.maximum(counts, 0.0)
    if not np.any(w > 0):
        raise DegenerateLikelihood()
    if grid is None:
        grid = LikelihoodGrid.build(protocol, cfg)
    x0 = grid.points[int(np.argmax(grid.log_probs @ w))]
    nll = _neg_log_likelihood(protocol, w, cfg.prob_floor)

    lo = np.array([b[0] for b in grid.bounds])
    hi = np.array([b[1] for b in grid.bounds])
    simplex = [x0]
    for d in range(x0.size):
        v = x0.copy()
        v[d] += grid.steps[d] if x0[d] + grid.steps[d] <= hi[d] else -grid.steps[d]
        simplex.append(v)
    res = minimize(
        nll,
        x0,
        method="Nelder-Mead",
        bounds=grid.bounds,
        options={
            "maxiter": cfg.refine_iters,
            "xatol": cfg.xatol,
            "fatol": np.inf,
            "initial_simplex": np.array(simplex),
        },
    )
    x = np.clip(res.x, lo, hi)
    return x if nll(x) <= nll(x0) else x0.copy()


def _run_chunk(cfg: ExperimentConfig, run_ids) -> np.ndarray:
    proto = cfg.protocol
    grid = LikelihoodGrid.build(proto, cfg.mle)
    p_true = output_probabilities(proto, cfg.truth)
    det = cfg.detection
    out = np.empty((len(run_ids), proto.D))
    for row, r in enumerate(run_ids):
        key = (*cfg.stream, r)
        atoms = det.atom_count
        if det.poisson:
            atoms = int(_rng(cfg.seed, *key, STAGE_ATOMS).poisson(det.atom_count))
        counts = sample_counts(p_true, atoms, _rng(cfg.seed, *key, STAGE_COUNTS))
        noisy = apply_detection_noise(counts, det.sigma, _rng(cfg.seed, *key, STAGE_NOISE))
        try:
            out[row] = mle_estimate(noisy, proto, cfg.mle, grid)
        except DegenerateLikelihood as exc:
            raise DegenerateLikelihood(run=r) from exc
    return out


def _chunks(n: int, parts: int) -> list[range]:
    parts = max(1, min(parts, n))
    edges = np.linspace(0, n, parts + 1).astype(int)
    return [range(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _resolve_workers(workers: int | None) -> int:
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return workers


def summarize(estimates: np.ndarray, truth, atom_count: float) -> VarianceEstimate:
    est = np.asarray(estimates, dtype=float)
    err2 = (est - np.asarray(truth)) ** 2
    per = err2.mean(axis=0)
    total = float(np.sum(per))
    D = est.shape[1]
    return VarianceEstimate(
        total_variance=total,
        per_parameter=per,
        mean_estimate=est.mean(axis=0),
        zeta_db=zeta_db(total, qcrb_individual(D, atom_count)) if total > 0 else math.inf,
        estimates=est,
        squared_errors=err2.sum(axis=1),
    )


def run_monte_carlo(cfg: ExperimentConfig, workers: int = 1) -> VarianceEstimate:
    """Repeat the noisy experiment ``cfg.runs`` times and collect the MSE.

    ``zeta_db`` compares against the individual scheme with the same
    (mean) atom number.
    """
    workers = _resolve_workers(workers)
    chunks = _chunks(cfg.runs, workers)
    if workers == 1 or len(chunks) == 1:
        parts = [_run_chunk(cfg, c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [cfg] * len(chunks), chunks))
    return summarize(np.vstack(parts), cfg.truth, cfg.detection.atom_count)


# zeta maps


def cfim_zeta(protocol: RamseyProtocol, theta, atom_count: float = 1.0) -> float:
    """Noiseless-detection gain over the individual scheme, ``-inf`` if singular."""
    try:
        var = qcrb_total_variance(cfim(protocol, theta, atom_count))
    except SingularFisherMatrix:
        return -math.inf
    return zeta_db(var, qcrb_individual(protocol.D, atom_count))


def _mc_point(args) -> float:
    cfg, = args
    return run_monte_carlo(cfg, workers=1).zeta_db


def sweep_zeta_grid(
    protocol: RamseyProtocol,
    axes,
    mode: str = "cfim_noiseless",
    detection: DetectionModel = DetectionModel(),
    runs: int = 1000,
    seed: int | None = None,
    mle: MleConfig = MleConfig(),
    workers: int = 1,
) -> np.ndarray:
    """Gain ``zeta`` (dB) on the Cartesian grid spanned by ``axes``.

    Args:
        axes: one 1-D array of parameter values per parameter.
        mode: ``"cfim_noiseless"`` (CRB of ideal detection) or
            ``"monte_carlo"`` (noisy maximum-likelihood simulation).

    Returns:
        Array with one axis per parameter. Points where the CFIM is singular
        hold ``-inf``.
    """
    axes = [np.asarray(a, dtype=float).ravel() for a in axes]
    if len(axes) != protocol.D:
        raise InvalidArgument(f"need {protocol.D} axes, got {len(axes)}")
    shape = tuple(a.size for a in axes)
    points = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
    if mode == "cfim_noiseless":
        z = [cfim_zeta(protocol, t, detection.atom_count) for t in points]
    elif mode == "monte_carlo":
        if seed is None:
            raise InvalidArgument("monte_carlo mode needs a seed")
        cfgs = [
            (ExperimentConfig(protocol, t, detection, runs, seed, mle, stream=(idx,)),)
            for idx, t in enumerate(points)
        ]
        workers = _resolve_workers(workers)
        if workers == 1:
            z = [_mc_point(c) for c in cfgs]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                z = list(pool.map(_mc_point, cfgs, chunksize=max(1, len(cfgs) // (4 * workers))))
    else:
        raise InvalidArgument(f"unknown sweep mode {mode!r}")
    return np.asarray(z, dtype=float).reshape(shape)
