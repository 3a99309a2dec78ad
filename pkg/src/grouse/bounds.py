"""Theoretical iteration bounds, expected-rate formulas, and their Monte Carlo checks.

Convergence of the streaming estimator splits into two measured phases:
``K1`` iterations to bring the determinant similarity up to its target
(1/2 noiseless) and ``K2`` further iterations to bring the Frobenius
discrepancy down to the accuracy target.  This module evaluates the
theoretical bounds on both phases, the per-iteration expected-rate bounds
for noisy data, and detects the measured phase split in a recorded
trajectory.  The ``mc_*`` functions verify the expected-rate results by
running real update steps on fresh draws at a fixed iterate.

Logarithms are natural throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import OracleInfo, StepConfig, StepMode, grouse_step
from .data import PlantedModel, draw_sample
from .subspaces import MetricSample, determinant_similarity, frobenius_discrepancy, principal_angles

__all__ = [
    "BoundParams",
    "PhaseReport",
    "RateCheck",
    "detect_phases",
    "expected_eps_rate_bound",
    "expected_zeta_rate_bound",
    "k1_bound",
    "k2_bound",
    "k_total_bound",
    "mc_eps_decrease_check",
    "mc_eps_rate_check",
    "mc_zeta_rate_check",
    "mc_zeta_ratio_check",
    "mu0",
]


@dataclass(frozen=True)
class BoundParams:
    """Inputs to the iteration-bound and expected-rate formulas.

    ``rho`` and ``rho_prime`` are the failure probabilities of the local
    and initial phase; ``eps_star`` the target Frobenius discrepancy;
    ``c0`` the prefactor of the expected initial similarity (close to 1);
    ``tau1``/``tau2`` scale the noisy-phase targets and default to
    ``log(d)``.
    """

    n: int
    d: int
    sigma_sq: float = 0.0
    rho: float = 0.1
    rho_prime: float = 0.1
    eps_star: float = 1e-4
    c0: float = 1.0
    tau1: float | None = None
    tau2: float | None = None

    def __post_init__(self) -> None:
        if not 0 < self.d < self.n:
            raise ValueError(f"need 0 < d < n, got n={self.n}, d={self.d}")
        if self.sigma_sq < 0:
            raise ValueError(f"sigma_sq must be >= 0, got {self.sigma_sq}")
        if not 0 < self.rho < 1 or not 0 < self.rho_prime < 1:
            raise ValueError("rho and rho_prime must lie in (0, 1)")
        if self.rho + self.rho_prime >= 1:
            raise ValueError(f"rho + rho_prime must be < 1, got {self.rho + self.rho_prime}")
        if not 0 < self.eps_star < self.d:
            raise ValueError(f"eps_star must lie in (0, d), got {self.eps_star}")
        if self.c0 <= 0:
            raise ValueError(f"c0 must be > 0, got {self.c0}")
        if self.tau1 is None:
            object.__setattr__(self, "tau1", math.log(self.d))
        if self.tau2 is None:
            object.__setattr__(self, "tau2", math.log(self.d))


@dataclass(frozen=True)
class PhaseReport:
    """Measured phase split of a trajectory.

    ``k1`` is the first recorded iteration with similarity at or above
    ``target_zeta``; ``k2`` the number of further iterations until the
    discrepancy first drops to ``target_eps``.  Either is ``None`` when
    the trajectory never reaches the corresponding target.
    """

    k1: int | None
    k2: int | None
    target_zeta: float
    target_eps: float


def mu0(params: BoundParams) -> float:
    """Initial-phase log factor ``1 + (log((1 - rho')/c0) + d log(e/d)) / (d log n)``."""
    p = params
    return 1.0 + (math.log((1.0 - p.rho_prime) / p.c0) + p.d * math.log(math.e / p.d)) / (
        p.d * math.log(p.n)
    )


def k1_bound(params: BoundParams) -> float:
    """Initial-phase iteration bound ``(d^3/rho' + d) * mu0 * log(n)``."""
    p = params
    return (p.d**3 / p.rho_prime + p.d) * mu0(p) * math.log(p.n)


def k2_bound(params: BoundParams) -> float:
    """Local-phase iteration bound ``2 d log(1/(eps_star rho))``.

    Requires ``eps_star * rho < 1``.
    """
    p = params
    if p.eps_star * p.rho >= 1:
        raise ValueError(f"eps_star * rho must be < 1, got {p.eps_star * p.rho}")
    return 2.0 * p.d * math.log(1.0 / (p.eps_star * p.rho))


def k_total_bound(params: BoundParams) -> float:
    """Combined two-phase iteration bound ``k1_bound + k2_bound``."""
    return k1_bound(params) + k2_bound(params)


def expected_zeta_rate_bound(zeta: float, params: BoundParams) -> float:
    """Lower bound on the expected next determinant similarity given the current one.

    Returns ``(1 + beta0 * g * (1 - sigma^2 / (g + sigma^2))) * zeta`` with
    ``g = (1 - zeta)/d`` and ``beta0 = 1 / (1 + (d/n) sigma^2)``.  With
    ``sigma^2 = 0`` this reduces to the noiseless rate ``(1 + g) * zeta``.
    """
    if not 0 < zeta <= 1:
        raise ValueError(f"zeta must lie in (0, 1], got {zeta}")
    p = params
    gap = (1.0 - zeta) / p.d
    if p.sigma_sq == 0:
        return (1.0 + gap) * zeta
    beta0 = 1.0 / (1.0 + p.d / p.n * p.sigma_sq)
    return (1.0 + beta0 * gap * (1.0 - p.sigma_sq / (gap + p.sigma_sq))) * zeta


def expected_eps_rate_bound(eps: float, cos_sq_phi_d: float, params: BoundParams) -> float:
    """Upper bound on the expected next Frobenius discrepancy given the current one.

    Returns ``(1 - (beta0/d) * (cos_sq_phi_d - beta1 sigma^2 / (eps/d + beta1 sigma^2))) * eps``
    with ``beta0 = 1/(1 + (d/n) sigma^2)`` and ``beta1 = 1 - d/n``;
    ``cos_sq_phi_d`` is the squared cosine of the largest principal angle.
    """
    p = params
    if not 0 < eps < p.d:
        raise ValueError(f"eps must lie in (0, d), got {eps}")
    if not 0 <= cos_sq_phi_d <= 1:
        raise ValueError(f"cos_sq_phi_d must lie in [0, 1], got {cos_sq_phi_d}")
    beta0 = 1.0 / (1.0 + p.d / p.n * p.sigma_sq)
    beta1 = 1.0 - p.d / p.n
    noise_term = beta1 * p.sigma_sq / (eps / p.d + beta1 * p.sigma_sq) if p.sigma_sq > 0 else 0.0
    return (1.0 - beta0 / p.d * (cos_sq_phi_d - noise_term)) * eps


def noisy_zeta_target(params: BoundParams) -> float:
    """Similarity target for the initial phase under noise: ``min(1/2, exp(-tau2 d^2 sigma^2 / n))``."""
    p = params
    return min(0.5, math.exp(-p.tau2 * p.d**2 * p.sigma_sq / p.n))


def noisy_eps_target(params: BoundParams) -> float:
    """Discrepancy target for the local phase under noise: ``max(sigma^2, tau1 (d^2/n) sigma^2)``."""
    p = params
    return max(p.sigma_sq, p.tau1 * p.d**2 / p.n * p.sigma_sq)


def detect_phases(
    trajectory: Sequence[MetricSample],
    params: BoundParams,
    noisy: bool = False,
) -> PhaseReport:
    """Split a recorded trajectory into the two measured convergence phases.

    Noiseless targets are similarity 1/2 and discrepancy ``eps_star``;
    noisy targets are ``noisy_zeta_target`` / ``noisy_eps_target``.  The
    local phase is counted from the iteration that first meets the
    similarity target (``k2 = 0`` when that iterate already meets the
    discrepancy target).  Iteration indices must be strictly increasing.
    """
    if not trajectory:
        raise ValueError("trajectory must be non-empty")
    ts = [s.t for s in trajectory]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("iteration indices must be strictly increasing")
    target_zeta = noisy_zeta_target(params) if noisy else 0.5
    target_eps = noisy_eps_target(params) if noisy else params.eps_star

    k1 = None
    for sample in trajectory:
        if sample.zeta >= target_zeta:
            k1 = sample.t
            break
    k2 = None
    if k1 is not None:
        for sample in trajectory:
            if sample.t >= k1 and sample.epsilon <= target_eps:
                k2 = sample.t - k1
                break
    return PhaseReport(k1=k1, k2=k2, target_zeta=target_zeta, target_eps=target_eps)


@dataclass(frozen=True)
class RateCheck:
    """Outcome of a Monte Carlo bound verification.

    ``slack_se`` is how many standard errors the observed mean clears the
    bound by (positive = inequality satisfied with room); ``passed`` uses
    the conventional 3-standard-error acceptance.
    """

    observed_mean: float
    std_err: float
    bound: float
    n_draws: int
    slack_se: float
    passed: bool


def _oracle_step_stats(
    model: PlantedModel,
    basis: np.ndarray,
    n_draws: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Next-step metrics over fresh draws at a fixed iterate, oracle schedule.

    Returns per-draw arrays of the next similarity, next discrepancy, and
    the realized gain term ``(1 - alpha)^2 ||r||^2 / ||p||^2``.
    """
    cfg = StepConfig(mode=StepMode.ORACLE_NOISY, sigma_sq=model.sigma_sq)
    zetas = np.empty(n_draws)
    epss = np.empty(n_draws)
    gains = np.empty(n_draws)
    for i in range(n_draws):
        sample = draw_sample(model, rng)
        v_par = basis @ (basis.T @ sample.v)
        v_perp = sample.v - v_par
        oracle = OracleInfo(v_perp_norm_sq=float(v_perp @ v_perp))
        out = grouse_step(basis, sample.x, cfg, oracle=oracle)
        zetas[i] = determinant_similarity(out.updated, model.ubar)
        epss[i] = frobenius_discrepancy(out.updated, model.ubar)
        if out.skipped:
            gains[i] = 0.0
        else:
            gains[i] = (1.0 - out.alpha) ** 2 * float(out.r @ out.r) / float(out.p @ out.p)
    return zetas, epss, gains


def mc_zeta_rate_check(
    model: PlantedModel,
    basis: np.ndarray,
    params: BoundParams,
    n_draws: int,
    rng: np.random.Generator,
) -> RateCheck:
    """Check the expected-similarity lower bound at a fixed iterate.

    Runs ``n_draws`` oracle-schedule steps on fresh draws and requires the
    sample mean of the next similarity to stay above
    ``expected_zeta_rate_bound`` minus three standard errors.
    """
    zeta_now = determinant_similarity(basis, model.ubar)
    bound = expected_zeta_rate_bound(zeta_now, params)
    zetas, _, _ = _oracle_step_stats(model, basis, n_draws, rng)
    mean = float(zetas.mean())
    se = float(zetas.std(ddof=1) / math.sqrt(n_draws))
    slack = (mean - bound) / se if se > 0 else math.inf
    return RateCheck(observed_mean=mean, std_err=se, bound=bound, n_draws=n_draws,
                     slack_se=float(slack), passed=bool(mean >= bound - 3 * se))


def mc_eps_rate_check(
    model: PlantedModel,
    basis: np.ndarray,
    params: BoundParams,
    n_draws: int,
    rng: np.random.Generator,
) -> RateCheck:
    """Check the expected-discrepancy upper bound at a fixed iterate."""
    eps_now = frobenius_discrepancy(basis, model.ubar)
    cos_sq = float(np.min(principal_angles(basis, model.ubar)) ** 2)
    bound = expected_eps_rate_bound(eps_now, cos_sq, params)
    _, epss, _ = _oracle_step_stats(model, basis, n_draws, rng)
    mean = float(epss.mean())
    se = float(epss.std(ddof=1) / math.sqrt(n_draws))
    slack = (bound - mean) / se if se > 0 else math.inf
    return RateCheck(observed_mean=mean, std_err=se, bound=bound, n_draws=n_draws,
                     slack_se=float(slack), passed=bool(mean <= bound + 3 * se))


def mc_zeta_ratio_check(
    model: PlantedModel,
    basis: np.ndarray,
    n_draws: int,
    rng: np.random.Generator,
) -> RateCheck:
    """Check the similarity-ratio identity in expectation at a fixed iterate.

    The expected one-step similarity ratio must be at least one plus the
    expected realized gain ``(1 - alpha)^2 ||r||^2 / ||p||^2``; the two
    means are compared at three combined standard errors.
    """
    zeta_now = determinant_similarity(basis, model.ubar)
    zetas, _, gains = _oracle_step_stats(model, basis, n_draws, rng)
    ratios = zetas / zeta_now
    mean = float(ratios.mean())
    bound = 1.0 + float(gains.mean())
    se = float(
        math.sqrt(ratios.var(ddof=1) / n_draws + gains.var(ddof=1) / n_draws)
    )
    slack = (mean - bound) / se if se > 0 else math.inf
    return RateCheck(observed_mean=mean, std_err=se, bound=bound, n_draws=n_draws,
                     slack_se=float(slack), passed=bool(mean >= bound - 3 * se))


def mc_eps_decrease_check(
    model: PlantedModel,
    basis: np.ndarray,
    n_draws: int,
    rng: np.random.Generator,
) -> RateCheck:
    """Check that the discrepancy decreases in expectation outside the noise ball.

    Requires the current discrepancy to be at least ``d^2 sigma^2``; the
    sample mean of the per-step decrease must be non-negative up to three
    standard errors.
    """
    d = model.d
    eps_now = frobenius_discrepancy(basis, model.ubar)
    if eps_now < d**2 * model.sigma_sq:
        raise ValueError(
            f"iterate is inside the noise ball: eps={eps_now:.3e} < d^2 sigma^2="
            f"{d**2 * model.sigma_sq:.3e}"
        )
    _, epss, _ = _oracle_step_stats(model, basis, n_draws, rng)
    decreases = eps_now - epss
    mean = float(decreases.mean())
    se = float(decreases.std(ddof=1) / math.sqrt(n_draws))
    slack = mean / se if se > 0 else math.inf
    return RateCheck(observed_mean=mean, std_err=se, bound=0.0, n_draws=n_draws,
                     slack_se=float(slack), passed=bool(mean >= -3 * se))
