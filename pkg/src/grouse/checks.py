"""Named property suites: identities, invariances, and Monte Carlo checks.

Each check measures one deviation statistic and compares it to a fixed
tolerance (``measured <= tolerated`` means pass).  Statistical checks use
the conventional three-standard-error acceptance, so ``measured`` is a
z-distance for those.  ``verify`` runs a suite and returns a report; the
CLI prints one line per property and maps the overall result to its exit
status.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .bounds import (
    BoundParams,
    expected_zeta_rate_bound,
    k1_bound,
    k2_bound,
    mc_eps_decrease_check,
    mc_eps_rate_check,
    mc_zeta_rate_check,
    mc_zeta_ratio_check,
    mu0,
)
from .core import OracleInfo, StepConfig, StepMode, compute_theta, grouse_step, project, rotate_update
from .data import draw_batch, draw_sample, make_planted
from .subspaces import (
    basis_with_similarity,
    determinant_similarity,
    expected_initial_similarity_exact,
    frobenius_discrepancy,
    principal_angles,
    random_orthonormal,
)

__all__ = ["PropertyResult", "VerifyReport", "SUITES", "verify"]

SUITES = ("metrics", "step", "data", "rates")

_COUNTS = {
    "quick": {
        "pairs": 40,
        "trace_draws": 50_000,
        "init_draws": 30_000,
        "noise_draws": 50_000,
        "step_cases": 100,
        "rate_draws": 2_000,
        "rate_n": 500,
        "rate_d": 10,
    },
    "full": {
        "pairs": 200,
        "trace_draws": 100_000,
        "init_draws": 100_000,
        "noise_draws": 100_000,
        "step_cases": 300,
        "rate_draws": 10_000,
        "rate_n": 500,
        "rate_d": 10,
    },
}


@dataclass(frozen=True)
class PropertyResult:
    """One verified property: its measured deviation against the tolerated one."""

    name: str
    suite: str
    measured: float
    tolerated: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return (
            f"{status} {self.suite}/{self.name}: measured={self.measured:.3e} "
            f"tolerated={self.tolerated:.3e}{extra}"
        )


@dataclass(frozen=True)
class VerifyReport:
    results: list[PropertyResult]
    runtime_s: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failed_names(self) -> list[str]:
        return [r.name for r in self.results if not r.passed]


def _result(name: str, suite: str, measured: float, tolerated: float, detail: str = "") -> PropertyResult:
    return PropertyResult(
        name=name,
        suite=suite,
        measured=float(measured),
        tolerated=float(tolerated),
        passed=bool(measured <= tolerated),
        detail=detail,
    )


def _random_pair(rng: np.random.Generator, n_max: int = 50) -> tuple[np.ndarray, np.ndarray]:
    n = int(rng.integers(6, n_max + 1))
    d = int(rng.integers(1, min(n - 1, 8) + 1))
    return random_orthonormal(n, d, rng), random_orthonormal(n, d, rng)


# ---------------------------------------------------------------------------
# metrics suite


def zeta_determinant_agreement(rng: np.random.Generator, pairs: int) -> PropertyResult:
    """Product-of-squared-singular-values route vs explicit determinant."""
    worst = 0.0
    for _ in range(pairs):
        u, ubar = _random_pair(rng)
        z = determinant_similarity(u, ubar)
        m = ubar.T @ u
        z_det = float(np.linalg.det(m @ m.T))
        worst = max(worst, abs(z - z_det))
    return _result("zeta_matches_determinant", "metrics", worst, 1e-9)


def zeta_eps_inequalities(rng: np.random.Generator, pairs: int) -> PropertyResult:
    """1 - zeta <= eps always; eps <= 2 (1 - zeta) once zeta >= 1/2."""
    worst = -math.inf
    for i in range(pairs):
        if i % 2 == 0:
            u, ubar = _random_pair(rng)
        else:
            ubar = random_orthonormal(30, 4, rng)
            u = basis_with_similarity(ubar, float(rng.uniform(0.5, 1.0)), rng)
        z = determinant_similarity(u, ubar)
        e = frobenius_discrepancy(u, ubar)
        worst = max(worst, (1.0 - z) - e)
        if z >= 0.5:
            worst = max(worst, e - 2.0 * (1.0 - z))
    return _result("zeta_eps_inequalities", "metrics", worst, 1e-9)


def metric_rotation_invariance(rng: np.random.Generator, pairs: int) -> PropertyResult:
    """Both metrics depend on the spans only: right-rotating a basis changes nothing."""
    worst = 0.0
    for _ in range(pairs):
        u, ubar = _random_pair(rng)
        d = u.shape[1]
        q = np.linalg.qr(rng.standard_normal((d, d)))[0]
        worst = max(worst, abs(determinant_similarity(u @ q, ubar) - determinant_similarity(u, ubar)))
        worst = max(worst, abs(frobenius_discrepancy(u, ubar @ q) - frobenius_discrepancy(u, ubar)))
    return _result("metric_rotation_invariance", "metrics", worst, 1e-10)


def trace_expectation_mc(rng: np.random.Generator, draws: int, d: int = 6) -> PropertyResult:
    """Mean of x^T Q x / x^T x over isotropic x equals tr(Q)/d."""
    q = rng.standard_normal((d, d))
    q = (q + q.T) / 2.0
    x = rng.standard_normal((draws, d))
    vals = np.einsum("ni,ij,nj->n", x, q, x) / np.einsum("ni,ni->n", x, x)
    z = abs(vals.mean() - np.trace(q) / d) / (vals.std(ddof=1) / math.sqrt(draws))
    return _result("trace_expectation_mc", "metrics", z, 3.0, f"target={np.trace(q) / d:.5f}")


def random_init_similarity_mc(rng: np.random.Generator, draws: int, n: int = 20, d: int = 2) -> PropertyResult:
    """Mean initial similarity of random bases equals the exact value 1/binom(n, d)."""
    ubar = random_orthonormal(n, d, rng)
    sqsum = 0.0
    total = 0.0
    chunk = 10_000
    done = 0
    while done < draws:
        k = min(chunk, draws - done)
        gauss = rng.standard_normal((k, n, d))
        q = np.linalg.qr(gauss)[0]
        m = np.swapaxes(q, 1, 2) @ ubar
        dets = np.linalg.det(m) ** 2
        total += dets.sum()
        sqsum += (dets**2).sum()
        done += k
    mean = total / draws
    var = sqsum / draws - mean**2
    se = math.sqrt(var / draws)
    target = expected_initial_similarity_exact(n, d)
    z = abs(mean - target) / se
    return _result("random_init_similarity_mc", "metrics", z, 3.0,
                   f"mean={mean:.4e} exact={target:.4e}")


# ---------------------------------------------------------------------------
# step suite


def _noiseless_case(rng: np.random.Generator, n: int = 40, d: int = 4):
    ubar = random_orthonormal(n, d, rng)
    u = random_orthonormal(n, d, rng)
    s = rng.standard_normal(d)
    v = ubar @ s
    v /= np.linalg.norm(v)
    return ubar, u, v


def step_orthonormality(rng: np.random.Generator, cases: int) -> PropertyResult:
    """A non-skipped update of an orthonormal basis stays orthonormal to 1e-9."""
    cfg = StepConfig(reorth_period=None)
    worst = 0.0
    for _ in range(cases):
        ubar, u, v = _noiseless_case(rng)
        out = grouse_step(u, v, cfg)
        if out.skipped:
            continue
        d = u.shape[1]
        worst = max(worst, float(np.max(np.abs(out.updated.T @ out.updated - np.eye(d)))))
    return _result("step_orthonormality", "step", worst, 1e-9)


def rank_one_structure(rng: np.random.Generator, cases: int) -> PropertyResult:
    """The update maps w/||w|| to y/||y|| and fixes every in-span direction orthogonal to w."""
    cfg = StepConfig(reorth_period=None)
    worst = 0.0
    for _ in range(cases):
        ubar, u, v = _noiseless_case(rng, n=30, d=4)
        out = grouse_step(u, v, cfg)
        if out.skipped:
            continue
        w_hat = out.w / np.linalg.norm(out.w)
        p_norm = np.linalg.norm(out.p)
        r_norm = np.linalg.norm(out.r)
        y_hat = np.cos(out.theta) * out.p / p_norm + np.sin(out.theta) * out.r / r_norm
        worst = max(worst, float(np.max(np.abs(out.updated @ w_hat - y_hat))))
        z = rng.standard_normal(u.shape[1])
        z -= (z @ w_hat) * w_hat
        worst = max(worst, float(np.max(np.abs(out.updated @ z - u @ z))))
    return _result("rank_one_structure", "step", worst, 1e-10)


def monotonic_zeta_identity(rng: np.random.Generator, cases: int) -> PropertyResult:
    """Noiseless greedy similarity ratio equals 1 + ||v_perp||^2 / ||v_par||^2."""
    cfg = StepConfig(reorth_period=None)
    worst = 0.0
    for _ in range(cases):
        ubar, u, v = _noiseless_case(rng)
        z0 = determinant_similarity(u, ubar)
        v_par = u @ (u.T @ v)
        v_perp = v - v_par
        out = grouse_step(u, v, cfg)
        if out.skipped:
            continue
        z1 = determinant_similarity(out.updated, ubar)
        predicted = 1.0 + float(v_perp @ v_perp) / float(v_par @ v_par)
        worst = max(worst, abs(z1 / z0 / predicted - 1.0))
    return _result("monotonic_zeta_identity", "step", worst, 1e-8)


def monotonic_eps_identity(rng: np.random.Generator, cases: int) -> PropertyResult:
    """Noiseless greedy discrepancy decrease equals 1 - ||P_bar v_par||^2 / ||v_par||^2."""
    cfg = StepConfig(reorth_period=None)
    worst = 0.0
    for _ in range(cases):
        ubar, u, v = _noiseless_case(rng)
        e0 = frobenius_discrepancy(u, ubar)
        v_par = u @ (u.T @ v)
        out = grouse_step(u, v, cfg)
        if out.skipped:
            continue
        e1 = frobenius_discrepancy(out.updated, ubar)
        proj = ubar @ (ubar.T @ v_par)
        predicted = 1.0 - float(proj @ proj) / float(v_par @ v_par)
        worst = max(worst, abs((e0 - e1) - predicted))
    return _result("monotonic_eps_identity", "step", worst, 1e-8)


def greedy_optimality(
    rng: np.random.Generator,
    cases: int,
    theta_scale: float = 1.0,
) -> PropertyResult:
    """Scaling the used angle by 0.9 or 1.1 must strictly lower the similarity gain.

    The gain is re-evaluated through the one-step ratio formula
    ``(cos(theta) + (||v_perp||/||v_par||) sin(theta))^2``.  ``theta_scale``
    deliberately mis-scales the angle actually applied (negative-control
    hook); any value other than 1 makes the property fail.
    """
    worst = -math.inf
    for _ in range(max(cases, 100)):
        ubar, u, v = _noiseless_case(rng)
        w, p, r = project(u, v)
        p_norm = float(np.linalg.norm(p))
        r_norm = float(np.linalg.norm(r))
        if min(p_norm, r_norm, float(np.linalg.norm(w))) <= 1e-12:
            continue
        theta_used = theta_scale * compute_theta(0.0, r_norm, p_norm)
        q = r_norm / p_norm

        def gain(theta: float) -> float:
            return (math.cos(theta) + q * math.sin(theta)) ** 2

        best_perturbed = max(gain(0.9 * theta_used), gain(1.1 * theta_used))
        worst = max(worst, best_perturbed - gain(theta_used))
    return _result("greedy_optimality", "step", worst, -1e-15,
                   detail=f"theta_scale={theta_scale}")


def step_equivariance(rng: np.random.Generator, cases: int) -> PropertyResult:
    """Rotating the basis representation does not change the updated subspace."""
    cfg = StepConfig(reorth_period=None)
    worst = 0.0
    for _ in range(cases):
        ubar, u, v = _noiseless_case(rng)
        d = u.shape[1]
        q = np.linalg.qr(rng.standard_normal((d, d)))[0]
        out_a = grouse_step(u, v, cfg)
        out_b = grouse_step(u @ q, v, cfg)
        if out_a.skipped or out_b.skipped:
            continue
        worst = max(worst, 1.0 - determinant_similarity(out_a.updated, out_b.updated))
    return _result("step_equivariance", "step", worst, 1e-9)


def alpha_one_fixed_point(rng: np.random.Generator, cases: int) -> PropertyResult:
    """With full damping the rotation angle is zero and the basis is unchanged."""
    cfg = StepConfig(mode=StepMode.ORACLE_NOISY, sigma_sq=1.0, reorth_period=None)
    worst = 0.0
    for _ in range(cases):
        ubar, u, v = _noiseless_case(rng)
        out = grouse_step(u, v, cfg, oracle=OracleInfo(v_perp_norm_sq=0.0))
        if out.skipped:
            continue
        worst = max(worst, abs(out.alpha - 1.0), abs(out.theta), float(np.max(np.abs(out.updated - u))))
    return _result("alpha_one_fixed_point", "step", worst, 1e-12)


# ---------------------------------------------------------------------------
# data suite


def sample_invariants(rng: np.random.Generator, draws: int) -> PropertyResult:
    """x = v + xi exactly; v in the planted span; unit signal norm."""
    model = make_planted(100, 5, 1e-3, sparse=True, rng=rng)
    batch = draw_batch(model, draws, rng)
    worst = float(np.max(np.abs(batch.x - batch.v - batch.xi)))
    out_of_span = batch.v - (batch.v @ model.ubar) @ model.ubar.T
    worst = max(worst, float(np.max(np.linalg.norm(out_of_span, axis=1))))
    norms = np.linalg.norm(batch.v, axis=1)
    worst = max(worst, float(np.max(np.abs(norms - 1.0))))
    return _result("sample_invariants", "data", worst, 1e-10)


def noise_energy_mc(rng: np.random.Generator, draws: int, sigma_sq: float = 0.04) -> PropertyResult:
    """Mean noise-to-signal energy ratio equals sigma^2 under unit signal norm."""
    model = make_planted(100, 5, sigma_sq, sparse=False, rng=rng)
    batch = draw_batch(model, draws, rng)
    ratios = np.einsum("ni,ni->n", batch.xi, batch.xi)
    z = abs(ratios.mean() - sigma_sq) / (ratios.std(ddof=1) / math.sqrt(draws))
    return _result("noise_energy_mc", "data", z, 3.0)


def noise_split_mc(rng: np.random.Generator, draws: int, sigma_sq: float = 0.04) -> PropertyResult:
    """Expected noise energy splits as (d/n) sigma^2 in-span and (1 - d/n) sigma^2 out-of-span."""
    n, d = 100, 5
    model = make_planted(n, d, sigma_sq, sparse=False, rng=rng)
    basis = random_orthonormal(n, d, rng)
    batch = draw_batch(model, draws, rng)
    par = (batch.xi @ basis) @ basis.T
    perp = batch.xi - par
    par_sq = np.einsum("ni,ni->n", par, par)
    perp_sq = np.einsum("ni,ni->n", perp, perp)
    z_par = abs(par_sq.mean() - d / n * sigma_sq) / (par_sq.std(ddof=1) / math.sqrt(draws))
    z_perp = abs(perp_sq.mean() - (1 - d / n) * sigma_sq) / (perp_sq.std(ddof=1) / math.sqrt(draws))
    return _result("noise_split_mc", "data", max(z_par, z_perp), 3.0)


def signal_energy_unnormalized_mc(rng: np.random.Generator, draws: int) -> PropertyResult:
    """Without normalization the expected squared signal norm is d."""
    n, d = 100, 5
    model = make_planted(n, d, 0.0, sparse=False, rng=rng, normalize_signal=False)
    batch = draw_batch(model, draws, rng)
    sq = np.einsum("ni,ni->n", batch.v, batch.v)
    z = abs(sq.mean() - d) / (sq.std(ddof=1) / math.sqrt(draws))
    return _result("signal_energy_unnormalized_mc", "data", z, 3.0)


def sparse_density_mc(rng: np.random.Generator, models: int = 100) -> PropertyResult:
    """Fraction of structurally nonzero entries matches the generation density."""
    n, d = 1000, 5
    density = max(np.log(n) / n, 2 * d / n)
    fractions = np.empty(models)
    for i in range(models):
        mask = rng.random((n, d)) < density
        m = rng.standard_normal((n, d)) * mask
        empty = ~mask.any(axis=0)
        while empty.any():
            k = int(empty.sum())
            mask_k = rng.random((n, k)) < density
            m[:, empty] = rng.standard_normal((n, k)) * mask_k
            empty[np.flatnonzero(empty)] = ~mask_k.any(axis=0)
        fractions[i] = np.count_nonzero(m) / (n * d)
    se = math.sqrt(density * (1 - density) / (n * d * models))
    z = abs(fractions.mean() - density) / se
    return _result("sparse_density_mc", "data", z, 3.0, f"density={density:.4f}")


def stream_determinism(rng_seed: int) -> PropertyResult:
    """Identical seeds reproduce the model and the sample stream bit for bit."""
    worst = 0.0
    for _ in range(2):
        a = np.random.default_rng(rng_seed)
        b = np.random.default_rng(rng_seed)
        model_a = make_planted(50, 3, 1e-2, sparse=True, rng=a)
        model_b = make_planted(50, 3, 1e-2, sparse=True, rng=b)
        worst = max(worst, float(np.max(np.abs(model_a.ubar - model_b.ubar))))
        for _ in range(5):
            sa = draw_sample(model_a, a)
            sb = draw_sample(model_b, b)
            worst = max(worst, float(np.max(np.abs(sa.x - sb.x))))
    return _result("stream_determinism", "data", worst, 0.0)


# ---------------------------------------------------------------------------
# rates suite


def _rate_fixture(rng: np.random.Generator, n: int, d: int, sigma_sq: float, zeta: float):
    model = make_planted(n, d, sigma_sq, sparse=True, rng=rng)
    basis = basis_with_similarity(model.ubar, zeta, rng)
    return model, basis


def zeta_rate_bound_mc(rng: np.random.Generator, n: int, d: int, draws: int) -> PropertyResult:
    sigma_sq = 1e-3
    model, basis = _rate_fixture(rng, n, d, sigma_sq, zeta=0.1)
    params = BoundParams(n=n, d=d, sigma_sq=sigma_sq)
    check = mc_zeta_rate_check(model, basis, params, draws, rng)
    return _result("zeta_rate_bound_mc", "rates", -check.slack_se, 3.0,
                   f"mean={check.observed_mean:.5f} bound={check.bound:.5f}")


def eps_rate_bound_mc(rng: np.random.Generator, n: int, d: int, draws: int) -> PropertyResult:
    sigma_sq = 1e-3
    model, basis = _rate_fixture(rng, n, d, sigma_sq, zeta=0.6)
    params = BoundParams(n=n, d=d, sigma_sq=sigma_sq)
    check = mc_eps_rate_check(model, basis, params, draws, rng)
    return _result("eps_rate_bound_mc", "rates", -check.slack_se, 3.0,
                   f"mean={check.observed_mean:.5f} bound={check.bound:.5f}")


def zeta_ratio_identity_mc(rng: np.random.Generator, n: int, d: int, draws: int) -> PropertyResult:
    model, basis = _rate_fixture(rng, n, d, 1e-3, zeta=0.3)
    check = mc_zeta_ratio_check(model, basis, draws, rng)
    return _result("zeta_ratio_identity_mc", "rates", -check.slack_se, 3.0,
                   f"mean_ratio={check.observed_mean:.5f} bound={check.bound:.5f}")


def eps_decrease_mc(rng: np.random.Generator, n: int, d: int, draws: int) -> PropertyResult:
    model, basis = _rate_fixture(rng, n, d, 1e-3, zeta=0.6)
    check = mc_eps_decrease_check(model, basis, draws, rng)
    return _result("eps_decrease_mc", "rates", -check.slack_se, 3.0,
                   f"mean_decrease={check.observed_mean:.3e}")


def bound_formula_sanity() -> PropertyResult:
    """Plug-in values and shape properties of the bound evaluators."""
    p = BoundParams(n=200, d=5, rho=0.1, rho_prime=0.1, eps_star=1e-4)
    worst = abs(mu0(p) - 0.8809980656223966)
    worst = max(worst, abs(k1_bound(p) - 5858.098225482874) / 5858.098225482874)
    worst = max(worst, abs(k2_bound(p) - 115.12925464970229) / 115.12925464970229)
    # noise only slows the guaranteed similarity rate, which never predicts regression
    prev = math.inf
    for sigma_sq in (0.0, 1e-4, 1e-2, 1.0):
        q = BoundParams(n=500, d=10, sigma_sq=sigma_sq)
        value = expected_zeta_rate_bound(0.3, q)
        worst = max(worst, value - prev)
        worst = max(worst, 0.3 - value)
        prev = value
    return _result("bound_formula_sanity", "rates", worst, 1e-9)


# ---------------------------------------------------------------------------
# driver


def verify(suite: str = "all", seed: int = 0, intensity: str = "quick") -> VerifyReport:
    """Run a property suite and report per-property outcomes.

    ``suite`` is one of ``metrics``, ``step``, ``data``, ``rates`` or
    ``all``; ``intensity`` picks the sample sizes (``quick`` stays well
    under a minute, ``full`` spends more draws on the statistical checks).
    """
    if suite not in SUITES + ("all",):
        raise ValueError(f"unknown suite {suite!r}; pick from {SUITES + ('all',)}")
    if intensity not in _COUNTS:
        raise ValueError(f"unknown intensity {intensity!r}; pick from {tuple(_COUNTS)}")
    counts = _COUNTS[intensity]
    rng = np.random.default_rng(seed)
    started = time.perf_counter()
    results: list[PropertyResult] = []

    if suite in ("metrics", "all"):
        results.append(zeta_determinant_agreement(rng, counts["pairs"]))
        results.append(zeta_eps_inequalities(rng, counts["pairs"]))
        results.append(metric_rotation_invariance(rng, counts["pairs"]))
        results.append(trace_expectation_mc(rng, counts["trace_draws"]))
        results.append(random_init_similarity_mc(rng, counts["init_draws"]))
    if suite in ("step", "all"):
        results.append(step_orthonormality(rng, counts["step_cases"]))
        results.append(rank_one_structure(rng, counts["step_cases"]))
        results.append(monotonic_zeta_identity(rng, counts["step_cases"]))
        results.append(monotonic_eps_identity(rng, counts["step_cases"]))
        results.append(greedy_optimality(rng, counts["step_cases"]))
        results.append(step_equivariance(rng, counts["step_cases"]))
        results.append(alpha_one_fixed_point(rng, counts["step_cases"]))
    if suite in ("data", "all"):
        results.append(sample_invariants(rng, counts["noise_draws"]))
        results.append(noise_energy_mc(rng, counts["noise_draws"]))
        results.append(noise_split_mc(rng, counts["noise_draws"]))
        results.append(signal_energy_unnormalized_mc(rng, counts["noise_draws"]))
        results.append(sparse_density_mc(rng))
        results.append(stream_determinism(seed))
    if suite in ("rates", "all"):
        n, d, draws = counts["rate_n"], counts["rate_d"], counts["rate_draws"]
        results.append(zeta_rate_bound_mc(rng, n, d, draws))
        results.append(eps_rate_bound_mc(rng, n, d, draws))
        results.append(zeta_ratio_identity_mc(rng, n, d, draws))
        results.append(eps_decrease_mc(rng, n, d, draws))
        results.append(bound_formula_sanity())

    return VerifyReport(results=results, runtime_s=time.perf_counter() - started)
