"""Orthonormal bases and subspace similarity metrics.

A point on the Grassmannian G(n, d) is represented throughout by an
``(n, d)`` ndarray with orthonormal columns.  Two metrics quantify how
close the span of one basis is to the span of another:

* ``determinant_similarity`` -- the product of squared principal-angle
  cosines, in ``[0, 1]``; equals 1 iff the subspaces coincide and 0 iff
  at least one direction is orthogonal.
* ``frobenius_discrepancy`` -- the sum of squared principal-angle sines,
  in ``[0, d]``; equals 0 iff the subspaces coincide.

All functions are pure and never mutate their arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MetricSample",
    "basis_with_angles",
    "basis_with_similarity",
    "check_orthonormal",
    "determinant_similarity",
    "expected_initial_similarity",
    "expected_initial_similarity_exact",
    "frobenius_discrepancy",
    "metric_sample",
    "principal_angles",
    "random_orthonormal",
    "reorthonormalize",
]

ORTHONORMALITY_TOL = 1e-10


def _as_basis_pair(U: np.ndarray, Ubar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    U = np.asarray(U, dtype=float)
    Ubar = np.asarray(Ubar, dtype=float)
    if U.ndim != 2 or Ubar.ndim != 2:
        raise ValueError("bases must be 2-D arrays")
    if U.shape != Ubar.shape:
        raise ValueError(f"basis shapes must match, got {U.shape} and {Ubar.shape}")
    return U, Ubar


def check_orthonormal(U: np.ndarray, tol: float = ORTHONORMALITY_TOL) -> np.ndarray:
    """Validate that ``U`` is an (n, d) matrix with orthonormal columns, 0 < d < n.

    Returns the array as float64.  Raises ``ValueError`` if the shape is
    invalid or ``max|U^T U - I| > tol``.
    """
    U = np.asarray(U, dtype=float)
    if U.ndim != 2:
        raise ValueError("basis must be a 2-D array")
    n, d = U.shape
    if not 0 < d < n:
        raise ValueError(f"need 0 < d < n, got shape {U.shape}")
    gram_err = np.max(np.abs(U.T @ U - np.eye(d)))
    if gram_err > tol:
        raise ValueError(f"columns are not orthonormal: max|U^T U - I| = {gram_err:.3e}")
    return U


def principal_angles(U: np.ndarray, Ubar: np.ndarray) -> np.ndarray:
    """Cosines of the principal angles between the spans of two bases.

    The cosines are the singular values of ``Ubar^T U``, clamped to
    ``[0, 1]`` and sorted non-increasing, so the corresponding angles
    ``arccos`` are non-decreasing.  Both bases must have orthonormal
    columns and identical shape ``(n, d)``; the result has length ``d``.
    """
    U, Ubar = _as_basis_pair(U, Ubar)
    s = np.linalg.svd(Ubar.T @ U, compute_uv=False)
    return np.clip(s, 0.0, 1.0)


def determinant_similarity(U: np.ndarray, Ubar: np.ndarray) -> float:
    """Product of squared principal-angle cosines, in [0, 1].

    Equals ``det(Ubar^T U U^T Ubar)`` but is evaluated as the product of
    squared singular values of ``Ubar^T U``, which does not lose accuracy
    the way an explicit LU determinant of the product matrix can.
    """
    cosines = principal_angles(U, Ubar)
    return float(np.prod(cosines * cosines))


def frobenius_discrepancy(U: np.ndarray, Ubar: np.ndarray) -> float:
    """Sum of squared principal-angle sines: ``d - ||Ubar^T U||_F^2``, in [0, d]."""
    U, Ubar = _as_basis_pair(U, Ubar)
    d = U.shape[1]
    value = d - np.linalg.norm(Ubar.T @ U) ** 2
    return float(min(max(value, 0.0), d))


def random_orthonormal(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Orthonormalize an (n, d) matrix of iid standard normal entries.

    The span of the result is uniformly distributed on the Grassmannian
    G(n, d).  Requires ``0 < d < n``; the same generator state always
    yields the same matrix.
    """
    if not 0 < d < n:
        raise ValueError(f"need 0 < d < n, got n={n}, d={d}")
    gauss = rng.standard_normal((n, d))
    q, _ = np.linalg.qr(gauss)
    return q


def reorthonormalize(U: np.ndarray) -> np.ndarray:
    """Thin-QR orthonormalization spanning the same subspace as ``U``.

    Used to remove accumulated floating-point drift from a basis that is
    only approximately orthonormal.  Raises ``numpy.linalg.LinAlgError``
    if ``U`` is numerically rank deficient.
    """
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or not 0 < U.shape[1] < U.shape[0]:
        raise ValueError(f"need an (n, d) matrix with 0 < d < n, got shape {U.shape}")
    q, r = np.linalg.qr(U)
    diag = np.abs(np.diag(r))
    if np.min(diag) <= U.shape[0] * np.finfo(float).eps * np.max(diag):
        raise np.linalg.LinAlgError("input matrix is numerically rank deficient")
    return q


def basis_with_angles(ubar: np.ndarray, cosines: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Construct a basis whose principal angles to ``ubar`` have the given cosines.

    Column ``i`` of the result is ``cos(phi_i) * ubar[:, i] + sin(phi_i) * z_i``
    with the ``z_i`` an orthonormal set drawn at random from the orthogonal
    complement of ``span(ubar)``.  Useful for placing a test basis at a
    prescribed similarity to a reference subspace.
    """
    ubar = check_orthonormal(ubar)
    n, d = ubar.shape
    cosines = np.asarray(cosines, dtype=float)
    if cosines.shape != (d,):
        raise ValueError(f"need {d} cosines, got shape {cosines.shape}")
    if np.any(cosines < 0) or np.any(cosines > 1):
        raise ValueError("cosines must lie in [0, 1]")
    gauss = rng.standard_normal((n, d))
    gauss -= ubar @ (ubar.T @ gauss)
    complement, r = np.linalg.qr(gauss)
    if np.min(np.abs(np.diag(r))) <= n * np.finfo(float).eps * np.max(np.abs(np.diag(r))):
        raise np.linalg.LinAlgError("failed to draw a full-rank complement")
    sines = np.sqrt(1.0 - cosines * cosines)
    return ubar * cosines + complement * sines


def basis_with_similarity(ubar: np.ndarray, zeta: float, rng: np.random.Generator) -> np.ndarray:
    """Basis at determinant similarity ``zeta`` to ``ubar``, equal angles."""
    if not 0 < zeta <= 1:
        raise ValueError(f"zeta must lie in (0, 1], got {zeta}")
    d = ubar.shape[1]
    cosines = np.full(d, zeta ** (1.0 / (2 * d)))
    return basis_with_angles(ubar, cosines, rng)


def expected_initial_similarity(n: int, d: int, c0: float = 1.0) -> float:
    """Asymptotic expected determinant similarity of a random basis: ``c0 * (d/(n e))^d``.

    This is the exponential-order approximation; see
    ``expected_initial_similarity_exact`` for the closed form.  The
    prefactor ``c0`` absorbs the sub-exponential correction and is close
    to 1 only for large ``d``.
    """
    return c0 * (d / (n * math.e)) ** d


def expected_initial_similarity_exact(n: int, d: int) -> float:
    """Exact expected determinant similarity of a uniformly random d-subspace.

    For a basis drawn by orthonormalizing an iid Gaussian (n, d) matrix,
    the expected determinant similarity against any fixed d-dimensional
    subspace is exactly ``1 / binomial(n, d)``: writing the similarity as
    ``det(W1) / det(W1 + W2)`` for independent Wishart factors with d and
    n - d degrees of freedom, the matrix-variate beta determinant moment
    telescopes to ``prod_i (d - i + 1) / (n - i + 1)``.
    """
    if not 0 < d < n:
        raise ValueError(f"need 0 < d < n, got n={n}, d={d}")
    return math.exp(math.lgamma(d + 1) + math.lgamma(n - d + 1) - math.lgamma(n + 1))


@dataclass(frozen=True)
class MetricSample:
    """Convergence metrics of one iterate against the reference subspace.

    ``zeta`` and ``epsilon`` are the determinant similarity and Frobenius
    discrepancy at iteration ``t``; ``cos_angles`` holds the principal-angle
    cosines.  ``projection_norm_sq`` / ``residual_norm_sq`` are the squared
    norms of the projection and residual of the observation consumed by the
    step that produced this iterate (both 0.0 for the initial basis).
    """

    t: int
    zeta: float
    epsilon: float
    cos_angles: np.ndarray
    residual_norm_sq: float = 0.0
    projection_norm_sq: float = 0.0


def metric_sample(
    t: int,
    U: np.ndarray,
    Ubar: np.ndarray,
    residual_norm_sq: float = 0.0,
    projection_norm_sq: float = 0.0,
) -> MetricSample:
    """Evaluate both convergence metrics of ``U`` against ``Ubar`` at iteration ``t``."""
    cosines = principal_angles(U, Ubar)
    zeta = float(np.prod(cosines * cosines))
    epsilon = frobenius_discrepancy(U, Ubar)
    return MetricSample(
        t=t,
        zeta=zeta,
        epsilon=epsilon,
        cos_angles=cosines,
        residual_norm_sq=float(residual_norm_sq),
        projection_norm_sq=float(projection_norm_sq),
    )
