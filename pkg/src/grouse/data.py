"""Planted-model data generation for streaming subspace estimation.

Observations are ``x = v + xi`` where ``v = ubar @ s`` lies in a hidden
d-dimensional ground-truth subspace, ``s`` has iid standard normal
entries, and the noise ``xi`` has iid ``N(0, sigma^2 / n)`` entries.
With the default column normalization (``||v|| = 1``) the expected
noise-to-signal energy ratio is exactly ``sigma^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .subspaces import check_orthonormal, random_orthonormal

__all__ = [
    "PlantedModel",
    "Sample",
    "SampleBatch",
    "draw_batch",
    "draw_sample",
    "export_basis_csv",
    "export_samples_csv",
    "make_planted",
]

_MAX_SPARSE_ATTEMPTS = 50


@dataclass(frozen=True)
class PlantedModel:
    """Ground-truth subspace plus signal and noise settings for a stream.

    ``sparsity`` records the entry density used to generate ``ubar``
    before orthonormalization (``None`` for a dense draw).
    """

    ubar: np.ndarray
    sigma_sq: float
    normalize_signal: bool = True
    sparsity: float | None = None

    def __post_init__(self) -> None:
        check_orthonormal(self.ubar)
        if self.sigma_sq < 0:
            raise ValueError(f"sigma_sq must be >= 0, got {self.sigma_sq}")
        if self.sparsity is not None and not 0 < self.sparsity <= 1:
            raise ValueError(f"sparsity must lie in (0, 1], got {self.sparsity}")

    @property
    def n(self) -> int:
        return self.ubar.shape[0]

    @property
    def d(self) -> int:
        return self.ubar.shape[1]


@dataclass(frozen=True)
class Sample:
    """One observation ``x = v + xi`` with its clean decomposition.

    ``v``, ``s`` and ``xi`` are exposed for metrics and oracle step sizes
    only; estimators must consume nothing but ``x``.
    """

    x: np.ndarray
    v: np.ndarray
    s: np.ndarray
    xi: np.ndarray


@dataclass(frozen=True)
class SampleBatch:
    """Vectorized draws: rows of ``x``, ``v``, ``xi`` are samples, rows of ``s`` coefficients."""

    x: np.ndarray
    v: np.ndarray
    s: np.ndarray
    xi: np.ndarray


def _sparse_orthonormal(n: int, d: int, density: float, rng: np.random.Generator) -> np.ndarray:
    for _ in range(_MAX_SPARSE_ATTEMPTS):
        mask = rng.random((n, d)) < density
        m = rng.standard_normal((n, d)) * mask
        # re-draw columns that came out identically zero
        empty = ~mask.any(axis=0)
        while empty.any():
            k = int(empty.sum())
            mask_k = rng.random((n, k)) < density
            m[:, empty] = rng.standard_normal((n, k)) * mask_k
            empty[np.flatnonzero(empty)] = ~mask_k.any(axis=0)
        q, r = np.linalg.qr(m)
        diag = np.abs(np.diag(r))
        if np.min(diag) > n * np.finfo(float).eps * np.max(diag):
            return q
    raise np.linalg.LinAlgError(
        f"could not draw a full-rank sparse matrix at n={n}, d={d}, density={density}"
    )


def make_planted(
    n: int,
    d: int,
    sigma_sq: float,
    sparse: bool,
    rng: np.random.Generator,
    normalize_signal: bool = True,
) -> PlantedModel:
    """Draw a ground-truth basis and wrap it with the stream settings.

    Dense mode orthonormalizes a full iid Gaussian matrix.  Sparse mode
    fills entries independently with probability
    ``max(log(n)/n, 2d/n)`` (standard normal values), re-draws any empty
    column, and orthonormalizes; the floor ``2d/n`` keeps the
    pre-orthonormalization matrix full rank at small ``n``.
    """
    if not 0 < d < n:
        raise ValueError(f"need 0 < d < n, got n={n}, d={d}")
    if sigma_sq < 0:
        raise ValueError(f"sigma_sq must be >= 0, got {sigma_sq}")
    if sparse:
        density = min(max(np.log(n) / n, 2 * d / n), 1.0)
        ubar = _sparse_orthonormal(n, d, density, rng)
        return PlantedModel(ubar=ubar, sigma_sq=sigma_sq, normalize_signal=normalize_signal,
                            sparsity=float(density))
    ubar = random_orthonormal(n, d, rng)
    return PlantedModel(ubar=ubar, sigma_sq=sigma_sq, normalize_signal=normalize_signal)


def draw_sample(model: PlantedModel, rng: np.random.Generator) -> Sample:
    """Draw one observation from the stream.

    Coefficients ``s`` are iid standard normal; when the model normalizes
    signals, ``v`` and ``s`` are rescaled together so ``||v|| = 1``.  Noise
    entries are iid ``N(0, sigma^2 / n)``.
    """
    n, d = model.n, model.d
    s = rng.standard_normal(d)
    v = model.ubar @ s
    if model.normalize_signal:
        scale = np.linalg.norm(v)
        v = v / scale
        s = s / scale
    if model.sigma_sq > 0:
        xi = rng.standard_normal(n) * np.sqrt(model.sigma_sq / n)
    else:
        xi = np.zeros(n)
    return Sample(x=v + xi, v=v, s=s, xi=xi)


def draw_batch(model: PlantedModel, size: int, rng: np.random.Generator) -> SampleBatch:
    """Draw ``size`` observations at once (row per sample).

    Consumes the generator in a different order than ``size`` calls of
    ``draw_sample``, so batched and one-at-a-time streams with the same
    seed are each reproducible but not equal to one another.
    """
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    n, d = model.n, model.d
    s = rng.standard_normal((size, d))
    v = s @ model.ubar.T
    if model.normalize_signal:
        scale = np.linalg.norm(v, axis=1, keepdims=True)
        v = v / scale
        s = s / scale
    if model.sigma_sq > 0:
        xi = rng.standard_normal((size, n)) * np.sqrt(model.sigma_sq / n)
    else:
        xi = np.zeros((size, n))
    return SampleBatch(x=v + xi, v=v, s=s, xi=xi)


def _write_csv_matrix(path: str, model: PlantedModel, matrix: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("n,d,sigma_sq\n")
        fh.write(f"{model.n},{model.d},{model.sigma_sq!r}\n")
        for row in np.atleast_2d(matrix):
            fh.write(",".join(repr(float(value)) for value in row) + "\n")


def export_basis_csv(model: PlantedModel, path: str) -> None:
    """Write the ground-truth basis row-major after an ``n,d,sigma_sq`` header."""
    _write_csv_matrix(path, model, model.ubar)


def export_samples_csv(model: PlantedModel, batch: SampleBatch, path: str) -> None:
    """Write a batch of observations (one per row) after an ``n,d,sigma_sq`` header."""
    _write_csv_matrix(path, model, batch.x)
