"""Dense eigendecomposition, instantaneous spectra and exact ground spaces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapabilityError, ConfigError
from .operators import SparseHermitian
from .schedule import AnnealHamiltonian

MAX_DENSE_DIMENSION = 1 << 14
DEFAULT_DEGENERACY_TOL = 1e-6
DEFAULT_SPECTRUM_POINTS = 101


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns, orthonormal

    def residuals(self, H: SparseHermitian) -> np.ndarray:
        """``||H v_i - lambda_i v_i||`` for every eigenpair."""
        hv = H.matrix @ self.eigenvectors
        return np.linalg.norm(hv - self.eigenvectors * self.eigenvalues, axis=0)


@dataclass(frozen=True, eq=False)
class SpectrumSeries:
    s_grid: np.ndarray
    levels: np.ndarray  # (len(s_grid), dimension), rows ascending


@dataclass(frozen=True, eq=False)
class GroundSpace:
    energy: float
    basis: np.ndarray  # (dimension, degeneracy) orthonormal columns
    degeneracy_tol: float

    @property
    def degeneracy(self) -> int:
        return self.basis.shape[1]


def _guard(dim: int) -> None:
    if dim > MAX_DENSE_DIMENSION:
        raise CapabilityError(
            f"dense eigensolver limited to dimension {MAX_DENSE_DIMENSION}, got {dim}"
        )


def eigen_decompose(H: SparseHermitian) -> EigenDecomposition:
    _guard(H.dimension)
    w, v = np.linalg.eigh(H.toarray())
    return EigenDecomposition(w, v)


def eigenvalues(H: SparseHermitian) -> np.ndarray:
    _guard(H.dimension)
    return np.linalg.eigvalsh(H.toarray())


def default_s_grid(points: int = DEFAULT_SPECTRUM_POINTS) -> np.ndarray:
    if points < 1:
        raise ConfigError(f"spectrum needs at least one grid point, got {points}")
    return np.linspace(0.0, 1.0, points) if points > 1 else np.zeros(1)


def spectrum_series(ah: AnnealHamiltonian, s_grid: Sequence[float] | None = None) -> SpectrumSeries:
    """Sorted eigenvalues of H(s) at each grid point; level crossings are not tracked."""
    s_grid = default_s_grid() if s_grid is None else np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or s_grid.size == 0:
        raise ConfigError("s_grid must be a non-empty 1-d sequence")
    if np.any(s_grid < 0) or np.any(s_grid > 1) or np.any(np.diff(s_grid) < 0):
        raise ConfigError("s_grid values must be ascending within [0, 1]")
    _guard(ah.dimension)
    hf = ah.h_final.toarray()
    hd = ah.h_driver.toarray()
    levels = np.array([np.linalg.eigvalsh(s * hf + (1.0 - s) * hd) for s in s_grid])
    return SpectrumSeries(s_grid, levels)


def ground_space(
    H: SparseHermitian | EigenDecomposition, degeneracy_tol: float = DEFAULT_DEGENERACY_TOL
) -> GroundSpace:
    """Every eigenvector within ``degeneracy_tol`` of the lowest eigenvalue."""
    eig = H if isinstance(H, EigenDecomposition) else eigen_decompose(H)
    e0 = float(eig.eigenvalues[0])
    count = int(np.count_nonzero(eig.eigenvalues <= e0 + degeneracy_tol))
    return GroundSpace(e0, eig.eigenvectors[:, :count], degeneracy_tol)


def lowest_subspace(eig: EigenDecomposition, size: int) -> GroundSpace:
    """Span of the ``size`` lowest eigenvectors, regardless of degeneracy."""
    return GroundSpace(float(eig.eigenvalues[0]), eig.eigenvectors[:, :size], float("inf"))


def level_gaps(levels: np.ndarray, count: int = 3) -> dict[str, float]:
    """Spacings ``gap_i_{i+1}`` between consecutive ascending levels (1-based names)."""
    levels = np.sort(np.asarray(levels))
    return {
        f"gap_{i + 1}_{i + 2}": float(levels[i + 1] - levels[i])
        for i in range(min(count, levels.size - 1))
    }
