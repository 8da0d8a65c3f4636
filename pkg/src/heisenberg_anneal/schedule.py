"""Linear interpolation from the driver to the final Hamiltonian."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, ContractError
from .operators import SparseHermitian

# slack for times produced by float arithmetic at the endpoints
_T_EPS = 1e-12


@dataclass(frozen=True)
class AnnealSchedule:
    tau: float = 500.0

    def __post_init__(self):
        if not math.isfinite(self.tau) or self.tau <= 0:
            raise ConfigError(f"tau must be finite and > 0, got {self.tau!r}")


def s_of_t(t: float, schedule: AnnealSchedule) -> float:
    tau = schedule.tau
    if not -_T_EPS * tau <= t <= tau * (1 + _T_EPS):
        raise ValueError(f"time {t!r} outside [0, {tau}]")
    return min(max(t / tau, 0.0), 1.0)


@dataclass(frozen=True, eq=False)
class AnnealHamiltonian:
    """H(s) = s * h_final + (1 - s) * h_driver with s = t / tau."""

    h_final: SparseHermitian
    h_driver: SparseHermitian
    schedule: AnnealSchedule

    def __post_init__(self):
        if self.h_final.dimension != self.h_driver.dimension:
            raise ContractError(
                f"final ({self.h_final.dimension}) and driver ({self.h_driver.dimension}) dimensions differ"
            )

    @property
    def dimension(self) -> int:
        return self.h_final.dimension

    @property
    def n_spins(self) -> int:
        return self.h_final.n_spins

    @property
    def tau(self) -> float:
        return self.schedule.tau

    def dense(self, s: float) -> np.ndarray:
        """Assembled H(s) as a dense array (for eigensolvers, not propagation)."""
        _check_s(s)
        return s * self.h_final.toarray() + (1.0 - s) * self.h_driver.toarray()

    def sparse(self, s: float) -> sp.csr_matrix:
        _check_s(s)
        return (s * self.h_final.matrix + (1.0 - s) * self.h_driver.matrix).tocsr()


def _check_s(s: float) -> None:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"schedule progress {s!r} outside [0, 1]")


def apply_at(ah: AnnealHamiltonian, s: float, v: np.ndarray) -> np.ndarray:
    _check_s(s)
    v = np.asarray(v)
    if v.shape != (ah.dimension,):
        raise ContractError(f"vector of shape {v.shape} does not match dimension {ah.dimension}")
    return s * (ah.h_final.matrix @ v) + (1.0 - s) * (ah.h_driver.matrix @ v)
