"""Sparse real-symmetric Hamiltonians of the spin chain.

Units: energies in units of the Zeeman quantum of the uniform field, with
hbar = 1.  The final Hamiltonian is

    H_final = -4 * sum_{k<m} J_km S_k . S_m + b0 * sum_k S_k^z

and the driver is the staggered transverse field

    H_driver = b_prime * sum_k (-1)**(k+1) S_k^x .

Every term has real matrix elements in the S^z product basis, so matrices are
stored as real CSR arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .basis import SpinBasis
from .errors import ConfigError, ContractError


@dataclass(frozen=True)
class Bond:
    k: int
    m: int
    J: float


@dataclass(frozen=True)
class CouplingGraph:
    """Exchange bonds between 1-based spins, each stored once with ``k < m``."""

    n_spins: int
    bonds: tuple[Bond, ...]

    def __post_init__(self):
        SpinBasis(self.n_spins)
        bonds = tuple(b if isinstance(b, Bond) else Bond(*b) for b in self.bonds)
        seen = set()
        for b in bonds:
            if not (isinstance(b.k, (int, np.integer)) and isinstance(b.m, (int, np.integer))):
                raise ConfigError(f"bond spins must be integers, got ({b.k!r}, {b.m!r})")
            if b.k < 1 or b.m < 1:
                raise ConfigError(f"bond spin indices are 1-based, got ({b.k}, {b.m})")
            for spin in (b.k, b.m):
                if spin > self.n_spins:
                    raise ConfigError(f"bond spin {spin} exceeds n_spins={self.n_spins}")
            if b.k >= b.m:
                raise ConfigError(f"bond ({b.k}, {b.m}) must satisfy k < m")
            if (b.k, b.m) in seen:
                raise ConfigError(f"duplicate bond ({b.k}, {b.m})")
            if not math.isfinite(b.J) or b.J == 0:
                raise ConfigError(f"bond ({b.k}, {b.m}) needs a finite nonzero J, got {b.J!r}")
            seen.add((b.k, b.m))
        object.__setattr__(self, "bonds", bonds)

    @classmethod
    def from_triples(cls, n_spins: int, triples: Iterable[Sequence[float]]) -> "CouplingGraph":
        """Build from ``(k, m, J)`` triples in either spin order."""
        bonds = []
        for k, m, J in triples:
            k, m = int(k), int(m)
            if k > m:
                k, m = m, k
            bonds.append(Bond(k, m, float(J)))
        return cls(n_spins, tuple(bonds))

    def negated(self) -> "CouplingGraph":
        return CouplingGraph(self.n_spins, tuple(Bond(b.k, b.m, -b.J) for b in self.bonds))


@dataclass(frozen=True)
class FieldParams:
    b0: float = 1.0
    b_prime: float = 20.0

    def __post_init__(self):
        for name in ("b0", "b_prime"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ConfigError(f"{name} must be finite and >= 0, got {v!r}")


@dataclass(frozen=True, eq=False)
class SparseHermitian:
    """Real symmetric matrix in CSR form over a spin basis."""

    matrix: sp.csr_matrix
    basis: SpinBasis

    def __post_init__(self):
        D = self.basis.dimension
        if self.matrix.shape != (D, D):
            raise ContractError(f"matrix shape {self.matrix.shape} does not match dimension {D}")
        if not is_symmetric(self.matrix):
            raise ContractError("matrix is not symmetric")

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def n_spins(self) -> int:
        return self.basis.n_spins

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def entry(self, i: int, j: int) -> float:
        return float(self.matrix[i, j])

    def max_row_sum(self) -> float:
        return float(abs(self.matrix).sum(axis=1).max()) if self.matrix.nnz else 0.0


def is_symmetric(m: sp.spmatrix) -> bool:
    """Full scan: every stored (i, j, v) has a stored (j, i, v)."""
    a = sp.coo_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    fwd = np.lexsort((a.col, a.row))
    rev = np.lexsort((a.row, a.col))
    return bool(
        np.array_equal(a.row[fwd], a.col[rev])
        and np.array_equal(a.col[fwd], a.row[rev])
        and np.array_equal(a.data[fwd], a.data[rev])
    )


def _assemble(basis: SpinBasis, diag: np.ndarray, rows, cols, vals) -> SparseHermitian:
    D = basis.dimension
    idx = np.arange(D, dtype=np.int64)
    r = np.concatenate([idx, *rows]) if rows else idx
    c = np.concatenate([idx, *cols]) if cols else idx
    v = np.concatenate([diag, *vals]) if vals else diag
    m = sp.csr_matrix((v, (r, c)), shape=(D, D))
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    return SparseHermitian(m, basis)


def _pair_terms(basis: SpinBasis, pairs: Iterable[tuple[int, int, float]]):
    """Matrix pieces of ``sum w * S_k . S_m``.

    S_k . S_m is +1/4 on aligned pairs, -1/4 on opposite pairs, and 1/2
    between states related by a flip-flop of the two spins.
    """
    bits = basis.bits()
    D = basis.dimension
    idx = np.arange(D, dtype=np.int64)
    diag = np.zeros(D)
    rows, cols, vals = [], [], []
    for k, m, w in pairs:
        same = bits[:, k - 1] == bits[:, m - 1]
        diag += np.where(same, 0.25 * w, -0.25 * w)
        src = idx[~same]
        mask = basis.bit_weight(k) | basis.bit_weight(m)
        rows.append(src)
        cols.append(src ^ mask)
        vals.append(np.full(src.size, 0.5 * w))
    return diag, rows, cols, vals


def build_exchange_zeeman(graph: CouplingGraph, b0: float = 1.0) -> SparseHermitian:
    """Heisenberg exchange ``-4 J S_k.S_m`` per bond plus the uniform Zeeman term."""
    FieldParams(b0=b0, b_prime=0.0)
    basis = SpinBasis(graph.n_spins)
    diag, rows, cols, vals = _pair_terms(basis, ((b.k, b.m, -4.0 * b.J) for b in graph.bonds))
    diag = diag + b0 * basis.magnetization()
    return _assemble(basis, diag, rows, cols, vals)


def build_staggered_driver(n_spins: int, b_prime: float) -> SparseHermitian:
    """Transverse field pointing along +x on odd spins and -x on even spins."""
    FieldParams(b0=0.0, b_prime=b_prime)
    basis = SpinBasis(n_spins)
    idx = np.arange(basis.dimension, dtype=np.int64)
    rows, cols, vals = [], [], []
    if b_prime != 0:
        for k in range(1, n_spins + 1):
            sign = 1.0 if k % 2 == 1 else -1.0
            rows.append(idx)
            cols.append(idx ^ basis.bit_weight(k))
            vals.append(np.full(idx.size, sign * b_prime / 2.0))
    return _assemble(basis, np.zeros(basis.dimension), rows, cols, vals)


def build_total_spin_squared(n_spins: int) -> SparseHermitian:
    """Total spin squared, ``3N/4 + 2 sum_{k<m} S_k . S_m``."""
    basis = SpinBasis(n_spins)
    pairs = ((k, m, 2.0) for k in range(1, n_spins + 1) for m in range(k + 1, n_spins + 1))
    diag, rows, cols, vals = _pair_terms(basis, pairs)
    diag = diag + 0.75 * n_spins
    return _assemble(basis, diag, rows, cols, vals)


def apply(H: SparseHermitian, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (H.dimension,):
        raise ContractError(f"vector of shape {v.shape} cannot be multiplied by a {H.dimension}-dim operator")
    return H.matrix @ v
