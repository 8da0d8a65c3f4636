"""Computational basis conventions.

Basis state ``|n>`` of an ``N``-spin system is labelled by the binary string
of the spin configuration read from the left: spin 1 is the most significant
bit, bit value 0 is spin down and 1 is spin up.  For two spins ``|2> = |10>``
means spin 1 up, spin 2 down.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError

MAX_SPINS = 24


@dataclass(frozen=True)
class SpinBasis:
    n_spins: int

    def __post_init__(self):
        if int(self.n_spins) != self.n_spins or not 1 <= self.n_spins <= MAX_SPINS:
            raise ConfigError(f"n_spins must be an integer in [1, {MAX_SPINS}], got {self.n_spins!r}")

    @property
    def dimension(self) -> int:
        return 1 << self.n_spins

    def bit_weight(self, k: int) -> int:
        """Index weight ``2**(N-k)`` of the 1-based spin ``k``."""
        if not 1 <= k <= self.n_spins:
            raise ConfigError(f"spin {k} outside 1..{self.n_spins}")
        return 1 << (self.n_spins - k)

    def bits(self) -> np.ndarray:
        """Array of shape (dimension, N); row n holds the spin bits of ``|n>``."""
        n = np.arange(self.dimension, dtype=np.int64)
        shifts = np.arange(self.n_spins - 1, -1, -1, dtype=np.int64)
        return ((n[:, None] >> shifts[None, :]) & 1).astype(np.int8)

    def n_up(self) -> np.ndarray:
        """Number of up spins for every basis index."""
        return self.bits().sum(axis=1, dtype=np.int64)

    def magnetization(self) -> np.ndarray:
        """Total S_z eigenvalue ``(n_up - n_down)/2`` of every basis state."""
        return self.n_up() - self.n_spins / 2.0


@dataclass(frozen=True)
class SpinConfiguration:
    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise ConfigError("a spin configuration needs at least one spin")
        if any(b not in (0, 1) for b in bits):
            raise ConfigError(f"spin bits must be 0 or 1, got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @property
    def n_spins(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


def spins_to_index(config: SpinConfiguration | Sequence[int]) -> int:
    if not isinstance(config, SpinConfiguration):
        config = SpinConfiguration(tuple(config))
    n = 0
    for b in config.bits:
        n = (n << 1) | b
    return n


def index_to_spins(n: int, basis: SpinBasis) -> SpinConfiguration:
    if not 0 <= n < basis.dimension:
        raise IndexError(f"basis index {n} outside [0, {basis.dimension})")
    N = basis.n_spins
    return SpinConfiguration(tuple((n >> (N - k)) & 1 for k in range(1, N + 1)))


def bit_string(n: int, n_spins: int) -> str:
    return str(index_to_spins(n, SpinBasis(n_spins)))
