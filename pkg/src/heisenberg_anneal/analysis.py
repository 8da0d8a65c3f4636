"""Physical read-outs of a state vector."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .basis import SpinBasis, SpinConfiguration, index_to_spins
from .errors import ConfigError, ContractError, UndefinedPhaseError
from .operators import Bond, SparseHermitian
from .spectrum import GroundSpace

PHASE_CUTOFF = 1e-6
PHASE_TIE_RTOL = 1e-4


@dataclass(frozen=True)
class DominantState:
    index: int
    probability: float
    amplitude: complex
    pattern: SpinConfiguration


@dataclass(frozen=True)
class FrustrationReport:
    cycle: tuple[Bond, ...]
    negative_count: int
    frustrated: bool


def probabilities(state: np.ndarray) -> np.ndarray:
    return np.abs(np.asarray(state)) ** 2


def fix_global_phase(state: np.ndarray, tie_rtol: float = PHASE_TIE_RTOL) -> np.ndarray:
    """Rotate the state so its largest-modulus amplitude is real positive.

    Moduli within ``tie_rtol`` (relative) of the maximum count as tied and the
    lowest such index is chosen, so symmetry-equivalent amplitudes that differ
    only by integration noise give a reproducible convention.
    """
    state = np.asarray(state, dtype=np.complex128)
    mags = np.abs(state)
    top = mags.max(initial=0.0)
    if not top > 0:
        raise ContractError("cannot fix the phase of a zero vector")
    i = int(np.flatnonzero(mags >= top * (1.0 - tie_rtol))[0])
    return state * (mags[i] / state[i])


def dominant_states(state: np.ndarray, threshold: float) -> list[DominantState]:
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    fixed = fix_global_phase(state)
    p = probabilities(fixed)
    basis = SpinBasis(int(round(math.log2(p.size))))
    if basis.dimension != p.size:
        raise ContractError(f"state length {p.size} is not a power of two")
    hits = np.flatnonzero(p >= threshold)
    hits = sorted(hits.tolist(), key=lambda n: (-p[n], n))
    return [
        DominantState(n, float(p[n]), complex(fixed[n]), index_to_spins(n, basis))
        for n in hits
    ]


def relative_phase(state: np.ndarray, i: int, j: int) -> float:
    """``arg C_j - arg C_i`` wrapped to (-pi, pi]."""
    ci, cj = complex(state[i]), complex(state[j])
    for n, c in ((i, ci), (j, cj)):
        if abs(c) <= PHASE_CUTOFF:
            raise UndefinedPhaseError(f"|C_{n}| = {abs(c):.2e} is below the phase cutoff {PHASE_CUTOFF}")
    d = math.remainder(math.atan2(cj.imag, cj.real) - math.atan2(ci.imag, ci.real), 2 * math.pi)
    return math.pi if d <= -math.pi else d


def fidelity_to_subspace(state: np.ndarray, gs: GroundSpace) -> float:
    state = np.asarray(state)
    if state.shape != (gs.basis.shape[0],):
        raise ContractError(f"state of shape {state.shape} vs subspace dimension {gs.basis.shape[0]}")
    overlaps = gs.basis.conj().T @ state
    return float(min(1.0, np.vdot(overlaps, overlaps).real))


def total_spin_expectations(state: np.ndarray, s2: SparseHermitian, n_spins: int) -> tuple[float, float]:
    """Return ``(<S^2>, <S_z>)``."""
    state = np.asarray(state)
    if s2.n_spins != n_spins or state.shape != (s2.dimension,):
        raise ContractError("state, operator and n_spins disagree on the system size")
    s2_exp = float(np.vdot(state, s2.matrix @ state).real)
    sz_exp = float(probabilities(state) @ SpinBasis(n_spins).magnetization())
    return s2_exp, sz_exp


def frustration_parity(cycle: Sequence[Bond | Sequence[float]]) -> FrustrationReport:
    """Sign parity of the exchange integrals around a closed cycle.

    The cycle is frustrated when it carries an odd number of negative bonds.
    Bonds must be listed in walking order, each sharing a spin with the next.
    """
    bonds = tuple(b if isinstance(b, Bond) else Bond(int(b[0]), int(b[1]), float(b[2])) for b in cycle)
    if len(bonds) < 3:
        raise ConfigError(f"a cycle needs at least three bonds, got {len(bonds)}")
    degree: dict[int, int] = {}
    for b in bonds:
        if b.k == b.m:
            raise ConfigError(f"bond ({b.k}, {b.m}) is a self-loop")
        for spin in (b.k, b.m):
            degree[spin] = degree.get(spin, 0) + 1
    if len(degree) != len(bonds) or any(v != 2 for v in degree.values()):
        raise ConfigError("bonds do not form a single closed cycle over distinct spins")
    for a, b in zip(bonds, bonds[1:] + bonds[:1]):
        if not {a.k, a.m} & {b.k, b.m}:
            raise ConfigError(f"consecutive bonds ({a.k}, {a.m}) and ({b.k}, {b.m}) share no spin")
    neg = sum(1 for b in bonds if b.J < 0)
    return FrustrationReport(bonds, neg, neg % 2 == 1)
