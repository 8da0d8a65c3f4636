"""Driver ground state and RK4 integration of i dC/dt = H(t) C.

States are plain complex numpy arrays of length ``2**N`` indexed by the basis
convention of :mod:`heisenberg_anneal.basis`.

``evolve`` integrates in a frame co-rotating with the instantaneous energy
of the state: each step uses ``H(t) - E_n`` with ``E_n`` the Rayleigh quotient
at the start of the step, and the phase ``exp(-i sum E_n dt)`` is restored on
output.  The shift is a multiple of the identity, so the physical evolution is
unchanged, but RK4's amplitude error, which grows like ``(E dt)**6``, no longer
scales with the large absolute energy of the populated levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit

from .basis import SpinBasis
from .errors import ConfigError, ContractError, NormDriftError
from .schedule import AnnealHamiltonian, apply_at, s_of_t

NORM_TOL_STATE = 1e-9
DEFAULT_TRACK_SIZE = 16
# largest N whose trajectory keeps every probability column by default
FULL_TRACK_MAX_SPINS = 4
# byte budget for buffering full probability snapshots before the top-k post-pass
_SNAPSHOT_BUDGET = 1 << 28


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    norm_tol: float = 1e-6
    n_samples: int = 501
    snapshot_full: bool = False
    track: Sequence[int] | str | None = None
    renormalize: bool = False
    phase_frame: bool = True

    def __post_init__(self):
        if not math.isfinite(self.dt) or self.dt <= 0:
            raise ConfigError(f"dt must be > 0, got {self.dt!r}")
        if not math.isfinite(self.norm_tol) or self.norm_tol <= 0:
            raise ConfigError(f"norm_tol must be > 0, got {self.norm_tol!r}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise ConfigError(f"n_samples must be an integer >= 2, got {self.n_samples!r}")
        if isinstance(self.track, str) and self.track != "all":
            raise ConfigError(f"track must be 'all', null or a list of indices, got {self.track!r}")
        if self.track is not None and not isinstance(self.track, str):
            object.__setattr__(self, "track", tuple(int(i) for i in self.track))


@dataclass
class Trajectory:
    times: np.ndarray
    tracked: np.ndarray
    probabilities: np.ndarray  # (n_samples, len(tracked))
    norms: np.ndarray
    final_state: np.ndarray
    snapshots: np.ndarray | None = field(default=None, repr=False)

    @property
    def all_tracked(self) -> bool:
        return self.tracked.size == self.final_state.size

    def max_norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - 1.0)))


def check_normalized(state: np.ndarray, tol: float = NORM_TOL_STATE) -> np.ndarray:
    state = np.asarray(state, dtype=np.complex128)
    if state.ndim != 1:
        raise ContractError(f"state must be one-dimensional, got shape {state.shape}")
    drift = abs(np.linalg.norm(state) - 1.0)
    if drift > tol:
        raise ContractError(f"state is not normalized: |norm - 1| = {drift:.3e}")
    return state


def prepare_driver_ground(n_spins: int, basis: SpinBasis | None = None) -> np.ndarray:
    """Product state with odd spins along -x and even spins along +x.

    The global sign makes the amplitude of ``|0...0>`` positive.
    """
    basis = basis or SpinBasis(n_spins)
    if basis.n_spins != n_spins:
        raise ContractError(f"basis has {basis.n_spins} spins, expected {n_spins}")
    minus_x = np.array([1.0, -1.0]) / math.sqrt(2.0)
    plus_x = np.array([1.0, 1.0]) / math.sqrt(2.0)
    psi = np.ones(1)
    for k in range(1, n_spins + 1):
        psi = np.kron(psi, minus_x if k % 2 == 1 else plus_x)
    return psi.astype(np.complex128)


def _generator(ah: AnnealHamiltonian, t: float, x: np.ndarray, shift: float) -> np.ndarray:
    s = s_of_t(t, ah.schedule)
    return -1j * (apply_at(ah, s, x) - shift * x)


def rk4_step(
    ah: AnnealHamiltonian, state: np.ndarray, t: float, dt: float, energy_shift: float = 0.0
) -> np.ndarray:
    """One classical RK4 step of dC/dt = -i (H(t) - energy_shift) C.

    No renormalization is applied.
    """
    tau = ah.tau
    if not (0 <= t <= tau and dt > 0 and t + dt <= tau * (1 + 1e-12)):
        raise ValueError(f"step [{t}, {t + dt}] not inside [0, {tau}]")
    t_end = min(t + dt, tau)
    k1 = _generator(ah, t, state, energy_shift)
    k2 = _generator(ah, t + dt / 2, state + dt / 2 * k1, energy_shift)
    k3 = _generator(ah, t + dt / 2, state + dt / 2 * k2, energy_shift)
    k4 = _generator(ah, t_end, state + dt * k3, energy_shift)
    return state + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


@njit(cache=True)
def _hmul(s, shift, fp, fi, fd, dp, di, dd, x, out):
    for r in range(x.size):
        a = 0j
        for p in range(fp[r], fp[r + 1]):
            a += fd[p] * x[fi[p]]
        b = 0j
        for p in range(dp[r], dp[r + 1]):
            b += dd[p] * x[di[p]]
        out[r] = s * a + (1.0 - s) * b - shift * x[r]


@njit(cache=True)
def _rk4_run(fp, fi, fd, dp, di, dd, c, t0, t1, dt, tau, use_shift):
    """Advance c from t0 to t1 in steps of dt, the last one shortened.

    Returns the accumulated frame phase sum(E_n * h_n).
    """
    n = c.size
    h0 = np.empty(n, np.complex128)
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    x = np.empty(n, np.complex128)
    phase = 0.0
    i = 0
    while True:
        t = t0 + i * dt
        if t >= t1 - 1e-9 * dt:
            break
        h = dt
        if t + h > t1 - 1e-9 * dt:
            h = t1 - t
        sa = min(max(t / tau, 0.0), 1.0)
        sm = min(max((t + 0.5 * h) / tau, 0.0), 1.0)
        sb = min(max((t + h) / tau, 0.0), 1.0)
        _hmul(sa, 0.0, fp, fi, fd, dp, di, dd, c, h0)
        E = 0.0
        if use_shift:
            num = 0.0
            den = 0.0
            for r in range(n):
                num += (c[r].conjugate() * h0[r]).real
                den += c[r].real ** 2 + c[r].imag ** 2
            E = num / den
        for r in range(n):
            k1[r] = -1j * (h0[r] - E * c[r])
            x[r] = c[r] + 0.5 * h * k1[r]
        _hmul(sm, E, fp, fi, fd, dp, di, dd, x, k2)
        for r in range(n):
            k2[r] = -1j * k2[r]
            x[r] = c[r] + 0.5 * h * k2[r]
        _hmul(sm, E, fp, fi, fd, dp, di, dd, x, k3)
        for r in range(n):
            k3[r] = -1j * k3[r]
            x[r] = c[r] + h * k3[r]
        _hmul(sb, E, fp, fi, fd, dp, di, dd, x, k4)
        for r in range(n):
            c[r] += h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] - 1j * k4[r])
        phase += E * h
        i += 1
    return phase


def _csr_parts(m):
    return (
        m.indptr.astype(np.int64),
        m.indices.astype(np.int64),
        np.ascontiguousarray(m.data, dtype=np.float64),
    )


def _top_indices(p: np.ndarray, k: int) -> np.ndarray:
    order = np.lexsort((np.arange(p.size), -p))
    return np.sort(order[:k])


def evolve(
    ah: AnnealHamiltonian,
    initial: np.ndarray,
    cfg: IntegratorConfig | None = None,
    on_sample: Callable[[float, float], None] | None = None,
) -> Trajectory:
    """Integrate from t = 0 to t = tau, sampling at ``cfg.n_samples`` uniform times.

    Raises
    ------
    NormDriftError
        If ``|norm - 1|`` exceeds ``cfg.norm_tol`` at any sample time.
    """
    cfg = cfg or IntegratorConfig()
    c = check_normalized(initial).copy()
    D = ah.dimension
    if c.size != D:
        raise ContractError(f"initial state has length {c.size}, Hamiltonian dimension {D}")

    post_pass = False
    if cfg.track == "all" or (cfg.track is None and ah.n_spins <= FULL_TRACK_MAX_SPINS):
        tracked = np.arange(D)
    elif cfg.track is None:
        if D * cfg.n_samples * 8 > _SNAPSHOT_BUDGET:
            raise ConfigError("system too large for the default top-k tracking; pass an explicit track list")
        tracked = np.arange(D)
        post_pass = True
    else:
        tracked = np.array(cfg.track, dtype=np.int64)
        if tracked.size == 0 or tracked.min() < 0 or tracked.max() >= D:
            raise ConfigError(f"track indices must lie in [0, {D})")

    times = np.linspace(0.0, ah.tau, cfg.n_samples)
    probs = np.empty((cfg.n_samples, tracked.size))
    norms = np.empty(cfg.n_samples)
    snaps = np.empty((cfg.n_samples, D), np.complex128) if cfg.snapshot_full else None

    f = _csr_parts(ah.h_final.matrix)
    d = _csr_parts(ah.h_driver.matrix)
    phase = 0.0

    def record(j):
        norm = float(np.linalg.norm(c))
        norms[j] = norm
        probs[j] = np.abs(c[tracked]) ** 2
        if snaps is not None:
            snaps[j] = c * np.exp(-1j * phase)
        if on_sample is not None:
            on_sample(float(times[j]), norm)
        return norm

    record(0)
    for j in range(1, cfg.n_samples):
        phase += _rk4_run(*f, *d, c, times[j - 1], times[j], cfg.dt, ah.tau, cfg.phase_frame)
        norm = record(j)
        drift = abs(norm - 1.0)
        if drift > cfg.norm_tol:
            raise NormDriftError(float(times[j]), drift, cfg.norm_tol)
        if cfg.renormalize:
            c /= norm

    if post_pass:
        top = _top_indices(probs[-1], DEFAULT_TRACK_SIZE)
        probs = probs[:, top]
        tracked = top
    final = c * np.exp(-1j * phase)
    return Trajectory(times, tracked, probs, norms, final, snaps)
