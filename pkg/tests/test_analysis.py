import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heisenberg_anneal.analysis import (
    dominant_states,
    fidelity_to_subspace,
    fix_global_phase,
    frustration_parity,
    probabilities,
    relative_phase,
    total_spin_expectations,
)
from heisenberg_anneal.errors import ConfigError, ContractError, UndefinedPhaseError
from heisenberg_anneal.operators import Bond, build_total_spin_squared
from heisenberg_anneal.spectrum import GroundSpace

EQ3 = np.array([-0.5, -0.5, 0.5, 0.5], dtype=complex)
SINGLET = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)

complex_states = st.integers(1, 4).flatmap(
    lambda n: st.lists(
        st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=2**n, max_size=2**n
    )
).map(lambda xs: np.array([a + 1j * b for a, b in xs])).filter(lambda v: np.linalg.norm(v) > 1e-3).map(
    lambda v: v / np.linalg.norm(v)
)


def unit(n, i):
    v = np.zeros(n, dtype=complex)
    v[i] = 1
    return v


def test_probabilities():
    np.testing.assert_array_equal(probabilities(unit(4, 0)), [1, 0, 0, 0])
    np.testing.assert_allclose(probabilities(EQ3), 0.25)


def test_fix_global_phase():
    np.testing.assert_allclose(fix_global_phase(np.array([1j, 0])), [1, 0])
    np.testing.assert_allclose(fix_global_phase(EQ3), [0.5, 0.5, -0.5, -0.5])
    with pytest.raises(ContractError):
        fix_global_phase(np.zeros(4))


def test_fix_global_phase_near_tie_goes_to_lowest_index():
    v = np.array([0, -0.6, 0.6 * (1 + 1e-7), 0.52])
    v /= np.linalg.norm(v)
    out = fix_global_phase(v)
    assert out[1].real > 0 and out[2].real < 0
    # a clear winner is still chosen by modulus
    w = np.array([0, -0.6, 0.7, 0.1])
    assert fix_global_phase(w / np.linalg.norm(w))[2].real > 0


@settings(max_examples=80)
@given(complex_states, st.floats(-math.pi, math.pi))
def test_phase_fixing_invariances(v, theta):
    fixed = fix_global_phase(v)
    np.testing.assert_allclose(probabilities(fixed), probabilities(v), atol=1e-12)
    i = int(np.argmax(np.abs(v)))
    j = (i + 1) % v.size
    if min(abs(v[i]), abs(v[j])) > 1e-3:
        assert relative_phase(fixed, i, j) == pytest.approx(relative_phase(v, i, j), abs=1e-9)
    np.testing.assert_allclose(fix_global_phase(np.exp(1j * theta) * v), fixed, atol=1e-9)


def test_dominant_states():
    out = dominant_states(unit(8, 5), 0.5)
    assert [(d.index, d.probability) for d in out] == [(5, 1.0)]
    assert out[0].pattern.bits == (1, 0, 1)
    out = dominant_states(EQ3, 0.1)
    assert [d.index for d in out] == [0, 1, 2, 3]
    assert out[0].amplitude == pytest.approx(0.5)
    with pytest.raises(ValueError):
        dominant_states(EQ3, 1.0)


@settings(max_examples=50)
@given(complex_states, st.floats(0.01, 0.5), st.floats(0.01, 0.5))
def test_dominant_monotone(v, a, b):
    lo, hi = sorted((a, b))
    hi_set = {d.index for d in dominant_states(v, hi)}
    lo_set = {d.index for d in dominant_states(v, lo)}
    assert hi_set <= lo_set
    assert sum(d.probability for d in dominant_states(v, lo)) <= 1 + 1e-12
    for d in dominant_states(v, lo):
        assert d.probability == pytest.approx(abs(d.amplitude) ** 2, abs=1e-12)


def test_relative_phase():
    v = (unit(4, 1) - unit(4, 2)) / math.sqrt(2)
    assert relative_phase(v, 1, 2) == pytest.approx(math.pi)
    assert relative_phase(v, 2, 1) == pytest.approx(math.pi)  # (-pi, pi] convention
    assert relative_phase(np.array([1, 1j]) / math.sqrt(2), 0, 1) == pytest.approx(math.pi / 2)
    with pytest.raises(UndefinedPhaseError):
        relative_phase(v, 0, 1)


def test_fidelity():
    basis = np.eye(4)[:, :2]
    gs = GroundSpace(0.0, basis, 1e-6)
    assert fidelity_to_subspace(unit(4, 1), gs) == pytest.approx(1)
    assert fidelity_to_subspace(unit(4, 3), gs) == 0
    v = np.array([0.6, 0, 0.8, 0])
    assert fidelity_to_subspace(v, gs) == pytest.approx(0.36)
    with pytest.raises(ContractError):
        fidelity_to_subspace(np.ones(8) / np.sqrt(8), gs)


@settings(max_examples=50)
@given(st.floats(0, 2 * math.pi), complex_states.filter(lambda v: v.size == 8))
def test_fidelity_invariant_under_rebasis(angle, v):
    rng = np.random.default_rng(5)
    q, _ = np.linalg.qr(rng.normal(size=(8, 2)))
    c, s = math.cos(angle), math.sin(angle)
    rotated = q @ np.array([[c, -s], [s, c]])
    a = fidelity_to_subspace(v, GroundSpace(0.0, q, 1e-6))
    b = fidelity_to_subspace(v, GroundSpace(0.0, rotated, 1e-6))
    assert a == pytest.approx(b, abs=1e-12)


def test_total_spin():
    s2, sz = total_spin_expectations(unit(512, 0), build_total_spin_squared(9), 9)
    assert (s2, sz) == (pytest.approx(24.75), pytest.approx(-4.5))
    s2, sz = total_spin_expectations(SINGLET, build_total_spin_squared(2), 2)
    assert (s2, sz) == (pytest.approx(0, abs=1e-12), pytest.approx(0, abs=1e-12))
    assert total_spin_expectations(EQ3, build_total_spin_squared(2), 2)[1] == pytest.approx(0)


RING9_ALT = [(k, k % 9 + 1, 5.0 if k % 2 else -5.0) for k in range(1, 10)]


def test_frustration_parity():
    assert frustration_parity([(1, 2, 5), (2, 3, -5), (3, 1, 5)]).frustrated
    rep = frustration_parity(RING9_ALT)
    assert rep.negative_count == 4 and not rep.frustrated
    assert not frustration_parity([(k, k % 9 + 1, 5.0) for k in range(1, 10)]).frustrated
    assert frustration_parity([(k, m, -J) for k, m, J in RING9_ALT]).frustrated


@pytest.mark.parametrize(
    "cycle",
    [
        [(1, 2, 5), (2, 3, 5)],
        [(1, 2, 5), (3, 4, 5), (2, 3, 5), (4, 1, 5)],
        [(1, 2, 5), (2, 3, 5), (3, 4, 5)],
        [(1, 2, 5), (2, 3, 5), (3, 1, 5), (4, 5, 5), (5, 6, 5), (6, 4, 5)],
    ],
)
def test_frustration_requires_cycle(cycle):
    with pytest.raises(ConfigError):
        frustration_parity(cycle)


@given(
    st.lists(st.sampled_from([-1.0, 1.0]), min_size=3, max_size=12),
    st.floats(1e-3, 1e3),
)
def test_frustration_scale_and_sign_flip(signs, c):
    n = len(signs)
    cycle = [Bond(k, k % n + 1, s * 5.0) for k, s in zip(range(1, n + 1), signs)]
    base = frustration_parity(cycle)
    scaled = frustration_parity([Bond(b.k, b.m, c * b.J) for b in cycle])
    assert scaled.frustrated == base.frustrated
    flipped = frustration_parity([Bond(b.k, b.m, -b.J) for b in cycle])
    assert flipped.negative_count == n - base.negative_count
    assert flipped.frustrated == ((n - base.negative_count) % 2 == 1)
