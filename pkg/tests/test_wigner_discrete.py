import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssrcphase.errors import DimensionMismatch, EvenDimension, NormalizationError
from ssrcphase.wigner_discrete import (QuditState, clifford_gates, clifford_positivity_scan,
                                       dft, discrete_negativity, non_stabilizer_witness,
                                       phase_points_from_paulis, translate_lattice,
                                       weyl_operators, wigner_discrete)

from conftest import random_state

odd_d = st.sampled_from([3, 5, 7, 9, 11])


@pytest.mark.parametrize("d", [3, 5, 7])
def test_phase_points_hermitian_unit_trace_orthogonal(d):
    pps = weyl_operators(d)
    assert pps.hermiticity_defect < 1e-12
    pts = pps.points.reshape(d * d, d, d)
    assert np.allclose(np.trace(pts, axis1=1, axis2=2), 1)
    gram = np.einsum("iab,jba->ij", pts, pts)
    assert np.allclose(gram, d * np.eye(d * d), atol=1e-10)


def test_literal_convention_not_hermitian():
    pps = weyl_operators(3, "paper-literal")
    assert pps.hermiticity_defect > 0.5
    assert np.allclose(np.trace(pps.points.reshape(9, 3, 3), axis1=1, axis2=2), 1)


@given(odd_d, st.integers(0, 2**31))
def test_marginals(d, seed):
    a = random_state(np.random.default_rng(seed), d)
    W = wigner_discrete(a, weyl_operators(d)).values
    assert abs(W.sum() - 1) < 1e-12
    assert np.allclose(W.sum(axis=1), np.abs(a) ** 2, atol=1e-12)
    assert np.allclose(W.sum(axis=0), np.abs(dft(d).conj().T @ a) ** 2, atol=1e-12)


@given(odd_d, st.integers(0, 2**31))
def test_traciality(d, seed):
    r = np.random.default_rng(seed)
    a, b = random_state(r, d), random_state(r, d)
    pps = weyl_operators(d)
    Wa, Wb = wigner_discrete(a, pps).values, wigner_discrete(b, pps).values
    assert abs(d * np.sum(Wa * Wb) - abs(np.vdot(a, b)) ** 2) < 1e-12


@given(odd_d, st.integers(0, 2**31), st.integers(0, 20), st.integers(0, 20))
def test_weyl_covariance(d, seed, s, t):
    s, t = s % d, t % d
    a = random_state(np.random.default_rng(seed), d)
    pps = weyl_operators(d)
    moved = pps.weyl[s, t] @ a
    W, Wm = wigner_discrete(a, pps).values, wigner_discrete(moved, pps).values
    assert np.allclose(Wm, translate_lattice(W, s, t), atol=1e-12)


def test_basis_state_lattice():
    d = 5
    W = wigner_discrete(QuditState.basis(d, 2), weyl_operators(d)).values
    ref = np.zeros((d, d))
    ref[2] = 1 / d
    assert np.allclose(W, ref, atol=1e-14)


@pytest.mark.parametrize("d", [3, 5, 7])
def test_clifford_scan_has_no_negativity(d):
    rep = clifford_positivity_scan(d, max_length=3)
    assert rep.violations == [] and rep.max_negativity <= 1e-10
    assert rep.checked == d * sum(4 ** k for k in range(4))


@pytest.mark.parametrize("d", [3, 5, 7, 11])
def test_non_stabilizer_witness(d):
    assert discrete_negativity(wigner_discrete(non_stabilizer_witness(d), weyl_operators(d))) > 1e-3


def test_clifford_gates_are_unitary():
    for g in clifford_gates(5).values():
        assert np.allclose(g @ g.conj().T, np.eye(5), atol=1e-12)


def test_arbitrary_pauli_pair_reproduces_default():
    d = 5
    pps = weyl_operators(d)
    x, z = pps.weyl[1, 0], pps.weyl[0, 1]
    _, pts = phase_points_from_paulis(x, z)
    assert np.allclose(pts, pps.points, atol=1e-12)


def test_errors():
    with pytest.raises(EvenDimension):
        weyl_operators(4)
    with pytest.raises(ValueError):
        weyl_operators(3, "other")
    with pytest.raises(DimensionMismatch):
        wigner_discrete(np.ones(5) / np.sqrt(5), weyl_operators(3))
    with pytest.raises(NormalizationError):
        QuditState(3, [1, 1, 0])
    with pytest.raises(ValueError):
        clifford_positivity_scan(3, gate_list=("H",), max_length=1)


def test_csv_layout():
    lines = wigner_discrete(QuditState.basis(3, 0), weyl_operators(3)).to_csv().splitlines()
    assert '"geometry": "torus"' in lines[0] and lines[1] == "n,m,value"
    assert len(lines) == 11


def test_literal_weyl_example_d3():
    w = np.exp(2j * np.pi / 3)
    T11 = weyl_operators(3, "paper-literal").weyl[1, 1]
    assert np.allclose(T11 @ np.eye(3)[0], w * np.eye(3)[1])


def test_generic_witness_d3():
    st = QuditState.normalized([1, np.exp(1j * np.pi / 7), np.exp(1j * np.pi / 3)])
    assert discrete_negativity(wigner_discrete(st, weyl_operators(3))) > 1e-3
