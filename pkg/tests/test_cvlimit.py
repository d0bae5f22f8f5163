import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from ssrcphase.cvlimit import (EXPERIMENTS, ConvergenceRecord, PeggBarnettOperator,
                               aligned_distance, coherent_limit_error, embed,
                               load_sweep_config, make_state, one_minus_fidelity,
                               pegg_barnett_compare, record_dict, records_to_csv,
                               rotation_displacement_error, run_point, run_sweep,
                               xx_displacement_error, xx_operator)
from ssrcphase.errors import AlphaTooLarge, OutsideCVRegime
from ssrcphase.fock import jx_eigenbasis, schwinger_operators
from ssrcphase.wigner_plane import TruncatedModeState, coherent_state, quadratures

from conftest import random_state


def close(a, b, tol):
    return abs(a - b) <= tol * abs(b)


def test_golden_values(golden):
    vals, tol = golden
    assert close(coherent_limit_error(10000, 1.0).error, vals["coherent_limit_alpha1_N10000"], tol)
    coh = make_state("coherent", 2500, {"alpha": 1.0})
    assert close(rotation_displacement_error(2500, 0.5, coh).error,
                 vals["rotation_displacement_coherent1_q0.5_N2500"], tol)
    vac = make_state("vacuum", 100, {})
    assert close(xx_displacement_error(100, vac).error, vals["xx_displacement_vacuum_N100"], tol)
    r = (xx_displacement_error(100, make_state("coherent", 100, {"alpha": 1.0})).error
         / xx_displacement_error(400, make_state("coherent", 400, {"alpha": 1.0})).error)
    assert close(r, vals["xx_displacement_coherent1_ratio_N100_over_N400"], tol)


def test_fidelity_helpers(rng):
    u = random_state(rng, 6)
    assert one_minus_fidelity(u, 1j * u) < 1e-15
    v = random_state(rng, 6)
    assert abs(one_minus_fidelity(u, v) - (1 - abs(np.vdot(u, v)) ** 2)) < 1e-12
    assert aligned_distance(u, np.exp(0.4j) * u) < 1e-14


def test_coherent_limit_decreases_and_rejects_large_alpha():
    errs = [coherent_limit_error(N, 1.0).error for N in (25, 100, 400)]
    assert errs[0] > errs[1] > errs[2]
    assert coherent_limit_error(50, 0).error == 0
    with pytest.raises(AlphaTooLarge):
        coherent_limit_error(4, 2.0)


def test_rotation_displacement_matches_dense_oracle():
    N, q = 144, 0.5
    psi = embed(coherent_state(0.5, 40), N)
    jx, _, _ = schwinger_operators(N)
    x, _ = quadratures(N)
    lhs = scipy.linalg.expm(1j * q / math.sqrt(N) * jx) @ psi
    rhs = scipy.linalg.expm(1j * q * x) @ psi
    rec = rotation_displacement_error(N, q, coherent_state(0.5, 40))
    assert abs(rec.error - aligned_distance(lhs, rhs)) < 1e-10


def test_rotation_displacement_regime_checks():
    with pytest.raises(OutsideCVRegime):
        rotation_displacement_error(100, 2.0, TruncatedModeState.fock(100, 0))
    bad = TruncatedModeState.normalized(np.ones(3), tail_bound=1e-3)
    with pytest.raises(OutsideCVRegime):
        rotation_displacement_error(100, 0.5, bad)


def test_xx_operator_shifts_jx_eigenbasis():
    N = 12
    v = jx_eigenbasis(N)
    X = xx_operator(N)
    for n in range(N + 1):
        assert np.allclose(X @ v[:, n], v[:, (n + 1) % (N + 1)], atol=1e-10)


def test_xx_consistent_scale_is_much_smaller():
    vac = make_state("vacuum", 400, {})
    lit = xx_displacement_error(400, vac).error
    con = xx_displacement_error(400, vac, scale="consistent").error
    assert con < lit / 10
    with pytest.raises(OutsideCVRegime):
        xx_displacement_error(100, TruncatedModeState.fock(100, 2))


@given(st.sampled_from([100, 144, 400]), st.floats(0, 1.0))
def test_pegg_barnett_error_is_tail_mass(N, alpha):
    rec = pegg_barnett_compare(N, make_state("coherent", N, {"alpha": alpha}))
    assert abs(rec.error - rec.extra["tail_mass"]) <= 1e-10
    assert rec.extra["cutoff"] == math.isqrt(N)


def test_pegg_barnett_operator_is_not_unitary():
    pb = PeggBarnettOperator.build(100)
    spec = pb.gram_spectrum()
    assert pb.cutoff == 10 and spec.sum() == 11
    rec = pegg_barnett_compare(100, make_state("vacuum", 100, {}))
    assert rec.extra["zero_modes"] == 90 and rec.extra["unitary"] is False
    assert rec.error == 0


def test_run_sweep_sorted_monotone_and_failures():
    recs = run_sweep("coherent-limit", [400, 25, 100], {"alpha": [1.0, 0.5]}, workers=2)
    assert [r.N for r in recs] == [25, 100, 400, 25, 100, 400]
    assert all(r.monotone for r in recs)
    bad = run_sweep("coherent-limit", [1, 100], {"alpha": [2.0]})
    assert bad[0].status == "failed" and "AlphaTooLarge" in bad[0].message
    assert not any(r.monotone for r in bad)
    with pytest.raises(ValueError):
        run_sweep("nope", [10])


def test_run_point_records_family():
    rec = run_point("pegg-barnett", 100, {"alpha": 0.5})
    assert rec.params == {"alpha": 0.5, "state_family": "coherent"}
    with pytest.raises(ValueError):
        run_point("other", 10, {})


def test_config_and_csv():
    cfg = load_sweep_config('{"experiment": "xx-displacement", "N_list": [100, 400], "params": {"scale": "literal"}}')
    assert cfg["params"] == {"scale": ["literal"]}
    with pytest.raises(ValueError):
        load_sweep_config('{"experiment": "x", "N_list": []}')
    with pytest.raises(ValueError):
        load_sweep_config('[]')
    recs = run_sweep(cfg["experiment"], cfg["N_list"], cfg["params"])
    text = records_to_csv(recs, {"tool": "t"})
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    assert lines[1] == "experiment,N,scale,state_family,error,metric,monotone_flag,status"
    assert len(lines) == 4
    assert record_dict(recs[0])["experiment"] == "xx-displacement"


def test_record_validation():
    with pytest.raises(ValueError):
        ConvergenceRecord("coherent-limit", 10, {}, -1.0, "1 - fidelity")
    assert set(EXPERIMENTS) == {"coherent-limit", "rotation-displacement",
                                "xx-displacement", "pegg-barnett"}
