"""Acceptance criteria 1-8, each timed against its runtime budget.

Every test records a one-line verdict that is printed at the end of the
session (see conftest.pytest_terminal_summary).
"""
import time

import numpy as np
import pytest

from ssrcphase import cvlimit, fock, wigner_sphere as ws
from ssrcphase.cvlimit import run_sweep
from ssrcphase.encoding import (build_encoding, encoded_wigner, fourier_rotation_defect,
                                fourier_test_state, preset)
from ssrcphase.fock import basis_change_formula, binomial_width_check, jx_eigenbasis
from ssrcphase.wigner_discrete import (clifford_positivity_scan, discrete_negativity,
                                       non_stabilizer_witness, weyl_operators, wigner_discrete)
from ssrcphase.wigner_plane import (TruncatedModeState, coherent_state, default_axis,
                                    plane_negativity, squeezed_vacuum, wigner_plane)

import conftest
from conftest import random_state, random_su2, random_unitary


@pytest.fixture(autouse=True)
def cold_caches():
    for f in (ws._build, ws._unit_multipoles, fock._eig_cached, fock._schwinger,
              cvlimit._sparse_ops, cvlimit.xx_operator):
        f.cache_clear()


def verdict(k, ok, detail, elapsed, budget):
    ok = ok and elapsed <= budget
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}  [{elapsed:.2f} s / {budget:g} s]"
    conftest.ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


def test_criterion_1_heisenberg_weyl():
    t0 = time.perf_counter()
    names = ("identity", "rot_pi_y", "theta_z_half")
    worst = 0.0
    for d in range(3, 32, 2):
        for K in names:
            for U in names:
                worst = max(worst, build_encoding(d - 1, K, U).checks["hw_defect"])
    verdict(1, worst <= 1e-9, f"worst HW residual {worst:.2e} over d=3..31, 9 (K,U)",
            time.perf_counter() - t0, 30)


def test_criterion_2_stratonovich_weyl():
    t0 = time.perf_counter()
    worst_sw = 0.0
    for N in range(1, 21):
        k = ws.build_kernel(N)
        worst_sw = max(worst_sw, k.checks["normalization"], k.checks["traciality"])
    rng = np.random.default_rng(2)
    worst_cov = 0.0
    for N in (10, 20):
        k = ws.build_kernel(N)
        for _ in range(10):
            psi = random_state(rng, N + 1)
            g, R = random_su2(rng, N)
            v = rng.normal(size=3)
            th, ph = ws.direction_to_angles(v)
            th0, ph0 = ws.direction_to_angles(R.T @ v)
            worst_cov = max(worst_cov, abs(ws.wigner_sphere_at(g @ psi, k, th, ph)
                                           - ws.wigner_sphere_at(psi, k, th0, ph0)))
    verdict(2, worst_sw <= 1e-6 and worst_cov <= 1e-6,
            f"norm/traciality {worst_sw:.2e} (N<=20), covariance {worst_cov:.2e} (20 rotations)",
            time.perf_counter() - t0, 60)


def test_criterion_3_discrete_hudson():
    t0 = time.perf_counter()
    worst, witness, ok = 0.0, [], True
    for d in (3, 5, 7):
        rep = clifford_positivity_scan(d, ("X", "Z", "F", "S"), max_length=4)
        worst = max(worst, rep.max_negativity)
        ok &= not rep.violations
        w = discrete_negativity(wigner_discrete(non_stabilizer_witness(d), weyl_operators(d)))
        witness.append(w)
    ok &= worst <= 1e-10 and min(witness) > 1e-3
    verdict(3, ok, f"Clifford max negativity {worst:.1e}, witness min {min(witness):.3f}",
            time.perf_counter() - t0, 60)


def test_criterion_4_planar_hudson():
    t0 = time.perf_counter()
    classical = {"vacuum": TruncatedModeState.fock(0, 0),
                 "coherent": coherent_state(0.8 + 0.3j, 40),
                 "squeezed": squeezed_vacuum(0.4, 60)}
    neg_c = max(plane_negativity(wigner_plane(s)) for s in classical.values())
    fock_ok, parts = True, []
    for n in (1, 2):
        s = TruncatedModeState.fock(n, n)
        coarse = plane_negativity(wigner_plane(s))
        fine_ax = default_axis(n, 401)
        fine = plane_negativity(wigner_plane(s, fine_ax, fine_ax))
        stable = abs(coarse - fine) <= 0.1 * fine
        fock_ok &= coarse > 0.01 and fine > 0.01 and stable
        parts.append(f"|{n}> {coarse:.4f}/{fine:.4f}")
    verdict(4, neg_c <= 1e-6 and fock_ok,
            f"classical max {neg_c:.1e}; Fock (coarse/fine, units of Z_W) {', '.join(parts)}",
            time.perf_counter() - t0, 60)


def test_criterion_5_cv_limit_convergence():
    t0 = time.perf_counter()
    Ns = [100, 400, 1600]
    plan = [("coherent-limit", {"alpha": [1.0]}),
            ("rotation-displacement", {"q": [0.5]}),
            ("xx-displacement", {}),
            ("pegg-barnett", {"alpha": [1.0]})]
    ok, parts = True, []
    for exp, grid in plan:
        recs = run_sweep(exp, Ns, grid)
        errs = [r.error for r in recs]
        mono = all(r.status == "ok" for r in recs) and all(b < a for a, b in zip(errs, errs[1:]))
        ok &= mono
        parts.append(f"{exp} {'down' if mono else 'NOT monotone'}")
        if exp == "pegg-barnett":
            tail = max(abs(r.error - r.extra["tail_mass"]) for r in recs)
            ok &= tail <= 1e-10
    bc = 0.0
    for N in range(0, 31):
        v = jx_eigenbasis(N)
        for n in range(N + 1):
            f, c = basis_change_formula(N, n), v[:, N - n]
            ip = np.vdot(c, f)
            bc = max(bc, float(np.max(np.abs(f - ip / abs(ip) * c))))
    ok &= bc <= 1e-9
    verdict(5, ok, f"{'; '.join(parts)}; PB-tail {tail:.1e}; basis change {bc:.1e}",
            time.perf_counter() - t0, 300)


def test_criterion_6_binomial_width():
    t0 = time.perf_counter()
    frac = binomial_width_check(400)
    verdict(6, 0.95 <= frac <= 0.96, f"fraction {frac:.5f}", time.perf_counter() - t0, 1)


def test_criterion_7_encoding_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for N in (2, 4, 6, 8, 10, 12):
        d = N + 1
        Us = [preset(p, N) for p in ("identity", "rot_pi_y", "theta_z_half", "flip_pi_y")]
        Us += [random_unitary(rng, d) for _ in range(3)]
        ref = None
        for U in Us:
            enc = build_encoding(N, U=U)
            lat = np.stack([encoded_wigner(enc, enc.basis_vector(j)).values for j in range(d)])
            if ref is None:
                ref = lat
            worst = max(worst, float(np.max(np.abs(lat - ref))))
    verdict(7, worst <= 1e-12, f"max lattice difference {worst:.1e} over 7 U per N, N=2..12",
            time.perf_counter() - t0, 30)


def test_criterion_8_fourier_as_rotation():
    t0 = time.perf_counter()
    ok, parts = True, []
    for alpha in (0.0, 1.0):
        vals = [fourier_rotation_defect(N, fourier_test_state(N, alpha)) for N in (16, 64, 256)]
        ok &= vals[0] > vals[1] > vals[2]
        parts.append(f"alpha={alpha:g}: " + " > ".join(f"{v:.4f}" for v in vals))
    verdict(8, ok, "; ".join(parts), time.perf_counter() - t0, 120)
