"""Continuous-variable limit experiments on the two-mode space.

Each experiment compares an exact operation on |psi> = sum_n c_n |n>_a|N-n>_b
with its single-mode counterpart and returns a :class:`ConvergenceRecord`:

* ``coherent-limit``: rotated |0>_a|N>_b against a truncated coherent state.
* ``rotation-displacement``: exp(i Jx q/sqrt N) against exp(i q x).
* ``xx-displacement``: the Jx-basis shift X_x against exp(i lambda p).
* ``pegg-barnett``: the relative-phase ladder against the truncated
  ladder sum_{n <= floor(sqrt N)} |n+1><n|.

Single-mode states embed exactly (zero padding, b-mode bookkeeping kept),
so the measured error is the approximation itself.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

from .errors import AlphaTooLarge, OutsideCVRegime, SSRCError
from .fock import (cv_limit_indicator, jx_eigenbasis, phase_difference_shift,
                   spin_coherent_coeffs)
from .wigner_plane import TruncatedModeState, coherent_coeffs

EXPERIMENTS = ("coherent-limit", "rotation-displacement", "xx-displacement", "pegg-barnett")
METRICS = ("vector 2-norm deficit", "1 - fidelity")
KAPPA = 0.1
Q_FRACTION = 0.1
TAIL_LIMIT = 1e-10


@dataclass
class ConvergenceRecord:
    experiment: str
    N: int
    params: dict
    error: float
    metric: str
    status: str = "ok"
    message: str = ""
    monotone: Optional[bool] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status == "ok" and not self.error >= 0:
            raise ValueError(f"error must be non-negative, got {self.error}")

    def sort_key(self):
        return (json.dumps(self.params, sort_keys=True), self.N)


def _perp_norm2(t: np.ndarray, p: np.ndarray) -> float:
    """|t - <p^, t> p^|^2 for p^ = p/|p|."""
    nrm = np.linalg.norm(p)
    if nrm == 0:
        return float(np.vdot(t, t).real)
    ph = p / nrm
    r = t - np.vdot(ph, t) * ph
    return float(np.vdot(r, r).real)


def one_minus_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """1 - |<u^, v^>|^2, evaluated as a residual norm so small values keep their digits."""
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    return _perp_norm2(u, v)


def aligned_distance(u: np.ndarray, v: np.ndarray) -> float:
    """min over global phase c of ||u - c v||."""
    ip = np.vdot(v, u)
    c = ip / abs(ip) if abs(ip) > 0 else 1.0
    return float(np.linalg.norm(u - c * v))


def embed(coeffs, N: int) -> np.ndarray:
    c = np.asarray(coeffs.coeffs if isinstance(coeffs, TruncatedModeState) else coeffs,
                   dtype=complex)
    out = np.zeros(N + 1, dtype=complex)
    k = min(len(c), N + 1)
    if np.any(np.abs(c[k:]) > 0):
        raise OutsideCVRegime("state has support above the photon budget N")
    out[:k] = c[:k]
    return out


def _tail_of(state) -> float:
    return state.tail_bound if isinstance(state, TruncatedModeState) else 0.0


def _require_cv(psi: np.ndarray, what: str):
    mean, ok = cv_limit_indicator(psi, KAPPA)
    if not ok:
        N = psi.shape[0] - 1
        raise OutsideCVRegime(
            f"{what}: <n_a> = {mean:.4g} exceeds {KAPPA} sqrt(N) = {KAPPA * math.sqrt(N):.4g}")


@lru_cache(maxsize=16)
def _sparse_ops(N: int):
    n = np.arange(N)
    # Jx = (a^dag b + b^dag a)/2 : <n+1|Jx|n> = sqrt((n+1)(N-n))/2
    off = 0.5 * np.sqrt((n + 1.0) * (N - n))
    jx = sparse.diags([off, off], [-1, 1], format="csr", dtype=complex)
    s = np.sqrt(np.arange(1, N + 1, dtype=float))
    a = sparse.diags([s], [1], format="csr", dtype=complex)
    x = 0.5 * (a + a.T)
    p = (a - a.T) / 2j
    return jx, x, p


def theta_for_alpha(alpha: complex, N: int) -> float:
    return 2 * math.acos(math.sqrt(1 - abs(alpha) ** 2 / N))


def coherent_limit_error(N: int, alpha: complex) -> ConvergenceRecord:
    """1 - fidelity between R(theta(alpha,N), arg alpha)|0>_a|N>_b and |alpha> truncated to k <= N."""
    if abs(alpha) ** 2 >= N:
        raise AlphaTooLarge(f"|alpha|^2 = {abs(alpha) ** 2} must be below N = {N}")
    params = {"alpha": _param(alpha)}
    if alpha == 0:
        return ConvergenceRecord("coherent-limit", N, params, 0.0, "1 - fidelity")
    s = spin_coherent_coeffs(N, theta_for_alpha(alpha, N), float(np.angle(alpha)))
    c = coherent_coeffs(alpha, N)
    err = one_minus_fidelity(s, c)
    return ConvergenceRecord("coherent-limit", N, params, err, "1 - fidelity",
                             extra={"theta": theta_for_alpha(alpha, N)})


def rotation_displacement_error(N: int, q: float, state) -> ConvergenceRecord:
    """|| exp(i Jx q/sqrt N) psi - c embed(exp(i q x) psi) || with the best phase c."""
    params = {"q": float(q)}
    if abs(q) > Q_FRACTION * math.sqrt(N):
        raise OutsideCVRegime(f"q = {q} exceeds {Q_FRACTION} sqrt(N)")
    if _tail_of(state) > TAIL_LIMIT:
        raise OutsideCVRegime(f"state tail bound {_tail_of(state)} exceeds {TAIL_LIMIT}")
    psi = embed(state, N)
    if q == 0:
        return ConvergenceRecord("rotation-displacement", N, params, 0.0, "vector 2-norm deficit")
    jx, x, _ = _sparse_ops(N)
    lhs = expm_multiply(1j * (q / math.sqrt(N)) * jx, psi)
    rhs = expm_multiply(1j * q * x, psi)
    err = aligned_distance(lhs, rhs)
    return ConvergenceRecord("rotation-displacement", N, params, err, "vector 2-norm deficit")


@lru_cache(maxsize=8)
def xx_operator(N: int) -> np.ndarray:
    """X_x = V S V^dag with V the Jx eigenbasis and S|n> = |n+1 mod d>."""
    v = jx_eigenbasis(N)
    return np.roll(v, -1, axis=1) @ v.conj().T


def xx_displacement_error(N: int, state, scale: str = "literal") -> ConvergenceRecord:
    """|| X_x psi - c exp(i lambda p) psi || with lambda = sqrt(2/N).

    ``scale="consistent"`` uses lambda = 2/sqrt(N), the step of the Jx
    ladder in units of x = (a + a^dag)/2, for comparison.
    """
    lam = {"literal": math.sqrt(2 / N), "consistent": 2 / math.sqrt(N)}[scale]
    psi = embed(state, N)
    _require_cv(psi, "xx-displacement")
    _, _, p = _sparse_ops(N)
    lhs = xx_operator(N) @ psi
    rhs = expm_multiply(1j * lam * p, psi)
    err = aligned_distance(lhs, rhs)
    return ConvergenceRecord("xx-displacement", N, {"scale": scale}, err,
                             "vector 2-norm deficit",
                             extra={"identity_baseline": aligned_distance(lhs, psi)})


@dataclass(frozen=True)
class PeggBarnettOperator:
    N: int
    cutoff: int
    matrix: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, N: int) -> "PeggBarnettOperator":
        cutoff = math.isqrt(N)
        if cutoff + 1 > N:
            raise OutsideCVRegime(f"N = {N} too small for a truncated ladder")
        m = np.zeros((N + 1, N + 1), dtype=complex)
        for n in range(cutoff + 1):
            m[n + 1, n] = 1.0
        m.setflags(write=False)
        return cls(N, cutoff, m)

    def gram_spectrum(self) -> np.ndarray:
        """Eigenvalues of P^dag P (0 or 1)."""
        return np.real(np.diag(self.matrix.conj().T @ self.matrix))


def pegg_barnett_compare(N: int, state) -> ConvergenceRecord:
    """1 - fidelity between X psi and the truncated ladder applied to psi.

    X psi = P psi + t with t supported beyond the cutoff, so the metric
    equals the probability mass of psi above floor(sqrt N).
    """
    psi = embed(state, N)
    _require_cv(psi, "pegg-barnett")
    pb = PeggBarnettOperator.build(N)
    p = pb.matrix @ psi
    t = phase_difference_shift(N) @ psi - p
    err = _perp_norm2(t, p)
    spec = pb.gram_spectrum()
    tail = float(np.sum(np.abs(psi[pb.cutoff + 1:]) ** 2))
    return ConvergenceRecord("pegg-barnett", N, {}, err, "1 - fidelity",
                             extra={"cutoff": pb.cutoff, "tail_mass": tail,
                                    "zero_modes": int(np.sum(spec == 0)),
                                    "unitary": bool(np.all(spec == 1))})


def _param(v):
    if isinstance(v, complex):
        return [v.real, v.imag] if v.imag else v.real
    return v


def make_state(family: str, N: int, params: dict):
    """Single-mode test state with support inside the photon budget."""
    if family == "vacuum":
        return TruncatedModeState.fock(N, 0)
    if family == "fock":
        return TruncatedModeState.fock(N, int(params.get("n", 0)))
    if family == "coherent":
        a = params.get("alpha", 1.0)
        a = complex(*a) if isinstance(a, (list, tuple)) else complex(a)
        c = coherent_coeffs(a, N)
        tail = max(0.0, 1.0 - float(np.vdot(c, c).real))
        return TruncatedModeState(N, c / np.linalg.norm(c), tail + 1e-16)
    raise ValueError(f"unknown state family {family!r}")


DEFAULT_FAMILY = {"coherent-limit": None, "rotation-displacement": "vacuum",
                  "xx-displacement": "vacuum", "pegg-barnett": "coherent"}


def run_point(experiment: str, N: int, params: dict,
              state_family: Optional[str] = None) -> ConvergenceRecord:
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}")
    family = state_family or DEFAULT_FAMILY[experiment]
    if experiment == "coherent-limit":
        a = params.get("alpha", 1.0)
        a = complex(*a) if isinstance(a, (list, tuple)) else complex(a)
        rec = coherent_limit_error(N, a)
    elif experiment == "rotation-displacement":
        rec = rotation_displacement_error(N, float(params.get("q", 0.5)),
                                          make_state(family, N, params))
    elif experiment == "xx-displacement":
        rec = xx_displacement_error(N, make_state(family, N, params),
                                    params.get("scale", "literal"))
    else:
        rec = pegg_barnett_compare(N, make_state(family, N, params))
    rec.params = dict(params)
    if family:
        rec.params["state_family"] = family
    return rec


def _safe_point(experiment, N, params, family) -> ConvergenceRecord:
    try:
        return run_point(experiment, N, params, family)
    except (SSRCError, ValueError, ArithmeticError) as exc:
        p = dict(params)
        if family or DEFAULT_FAMILY.get(experiment):
            p["state_family"] = family or DEFAULT_FAMILY[experiment]
        return ConvergenceRecord(experiment, N, p, float("nan"), "", status="failed",
                                 message=f"{type(exc).__name__}: {exc}")


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SSRCPHASE_THREADS", "0")) or min(4, os.cpu_count() or 1))
    except ValueError:
        return 1


def run_sweep(experiment: str, N_list: Sequence[int], param_grid: Optional[dict] = None,
              state_family: Optional[str] = None,
              workers: Optional[int] = None) -> list[ConvergenceRecord]:
    """Every (params, N) point of the grid, sorted, with a monotone verdict per param point.

    Failing points come back as records with ``status="failed"``; the sweep
    never aborts on them.
    """
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}")
    grid = param_grid or {}
    keys = sorted(grid)
    combos = [dict(zip(keys, vals)) for vals in itertools.product(*(grid[k] for k in keys))]
    jobs = [(experiment, int(N), p, state_family) for p in combos for N in N_list]
    if not jobs:
        return []
    with ThreadPoolExecutor(max_workers=workers or _workers()) as ex:
        recs = list(ex.map(lambda j: _safe_point(*j), jobs))
    recs.sort(key=ConvergenceRecord.sort_key)
    for _, group in itertools.groupby(recs, key=lambda r: r.sort_key()[0]):
        group = list(group)
        ok = [r for r in group if r.status == "ok"]
        flag = len(ok) == len(group) and all(b.error < a.error for a, b in zip(ok, ok[1:]))
        for r in group:
            r.monotone = flag
    return recs


def load_sweep_config(text: str) -> dict:
    """Parse ``{experiment, N_list, params, state_family}`` JSON."""
    cfg = json.loads(text)
    if not isinstance(cfg, dict) or "experiment" not in cfg or "N_list" not in cfg:
        raise ValueError("sweep config needs 'experiment' and 'N_list'")
    if cfg["experiment"] not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {cfg['experiment']!r}")
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise ValueError("'params' must be a mapping")
    grid = {k: (v if isinstance(v, list) else [v]) for k, v in params.items()}
    return {"experiment": cfg["experiment"], "N_list": list(cfg["N_list"]),
            "params": grid, "state_family": cfg.get("state_family")}


def records_to_csv(records: Sequence[ConvergenceRecord], header: Optional[dict] = None) -> str:
    pkeys = sorted({k for r in records for k in r.params})
    buf = io.StringIO()
    if header is not None:
        buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["experiment", "N", *pkeys, "error", "metric", "monotone_flag", "status"])
    for r in records:
        vals = [json.dumps(r.params[k]) if isinstance(r.params.get(k), list)
                else r.params.get(k, "") for k in pkeys]
        w.writerow([r.experiment, r.N, *vals, f"{r.error:.17g}", r.metric,
                    str(r.monotone).lower(), r.status])
    return buf.getvalue()


def record_dict(r: ConvergenceRecord) -> dict:
    return asdict(r)
