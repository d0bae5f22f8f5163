"""Discrete (toric) Wigner function for odd qudit dimension d.

Weyl operators T_{n,m} = phase(n, m) X^n Z^m with X|j> = |j+1 mod d> and
Z|j> = omega^j |j>. Two phase conventions are available:

* ``"symmetric-half"`` (default): phase omega^(2^{-1} n m mod d), with
  2^{-1} the inverse of 2 mod d. Phase points are Hermitian and the
  lattice has the marginal and covariance properties.
* ``"paper-literal"``: phase omega^(n m). Phase points have unit trace
  but are generally not Hermitian; the imaginary residue is reported.

Phase points are Delta_k = T_k Delta_0 T_k^dag with Delta_0 = (1/d) sum_k T_k
and W(n, m) = (1/d) Tr[Delta_{n,m} rho]. Lattice index order is (n, m) =
(shift, phase).
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, EvenDimension, NormalizationError

CONVENTIONS = ("symmetric-half", "paper-literal")
DEFAULT_CONVENTION = "symmetric-half"
NEG_CLAMP = 1e-12


def _check_odd(d: int):
    if d < 3 or d % 2 == 0:
        raise EvenDimension(f"discrete Wigner needs odd d >= 3, got {d}")


def clock_shift(d: int) -> tuple[np.ndarray, np.ndarray]:
    """(X, Z) generalised Paulis in dimension d."""
    x = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return x, z


def dft(d: int) -> np.ndarray:
    k = np.arange(d)
    return np.exp(2j * np.pi * (np.outer(k, k) % d) / d) / np.sqrt(d)


def quadratic_phase(d: int) -> np.ndarray:
    """diag(omega^(j(j-1)/2)), a Clifford gate for odd d."""
    j = np.arange(d)
    return np.diag(np.exp(2j * np.pi * ((j * (j - 1) // 2) % d) / d))


def weyl_phase(n: int, m: int, d: int, convention: str) -> complex:
    if convention == "symmetric-half":
        half = pow(2, -1, d)
        return np.exp(2j * np.pi * ((half * n * m) % d) / d)
    if convention == "paper-literal":
        return np.exp(2j * np.pi * ((n * m) % d) / d)
    raise ValueError(f"unknown convention {convention!r}")


@dataclass(frozen=True)
class QuditState:
    d: int
    amps: np.ndarray

    def __post_init__(self):
        a = np.array(self.amps, dtype=complex).ravel()
        if a.shape[0] != self.d:
            raise DimensionMismatch(f"expected {self.d} amplitudes, got {a.shape[0]}")
        if abs(float(np.vdot(a, a).real) - 1.0) > 1e-10:
            raise NormalizationError("qudit state is not normalised")
        a.setflags(write=False)
        object.__setattr__(self, "amps", a)

    @classmethod
    def basis(cls, d: int, j: int) -> "QuditState":
        a = np.zeros(d, dtype=complex)
        a[j % d] = 1.0
        return cls(d, a)

    @classmethod
    def normalized(cls, amps) -> "QuditState":
        a = np.asarray(amps, dtype=complex)
        return cls(a.shape[0], a / np.linalg.norm(a))

    def density(self) -> np.ndarray:
        return np.outer(self.amps, self.amps.conj())


@dataclass(frozen=True)
class PhasePointSet:
    d: int
    weyl: np.ndarray = field(repr=False)    # (d, d, d, d): [n, m] -> T_{n,m}
    points: np.ndarray = field(repr=False)  # (d, d, d, d): [n, m] -> Delta_{n,m}
    convention: str = DEFAULT_CONVENTION
    hermiticity_defect: float = 0.0

    def lattice_from_density(self, rho: np.ndarray) -> tuple[np.ndarray, float]:
        # Tr[Delta rho] = sum_ab Delta_ab rho_ba
        vals = np.einsum("nmab,ba->nm", self.points, rho) / self.d
        return vals.real, float(np.max(np.abs(vals.imag)))


def phase_points_from_paulis(X: np.ndarray, Z: np.ndarray,
                             convention: str = DEFAULT_CONVENTION) -> tuple[np.ndarray, np.ndarray]:
    """Weyl operators and phase points generated by an arbitrary (X, Z) pair."""
    d = X.shape[0]
    xp = [np.linalg.matrix_power(X, n) for n in range(d)]
    zp = [np.linalg.matrix_power(Z, m) for m in range(d)]
    weyl = np.empty((d, d, d, d), dtype=complex)
    for n in range(d):
        for m in range(d):
            weyl[n, m] = weyl_phase(n, m, d, convention) * xp[n] @ zp[m]
    delta0 = weyl.sum(axis=(0, 1)) / d
    points = np.einsum("nmab,bc,nmdc->nmad", weyl, delta0, weyl.conj())
    return weyl, points


@lru_cache(maxsize=32)
def _weyl_cached(d: int, convention: str) -> PhasePointSet:
    x, z = clock_shift(d)
    weyl, points = phase_points_from_paulis(x, z, convention)
    herm = float(np.max(np.abs(points - np.swapaxes(points, 2, 3).conj())))
    for arr in (weyl, points):
        arr.setflags(write=False)
    return PhasePointSet(d, weyl, points, convention, herm)


def weyl_operators(d: int, convention: str = DEFAULT_CONVENTION) -> PhasePointSet:
    _check_odd(d)
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    return _weyl_cached(d, convention)


def _rho(state, d: int) -> np.ndarray:
    if isinstance(state, QuditState):
        rho = state.density()
    else:
        a = np.asarray(state, dtype=complex)
        rho = np.outer(a, a.conj()) if a.ndim == 1 else a
    if rho.shape != (d, d):
        raise DimensionMismatch(f"state has shape {rho.shape}, phase points need d={d}")
    return rho


@dataclass(frozen=True)
class DiscreteLattice:
    values: np.ndarray
    convention: str
    imag_residue: float = 0.0

    @property
    def d(self) -> int:
        return self.values.shape[0]

    def to_csv(self, header: Optional[dict] = None) -> str:
        head = {"geometry": "torus", "d": self.d, "convention": self.convention}
        if header:
            head.update(header)
        buf = io.StringIO()
        buf.write("# " + json.dumps(head, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "m", "value"])
        for n in range(self.d):
            for m in range(self.d):
                w.writerow([n, m, f"{self.values[n, m]:.17g}"])
        return buf.getvalue()


def wigner_discrete(state, pps: PhasePointSet) -> DiscreteLattice:
    rho = _rho(state, pps.d)
    vals, imag = pps.lattice_from_density(rho)
    if pps.convention == "symmetric-half" and imag > 1e-9:
        raise ValueError(f"imaginary residue {imag:.3e}; input not Hermitian?")
    return DiscreteLattice(vals, pps.convention, imag)


def discrete_negativity(lattice) -> float:
    """Mana-style sum of the negative part, sum_k max(0, -W(k)).

    Entries above -NEG_CLAMP count as round-off and are ignored.
    """
    v = lattice.values if isinstance(lattice, DiscreteLattice) else np.asarray(lattice)
    return float(np.sum(np.where(v < -NEG_CLAMP, -v, 0.0)))


def clifford_gates(d: int) -> dict[str, np.ndarray]:
    x, z = clock_shift(d)
    return {"X": x, "Z": z, "F": dft(d), "S": quadratic_phase(d)}


@dataclass
class PositivityReport:
    d: int
    max_length: int
    checked: int
    max_negativity: float
    violations: list


def clifford_positivity_scan(d: int, gate_list: Sequence[str] = ("X", "Z", "F", "S"),
                             max_length: int = 4, tol: float = 1e-10,
                             convention: str = DEFAULT_CONVENTION) -> PositivityReport:
    """Negativity of every word of length <= max_length applied to every basis state."""
    pps = weyl_operators(d, convention)
    gates = clifford_gates(d)
    unknown = set(gate_list) - set(gates)
    if unknown:
        raise ValueError(f"unknown gates {sorted(unknown)}")
    # unitaries reached by each word; duplicates up to phase give identical lattices
    words: list[tuple[tuple[str, ...], np.ndarray]] = [((), np.eye(d, dtype=complex))]
    frontier = list(words)
    for _ in range(max_length if gate_list else 0):
        nxt = []
        for w, u in frontier:
            for g in gate_list:
                nxt.append((w + (g,), gates[g] @ u))
        words.extend(nxt)
        frontier = nxt
    checked, worst, bad = 0, 0.0, []
    for w, u in words:
        for j in range(d):
            lat = wigner_discrete(u[:, j], pps)
            neg = discrete_negativity(lat)
            checked += 1
            worst = max(worst, neg)
            if neg > tol:
                bad.append({"word": "".join(w), "basis": j, "negativity": neg})
    return PositivityReport(d, max_length, checked, worst, bad)


def translate_lattice(values: np.ndarray, a: int, b: int) -> np.ndarray:
    """Lattice moved by (a, b) on the torus: out[n, m] = values[n - a, m - b]."""
    return np.roll(np.roll(values, a, axis=0), b, axis=1)


def non_stabilizer_witness(d: int) -> QuditState:
    """(|0> + |1>)/sqrt 2, which is not a stabilizer state for odd d."""
    a = np.zeros(d, dtype=complex)
    a[:2] = 1.0
    return QuditState.normalized(a)
