"""Dense complex linear algebra, log-space combinatorics and quadrature.

Everything here is a pure function of its inputs. Matrices are plain
``numpy.ndarray`` objects; :class:`OperatorMatrix` is available when a
matrix should travel together with verified structural flags.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import InvalidAngularMomenta, NonHermitianInput, OutOfRange

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
SPECTRAL_TOL = 1e-9


def hermiticity_defect(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def unitarity_defect(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_defect(a) <= tol


def is_unitary(a, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(a) <= tol


@dataclass(frozen=True)
class OperatorMatrix:
    """A square complex matrix with tri-state structural flags.

    ``hermitian`` and ``unitary`` are ``True``/``False`` once checked and
    ``None`` when unknown. A flag set to ``True`` is verified at
    construction against the package tolerances.
    """

    entries: np.ndarray
    hermitian: Optional[bool] = None
    unitary: Optional[bool] = None

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if self.hermitian and not is_hermitian(m):
            raise NonHermitianInput(
                f"hermitian flag set but defect is {hermiticity_defect(m):.3e}")
        if self.unitary and not is_unitary(m):
            raise ValueError(
                f"unitary flag set but defect is {unitarity_defect(m):.3e}")

    @classmethod
    def checked(cls, entries) -> "OperatorMatrix":
        """Wrap ``entries`` and resolve both flags by direct checks."""
        m = np.asarray(entries, dtype=complex)
        return cls(m, hermitian=is_hermitian(m), unitary=is_unitary(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __matmul__(self, other):
        return self.entries @ np.asarray(other)

    def __rmatmul__(self, other):
        return np.asarray(other) @ self.entries


def _as_hermitian(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {a.shape}")
    defect = hermiticity_defect(a)
    if defect > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(a))) if a.size else 1.0):
        raise NonHermitianInput(f"matrix is not Hermitian (defect {defect:.3e})")
    return a


def hermitian_eig(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvector matrix of ``a``."""
    a = _as_hermitian(a)
    # symmetrize so LAPACK sees exactly Hermitian input
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return w, v


def expi_hermitian(a, t: float) -> np.ndarray:
    """exp(i t A) for Hermitian ``A``, through its eigendecomposition."""
    w, v = hermitian_eig(a)
    return expi_from_eig(w, v, t)


def expi_from_eig(w: np.ndarray, v: np.ndarray, t: float) -> np.ndarray:
    return (v * np.exp(1j * t * w)) @ v.conj().T


@dataclass(frozen=True)
class LogFactorialTable:
    """ln(n!) for n = 0..max_n, built once and shared read-only."""

    max_n: int
    values: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.max_n < 0:
            raise OutOfRange("max_n must be non-negative")
        vals = gammaln(np.arange(self.max_n + 1, dtype=float) + 1.0)
        vals[:2] = 0.0
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, n):
        return self.values[n]

    def log_binomial(self, n: int, k: int) -> float:
        if not (0 <= k <= n <= self.max_n):
            raise OutOfRange(f"need 0 <= k <= n <= {self.max_n}, got n={n}, k={k}")
        return float(self.values[n] - self.values[k] - self.values[n - k])


@lru_cache(maxsize=8)
def log_factorial_table(max_n: int = 4096) -> LogFactorialTable:
    return LogFactorialTable(max_n)


def log_binomial(n: int, k: int) -> float:
    """ln C(n, k)."""
    table = log_factorial_table(max(4096, n))
    return table.log_binomial(n, k)


def log_binomial_row(n: int) -> np.ndarray:
    """ln C(n, k) for k = 0..n as a vector."""
    v = log_factorial_table(max(4096, n)).values
    k = np.arange(n + 1)
    return v[n] - v[k] - v[n - k]


def exact_binomial(n: int, k: int) -> int:
    if not 0 <= k <= n:
        raise OutOfRange(f"need 0 <= k <= n, got n={n}, k={k}")
    return math.comb(n, k)


def signed_log_sum(log_mags: Sequence[float], signs: Sequence[int]) -> tuple[float, int]:
    """Sum of ``sign_i * exp(log_mag_i)`` as ``(log|S|, sign(S))``.

    Terms are rescaled by the largest magnitude and added with
    ``math.fsum`` so alternating series do not lose digits to ordering.
    """
    log_mags = np.asarray(log_mags, dtype=float)
    if log_mags.size == 0:
        return -math.inf, 0
    top = float(np.max(log_mags))
    if top == -math.inf:
        return -math.inf, 0
    total = math.fsum(float(s) * math.exp(l - top) for l, s in zip(log_mags, signs))
    if total == 0.0:
        return -math.inf, 0
    return top + math.log(abs(total)), (1 if total > 0 else -1)


def _twice(x, name: str) -> int:
    two = 2 * float(x)
    r = int(round(two))
    if abs(two - r) > 1e-9:
        raise InvalidAngularMomenta(f"{name}={x} is not an integer or half-integer")
    return r


def clebsch_gordan(j1, j2, m1, m2, J, M) -> float:
    """<j1 m1; j2 m2 | J M> in the Condon-Shortley convention.

    Racah's closed form: the square-root prefactor is evaluated with
    log-factorials and the alternating series is summed exactly in integers. Arguments may be ints, floats or
    ``fractions.Fraction`` holding integers or half-integers.
    """
    tj1, tj2, tm1, tm2, tJ, tM = (
        _twice(v, n) for v, n in zip((j1, j2, m1, m2, J, M),
                                     ("j1", "j2", "m1", "m2", "J", "M")))
    for tj, tm, n in ((tj1, tm1, "1"), (tj2, tm2, "2"), (tJ, tM, "")):
        if tj < 0 or abs(tm) > tj or (tj - tm) % 2:
            raise InvalidAngularMomenta(f"invalid (j{n}, m{n}) pair")
    if not (abs(tj1 - tj2) <= tJ <= tj1 + tj2) or (tj1 + tj2 - tJ) % 2:
        raise InvalidAngularMomenta("triangle condition violated")
    if tM != tm1 + tm2:
        return 0.0

    # all remaining quantities are integers
    a = (tj1 + tj2 - tJ) // 2
    b = (tj1 - tm1) // 2
    c = (tj2 + tm2) // 2
    d = (tJ - tj2 + tm1) // 2
    e = (tJ - tj1 - tm2) // 2
    lf = log_factorial_table(max(4096, (tj1 + tj2 + tJ) // 2 + 2)).values

    def f(n2):
        return lf[n2 // 2]

    log_pref = 0.5 * (
        math.log(tJ + 1)
        + f(tJ + tj1 - tj2) + f(tJ - tj1 + tj2) + f(tj1 + tj2 - tJ)
        - f(tj1 + tj2 + tJ + 2)
        + f(tJ + tM) + f(tJ - tM)
        + f(tj1 - tm1) + f(tj1 + tm1)
        + f(tj2 - tm2) + f(tj2 + tm2))

    k_lo = max(0, -d, -e)
    k_hi = min(a, b, c)
    # The alternating series cancels by many orders of magnitude at large
    # spins, so it is summed exactly over the integers: with L the largest
    # denominator, sum_k (-1)^k / D_k = (sum_k (-1)^k L/D_k) / L.
    fac = math.factorial
    dens = [fac(k) * fac(a - k) * fac(b - k) * fac(c - k) * fac(d + k) * fac(e + k)
            for k in range(k_lo, k_hi + 1)]
    if not dens:
        return 0.0
    top = math.lcm(*dens)
    num = sum((-1 if (k_lo + i) % 2 else 1) * (top // den) for i, den in enumerate(dens))
    if num == 0:
        return 0.0
    sign = 1 if num > 0 else -1
    return sign * math.exp(log_pref + math.log(abs(num)) - math.log(top))


def cg_matrix(j1, j2) -> tuple[np.ndarray, list, list]:
    """Full coupling matrix from |j1 m1>|j2 m2> to |J M>.

    Rows are indexed by (m1, m2), columns by (J, M); both label lists
    are returned with the matrix.
    """
    tj1, tj2 = _twice(j1, "j1"), _twice(j2, "j2")
    rows = [(tm1 / 2, tm2 / 2) for tm1 in range(tj1, -tj1 - 1, -2)
            for tm2 in range(tj2, -tj2 - 1, -2)]
    cols = [(tJ / 2, tM / 2) for tJ in range(tj1 + tj2, abs(tj1 - tj2) - 1, -2)
            for tM in range(tJ, -tJ - 1, -2)]
    out = np.zeros((len(rows), len(cols)))
    for r, (m1, m2) in enumerate(rows):
        for c, (Jv, Mv) in enumerate(cols):
            if abs(m1 + m2 - Mv) < 1e-9:
                out[r, c] = clebsch_gordan(j1, j2, m1, m2, Jv, Mv)
    return out, rows, cols


def sphere_quadrature(n_theta: int, n_phi: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre in cos(theta) times a uniform trapezoid in phi.

    Returns ``(thetas, phis, weights)`` with ``weights`` of shape
    ``(n_theta, n_phi)`` summing to 4*pi.
    """
    x, w = np.polynomial.legendre.leggauss(n_theta)
    thetas = np.arccos(x)[::-1]
    w = w[::-1]
    phis = 2 * np.pi * np.arange(n_phi) / n_phi
    weights = np.outer(w, np.full(n_phi, 2 * np.pi / n_phi))
    return thetas, phis, weights
