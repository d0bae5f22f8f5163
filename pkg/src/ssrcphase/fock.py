"""Two-mode states with fixed total photon number and their operators.

Basis convention used everywhere in the package: index ``n`` labels
``|n>_a |N-n>_b`` with ``n`` ascending. In angular-momentum language this
is ``|j, m>`` with ``j = N/2`` and Jz eigenvalue ``m = (N - 2n)/2``, so
``n = 0`` is the north pole of the Bloch sphere.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import (DimensionMismatch, NormalizationError, NonUnitaryTransform,
                     OddNRequiresCare, OutOfRange, OverflowRisk)
from .numerics import (expi_from_eig, expi_hermitian, hermitian_eig, is_hermitian,
                       is_unitary, log_binomial_row, log_factorial_table)

NORM_TOL = 1e-10
EXACT_FORMULA_MAX_N = 60
LOG_FORMULA_MAX_N = 300


class BasisKind(str, Enum):
    Z = "z"
    X = "x"
    K = "K"


@dataclass(frozen=True)
class ModeBasisLabel:
    kind: BasisKind = BasisKind.Z
    K: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", BasisKind(self.kind))
        if self.K is not None and not is_unitary(self.K):
            raise NonUnitaryTransform("basis transform K must be unitary")


@dataclass(frozen=True)
class SSRCState:
    """Pure state sum_n c_n |n>_a |N-n>_b."""

    N: int
    coeffs: np.ndarray
    basis: BasisKind = BasisKind.Z

    def __post_init__(self):
        if self.N < 0:
            raise OutOfRange("N must be non-negative")
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.shape[0] != self.N + 1:
            raise DimensionMismatch(f"expected {self.N + 1} coefficients, got {c.shape[0]}")
        norm2 = float(np.vdot(c, c).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NormalizationError(f"state norm^2 is {norm2!r}, not 1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "basis", BasisKind(self.basis))

    @classmethod
    def from_vector(cls, vec, basis=BasisKind.Z) -> "SSRCState":
        """Normalise an arbitrary non-zero vector into a state."""
        v = np.asarray(vec, dtype=complex).ravel()
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise NormalizationError("zero vector")
        return cls(v.shape[0] - 1, v / nrm, basis)

    @classmethod
    def fock(cls, N: int, n: int) -> "SSRCState":
        if not 0 <= n <= N:
            raise OutOfRange(f"need 0 <= n <= N, got n={n}, N={N}")
        c = np.zeros(N + 1, dtype=complex)
        c[n] = 1.0
        return cls(N, c)

    @property
    def dim(self) -> int:
        return self.N + 1

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.N, np.outer(self.coeffs, self.coeffs.conj()))

    def to_json(self, manifest: Optional[dict] = None) -> str:
        doc = {"N": self.N,
               "coeffs": [[float(z.real), float(z.imag)] for z in self.coeffs],
               "basis": self.basis.value}
        if manifest is not None:
            doc["manifest"] = manifest
        return json.dumps(doc, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "SSRCState":
        doc = json.loads(text)
        coeffs = np.array([complex(re, im) for re, im in doc["coeffs"]])
        return cls(int(doc["N"]), coeffs, doc.get("basis", "z"))


@dataclass(frozen=True)
class DensityMatrix:
    N: int
    rho: np.ndarray

    def __post_init__(self):
        r = np.array(self.rho, dtype=complex)
        if r.shape != (self.N + 1, self.N + 1):
            raise DimensionMismatch(f"rho must be {(self.N + 1,) * 2}, got {r.shape}")
        if not is_hermitian(r):
            raise NormalizationError("density matrix is not Hermitian")
        if abs(np.trace(r).real - 1.0) > NORM_TOL:
            raise NormalizationError(f"trace is {np.trace(r).real!r}, not 1")
        if np.linalg.eigvalsh(r)[0] < -1e-9:
            raise NormalizationError("density matrix has a negative eigenvalue")
        r.setflags(write=False)
        object.__setattr__(self, "rho", r)

    @classmethod
    def maximally_mixed(cls, N: int) -> "DensityMatrix":
        return cls(N, np.eye(N + 1) / (N + 1))


def as_density(state) -> np.ndarray:
    """Density-matrix entries of an SSRCState, DensityMatrix, vector or matrix."""
    if isinstance(state, SSRCState):
        return np.outer(state.coeffs, state.coeffs.conj())
    if isinstance(state, DensityMatrix):
        return np.asarray(state.rho)
    a = np.asarray(state, dtype=complex)
    if a.ndim == 1:
        return np.outer(a, a.conj())
    return a


def _warn_odd(N: int):
    if N % 2:
        warnings.warn(f"N={N} is odd, so the qudit dimension {N + 1} is even",
                      OddNRequiresCare, stacklevel=3)


@lru_cache(maxsize=64)
def _schwinger(N: int):
    n = np.arange(N + 1)
    jz = np.diag((N - 2 * n) / 2.0).astype(complex)
    # a^dag b |n>_a|N-n>_b = sqrt((n+1)(N-n)) |n+1>_a|N-n-1>_b
    adag_b = np.diag(np.sqrt((n[:-1] + 1.0) * (N - n[:-1])), -1).astype(complex)
    jx = 0.5 * (adag_b + adag_b.T)
    jy = 0.5j * (adag_b - adag_b.T)
    for m in (jx, jy, jz):
        m.setflags(write=False)
    return jx, jy, jz


def schwinger_operators(N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Jx, Jy, Jz) as (N+1)x(N+1) matrices.

    Jz = (b^dag b - a^dag a)/2, Jx = (a^dag b + b^dag a)/2,
    Jy = i (a^dag b - b^dag a)/2.
    """
    if N < 0:
        raise OutOfRange("N must be non-negative")
    return tuple(m.copy() for m in _schwinger(N))


@lru_cache(maxsize=16)
def _eig_cached(N: int, axis: str):
    jx, jy, jz = _schwinger(N)
    w, v = hermitian_eig({"x": jx, "y": jy, "z": jz}[axis])
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def spin_rotation(N: int, axis: str, angle: float) -> np.ndarray:
    """exp(i * angle * J_axis) for axis in {'x', 'y', 'z'}."""
    if axis == "z":
        n = np.arange(N + 1)
        return np.diag(np.exp(1j * angle * (N - 2 * n) / 2.0))
    w, v = _eig_cached(N, axis)
    return expi_from_eig(w, v, angle)


def rotation(N: int, theta: float, phi: float) -> np.ndarray:
    """R(theta, phi) = exp(-i Jz phi) exp(-i Jy theta)."""
    return spin_rotation(N, "z", -phi) @ spin_rotation(N, "y", -theta)


def spin_coherent_coeffs(N: int, theta: float, phi: float) -> np.ndarray:
    """Binomial closed form of R(theta, phi)|0>_a|N>_b, built in log space.

    Coefficient on ``|n>_a|N-n>_b`` is
    sqrt(C(N,n)) cos(theta/2)^(N-n) (e^{i phi} sin(theta/2))^n.
    The result differs from the matrix path by the global phase
    exp(-i N phi / 2).
    """
    n = np.arange(N + 1)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    logmag = 0.5 * log_binomial_row(N)
    sign = np.ones(N + 1)
    with np.errstate(divide="ignore"):
        for power, base in ((N - n, c), (n, s)):
            logmag = logmag + np.where(power > 0, power * np.log(abs(base)) if base != 0 else -np.inf, 0.0)
            if base < 0:
                sign = sign * np.where(power % 2 == 1, -1.0, 1.0)
    out = sign * np.exp(logmag) * np.exp(1j * n * phi)
    return out / np.linalg.norm(out)


def spin_coherent(N: int, theta: float, phi: float) -> SSRCState:
    return SSRCState(N, spin_coherent_coeffs(N, theta, phi))


def omega(d: int) -> complex:
    return complex(np.exp(2j * np.pi / d))


def relative_phase_Z(N: int) -> np.ndarray:
    """Z = exp(i Jz 2 pi / (N+1)), diagonal with entries omega^((N-2n)/2)."""
    _warn_odd(N)
    n = np.arange(N + 1)
    return np.diag(np.exp(2j * np.pi * (N - 2 * n) / (2.0 * (N + 1))))


def fourier_operator(N: int) -> np.ndarray:
    """(N+1)-point DFT with entries omega^(n m) / sqrt(N+1)."""
    d = N + 1
    k = np.arange(d)
    return np.exp(2j * np.pi * (np.outer(k, k) % d) / d) / math.sqrt(d)


def relative_phase_X(N: int) -> np.ndarray:
    """Pauli partner of Z: X = F^dag Z F.

    Closed form ``omega^(N/2) |n-1 mod d><n|``: the inverse of
    :func:`phase_difference_shift` times the global phase omega^(N/2).
    """
    _warn_odd(N)
    d = N + 1
    return np.exp(1j * np.pi * N / d) * phase_difference_shift(N).conj().T


def phase_difference_shift(N: int) -> np.ndarray:
    """Relative-phase operator exp(i theta_z 2 pi/(N+1)) as a cyclic ladder.

    ``sum_n |n+1>_a|N-n-1>_b <n| + |0>_a|N>_b <N|``.
    """
    d = N + 1
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def jx_eigenbasis(N: int) -> np.ndarray:
    """Columns are |n>_{a_x}|N-n>_{b_x}: Jx eigenvectors, eigenvalue (N-2n)/2.

    Obtained by Hermitian diagonalisation; each column's first non-zero
    component is made real positive.
    """
    _, v = _eig_cached(N, "x")
    v = np.array(v[:, ::-1])
    for col in range(N + 1):
        i = int(np.flatnonzero(np.abs(v[:, col]) > 1e-8)[0])
        v[:, col] *= abs(v[i, col]) / v[i, col]
    return v


def _basis_change_exact(N: int, n: int) -> np.ndarray:
    from fractions import Fraction
    out = np.zeros(N + 1)
    f = math.factorial
    for na in range(N + 1):
        # collect sqrt((N-m-k)!(k+m)!) * C(N-n,m) C(n,k) (-1)^(N-n-m) on na = N-m-k
        acc = 0
        for m in range(N - n + 1):
            k = N - na - m
            if 0 <= k <= n:
                acc += math.comb(N - n, m) * math.comb(n, k) * (-1) ** (N - n - m)
        if acc:
            # sqrt((N-m-k)!(k+m)!) depends only on na
            mag = Fraction(f(na) * f(N - na), f(n) * f(N - n) * 2 ** N)
            out[na] = acc * math.sqrt(mag)
    return out


def _basis_change_log(N: int, n: int) -> np.ndarray:
    # The inner sum over m alternates and cancels by up to ~2^N, so it is
    # accumulated exactly in integers; only the factorial prefactor goes
    # through log space.
    lf = log_factorial_table(max(4096, N)).values
    out = np.zeros(N + 1)
    log_norm = -0.5 * (lf[n] + lf[N - n] + N * math.log(2.0))
    for na in range(N + 1):
        acc = 0
        for m in range(max(0, N - na - n), min(N - n, N - na) + 1):
            k = N - na - m
            term = math.comb(N - n, m) * math.comb(n, k)
            acc += -term if (N - n - m) % 2 else term
        if acc:
            sign = 1 if acc > 0 else -1
            out[na] = sign * math.exp(math.log(abs(acc)) + log_norm + 0.5 * (lf[na] + lf[N - na]))
    return out


def basis_change_formula(N: int, n: int, exact: Optional[bool] = None) -> np.ndarray:
    """z-basis coefficients of |n>_{a_x}|N-n>_{b_x} from the double (m, k) sum.

    Entry ``na`` holds the amplitude on ``|na>_a|N-na>_b`` (na = N-m-k).
    The exact rational path is used up to N = 60; above that the integer
    sum is scaled through log-factorials, up to N = 300. The vector
    produced is a Jx eigenvector with eigenvalue (2n-N)/2, i.e. it matches column ``N-n`` of :func:`jx_eigenbasis`.
    """
    if not 0 <= n <= N:
        raise OutOfRange(f"need 0 <= n <= N, got n={n}, N={N}")
    if N > LOG_FORMULA_MAX_N:
        raise OverflowRisk(f"N={N} exceeds the log-space ceiling {LOG_FORMULA_MAX_N}")
    if exact is None:
        exact = N <= EXACT_FORMULA_MAX_N
    if exact and N > EXACT_FORMULA_MAX_N:
        raise OverflowRisk(f"exact path limited to N <= {EXACT_FORMULA_MAX_N}")
    return _basis_change_exact(N, n) if exact else _basis_change_log(N, n)


def vacuum_in_x_basis(N: int) -> np.ndarray:
    """|0>_a|N>_b expanded in the x basis: sqrt(C(N,m)/2^N) on index m."""
    return np.exp(0.5 * (log_binomial_row(N) - N * math.log(2.0)))


def binomial_width_check(N: int) -> float:
    """Population of the x-basis vacuum expansion within N/2 +- sqrt(N)."""
    if N < 4 or N % 2:
        raise OutOfRange("binomial_width_check needs even N >= 4")
    p = vacuum_in_x_basis(N) ** 2
    m = np.arange(N + 1)
    lo, hi = N / 2 - math.sqrt(N), N / 2 + math.sqrt(N)
    return math.fsum(p[(m >= lo) & (m <= hi)])


def mean_photon_a(state) -> float:
    c = state.coeffs if isinstance(state, SSRCState) else np.asarray(state)
    return float(np.sum(np.arange(c.shape[0]) * np.abs(c) ** 2))


def cv_limit_indicator(state, kappa: float = 0.1) -> tuple[float, bool]:
    """(<n_a>, <n_a> <= kappa sqrt(N))."""
    c = state.coeffs if isinstance(state, SSRCState) else np.asarray(state)
    N = c.shape[0] - 1
    mean = mean_photon_a(c)
    # relative slack absorbs round-off at the boundary
    return mean, mean <= kappa * math.sqrt(N) * (1 + 1e-12)


def apply(op, state: SSRCState) -> SSRCState:
    """Apply an (N+1)x(N+1) operator and renormalise."""
    return SSRCState.from_vector(np.asarray(op) @ state.coeffs, state.basis)


def transformed_schwinger(N: int, K) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """K J K^dag for each generator."""
    K = np.asarray(K)
    return tuple(K @ j @ K.conj().T for j in schwinger_operators(N))


def spin_squeezer(N: int, axis: str, chi: float) -> np.ndarray:
    """exp(i J_axis^2 chi)."""
    jx, jy, jz = schwinger_operators(N)
    j = {"x": jx, "y": jy, "z": jz}[axis]
    return expi_hermitian(j @ j, chi)
