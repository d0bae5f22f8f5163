"""Planar (quadrature) Wigner function on a truncated single-mode Fock space.

Quadratures follow x = (a + a^dag)/2, p = (a - a^dag)/(2i), so the vacuum
has variance 1/4 and a point (x, p) of the plane is alpha = x + i p.

The parity kernel is P0 = (1/4 pi) int D(alpha) d^2 alpha taken at face
value, which equals (1/2)(-1)^n. The resulting W_P integrates to
``Z_W = pi/4`` rather than 1; negativities are reported divided by Z_W.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.special import eval_genlaguerre, gammaln

from .errors import DimensionMismatch, NormalizationError, TruncationUnsafe
from .numerics import expi_hermitian

PARITY_SCALE = 0.5
Z_W = math.pi / 4
NEG_CLAMP = 1e-12


def annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)


def quadratures(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    a = annihilation(n_max)
    return 0.5 * (a + a.conj().T), (a - a.conj().T) / 2j


@dataclass(frozen=True)
class TruncatedModeState:
    n_max: int
    coeffs: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.shape[0] != self.n_max + 1:
            raise DimensionMismatch(f"expected {self.n_max + 1} coefficients")
        norm2 = float(np.vdot(c, c).real)
        if not (1.0 - self.tail_bound - 1e-12 <= norm2 <= 1.0 + 1e-12):
            raise NormalizationError(
                f"norm^2 {norm2!r} outside [1 - {self.tail_bound}, 1]")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def fock(cls, n_max: int, n: int) -> "TruncatedModeState":
        c = np.zeros(n_max + 1, dtype=complex)
        c[n] = 1.0
        return cls(n_max, c)

    @classmethod
    def normalized(cls, coeffs, tail_bound: float = 0.0) -> "TruncatedModeState":
        c = np.asarray(coeffs, dtype=complex)
        return cls(c.shape[0] - 1, c / np.linalg.norm(c), tail_bound)

    def padded(self, n_max: int) -> "TruncatedModeState":
        if n_max < self.n_max:
            raise TruncationUnsafe("cannot pad to a smaller cutoff")
        c = np.zeros(n_max + 1, dtype=complex)
        c[: self.n_max + 1] = self.coeffs
        return TruncatedModeState(n_max, c, self.tail_bound)


def coherent_coeffs(alpha: complex, n_max: int) -> np.ndarray:
    """e^{-|alpha|^2/2} alpha^k / sqrt(k!) for k <= n_max (not renormalised)."""
    k = np.arange(n_max + 1)
    r = abs(alpha)
    if r == 0:
        return (k == 0).astype(complex)
    logmag = -0.5 * r * r + k * math.log(r) - 0.5 * gammaln(k + 1.0)
    return np.exp(logmag) * np.exp(1j * k * np.angle(alpha))


def coherent_state(alpha: complex, n_max: int) -> TruncatedModeState:
    c = coherent_coeffs(alpha, n_max)
    tail = max(0.0, 1.0 - float(np.vdot(c, c).real))
    return TruncatedModeState(n_max, c / np.linalg.norm(c), tail + 1e-15)


def squeezed_vacuum(r: float, n_max: int) -> TruncatedModeState:
    """exp(i r (a^dag^2 + a^2)/2) |0> on the truncated space."""
    a = annihilation(n_max)
    gen = 0.5 * (a.conj().T @ a.conj().T + a @ a)
    vac = np.zeros(n_max + 1, dtype=complex)
    vac[0] = 1.0
    psi = expi_hermitian(gen, r) @ vac
    tail = float(np.sum(np.abs(psi[-max(1, n_max // 8):]) ** 2))
    return TruncatedModeState(n_max, psi / np.linalg.norm(psi), tail + 1e-15)


def displacement(n_max: int, alpha: complex, check: bool = True) -> np.ndarray:
    """D(alpha) = exp(alpha a^dag - alpha* a) on the truncated space."""
    if check and abs(alpha) ** 2 > n_max / 4:
        raise TruncationUnsafe(
            f"|alpha|^2 = {abs(alpha) ** 2:.3g} exceeds n_max/4 = {n_max / 4:.3g}")
    a = annihilation(n_max)
    # alpha a^dag - alpha* a = i H with H Hermitian
    h = -1j * (alpha * a.conj().T - np.conj(alpha) * a)
    return expi_hermitian(h, 1.0)


def parity_kernel(n_max: int) -> np.ndarray:
    """P0 = (1/2) diag((-1)^n)."""
    return PARITY_SCALE * np.diag((-1.0) ** np.arange(n_max + 1)).astype(complex)


def parity_kernel_element(m: int, n: int) -> float:
    """<m|P0|n> from the defining integral (1/4 pi) int <m|D(alpha)|n> d^2 alpha.

    Independent numerical oracle used to pin :data:`PARITY_SCALE`.
    Off-diagonal elements vanish under the angular integral, so only the
    radial integral of the Laguerre form is evaluated.
    """
    if m != n:
        return 0.0
    f = lambda r: math.exp(-r * r / 2) * float(eval_genlaguerre(n, 0, r * r)) * r
    val, _ = integrate.quad(f, 0, 40 + 4 * math.sqrt(n + 1), limit=400)
    return 2 * math.pi * val / (4 * math.pi)


def displacement_elements(beta: np.ndarray, n_max: int) -> np.ndarray:
    """<m|D(beta)|n> for every beta on a grid, shape beta.shape + (d, d).

    Closed Laguerre form, so no Fock-space truncation enters.
    """
    beta = np.asarray(beta, dtype=complex)
    d = n_max + 1
    x = np.abs(beta) ** 2
    out = np.zeros(beta.shape + (d, d), dtype=complex)
    lg = gammaln(np.arange(d) + 1.0)
    env = np.exp(-x / 2)
    for m in range(d):
        for n in range(d):
            if m >= n:
                k = m - n
                lag = eval_genlaguerre(n, k, x)
                coef = np.exp(0.5 * (lg[n] - lg[m]))
                out[..., m, n] = coef * beta ** k * env * lag
            else:
                k = n - m
                lag = eval_genlaguerre(m, k, x)
                coef = np.exp(0.5 * (lg[m] - lg[n]))
                out[..., m, n] = coef * (-np.conj(beta)) ** k * env * lag
    return out


@dataclass(frozen=True)
class PlaneGrid:
    xs: np.ndarray
    ps: np.ndarray
    values: np.ndarray
    n_max: int
    normalization: float = Z_W

    @property
    def cell_area(self) -> float:
        dx = self.xs[1] - self.xs[0] if len(self.xs) > 1 else 1.0
        dp = self.ps[1] - self.ps[0] if len(self.ps) > 1 else 1.0
        return float(dx * dp)

    def integral(self) -> float:
        return float(np.sum(self.values) * self.cell_area)

    def argmax(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return float(self.xs[i]), float(self.ps[j])

    def to_csv(self, header: Optional[dict] = None) -> str:
        head = {"geometry": "plane", "n_max": self.n_max, "Z_W": self.normalization,
                "quadrature": "x=(a+a^dag)/2", "parity_scale": PARITY_SCALE}
        if header:
            head.update(header)
        buf = io.StringIO()
        buf.write("# " + json.dumps(head, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "p", "value"])
        for i, x in enumerate(self.xs):
            for j, p in enumerate(self.ps):
                w.writerow([f"{x:.17g}", f"{p:.17g}", f"{self.values[i, j]:.17g}"])
        return buf.getvalue()


def default_axis(n_max: int, points: int = 201) -> np.ndarray:
    ext = math.sqrt(n_max) / 2 + 3
    return np.linspace(-ext, ext, points)


def _density(state) -> np.ndarray:
    if isinstance(state, TruncatedModeState):
        c = state.coeffs
        return np.outer(c, c.conj())
    a = np.asarray(state, dtype=complex)
    return np.outer(a, a.conj()) if a.ndim == 1 else a


def _parity_trace(rho: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """sum_{m,n} rho_nm <m|D(beta)|n> (-1)^n via the Laguerre recurrence in n.

    For each offset k = m - n the generalised Laguerre polynomials
    L_n^(k)(|beta|^2) are produced by their three-term recurrence, so the
    cost is O(d^2) vector operations and no (d, d) block is stored per point.
    """
    d = rho.shape[0]
    x = np.abs(beta) ** 2
    env = np.exp(-x / 2)
    lg = gammaln(np.arange(d) + 1.0)
    acc = np.zeros(beta.shape, dtype=complex)
    bpow = np.ones(beta.shape, dtype=complex)
    cpow = np.ones(beta.shape, dtype=complex)
    mcb = -np.conj(beta)
    for k in range(d):
        l_prev = np.zeros_like(x)
        l_cur = np.ones_like(x)
        for n in range(d - k):
            if n == 1:
                l_prev, l_cur = l_cur, 1.0 + k - x
            elif n > 1:
                l_prev, l_cur = l_cur, ((2 * n - 1 + k - x) * l_cur - (n - 1 + k) * l_prev) / n
            m = n + k
            coef = math.exp(0.5 * (lg[n] - lg[m])) * l_cur
            # <m|D|n> for m >= n, and <n|D|m> = coef * (-beta*)^k
            sgn_n = -1.0 if n % 2 else 1.0
            acc += rho[n, m] * coef * bpow * sgn_n
            if k:
                sgn_m = -1.0 if m % 2 else 1.0
                acc += rho[m, n] * coef * cpow * sgn_m
        bpow = bpow * beta
        cpow = cpow * mcb
    return acc * env


def wigner_plane_at(state, alphas) -> np.ndarray:
    """W_P at arbitrary complex points alpha = x + i p.

    Uses D(alpha) P0 D(alpha)^dag = (1/2) D(2 alpha) (-1)^n, with the matrix
    elements of D in closed Laguerre form (no truncation of D enters).
    """
    rho = _density(state)
    alphas = np.asarray(alphas, dtype=complex)
    return PARITY_SCALE * _parity_trace(rho, 2 * alphas)


def wigner_plane(state, xs: Optional[np.ndarray] = None,
                 ps: Optional[np.ndarray] = None, chunk: int = 65536) -> PlaneGrid:
    """W_P on the rectangular grid xs x ps (default 201 x 201)."""
    rho = _density(state)
    n_max = rho.shape[0] - 1
    xs = default_axis(n_max) if xs is None else np.asarray(xs, dtype=float)
    ps = default_axis(n_max) if ps is None else np.asarray(ps, dtype=float)
    pts = (xs[:, None] + 1j * ps[None, :]).ravel()
    vals = np.empty(pts.shape, dtype=complex)
    for s in range(0, pts.size, chunk):
        vals[s:s + chunk] = wigner_plane_at(rho, pts[s:s + chunk])
    imag = float(np.max(np.abs(vals.imag)))
    if imag > 1e-9:
        raise ValueError(f"W_P has imaginary residue {imag:.3e}")
    return PlaneGrid(xs, ps, vals.real.reshape(len(xs), len(ps)), n_max)


def plane_negativity(grid: PlaneGrid) -> float:
    """Negative volume divided by Z_W."""
    neg = np.where(grid.values < -NEG_CLAMP, -grid.values, 0.0)
    return float(np.sum(neg) * grid.cell_area / grid.normalization)


def pin_normalization(n_points: int = 401, ext: float = 6.0) -> float:
    """Integral of the vacuum W_P over the plane, by direct summation."""
    xs = np.linspace(-ext, ext, n_points)
    g = wigner_plane(TruncatedModeState.fock(0, 0), xs, xs)
    return g.integral()
