"""Spherical (SU(2)) Wigner function built from multipole kernels.

The phase-point operator at the north pole is assembled from the k = 0
multipoles. ``prefactor="2l+1"`` (the default) uses the normalised
multipole weight sqrt((2l+1)/(N+1)); ``prefactor="l+1"`` keeps the
sqrt((l+1)/(N+1)) weight for comparison. Only the first satisfies the
Stratonovich-Weyl traciality axiom; :func:`build_kernel` with
``prefactor="auto"`` selects whichever passes.

Two rotation conventions place the kernel on the sphere:

* ``axis="x"``: Delta(theta, phi) = G Delta(0,0) G^dag with
  G = exp(i Jz phi) exp(i Jx theta).
* ``axis="y"``: G = R(theta, phi) = exp(-i Jz phi) exp(-i Jy theta), the
  rotation that builds spin-coherent states, so a coherent state
  R(t, p)|0>_a|N>_b peaks at (t, p).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import ConventionCheckFailed, DimensionMismatch
from .fock import as_density, spin_rotation
from .numerics import clebsch_gordan, sphere_quadrature

SW_TOL = 1e-8
NEG_CLAMP = 1e-12
PREFACTORS = ("2l+1", "l+1")


def _pref(l: int, N: int, prefactor: str) -> float:
    if prefactor == "2l+1":
        return math.sqrt((2 * l + 1) / (N + 1))
    if prefactor == "l+1":
        return math.sqrt((l + 1) / (N + 1))
    raise ValueError(f"unknown prefactor {prefactor!r}")


@lru_cache(maxsize=64)
def _unit_multipoles(N: int) -> dict:
    """Orthonormal multipoles T_lk = sum (-1)^(j-m') <j m; j -m'|l k> |m><m'|."""
    j = N / 2
    m_of = [j - n for n in range(N + 1)]
    out = {}
    for l in range(N + 1):
        for k in range(-l, l + 1):
            t = np.zeros((N + 1, N + 1))
            for a, m in enumerate(m_of):
                mp = m - k
                if abs(mp) > j + 1e-9:
                    continue
                b = int(round(j - mp))
                sign = -1.0 if int(round(j - mp)) % 2 else 1.0
                t[a, b] = sign * clebsch_gordan(j, j, m, -mp, l, k)
            t.setflags(write=False)
            out[(l, k)] = t
    return out


@dataclass(frozen=True)
class SphericalKernelSet:
    N: int
    delta0: np.ndarray
    multipoles: dict = field(repr=False)
    prefactor: str = "2l+1"
    axis: str = "x"
    checks: dict = field(default_factory=dict)

    @property
    def weights(self) -> np.ndarray:
        """Diagonal of delta0 (it is diagonal in the n basis)."""
        return np.real(np.diag(self.delta0))


def _assemble(N: int, prefactor: str):
    unit = _unit_multipoles(N)
    mult = {lk: _pref(lk[0], N, prefactor) * t for lk, t in unit.items()}
    delta0 = sum(mult[(l, 0)] for l in range(N + 1)).astype(complex)
    return delta0, mult


def sw_residuals(N: int, delta0: np.ndarray) -> dict:
    """Normalisation and traciality residuals of a north-pole kernel.

    Traciality is checked on the exact quadrature: the (N+1)^2 matrix
    units E_ab must satisfy mu * int W_Eab W_Ecd = delta_ad delta_bc.
    """
    norm_res = abs(np.trace(delta0).real - 1.0) + abs(np.trace(delta0).imag)
    herm_res = float(np.max(np.abs(delta0 - delta0.conj().T)))
    n_t, n_p = 2 * N + 2, 4 * N + 4
    thetas, phis, wts = sphere_quadrature(n_t, n_p)
    mu = (N + 1) / (4 * np.pi)
    d = N + 1
    w = np.diag(delta0)
    rows, wq = [], []
    for i, th in enumerate(thetas):
        for jj, ph in enumerate(phis):
            g = spin_rotation(N, "z", ph) @ spin_rotation(N, "x", th)
            ker = (g * w) @ g.conj().T
            # W_{E_ab} = Tr[E_ab Delta] = Delta_ba
            rows.append(ker.T.ravel())
            wq.append(mu * wts[i, jj])
    v = np.array(rows)
    gram = v.T @ (np.array(wq)[:, None] * v)
    target = np.zeros((d * d, d * d))
    for a in range(d):
        for b in range(d):
            target[a * d + b, b * d + a] = 1.0
    trac_res = float(np.max(np.abs(gram - target)))
    return {"normalization": float(norm_res), "hermiticity": herm_res,
            "traciality": trac_res}


@lru_cache(maxsize=64)
def _build(N: int, prefactor: str, axis: str) -> SphericalKernelSet:
    if prefactor == "auto":
        for cand in PREFACTORS:
            d0, mult = _assemble(N, cand)
            res = sw_residuals(N, d0)
            if max(res.values()) <= SW_TOL:
                return SphericalKernelSet(N, d0, mult, cand, axis, res)
        raise ConventionCheckFailed(f"no kernel prefactor satisfies the SW axioms for N={N}")
    d0, mult = _assemble(N, prefactor)
    return SphericalKernelSet(N, d0, mult, prefactor, axis)


def build_kernel(N: int, prefactor: str = "auto", axis: str = "x") -> SphericalKernelSet:
    """Multipoles and north-pole kernel for total photon number N."""
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    return _build(N, prefactor, axis)


def kernel_rotation(N: int, theta: float, phi: float, axis: str = "x") -> np.ndarray:
    if axis == "x":
        return spin_rotation(N, "z", phi) @ spin_rotation(N, "x", theta)
    return spin_rotation(N, "z", -phi) @ spin_rotation(N, "y", -theta)


def kernel_at(kernels: SphericalKernelSet, theta: float, phi: float) -> np.ndarray:
    g = kernel_rotation(kernels.N, theta, phi, kernels.axis)
    return (g * kernels.weights) @ g.conj().T


def kernel_direction(theta: float, phi: float, axis: str = "x") -> np.ndarray:
    """Unit vector (in the Jx, Jy, Jz frame) on which Delta(theta, phi) is centred."""
    st, ct = math.sin(theta), math.cos(theta)
    if axis == "x":
        return np.array([st * math.sin(phi), st * math.cos(phi), ct])
    return np.array([st * math.cos(phi), st * math.sin(phi), ct])


def direction_to_angles(v, axis: str = "x") -> tuple[float, float]:
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    theta = math.acos(max(-1.0, min(1.0, v[2])))
    phi = math.atan2(v[0], v[1]) if axis == "x" else math.atan2(v[1], v[0])
    return theta, phi % (2 * math.pi)


@dataclass(frozen=True)
class SphereGrid:
    N: int
    thetas: np.ndarray
    phis: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    prefactor: str
    axis: str
    imag_residue: float = 0.0

    @property
    def measure(self) -> float:
        return (self.N + 1) / (4 * np.pi)

    def integral(self) -> float:
        return float(self.measure * np.sum(self.weights * self.values))

    def argmax(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return float(self.thetas[i]), float(self.phis[j])

    def to_csv(self, header: Optional[dict] = None) -> str:
        head = {"geometry": "sphere", "N": self.N, "measure": self.measure,
                "prefactor": self.prefactor, "axis": self.axis}
        if header:
            head.update(header)
        buf = io.StringIO()
        buf.write("# " + json.dumps(head, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "phi", "weight", "value"])
        for i, th in enumerate(self.thetas):
            for j, ph in enumerate(self.phis):
                w.writerow([f"{th:.17g}", f"{ph:.17g}", f"{self.weights[i, j]:.17g}",
                            f"{self.values[i, j]:.17g}"])
        return buf.getvalue()


def evaluate_sphere(rho: np.ndarray, kernels: SphericalKernelSet,
                    thetas: np.ndarray, phis: np.ndarray) -> tuple[np.ndarray, float]:
    """W on the outer product grid thetas x phis and the max imaginary residue."""
    N = kernels.N
    d = N + 1
    sgn = 1.0 if kernels.axis == "x" else -1.0
    phis = np.asarray(phis, dtype=float)
    diff = np.subtract.outer(np.arange(d), np.arange(d))  # a - b
    phase = np.exp(1j * sgn * np.multiply.outer(np.arange(-N, N + 1), phis))
    out = np.zeros((len(thetas), len(phis)), dtype=complex)
    for i, th in enumerate(thetas):
        a = spin_rotation(N, kernels.axis, sgn * th)
        k = (a * kernels.weights) @ a.conj().T
        # Tr[rho Dz K Dz^dag] = sum_ab rho_ab K_ba exp(i s (a - b) phi)
        terms = rho * k.T
        c = np.bincount((diff + N).ravel(), weights=terms.real.ravel(), minlength=2 * d - 1) \
            + 1j * np.bincount((diff + N).ravel(), weights=terms.imag.ravel(), minlength=2 * d - 1)
        out[i] = c @ phase
    return out.real, float(np.max(np.abs(out.imag))) if out.size else 0.0


def wigner_sphere(state, N: Optional[int] = None, n_theta: Optional[int] = None,
                  n_phi: Optional[int] = None, prefactor: str = "auto",
                  axis: str = "x") -> SphereGrid:
    """W_S on a Gauss-Legendre x trapezoid grid (defaults 2N+2 by 4N+4)."""
    rho = as_density(state)
    dim = rho.shape[0]
    if N is None:
        N = dim - 1
    if dim != N + 1:
        raise DimensionMismatch(f"state dimension {dim} does not match N={N}")
    kernels = build_kernel(N, prefactor, axis)
    thetas, phis, weights = sphere_quadrature(n_theta or 2 * N + 2, n_phi or 4 * N + 4)
    values, imag = evaluate_sphere(rho, kernels, thetas, phis)
    if imag > 1e-9 * max(1.0, float(np.max(np.abs(rho)))):
        raise ValueError(f"W_S has imaginary residue {imag:.3e}; input not Hermitian?")
    return SphereGrid(N, thetas, phis, weights, values, kernels.prefactor, axis, imag)


def sphere_negativity(grid: SphereGrid) -> float:
    neg = np.where(grid.values < -NEG_CLAMP, -grid.values, 0.0)
    return float(grid.measure * np.sum(grid.weights * neg))


def wigner_sphere_at(state, kernels: SphericalKernelSet, theta: float, phi: float) -> float:
    rho = as_density(state)
    return float(np.real(np.trace(rho @ kernel_at(kernels, theta, phi))))
