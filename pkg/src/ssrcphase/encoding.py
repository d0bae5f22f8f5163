"""Qudit encodings on the (N+1)-dimensional two-mode space.

Z = exp(i Jz 2 pi/(N+1)) has eigenvalue omega^(N/2 - n) on |n>_a|N-n>_b.
Logical labels are j = (-n) mod d, so that

    Z = omega^(N/2) Z_L,    X = F^dag Z F = omega^(N/2) X_L,

where Z_L|j> = omega^j |j> and X_L|j> = |j+1>. The global phase
omega^(N/2) and the relabeling are stored on every :class:`EncodingSpec`.

For a code transform U and physical transform K:

    Z_U = U^dag Z U,  F_U = U^dag F U,  X_U = F_U^dag Z_U F_U,

with computational basis U^dag |n(j)>, and kappa = U K^dag.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (EvenCodeDimension, HWRelationViolated, NonIsometric,
                     NonUnitaryTransform, DimensionMismatch)
from .fock import (SSRCState, fourier_operator, omega, phase_difference_shift,
                   relative_phase_Z, schwinger_operators,
                   spin_rotation)
from .numerics import UNITARY_TOL, unitarity_defect
from .wigner_discrete import (DEFAULT_CONVENTION, DiscreteLattice, clock_shift, dft,
                              phase_points_from_paulis, weyl_operators, wigner_discrete)
from .wigner_plane import coherent_coeffs

HW_TOL = 1e-9
KAPPA_TOL = 1e-9
PRESETS = ("identity", "rot_pi_y", "theta_z_half", "flip_pi_y")

# declared CV-limit test family: vacuum plus truncated coherent states
FOURIER_TEST_FAMILY = {"alphas": [0.0, 0.5, 1.0, 2.0], "kappa": 0.1}


def preset(name: str, N: int) -> np.ndarray:
    """Named transforms.

    ``rot_pi_y``: exp(i Jy pi/2), the rotation whose Z_U is diagonal in the
    Jx eigenbasis (U^dag Jz U = Jx). ``flip_pi_y``: exp(-i Jy pi), the
    literal rotation by pi about y. ``theta_z_half``: the relative-phase
    ladder raised to N/2, mapping |0>_a|N>_b to |N/2>_a|N/2>_b.
    """
    d = N + 1
    if name == "identity":
        return np.eye(d, dtype=complex)
    if name == "rot_pi_y":
        return spin_rotation(N, "y", math.pi / 2)
    if name == "flip_pi_y":
        return spin_rotation(N, "y", -math.pi)
    if name == "theta_z_half":
        if N % 2:
            raise ValueError("theta_z_half needs even N")
        return np.linalg.matrix_power(phase_difference_shift(N), N // 2)
    raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")


def projective_distance(a: np.ndarray, b: np.ndarray) -> float:
    """min over unit c of max|a - c b|, with c the phase of <b, a>."""
    ip = np.vdot(b.ravel(), a.ravel())
    c = ip / abs(ip) if abs(ip) > 0 else 1.0
    return float(np.max(np.abs(a - c * b)))


def classify_kappa(kappa: np.ndarray, N: int) -> str:
    for name in ("identity", "rot_pi_y", "flip_pi_y"):
        if projective_distance(kappa, preset(name, N)) <= KAPPA_TOL:
            return name
    return "other"


def hw_defect(X: np.ndarray, Z: np.ndarray) -> float:
    """max over a, b < d of |X^a Z^b - omega^(-ab) Z^b X^a|."""
    d = X.shape[0]
    w = omega(d)
    xp = [np.eye(d, dtype=complex)]
    zp = [np.eye(d, dtype=complex)]
    for _ in range(d - 1):
        xp.append(xp[-1] @ X)
        zp.append(zp[-1] @ Z)
    worst = 0.0
    for a in range(d):
        for b in range(d):
            r = xp[a] @ zp[b] - w ** (-(a * b) % d) * zp[b] @ xp[a]
            worst = max(worst, float(np.max(np.abs(r))))
    return worst


def logical_label(n: int, N: int) -> int:
    return (-n) % (N + 1)


def fock_index(j: int, N: int) -> int:
    return (-j) % (N + 1)


@dataclass(frozen=True)
class EncodingSpec:
    N: int
    K: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)
    Z_U: np.ndarray = field(repr=False)
    X_U: np.ndarray = field(repr=False)
    F_U: np.ndarray = field(repr=False)
    basis: tuple = field(repr=False)
    kappa: np.ndarray = field(repr=False)
    kappa_class: str = "other"
    global_phase: complex = 1.0
    checks: dict = field(default_factory=dict)
    names: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.N + 1

    @property
    def logical_Z(self) -> np.ndarray:
        return self.Z_U / self.global_phase

    @property
    def logical_X(self) -> np.ndarray:
        return self.X_U / self.global_phase

    def basis_vector(self, j: int) -> np.ndarray:
        return self.basis[j % self.d].coeffs

    def encode(self, logical_amps) -> np.ndarray:
        """Physical vector of sum_j c_j |j>_code."""
        c = np.asarray(logical_amps, dtype=complex)
        if c.shape[0] != self.d:
            raise DimensionMismatch(f"need {self.d} logical amplitudes")
        return np.stack([b.coeffs for b in self.basis], axis=1) @ c

    def manifest(self) -> dict:
        return {"N": self.N, "K": self.names.get("K", "matrix"),
                "U": self.names.get("U", "matrix"),
                "checks": {"hw_defect": self.checks.get("hw_defect"),
                           "phase": [self.global_phase.real, self.global_phase.imag],
                           "kappa_class": self.kappa_class},
                "relabeling": "j = (-n) mod (N+1)"}

    def to_json(self) -> str:
        return json.dumps(self.manifest(), sort_keys=True)


def _resolve(t, N: int) -> tuple[np.ndarray, str]:
    if isinstance(t, str):
        return preset(t, N), t
    if t is None or (np.isscalar(t) and t == 1):
        return np.eye(N + 1, dtype=complex), "identity"
    return np.asarray(t, dtype=complex), "matrix"


def build_encoding(N: int, K=None, U=None) -> EncodingSpec:
    """Derived Pauli/Fourier operators and basis for the (K, U) encoding.

    ``K`` and ``U`` may be preset names, matrices, or ``None`` for identity.
    Raises :class:`HWRelationViolated` if the constructed (X_U, Z_U) fail the
    Heisenberg-Weyl relation or the order-d property.
    """
    d = N + 1
    Km, kname = _resolve(K, N)
    Um, uname = _resolve(U, N)
    for m, nm in ((Km, "K"), (Um, "U")):
        if m.shape != (d, d):
            raise DimensionMismatch(f"{nm} has shape {m.shape}, need {(d, d)}")
        if unitarity_defect(m) > UNITARY_TOL:
            raise NonUnitaryTransform(f"{nm} unitarity defect {unitarity_defect(m):.3e}")
    Z, F = relative_phase_Z(N), fourier_operator(N)
    Ud = Um.conj().T
    Z_U = Ud @ Z @ Um
    F_U = Ud @ F @ Um
    X_U = F_U.conj().T @ Z_U @ F_U
    phase = complex(np.exp(1j * math.pi * N / d))

    eye = np.eye(d)
    hw = hw_defect(X_U, Z_U)
    xd = np.linalg.matrix_power(X_U, d)
    zd = np.linalg.matrix_power(Z_U, d)
    order_phase = complex(phase ** d)
    order = max(float(np.max(np.abs(xd - order_phase * eye))),
                float(np.max(np.abs(zd - order_phase * eye))))
    if hw > HW_TOL or order > HW_TOL:
        raise HWRelationViolated(f"HW defect {hw:.3e}, order defect {order:.3e}")

    basis = tuple(SSRCState.from_vector(Ud[:, fock_index(j, N)]) for j in range(d))
    kappa = Um @ Km.conj().T
    checks = {"hw_defect": hw, "order_defect": order, "order_phase": [order_phase.real, order_phase.imag]}
    return EncodingSpec(N, Km, Um, Z_U, X_U, F_U, basis, kappa,
                        classify_kappa(kappa, N), phase, checks,
                        {"K": kname, "U": uname})


def encoded_phase_points(enc: EncodingSpec, convention: str = DEFAULT_CONVENTION):
    """Phase points generated by the phase-stripped physical (X_U, Z_U)."""
    _, points = phase_points_from_paulis(enc.logical_X, enc.logical_Z, convention)
    return points


def encoded_wigner(enc: EncodingSpec, physical_state,
                   convention: str = DEFAULT_CONVENTION) -> DiscreteLattice:
    """Discrete Wigner lattice of a physical state, using the encoding's phase points."""
    weyl_operators(enc.d, convention)  # validates odd d
    v = np.asarray(physical_state.coeffs if isinstance(physical_state, SSRCState)
                   else physical_state, dtype=complex)
    rho = np.outer(v, v.conj()) if v.ndim == 1 else v
    points = encoded_phase_points(enc, convention)
    vals = np.einsum("nmab,ba->nm", points, rho) / enc.d
    return DiscreteLattice(vals.real, convention, float(np.max(np.abs(vals.imag))))


def embed_mode(coeffs, N: int) -> np.ndarray:
    """sum_n c_n |n>_a|N-n>_b, zero padded to N+1 entries."""
    c = np.asarray(coeffs, dtype=complex)
    if c.shape[0] > N + 1:
        if np.any(np.abs(c[N + 1:]) > 0):
            raise DimensionMismatch("state does not fit below the photon budget")
        c = c[:N + 1]
    out = np.zeros(N + 1, dtype=complex)
    out[:c.shape[0]] = c
    return out


def fourier_rotation_defect(N: int, psi: np.ndarray, U=None) -> float:
    """|| e^{i Jz pi/2} psi - c F_U psi || with the optimal phase c."""
    Um, _ = _resolve("rot_pi_y" if U is None else U, N)
    F_U = Um.conj().T @ fourier_operator(N) @ Um
    lhs = spin_rotation(N, "z", math.pi / 2) @ psi
    rhs = F_U @ psi
    ip = np.vdot(rhs, lhs)
    c = ip / abs(ip) if abs(ip) > 0 else 1.0
    return float(np.linalg.norm(lhs - c * rhs))


def fourier_test_state(N: int, alpha: float) -> np.ndarray:
    """Truncated coherent state of mode a embedded near |0>_a|N>_b."""
    c = coherent_coeffs(alpha, N)
    return embed_mode(c / np.linalg.norm(c), N)


def logical_fourier_as_rotation(N: int, family: Optional[dict] = None,
                                U=None, enforce_regime: bool = True) -> tuple[float, dict]:
    """Max distance between the rotation exp(i Jz pi/2) and the logical Fourier.

    The encoding is the Jx-basis code (``U = rot_pi_y``) unless ``U`` is given.
    Test states come from ``family`` (default :data:`FOURIER_TEST_FAMILY`);
    with ``enforce_regime`` only members with |alpha|^2 <= kappa sqrt(N) count.
    Returns ``(defect, per_state)``.
    """
    if N % 2:
        raise ValueError("logical_fourier_as_rotation needs even N")
    fam = FOURIER_TEST_FAMILY if family is None else family
    per = {}
    for a in fam["alphas"]:
        if enforce_regime and a * a > fam.get("kappa", 0.1) * math.sqrt(N):
            continue
        per[float(a)] = fourier_rotation_defect(N, fourier_test_state(N, a), U)
    return (max(per.values()) if per else float("nan")), per


@dataclass(frozen=True)
class CodeEmbedding:
    N: int
    k: int
    isometry: np.ndarray = field(repr=False)
    Z_bar: np.ndarray = field(repr=False)
    X_bar: np.ndarray = field(repr=False)
    F_bar: np.ndarray = field(repr=False)

    def lift(self, op: np.ndarray) -> np.ndarray:
        return self.isometry @ op @ self.isometry.conj().T

    def encode(self, logical_amps) -> np.ndarray:
        return self.isometry @ np.asarray(logical_amps, dtype=complex)

    def pull_back(self, physical) -> np.ndarray:
        return self.isometry.conj().T @ np.asarray(physical, dtype=complex)

    def wigner(self, physical, convention: str = DEFAULT_CONVENTION) -> DiscreteLattice:
        """Discrete Wigner of the code-space component, in dimension k."""
        return wigner_discrete(self.pull_back(physical), weyl_operators(self.k, convention))


def embed_code(N: int, k: int, isometry) -> CodeEmbedding:
    if k % 2 == 0:
        raise EvenCodeDimension(f"code dimension must be odd, got {k}")
    V = np.asarray(isometry, dtype=complex)
    if V.shape != (N + 1, k):
        raise DimensionMismatch(f"isometry has shape {V.shape}, need {(N + 1, k)}")
    gram = V.conj().T @ V
    if float(np.max(np.abs(gram - np.eye(k)))) > 1e-10:
        raise NonIsometric("isometry columns are not orthonormal")
    x, z = clock_shift(k)
    f = dft(k)
    xb = f.conj().T @ z @ f
    return CodeEmbedding(N, k, V, z, xb, f)


def su2_defect(N: int, K) -> float:
    """Max residual of [Ja, Jb] = i eps_abc Jc for K J K^dag."""
    K = np.asarray(K)
    jx, jy, jz = (K @ j @ K.conj().T for j in schwinger_operators(N))
    r = [jx @ jy - jy @ jx - 1j * jz, jy @ jz - jz @ jy - 1j * jx, jz @ jx - jx @ jz - 1j * jy]
    return max(float(np.max(np.abs(m))) for m in r)
