"""Minkowski geometry, gamma matrices and the multi-particle Dirac current tensor.

Conventions: natural units, metric signature (+, -, -, -), Dirac representation.
In 1+1D the gamma matrices are gamma^0 = diag(1, -1), gamma^1 = [[0, 1], [-1, 0]].
Four-vectors are numpy arrays of length D (2 in 1+1D, 4 in 3+1D); multi-spinors
are flat complex arrays of length d**N with particle 0 as the outermost index.
"""
from __future__ import annotations

import enum
import functools
import string

import numpy as np

from .errors import NumericalIntegrityError, StructuralError

REALITY_TOL = 1e-12
EPS_NULL = 1e-9


class Mode(enum.Enum):
    D1 = "1+1"
    D3 = "3+1"

    @property
    def dim(self) -> int:
        """Number of space-time dimensions D."""
        return 2 if self is Mode.D1 else 4

    @property
    def spinor_dim(self) -> int:
        return 2 if self is Mode.D1 else 4

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, Mode):
            return value
        text = str(value).strip().upper().replace("D", "")
        for m in cls:
            if m.value == text:
                return m
        raise ValueError(f"unknown dimension mode {value!r}; expected '1+1' or '3+1'")


_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@functools.lru_cache(maxsize=None)
def _gammas(mode: Mode) -> np.ndarray:
    if mode is Mode.D1:
        g = np.array([[[1, 0], [0, -1]], [[0, 1], [-1, 0]]], dtype=complex)
    else:
        eye, zero = np.eye(2, dtype=complex), np.zeros((2, 2), dtype=complex)
        g0 = np.block([[eye, zero], [zero, -eye]])
        g = np.array([g0] + [np.block([[zero, s], [-s, zero]]) for s in _PAULI])
    g.setflags(write=False)
    return g


def gamma_matrices(mode: Mode) -> np.ndarray:
    """Return the D gamma matrices as an array of shape (D, d, d)."""
    return _gammas(Mode.parse(mode))


@functools.lru_cache(maxsize=None)
def metric(mode: Mode) -> np.ndarray:
    eta = np.diag([1.0] + [-1.0] * (Mode.parse(mode).dim - 1))
    eta.setflags(write=False)
    return eta


@functools.lru_cache(maxsize=None)
def _current_kernels(mode: Mode) -> np.ndarray:
    # gamma^0 gamma^mu, each Hermitian; J = psi^dagger (K^mu1 x ... x K^muN) psi
    g = _gammas(mode)
    k = np.einsum("ab,mbc->mac", g[0], g)
    k.setflags(write=False)
    return k


@functools.lru_cache(maxsize=None)
def alpha_beta(mode: Mode) -> tuple[np.ndarray, np.ndarray]:
    """Dirac alpha matrices (shape (D-1, d, d)) and beta, as used in the Hamiltonian."""
    g = _gammas(mode)
    alpha = np.einsum("ab,mbc->mac", g[0], g[1:])
    alpha.setflags(write=False)
    return alpha, g[0]


def minkowski_dot(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(a[0] * b[0] - np.dot(a[1:], b[1:]))


def lower(u) -> np.ndarray:
    """Lower the index of a contravariant vector with the metric."""
    u = np.array(u, dtype=float)
    u[1:] = -u[1:]
    return u


def classify(u, eps: float = EPS_NULL) -> tuple[float, str]:
    """Squared Minkowski norm and class ('timelike', 'null', 'spacelike-violation').

    The null band is relative: |u.u| <= eps * (u^0)**2.
    """
    s = minkowski_dot(u, u)
    scale = eps * float(u[0]) ** 2
    if s > scale:
        return s, "timelike"
    if s >= -scale:
        return s, "null"
    return s, "spacelike-violation"


def normalize_velocity(u, kind: str) -> np.ndarray:
    """Timelike vectors get u.u = 1; null vectors get u^0 = 1."""
    u = np.asarray(u, dtype=float)
    if kind == "timelike":
        return u / np.sqrt(minkowski_dot(u, u))
    return u / u[0]


def _check_multispinor(psi, n: int, mode: Mode) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    expected = mode.spinor_dim ** n
    if psi.size != expected:
        raise StructuralError(
            f"multi-spinor has {psi.size} components, expected {expected} for N={n} in {mode.value}D"
        )
    return psi


def dirac_adjoint(psi, n: int, mode) -> np.ndarray:
    """psi^dagger (gamma^0 x ... x gamma^0) as a flat covector."""
    mode = Mode.parse(mode)
    psi = _check_multispinor(psi, n, mode)
    d = mode.spinor_dim
    # gamma^0 is diagonal with entries +-1, so the N-fold product is a sign pattern
    g0 = np.real(np.diag(_gammas(mode)[0]))
    signs = functools.reduce(np.multiply.outer, [g0] * n) if n > 0 else np.ones(1)
    return np.conj(psi) * np.reshape(signs, d ** n)


@functools.lru_cache(maxsize=None)
def _einsum_spec(n: int) -> str:
    letters = iter(string.ascii_letters)
    mu = [next(letters) for _ in range(n)]
    row = [next(letters) for _ in range(n)]
    col = [next(letters) for _ in range(n)]
    ops = ["".join(row)] + [m + r + c for m, r, c in zip(mu, row, col)] + ["".join(col)]
    return ",".join(ops) + "->" + "".join(mu)


def current_tensor(psi, n: int, mode) -> np.ndarray:
    """Rank-N current tensor J^{mu_1...mu_N} = psibar (gamma^mu_1 x ... x gamma^mu_N) psi.

    Returns a real array of shape (D,)*N. Raises NumericalIntegrityError when the
    imaginary parts exceed 1e-12 * |psi|^2, which cannot happen for a sane input.
    """
    mode = Mode.parse(mode)
    psi = _check_multispinor(psi, n, mode)
    d = mode.spinor_dim
    k = _current_kernels(mode)
    if n == 0:
        return np.array(np.vdot(psi, psi).real)
    tensor = psi.reshape((d,) * n)
    operands = [np.conj(tensor)] + [k] * n + [tensor]
    j = np.einsum(_einsum_spec(n), *operands, optimize=n > 2)
    norm2 = float(np.vdot(psi, psi).real)
    if np.max(np.abs(j.imag), initial=0.0) > REALITY_TOL * max(norm2, np.finfo(float).tiny):
        raise NumericalIntegrityError(
            f"current tensor has imaginary part {np.max(np.abs(j.imag)):.3e} for |psi|^2={norm2:.3e}"
        )
    return np.ascontiguousarray(j.real)


def contract_current(j, velocities, free_index: int) -> np.ndarray:
    """Contract every index of J except ``free_index`` with the lowered velocities.

    ``velocities`` lists the 4-velocities of the other particles in particle order,
    skipping ``free_index`` (0-based). The result is the unnormalized vector
    v^mu = sum J^{mu_1..mu_N} prod_{j != i} eta_{mu_j nu_j} u_j^{nu_j}.
    """
    j = np.asarray(j, dtype=float)
    n = j.ndim
    if len(velocities) != max(n - 1, 0):
        raise StructuralError(f"expected {n - 1} companion velocities, got {len(velocities)}")
    if not 0 <= free_index < max(n, 1):
        raise StructuralError(f"free index {free_index} out of range for rank {n}")
    companions = [k for k in range(n) if k != free_index]
    out = j
    # contract from the last axis backwards so earlier axis positions stay valid
    for axis, u in sorted(zip(companions, velocities), key=lambda p: p[0], reverse=True):
        out = np.tensordot(out, lower(u), axes=([axis], [0]))
    return out
