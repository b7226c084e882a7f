"""Multi-time Dirac wave functions for non-interacting particles.

psi(x_1, ..., x_N) is stored as a finite sum of tensor products of single-particle
solutions. Each factor solves its own Dirac equation in the external field, so the
sum solves all N evolution equations at once and the partial Hamiltonians commute
by construction. Two single-particle back-ends exist: analytic superpositions of
positive-energy plane waves (1+1D and 3+1D) and a Crank-Nicolson lattice solver
(1+1D only) that supports a Gaussian external pulse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import DomainError, NumericalFailure, StructuralError
from .spinor_algebra import Mode, alpha_beta

_WINDOW_TOL = 1e-9


# ---------------------------------------------------------------------------
# external field

@dataclass(frozen=True)
class ExternalField:
    """Electromagnetic potential A^mu(t, x) acting on every particle (1+1D only).

    ``kind`` is 'zero' or 'gaussian_pulse'. The pulse is a pure scalar potential of
    height ``amplitude`` in its own rest frame, with Gaussian envelope centred at
    ``center`` = (t_c, x_c) and widths ``widths`` = (sigma_t, sigma_x) measured in
    that frame. ``rapidity`` is the boost from the pulse frame to the simulation
    frame; a nonzero rapidity produces a spatial component A^1.
    """

    kind: str = "zero"
    amplitude: float = 0.0
    center: tuple[float, float] = (0.0, 0.0)
    widths: tuple[float, float] = (1.0, 1.0)
    rapidity: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "gaussian_pulse"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "gaussian_pulse":
            if not (self.widths[0] > 0 and self.widths[1] > 0):
                raise ValueError(f"pulse widths must be strictly positive, got {self.widths}")
            vals = (self.amplitude, *self.center, *self.widths, self.rapidity)
            if not all(math.isfinite(v) for v in vals):
                raise ValueError("pulse parameters must be finite")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or self.amplitude == 0.0

    def potential(self, t, x) -> tuple[np.ndarray, np.ndarray]:
        """Contravariant components (A^0, A^1) at time t and position(s) x."""
        x = np.asarray(x, dtype=float)
        if self.is_zero:
            z = np.zeros_like(x)
            return z, z.copy()
        ch, sh = math.cosh(self.rapidity), math.sinh(self.rapidity)
        # pulse-frame coordinates y = Lambda(-chi) x
        y0 = ch * t - sh * x
        y1 = -sh * t + ch * x
        (tc, xc), (st, sx) = self.center, self.widths
        g = self.amplitude * np.exp(-0.5 * ((y0 - tc) / st) ** 2 - 0.5 * ((y1 - xc) / sx) ** 2)
        return ch * g, sh * g

    def support_box(self, n_sigma: float = 8.0) -> tuple[tuple[float, float], tuple[float, float]]:
        """Time and space intervals outside which the envelope is below exp(-n_sigma**2 / 2).

        For a boosted pulse the box bounds the boosted rest-frame box.
        """
        (tc, xc), (st, sx) = self.center, self.widths
        ch, sh = math.cosh(self.rapidity), math.sinh(self.rapidity)
        corners = [(tc + a * n_sigma * st, xc + b * n_sigma * sx) for a in (-1, 1) for b in (-1, 1)]
        ts = [ch * y0 + sh * y1 for y0, y1 in corners]
        xs = [sh * y0 + ch * y1 for y0, y1 in corners]
        return (min(ts), max(ts)), (min(xs), max(xs))


ZERO_FIELD = ExternalField()


# ---------------------------------------------------------------------------
# plane waves

def energy(p, mass: float) -> float:
    p = np.atleast_1d(np.asarray(p, dtype=float))
    return float(np.sqrt(np.dot(p, p) + mass * mass))


def positive_energy_spinor(p, mass: float, mode, spin: int = 0) -> np.ndarray:
    """Positive-energy Dirac spinor u(p) normalized to u^dagger u = 1."""
    mode = Mode.parse(mode)
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if p.size != mode.dim - 1:
        raise StructuralError(f"momentum has {p.size} components, expected {mode.dim - 1}")
    e = energy(p, mass)
    if mode is Mode.D1:
        u = np.array([e + mass, p[0]], dtype=complex)
        return u / math.sqrt(2.0 * e * (e + mass))
    if spin not in (0, 1):
        raise ValueError(f"spin label must be 0 or 1, got {spin}")
    chi = np.zeros(2, dtype=complex)
    chi[spin] = 1.0
    sigma_p = np.array([[p[2], p[0] - 1j * p[1]], [p[0] + 1j * p[1], -p[2]]])
    u = np.concatenate([chi, sigma_p @ chi / (e + mass)])
    return u * math.sqrt((e + mass) / (2.0 * e))


@dataclass(frozen=True, eq=False)
class PlaneWaveFactor:
    """Finite superposition of positive-energy plane waves sum_n a_n s_n exp(-i p_n.x).

    ``spinors`` are usually u(p_n, s_n); boosted waves carry the transformed spinors.
    """

    mode: Mode
    mass: float
    charge: float
    amplitudes: np.ndarray  # (K,)
    momenta: np.ndarray  # (K, D-1)
    spinors: np.ndarray  # (K, d)

    kind = "plane_waves"
    time_window = (-math.inf, math.inf)

    @classmethod
    def from_modes(cls, modes, mass: float, mode, charge: float = 0.0) -> "PlaneWaveFactor":
        """Build from (amplitude, momentum[, spin]) tuples with on-shell spinors."""
        mode = Mode.parse(mode)
        amps, moms, spinors = [], [], []
        for m in modes:
            a, p = m[0], np.atleast_1d(np.asarray(m[1], dtype=float))
            spin = m[2] if len(m) > 2 else 0
            amps.append(complex(a))
            moms.append(p)
            spinors.append(positive_energy_spinor(p, mass, mode, spin))
        return cls(mode, float(mass), float(charge), np.array(amps, dtype=complex),
                   np.array(moms, dtype=float).reshape(len(amps), mode.dim - 1),
                   np.array(spinors, dtype=complex))

    @property
    def energies(self) -> np.ndarray:
        return np.sqrt(np.sum(self.momenta ** 2, axis=1) + self.mass ** 2)

    def _phases(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(-1j * (self.energies * x[0] - self.momenta @ x[1:]))

    def value(self, x) -> np.ndarray:
        return (self.amplitudes * self._phases(x)) @ self.spinors

    def values(self, t: float, xs) -> np.ndarray:
        """Vectorized value at fixed time over an array of spatial points (shape (P, D-1))."""
        xs = np.asarray(xs, dtype=float).reshape(-1, self.mode.dim - 1)
        ph = np.exp(-1j * (self.energies[None, :] * t - xs @ self.momenta.T))
        return (ph * self.amplitudes) @ self.spinors

    def hamiltonian_value(self, x) -> np.ndarray:
        """(alpha . (-i grad) + beta m) applied analytically to the superposition."""
        alpha, beta = alpha_beta(self.mode)
        coeff = self.amplitudes * self._phases(x)
        # -i grad exp(i p.x) = p exp(i p.x)
        h = np.einsum("kj,jab->kab", self.momenta, alpha) + self.mass * beta
        return np.einsum("k,kab,kb->a", coeff, h, self.spinors)


def gaussian_packet_modes(center, momentum, width: float, n_modes: int = 41, n_sigma: float = 6.0):
    """Plane-wave modes approximating a Gaussian packet at t = 0.

    The momentum-space amplitude is exp(-width**2 (p - p0)**2) exp(-i p x0), sampled on
    ``n_modes`` points along the first spatial axis spanning p0 +- n_sigma/(2 width).
    The resulting position density is close to exp(-(x - x0)**2 / (2 width**2)) and
    repeats with period 2 pi / (momentum spacing).
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    p0 = np.atleast_1d(np.asarray(momentum, dtype=float))
    if width <= 0:
        raise ValueError("packet width must be positive")
    if n_modes < 1:
        raise ValueError("need at least one mode")
    half = n_sigma / (2.0 * width)
    offsets = np.linspace(-half, half, n_modes) if n_modes > 1 else np.zeros(1)
    dp = offsets[1] - offsets[0] if n_modes > 1 else 1.0
    modes = []
    for off in offsets:
        p = p0.copy()
        p[0] += off
        a = math.exp(-(width * off) ** 2) * np.exp(-1j * float(np.dot(p, center))) * dp
        modes.append((a, p))
    return modes


# ---------------------------------------------------------------------------
# 1+1D lattice back-end

def _lagrange_weights(f: float) -> tuple[np.ndarray, np.ndarray]:
    """Cubic Lagrange weights for nodes -1, 0, 1, 2 at fraction f, and their derivatives."""
    w = np.array([
        -f * (f - 1) * (f - 2) / 6.0,
        (f + 1) * (f - 1) * (f - 2) / 2.0,
        -(f + 1) * f * (f - 2) / 2.0,
        (f + 1) * f * (f - 1) / 6.0,
    ])
    dw = np.array([
        -(3 * f * f - 6 * f + 2) / 6.0,
        (3 * f * f - 4 * f - 1) / 2.0,
        -(3 * f * f - 2 * f - 2) / 2.0,
        (3 * f * f - 1) / 6.0,
    ])
    return w, dw


@dataclass(frozen=True, eq=False)
class GridFactor:
    """Single-particle solution stored on a periodic lattice at uniformly spaced times."""

    mass: float
    charge: float
    x_min: float
    x_max: float
    dt: float
    slices: np.ndarray  # (S, M, 2)
    field: ExternalField = ZERO_FIELD

    kind = "grid"
    mode = Mode.D1

    @property
    def n_points(self) -> int:
        return self.slices.shape[1]

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def t_max(self) -> float:
        return self.dt * (self.slices.shape[0] - 1)

    @property
    def time_window(self) -> tuple[float, float]:
        return (0.0, self.t_max)

    @property
    def lattice(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    def slice_at(self, t: float) -> np.ndarray:
        """Spinor field on the lattice at time t (linear in t after removing exp(-i m t))."""
        k, w = self._time_index(t)
        if w == 0.0:
            return self.slices[k]
        ta, tb = k * self.dt, (k + 1) * self.dt
        m = self.mass
        return np.exp(-1j * m * t) * ((1 - w) * np.exp(1j * m * ta) * self.slices[k]
                                      + w * np.exp(1j * m * tb) * self.slices[k + 1])

    def _time_index(self, t: float) -> tuple[int, float]:
        t_max = self.t_max
        tol = _WINDOW_TOL * max(1.0, t_max)
        if not (-tol <= t <= t_max + tol):
            raise DomainError(f"time {t} outside grid window [0, {t_max}]")
        s = min(max(t / self.dt, 0.0), self.slices.shape[0] - 1.0)
        k = int(math.floor(s))
        w = s - k
        if w < 1e-12:
            w = 0.0
        elif w > 1 - 1e-12:
            k, w = k + 1, 0.0
        if k >= self.slices.shape[0] - 1:
            return self.slices.shape[0] - 1, 0.0
        return k, w

    def _space_stencil(self, x: float):
        tol = _WINDOW_TOL * max(1.0, abs(self.x_max - self.x_min))
        if not (self.x_min - tol <= x <= self.x_max + tol):
            raise DomainError(f"position {x} outside lattice [{self.x_min}, {self.x_max}]")
        s = (x - self.x_min) / self.dx
        i = int(math.floor(s))
        f = s - i
        if f > 1 - 1e-12:
            i, f = i + 1, 0.0
        elif f < 1e-12:
            f = 0.0
        idx = np.arange(i - 1, i + 3) % self.n_points
        return idx, f

    def _interp(self, x4, derivative: bool):
        t, x = float(x4[0]), float(x4[1])
        idx, f = self._space_stencil(x)
        k, w = self._time_index(t)
        ws, dws = _lagrange_weights(f)

        def at_slice(kk):
            block = self.slices[kk][idx]
            if f == 0.0:
                v = block[1]
            else:
                v = ws @ block
            return v, (dws @ block) / self.dx

        va, da = at_slice(k)
        if w == 0.0:
            return (va, da) if derivative else va
        vb, db = at_slice(k + 1)
        m, ta, tb = self.mass, k * self.dt, (k + 1) * self.dt
        pa, pb = np.exp(1j * m * (ta - t)), np.exp(1j * m * (tb - t))
        v = (1 - w) * pa * va + w * pb * vb
        if not derivative:
            return v
        return v, (1 - w) * pa * da + w * pb * db

    def value(self, x4) -> np.ndarray:
        return self._interp(x4, derivative=False)

    def hamiltonian_value(self, x4) -> np.ndarray:
        """Dirac Hamiltonian applied to the interpolant (derivative of the local cubic)."""
        v, dv = self._interp(x4, derivative=True)
        a0, a1 = self.field.potential(float(x4[0]), float(x4[1]))
        e = self.charge
        out = np.array([-1j * dv[1], -1j * dv[0]])
        out += -e * float(a1) * np.array([v[1], v[0]])
        out += np.array([self.mass * v[0], -self.mass * v[1]]) + e * float(a0) * v
        return out


def _lattice_hamiltonian(m_points: int, dx: float, mass: float, charge: float,
                         a0: np.ndarray | None, a1: np.ndarray | None) -> sp.csc_matrix:
    # unknown ordering: 2*k + component
    k = np.arange(m_points)
    right, left = (k + 1) % m_points, (k - 1) % m_points
    c = -1j / (2.0 * dx)
    rows, cols, vals = [], [], []
    # -i alpha d/dx, alpha = sigma_x couples component 0 <-> 1
    for comp_out, comp_in in ((0, 1), (1, 0)):
        rows += [2 * k + comp_out, 2 * k + comp_out]
        cols += [2 * right + comp_in, 2 * left + comp_in]
        vals += [np.full(m_points, c), np.full(m_points, -c)]
    diag0 = np.full(m_points, mass, dtype=complex)
    diag1 = np.full(m_points, -mass, dtype=complex)
    if a0 is not None:
        diag0 = diag0 + charge * a0
        diag1 = diag1 + charge * a0
    rows += [2 * k, 2 * k + 1]
    cols += [2 * k, 2 * k + 1]
    vals += [diag0, diag1]
    if a1 is not None:
        rows += [2 * k, 2 * k + 1]
        cols += [2 * k + 1, 2 * k]
        vals += [-charge * a1 + 0j, -charge * a1 + 0j]
    h = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(2 * m_points, 2 * m_points))
    return h.tocsc()


def grid_evolve(initial, x_min: float, x_max: float, mass: float, charge: float = 0.0,
                dt: float = 0.02, t_max: float = 1.0, field: ExternalField = ZERO_FIELD,
                substeps: int = 1) -> GridFactor:
    """Crank-Nicolson evolution of a 1+1D spinor field on a periodic lattice.

    ``initial`` has shape (M, 2), sampled at x_min + k*(x_max - x_min)/M. Slices are
    stored every ``dt`` up to ``t_max``; each stored interval is split into
    ``substeps`` implicit steps with the Hamiltonian taken at the step midpoint.
    """
    initial = np.array(initial, dtype=complex)
    if initial.ndim != 2 or initial.shape[1] != 2:
        raise StructuralError(f"initial data must have shape (M, 2), got {initial.shape}")
    if not dt > 0:
        raise NumericalFailure(f"time step must be positive, got {dt}")
    if not x_max > x_min:
        raise NumericalFailure(f"lattice spacing must be positive (x_min={x_min}, x_max={x_max})")
    if substeps < 1:
        raise NumericalFailure("substeps must be >= 1")
    m_points = initial.shape[0]
    dx = (x_max - x_min) / m_points
    n_slices = int(round(t_max / dt))
    if abs(n_slices * dt - t_max) > 1e-9 * max(1.0, t_max):
        n_slices = int(math.ceil(t_max / dt))
    xs = x_min + dx * np.arange(m_points)
    h_step = dt / substeps
    eye = sp.identity(2 * m_points, dtype=complex, format="csc")
    h_free = _lattice_hamiltonian(m_points, dx, mass, charge, None, None)
    free_lu = splu((eye + 0.5j * h_step * h_free).tocsc())
    free_rhs = (eye - 0.5j * h_step * h_free).tocsr()

    slices = np.empty((n_slices + 1, m_points, 2), dtype=complex)
    slices[0] = initial
    state = initial.reshape(-1).copy()
    for n in range(n_slices):
        for s in range(substeps):
            t_mid = (n * substeps + s + 0.5) * h_step
            a0, a1 = field.potential(t_mid, xs)
            strength = max(np.max(np.abs(a0), initial=0.0), np.max(np.abs(a1), initial=0.0))
            if abs(charge) * strength * h_step < 1e-17:
                state = free_lu.solve(free_rhs @ state)
            else:
                h = _lattice_hamiltonian(m_points, dx, mass, charge, a0, a1)
                lu = splu((eye + 0.5j * h_step * h).tocsc())
                state = lu.solve((eye - 0.5j * h_step * h) @ state)
        if not np.all(np.isfinite(state)):
            raise NumericalFailure(f"non-finite values in grid solution at t={(n + 1) * dt}")
        slices[n + 1] = state.reshape(m_points, 2)
    slices.setflags(write=False)
    return GridFactor(float(mass), float(charge), float(x_min), float(x_max), float(dt), slices, field)


# ---------------------------------------------------------------------------
# multi-time wave function

@dataclass(frozen=True)
class ProductTerm:
    coefficient: complex
    factors: tuple


@dataclass(frozen=True)
class MultiTimeWavefunction:
    """psi = sum_k c_k phi_1^(k) x ... x phi_N^(k)."""

    terms: tuple
    n: int
    mode: Mode
    _meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not self.terms:
            raise StructuralError("wave function needs at least one term")
        for term in self.terms:
            if len(term.factors) != self.n:
                raise StructuralError(f"term has {len(term.factors)} factors, expected N={self.n}")
            for f in term.factors:
                if f.mode is not self.mode:
                    raise StructuralError(f"factor in mode {f.mode.value} inside {self.mode.value} wave function")
        if all(t.coefficient == 0 for t in self.terms):
            raise StructuralError("all term coefficients are zero")

    @classmethod
    def build(cls, terms: Sequence, mode) -> "MultiTimeWavefunction":
        """``terms`` is a list of (coefficient, [factor, ...]) pairs."""
        mode = Mode.parse(mode)
        pts = tuple(ProductTerm(complex(c), tuple(fs)) for c, fs in terms)
        return cls(pts, len(pts[0].factors), mode)

    @property
    def spinor_dim(self) -> int:
        return self.mode.spinor_dim ** self.n

    def time_window(self, particle: int) -> tuple[float, float]:
        lo, hi = -math.inf, math.inf
        for term in self.terms:
            a, b = term.factors[particle].time_window
            lo, hi = max(lo, a), min(hi, b)
        return lo, hi

    def truncated(self, k: int = 0) -> "MultiTimeWavefunction":
        """Keep only the k-th product term."""
        return MultiTimeWavefunction((self.terms[k],), self.n, self.mode)

    def scaled(self, c: complex) -> "MultiTimeWavefunction":
        terms = tuple(ProductTerm(t.coefficient * c, t.factors) for t in self.terms)
        return MultiTimeWavefunction(terms, self.n, self.mode)

    def _combine(self, points, apply_h: int | None) -> np.ndarray:
        if len(points) != self.n:
            raise StructuralError(f"need {self.n} points, got {len(points)}")
        cache: dict = {}
        out = np.zeros(self.spinor_dim, dtype=complex)
        for term in self.terms:
            if term.coefficient == 0:
                continue
            vec = None
            for slot, (f, x) in enumerate(zip(term.factors, points)):
                key = (id(f), slot, slot == apply_h)
                if key not in cache:
                    cache[key] = f.hamiltonian_value(x) if slot == apply_h else f.value(x)
                v = cache[key]
                vec = v if vec is None else np.kron(vec, v)
            out += term.coefficient * vec
        return out

    def evaluate(self, points) -> np.ndarray:
        """Multi-spinor psi(x_1, ..., x_N); each point is a D-vector (t, x...)."""
        return self._combine(points, None)

    def apply_hamiltonian(self, points, i: int) -> np.ndarray:
        """H_i psi at the configuration, with H_i acting on particle i only."""
        return self._combine(points, i)


def _shift(points, i: int, axis: int, h: float):
    shifted = [np.array(p, dtype=float) for p in points]
    shifted[i][axis] += h
    return shifted


def consistency_residual(psi: MultiTimeWavefunction, points, i: int, h: float) -> float:
    """|| i d psi / d t_i - H_i psi || with a central difference of step h in t_i."""
    dpsi = (psi.evaluate(_shift(points, i, 0, h)) - psi.evaluate(_shift(points, i, 0, -h))) / (2 * h)
    return float(np.linalg.norm(1j * dpsi - psi.apply_hamiltonian(points, i)))


def _slot_apply(vec: np.ndarray, mat: np.ndarray, i: int, n: int, d: int) -> np.ndarray:
    t = vec.reshape(d ** i, d, d ** (n - i - 1))
    return np.einsum("ab,ibj->iaj", mat, t).reshape(-1)


def fd_hamiltonian(psi: MultiTimeWavefunction, func, i: int, h: float):
    """Return points -> H_i^FD func(points) using central differences in x_i.

    ``func`` maps a configuration to a multi-spinor; charge coupling uses the field
    of the first factor of particle i (all factors of one particle share it).
    """
    mode, n, d = psi.mode, psi.n, psi.mode.spinor_dim
    alpha, beta = alpha_beta(mode)
    f0 = psi.terms[0].factors[i]
    mass, charge = f0.mass, f0.charge
    fld = getattr(f0, "field", ZERO_FIELD)

    def apply(points):
        base = func(points)
        out = _slot_apply(base, mass * beta, i, n, d)
        for ax in range(1, mode.dim):
            grad = (func(_shift(points, i, ax, h)) - func(_shift(points, i, ax, -h))) / (2 * h)
            out = out + _slot_apply(-1j * grad, alpha[ax - 1], i, n, d)
        if mode is Mode.D1 and not fld.is_zero:
            a0, a1 = fld.potential(float(points[i][0]), float(points[i][1]))
            out = out + charge * float(a0) * base - charge * float(a1) * _slot_apply(base, alpha[0], i, n, d)
        return out

    return apply


def commutator_residual(psi: MultiTimeWavefunction, points, i: int, j: int, h: float) -> float:
    """|| H_i H_j psi - H_j H_i psi || with finite-difference Hamiltonians."""
    hi_hj = fd_hamiltonian(psi, fd_hamiltonian(psi, psi.evaluate, j, h), i, h)(points)
    hj_hi = fd_hamiltonian(psi, fd_hamiltonian(psi, psi.evaluate, i, h), j, h)(points)
    return float(np.linalg.norm(hi_hj - hj_hi))


def _box_integral(dp: np.ndarray, box) -> np.ndarray:
    """Exact integral of exp(i dp . x) over an axis-aligned box, broadcast over dp[..., axis]."""
    out = np.ones(dp.shape[:-1], dtype=complex)
    for ax, (lo, hi) in enumerate(box):
        q = dp[..., ax]
        length = hi - lo
        small = np.abs(q) * length < 1e-8
        safe_q = np.where(small, 1.0, q)
        val = (np.exp(1j * safe_q * hi) - np.exp(1j * safe_q * lo)) / (1j * safe_q)
        val = np.where(small, length * np.exp(1j * q * 0.5 * (lo + hi)), val)
        out = out * val
    return out


def spatial_norm(wave, t: float, box=None) -> float:
    """Integral of |phi(t, x)|^2 over space.

    Grid waves: lattice quadrature over the whole periodic lattice. Plane waves: the
    exact integral over ``box``, given as (lo, hi) in 1+1D or a list of (lo, hi) per axis.
    """
    if isinstance(wave, GridFactor):
        return float(np.sum(np.abs(wave.slice_at(t)) ** 2) * wave.dx)
    if box is None:
        raise ValueError("plane-wave norm needs an integration box")
    if np.ndim(box[0]) == 0:
        box = [box]
    if len(box) != wave.mode.dim - 1:
        raise StructuralError("box dimension does not match the wave's spatial dimension")
    c = wave.amplitudes * np.exp(-1j * wave.energies * t)
    gram = np.conj(wave.spinors) @ wave.spinors.T  # s_n^dagger s_m
    dp = wave.momenta[None, :, :] - wave.momenta[:, None, :]  # p_m - p_n
    integ = _box_integral(dp, box)
    return float(np.real(np.sum(np.conj(c)[:, None] * c[None, :] * gram * integ)))
