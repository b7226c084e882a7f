"""World lines, future light-cone crossings and the two laws of motion.

The light-cone law gives particle i at Q_i the direction
    v^mu = J^{mu_1...mu_N}(Q_1, ..., Q_N) prod_{j != i} u_{j mu_j}(Q_j)
where Q_j is the point at which particle j crosses the future light cone of Q_i and
u_j is its 4-velocity there. The hyperplane law replaces Q_j by the equal-time
position of particle j and u_j by (1, 0, 0, 0).

Because the light-cone law looks into the future, it is integrated backwards in
coordinate time from final data. In that direction every lookup is retarded and the
companions' world lines are already known wherever they are needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateConfigurationError,
    DomainError,
    NodeError,
    NumericalIntegrityError,
    RetardationError,
)
from .multitime import MultiTimeWavefunction
from .spinor_algebra import EPS_NULL, classify, contract_current, current_tensor, normalize_velocity

CHORD_TOL = 1e-9
CROSSING_TOL = 1e-12


def _spatial_velocity(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return u[1:] / u[0]


def _four_velocity_from_dxdt(v) -> tuple[np.ndarray, str]:
    w = np.concatenate([[1.0], np.asarray(v, dtype=float)])
    _, kind = classify(w)
    if kind == "spacelike-violation":
        return w, kind
    return normalize_velocity(w, kind), kind


class WorldLine:
    """Sampled world line with cubic Hermite interpolation and a continuation ray.

    Samples are stored in a buffer that fills from the back, so the backward
    integrator can prepend in O(1). Each sample carries the 4-velocity, its
    classification and the light-cone delays to every particle (NaN for itself).
    """

    def __init__(self, dim: int, n_particles: int, capacity: int = 16):
        self.dim = dim
        self.n_particles = n_particles
        self._t = np.empty(capacity)
        self._x = np.empty((capacity, dim - 1))
        self._u = np.empty((capacity, dim))
        self._cls = [None] * capacity
        self._delay = np.full((capacity, n_particles), np.nan)
        self._start = capacity
        self.ray_anchor = None
        self.ray_velocity = None

    # -- construction -----------------------------------------------------
    @classmethod
    def from_samples(cls, positions, velocities, classes=None, delays=None, ray=None):
        positions = np.asarray(positions, dtype=float)
        velocities = np.asarray(velocities, dtype=float)
        n, dim = positions.shape
        n_particles = 1 if delays is None else np.asarray(delays).shape[1]
        line = cls(dim, n_particles, capacity=n)
        for k in range(n - 1, -1, -1):
            line.prepend(positions[k], velocities[k],
                         None if classes is None else classes[k],
                         None if delays is None else np.asarray(delays)[k])
        if ray is None:
            ray = (positions[-1], velocities[-1])
        line.set_ray(*ray)
        return line

    def _grow(self):
        cap = len(self._t)
        new_cap = max(16, 2 * cap)
        pad = new_cap - cap
        self._t = np.concatenate([np.empty(pad), self._t])
        self._x = np.concatenate([np.empty((pad, self.dim - 1)), self._x])
        self._u = np.concatenate([np.empty((pad, self.dim)), self._u])
        self._cls = [None] * pad + self._cls
        self._delay = np.concatenate([np.full((pad, self.n_particles), np.nan), self._delay])
        self._start += pad

    def reserve(self, extra: int):
        while self._start < extra:
            self._grow()

    def prepend(self, q, u, kind=None, delays=None):
        q = np.asarray(q, dtype=float)
        if len(self) and not q[0] < self._t[self._start]:
            raise ValueError(f"samples must be prepended in decreasing time ({q[0]} >= {self._t[self._start]})")
        if self._start == 0:
            self._grow()
        self._start -= 1
        k = self._start
        self._t[k] = q[0]
        self._x[k] = q[1:]
        self._u[k] = u
        self._cls[k] = kind if kind is not None else classify(u)[1]
        if delays is not None:
            self._delay[k] = delays

    def set_ray(self, anchor, velocity):
        self.ray_anchor = np.array(anchor, dtype=float)
        self.ray_velocity = np.array(velocity, dtype=float)

    # -- views --------------------------------------------------------------
    def __len__(self):
        return len(self._t) - self._start

    @property
    def times(self) -> np.ndarray:
        return self._t[self._start:]

    @property
    def spatial(self) -> np.ndarray:
        return self._x[self._start:]

    @property
    def positions(self) -> np.ndarray:
        return np.column_stack([self.times, self.spatial])

    @property
    def velocities(self) -> np.ndarray:
        return self._u[self._start:]

    @property
    def classes(self) -> list:
        return self._cls[self._start:]

    @property
    def delays(self) -> np.ndarray:
        return self._delay[self._start:]

    @property
    def first_time(self) -> float:
        return float(self._t[self._start])

    @property
    def last_time(self) -> float:
        return float(self._t[-1])

    # -- evaluation -----------------------------------------------------------
    def _ray_point(self, t: float) -> np.ndarray:
        a, u = self.ray_anchor, self.ray_velocity
        return a[1:] + (t - a[0]) * u[1:] / u[0]

    def _segment(self, k: int):
        """Hermite data for the segment between buffer indices k and k+1."""
        t = self._t
        return (t[k], t[k + 1] - t[k], self._x[k], self._x[k + 1],
                self._u[k, 1:] / self._u[k, 0], self._u[k + 1, 1:] / self._u[k + 1, 0])

    @staticmethod
    def _hermite(seg, t: float, derivative: bool = False):
        ta, hh, xa, xb, va, vb = seg
        s = (t - ta) / hh
        s2, s3 = s * s, s * s * s
        x = (2 * s3 - 3 * s2 + 1) * xa + (s3 - 2 * s2 + s) * hh * va + (-2 * s3 + 3 * s2) * xb + (s3 - s2) * hh * vb
        if not derivative:
            return x
        dx = ((6 * s2 - 6 * s) * xa + (3 * s2 - 4 * s + 1) * hh * va + (-6 * s2 + 6 * s) * xb
              + (3 * s2 - 2 * s) * hh * vb) / hh
        return x, dx

    def _locate(self, t: float) -> int:
        """Buffer index of the sample opening the segment that contains t."""
        k = int(np.searchsorted(self._t[self._start:], t, side="right")) - 1 + self._start
        return min(k, len(self._t) - 2)

    def spatial_at(self, t: float) -> np.ndarray:
        if t < self.first_time:
            raise DomainError(f"time {t} precedes the first sample at {self.first_time}")
        if t > self.last_time:
            return self._ray_point(t)
        if len(self) == 1:
            return self._x[self._start].copy()
        k = self._locate(t)
        return self._hermite(self._segment(k), t)

    def at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Position and 4-velocity at coordinate time t."""
        if t < self.first_time:
            raise DomainError(f"time {t} precedes the first sample at {self.first_time}")
        if t > self.last_time:
            return np.concatenate([[t], self._ray_point(t)]), self.ray_velocity.copy()
        idx = np.searchsorted(self.times, t)
        if idx < len(self) and self.times[idx] == t:
            k = self._start + idx
            return np.concatenate([[t], self._x[k]]), self._u[k].copy()
        k = self._locate(t)
        x, dx = self._hermite(self._segment(k), t, derivative=True)
        u, _ = _four_velocity_from_dxdt(dx)
        return np.concatenate([[t], x]), u

    def _f(self, seg, t: float, q) -> float:
        x = self._hermite(seg, t) if seg is not None else self._ray_point(t)
        dt = t - q[0]
        dx = x - q[1:]
        return dt * dt - float(np.dot(dx, dx))


def worldline_at(line: WorldLine, t: float):
    return line.at(t)


# ---------------------------------------------------------------------------
# light-cone crossing

@dataclass
class Crossing:
    point: np.ndarray
    velocity: np.ndarray
    delay: float
    residual: float


def _ray_crossing(line: WorldLine, q: np.ndarray) -> float:
    a, u = line.ray_anchor, line.ray_velocity
    v = u[1:] / u[0]
    d0 = a[0] - q[0]
    dx = a[1:] - q[1:]
    # f(tau) = (d0 + tau)^2 - |dx + v tau|^2 = A tau^2 + 2 B tau + C
    qa = 1.0 - float(np.dot(v, v))
    qb = d0 - float(np.dot(dx, v))
    qc = d0 * d0 - float(np.dot(dx, dx))
    if qa <= 0:
        if qb <= 0:
            raise NumericalIntegrityError("continuation ray never reaches the future light cone")
        return a[0] - qc / (2 * qb)
    disc = qb * qb - qa * qc
    if disc < 0:
        disc = 0.0
    root = math.sqrt(disc)
    # larger root, written to avoid cancellation
    if qb <= 0:
        tau = (-qb + root) / qa
    else:
        tau = -qc / (qb + root) if qb + root != 0 else 0.0
    return a[0] + tau


def future_crossing(line: WorldLine, q, step_scale: float | None = None) -> Crossing:
    """Point where ``line`` crosses the future light cone of ``q``, with its 4-velocity.

    Coarse scan over samples (a binary search, since (Q_j(t) - q)^2 changes sign once
    after t = q^0 on a timelike curve), then bisection inside the bracketing segment.
    """
    q = np.asarray(q, dtype=float)
    tq = float(q[0])
    times = line.times
    n = len(line)
    start = line._start
    scale = step_scale if step_scale is not None else (float(np.median(np.diff(times))) if n > 1 else 1.0)

    def f_sample(k):
        dt = line._t[start + k] - tq
        dx = line._x[start + k] - q[1:]
        return dt * dt - float(np.dot(dx, dx))

    if tq >= line.first_time:
        x_here = line.spatial_at(tq)
        if float(np.dot(x_here - q[1:], x_here - q[1:])) <= (1e-14 * max(1.0, abs(tq))) ** 2:
            raise DegenerateConfigurationError(f"world line passes through the query point {q.tolist()}")
    elif f_sample(0) > 0:
        raise RetardationError(
            f"crossing from t={tq} lies before the earliest known sample t={line.first_time}"
        )

    lo = int(np.searchsorted(times, tq, side="right"))
    if lo >= n or f_sample(n - 1) < 0:
        t_c = _ray_crossing(line, q)
        residual = line._f(None, t_c, q)
    else:
        # first sample index >= lo with f >= 0
        a, b = lo, n - 1
        while a < b:
            mid = (a + b) // 2
            if f_sample(mid) >= 0:
                b = mid
            else:
                a = mid + 1
        k = a
        if f_sample(k) == 0.0:
            t_c, residual = float(times[k]), 0.0
        else:
            if k == 0:
                raise RetardationError(
                    f"crossing from t={tq} lies before the earliest known sample t={line.first_time}"
                )
            seg = line._segment(start + k - 1)
            left = max(float(times[k - 1]), tq)
            right = float(times[k])
            t_c, residual = _bisect(line, seg, q, left, right, CROSSING_TOL * scale * scale)
    delay = t_c - tq
    if not delay > 0:
        raise DegenerateConfigurationError(f"non-positive light-cone delay {delay} from {q.tolist()}")
    bound = CROSSING_TOL * max(scale, delay) ** 2
    if abs(residual) > bound:
        raise NumericalIntegrityError(f"light-cone crossing residual {residual:.3e} exceeds {bound:.3e}")
    point, velocity = line.at(t_c)
    return Crossing(point, velocity, delay, residual)


def _bisect(line, seg, q, left, right, tol):
    f_left = line._f(seg, left, q)
    best_t, best_f = right, line._f(seg, right, q)
    if abs(f_left) < abs(best_f):
        best_t, best_f = left, f_left
    for _ in range(200):
        mid = 0.5 * (left + right)
        if not left < mid < right:
            break
        fm = line._f(seg, mid, q)
        if abs(fm) < abs(best_f):
            best_t, best_f = mid, fm
        if abs(fm) <= tol:
            break
        if fm < 0:
            left = mid
        else:
            right = mid
    return best_t, best_f


# ---------------------------------------------------------------------------
# laws of motion

@dataclass
class Velocity:
    """Normalized 4-velocity from a law of motion plus what went into it."""

    u: np.ndarray
    norm2: float
    kind: str
    delays: np.ndarray
    points: list
    density: float
    crossing_times: list = field(default_factory=list)


def _finish(raw: np.ndarray, density: float, config, delays, crossing_times) -> Velocity:
    if density == 0.0 or not np.any(raw):
        raise NodeError(f"wave function vanishes at configuration {[p.tolist() for p in config]}", config)
    norm2, kind = classify(raw)
    if kind == "spacelike-violation" or raw[0] <= 0:
        raise NumericalIntegrityError(
            f"law of motion produced a non-causal vector {raw.tolist()} (u.u={norm2:.3e}) "
            f"at {[p.tolist() for p in config]}"
        )
    return Velocity(normalize_velocity(raw, kind), norm2, kind, delays, config, density, crossing_times)


def lightcone_velocity(i: int, q_i, lines, psi: MultiTimeWavefunction, step_scale=None) -> Velocity:
    """4-velocity of particle i at q_i under the future light-cone law.

    ``lines`` holds a WorldLine for every particle (entry i is ignored).
    """
    q_i = np.asarray(q_i, dtype=float)
    n = psi.n
    points, companions = [], []
    delays = np.full(n, np.nan)
    crossing_times = []
    for j in range(n):
        if j == i:
            points.append(q_i)
            continue
        c = future_crossing(lines[j], q_i, step_scale)
        points.append(c.point)
        companions.append(c.velocity)
        delays[j] = c.delay
        crossing_times.append(c.point[0])
    spinor = psi.evaluate(points)
    j_tensor = current_tensor(spinor, n, psi.mode)
    raw = contract_current(j_tensor, companions, i)
    density = float(np.vdot(spinor, spinor).real)
    return _finish(raw, density, points, delays, crossing_times)


def hyperplane_velocities(t: float, spatial, psi: MultiTimeWavefunction) -> list[Velocity]:
    """Velocities of all particles under the equal-time law at one configuration."""
    spatial = np.asarray(spatial, dtype=float).reshape(psi.n, psi.mode.dim - 1)
    points = [np.concatenate([[t], x]) for x in spatial]
    spinor = psi.evaluate(points)
    j_tensor = current_tensor(spinor, psi.n, psi.mode)
    density = float(np.vdot(spinor, spinor).real)
    rest = np.zeros(psi.mode.dim)
    rest[0] = 1.0
    out = []
    for i in range(psi.n):
        raw = contract_current(j_tensor, [rest] * (psi.n - 1), i)
        delays = np.full(psi.n, np.nan)
        delays[np.arange(psi.n) != i] = 0.0
        out.append(_finish(raw, density, points, delays, []))
    return out


def hyperplane_velocity(i: int, q_i, spatial, psi: MultiTimeWavefunction) -> Velocity:
    """Equal-time law for particle i; ``spatial`` holds all N spatial positions at q_i's time."""
    spatial = np.array(spatial, dtype=float).reshape(psi.n, psi.mode.dim - 1)
    spatial[i] = np.asarray(q_i, dtype=float)[1:]
    return hyperplane_velocities(float(q_i[0]), spatial, psi)[i]


# ---------------------------------------------------------------------------
# integration

@dataclass
class FinalData:
    """Boundary data for the backward run: final events and continuation velocities.

    Rows of ``events`` are D-vectors. In the simulation frame all final times are
    equal; boosted copies may have different final times per particle. A velocity
    of None is filled in self-consistently from the law of motion.
    """

    events: np.ndarray
    velocities: np.ndarray | None = None

    def __post_init__(self):
        self.events = np.atleast_2d(np.asarray(self.events, dtype=float))
        if self.velocities is not None:
            self.velocities = np.atleast_2d(np.asarray(self.velocities, dtype=float))
            if self.velocities.shape != self.events.shape:
                raise ValueError("final velocities must match final events in shape")
            for u in self.velocities:
                norm2, kind = classify(u)
                if kind != "timelike" or u[0] <= 0:
                    raise ValueError(f"continuation velocity {u.tolist()} must be future timelike")


@dataclass
class BackwardRun:
    lines: list
    steps: int
    min_lookahead: float
    evaluations: int
    final_law_velocities: np.ndarray


def _ray_lines(events, velocities, n: int) -> list[WorldLine]:
    lines = []
    for q, u in zip(events, velocities):
        line = WorldLine(len(q), n)
        line.prepend(q, u)
        line.set_ray(q, u)
        lines.append(line)
    return lines


def self_consistent_final_velocities(psi: MultiTimeWavefunction, events, max_iter: int = 100,
                                     tol: float = 1e-14) -> np.ndarray:
    """Final velocities u_i equal to the law's output when every companion follows its ray."""
    events = np.asarray(events, dtype=float)
    n, dim = events.shape
    u = np.zeros((n, dim))
    u[:, 0] = 1.0
    for _ in range(max_iter):
        lines = _ray_lines(events, u, n)
        new = np.array([lightcone_velocity(i, events[i], lines, psi).u for i in range(n)])
        if new[:, 0].max() > 1e12:
            raise NumericalIntegrityError("self-consistent final velocities diverge")
        done = np.max(np.abs(new - u)) <= tol * np.max(np.abs(new))
        u = new
        if done or n == 1:
            break
    return u


def _rk4_step(vel, t: float, x: np.ndarray, h: float, k1: np.ndarray) -> np.ndarray:
    """Classical RK4 from t to t - h (backwards in time) for dx/dt = vel(t, x)."""
    k2 = vel(t - 0.5 * h, x - 0.5 * h * k1)
    k3 = vel(t - 0.5 * h, x - 0.5 * h * k2)
    k4 = vel(t - h, x - h * k3)
    return x - (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_backward(psi: MultiTimeWavefunction, final: FinalData, h: float,
                       t_end: float = 0.0, n_steps: int | None = None) -> BackwardRun:
    """Integrate the light-cone law from the final data down to ``t_end``.

    Coordinate time is stepped on the grid t_k = max_i T_i - k h. A particle whose
    final time lies between grid points joins with a shorter first step. Every
    light-cone lookup made while stepping from t_k must land at times >= t_k; this
    is checked and the smallest margin is reported as ``min_lookahead``.
    """
    if not h > 0:
        raise ValueError("step size must be positive")
    n, dim = psi.n, psi.mode.dim
    events = final.events
    if events.shape != (n, dim):
        raise ValueError(f"final data has shape {events.shape}, expected {(n, dim)}")
    velocities = final.velocities
    if velocities is None:
        velocities = self_consistent_final_velocities(psi, events)
    t_start = float(events[:, 0].max())
    if n_steps is None:
        n_steps = max(int(math.floor((t_start - t_end) / h + 1e-9)), 0)
    grid = t_start - h * np.arange(n_steps + 1)

    lines = _ray_lines(events, velocities, n)
    for line in lines:
        line.reserve(n_steps + 2)
    state = {"evals": 0, "lookahead": math.inf}

    def law(i, t, x, t_floor):
        res = lightcone_velocity(i, np.concatenate([[t], x]), lines, psi, step_scale=h)
        state["evals"] += 1
        for tc in res.crossing_times:
            state["lookahead"] = min(state["lookahead"], tc - t_floor)
        return res

    current = [float(e[0]) for e in events]
    x_now = [np.array(e[1:]) for e in events]
    k1_cache = [None] * n
    final_law = np.empty((n, dim))
    for i in range(n):
        res = law(i, current[i], x_now[i], current[i])
        lines[i]._delay[lines[i]._start] = res.delays
        k1_cache[i] = _spatial_velocity(res.u)
        final_law[i] = res.u

    for k in range(n_steps):
        t_next = float(grid[k + 1])
        updates = []
        for i in range(n):
            if current[i] <= t_next + 1e-9 * h:
                continue
            t_floor = current[i]
            step = current[i] - t_next

            def vel(t, x, i=i, t_floor=t_floor):
                return _spatial_velocity(law(i, t, x, t_floor).u)

            try:
                x_new = _rk4_step(vel, current[i], x_now[i], step, k1_cache[i])
                res = law(i, t_next, x_new, t_floor)
            except NodeError as exc:
                raise NodeError(f"particle {i} at t={t_next}: {exc}", exc.configuration) from exc
            chord = float(np.linalg.norm(x_new - x_now[i]))
            if chord > step + CHORD_TOL:
                raise NumericalIntegrityError(
                    f"superluminal chord for particle {i} between t={t_next} and t={current[i]}: "
                    f"|dx|={chord} > dt={step}"
                )
            updates.append((i, x_new, res))
        for i, x_new, res in updates:
            lines[i].prepend(np.concatenate([[t_next], x_new]), res.u, res.kind, res.delays)
            current[i] = t_next
            x_now[i] = x_new
            k1_cache[i] = _spatial_velocity(res.u)
    if state["lookahead"] < -1e-12:
        raise RetardationError(f"a light-cone lookup reached {-state['lookahead']} before the current step")
    return BackwardRun(lines, n_steps, state["lookahead"], state["evals"], final_law)


def integrate_hyperplane(psi: MultiTimeWavefunction, t0: float, spatial, t1: float, h: float) -> list[WorldLine]:
    """RK4 for the equal-time law from positions ``spatial`` at t0 to t1 (either direction)."""
    if not h > 0:
        raise ValueError("step size must be positive")
    n, dim = psi.n, psi.mode.dim
    x = np.array(spatial, dtype=float).reshape(n, dim - 1)
    n_steps = max(int(math.floor(abs(t1 - t0) / h + 1e-9)), 0)
    sign = 1.0 if t1 >= t0 else -1.0

    def field_at(t, xs):
        vs = hyperplane_velocities(t, xs, psi)
        return vs, np.array([_spatial_velocity(v.u) for v in vs])

    vs, k1 = field_at(t0, x)
    samples = [(t0, x.copy(), vs)]
    t = t0
    for _ in range(n_steps):
        dt = sign * h
        k2 = field_at(t + 0.5 * dt, x + 0.5 * dt * k1)[1]
        k3 = field_at(t + 0.5 * dt, x + 0.5 * dt * k2)[1]
        k4 = field_at(t + dt, x + dt * k3)[1]
        x_new = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        chords = np.linalg.norm(x_new - x, axis=1)
        if np.any(chords > h + CHORD_TOL):
            raise NumericalIntegrityError(f"superluminal chord in hyperplane run near t={t}")
        t = t0 + sign * h * (len(samples))
        x = x_new
        vs, k1 = field_at(t, x)
        samples.append((t, x.copy(), vs))
    if sign < 0:
        samples.reverse()
    lines = []
    for i in range(n):
        pos = [np.concatenate([[s[0]], s[1][i]]) for s in samples]
        vel = [s[2][i].u for s in samples]
        cls = [s[2][i].kind for s in samples]
        dly = [s[2][i].delays for s in samples]
        lines.append(WorldLine.from_samples(pos, vel, cls, dly))
    return lines


def max_deviation(lines_a, lines_b, times=None) -> float:
    """Largest spatial distance between corresponding world lines at shared sample times."""
    worst = 0.0
    for a, b in zip(lines_a, lines_b):
        ts = a.times if times is None else times
        for t in ts:
            if t < b.first_time or t < a.first_time:
                continue
            worst = max(worst, float(np.linalg.norm(a.spatial_at(t) - b.spatial_at(t))))
    return worst


__all__ = [
    "EPS_NULL",
    "BackwardRun",
    "Crossing",
    "FinalData",
    "Velocity",
    "WorldLine",
    "future_crossing",
    "hyperplane_velocities",
    "hyperplane_velocity",
    "integrate_backward",
    "integrate_hyperplane",
    "lightcone_velocity",
    "max_deviation",
    "self_consistent_final_velocities",
    "worldline_at",
]
