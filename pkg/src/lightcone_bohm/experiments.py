"""Headline experiments, run reports and world-line export."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .boost import lorentz_boost
from .errors import LightconeError
from .lightcone import (
    FinalData,
    WorldLine,
    integrate_backward,
    integrate_hyperplane,
    lightcone_velocity,
    max_deviation,
)
from .multitime import ZERO_FIELD, GridFactor, commutator_residual, consistency_residual, fd_hamiltonian
from .scenario import (
    Scenario,
    WavefunctionBuilder,
    boost_scenario,
    scale_momenta,
    scenario_summary,
)
from .spinor_algebra import Mode

PASS, FAIL, INCONCLUSIVE = "PASS", "FAIL", "INCONCLUSIVE"
EXIT_CODES = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2}
COLUMNS = ["particle", "t", "x", "y", "z", "u0", "u1", "u2", "u3", "class"]


@dataclass
class RunReport:
    experiment: str
    scenario: str
    parameters: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    verdict: str = PASS
    runs: dict = field(default_factory=dict)  # label -> list[WorldLine]
    notes: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def summary(self) -> dict:
        return {
            "experiment": self.experiment,
            "scenario": self.scenario,
            "parameters": self.parameters,
            "metrics": self.metrics,
            "verdict": self.verdict,
            "runs": sorted(self.runs),
            "notes": self.notes,
        }


def _class_counts(lines) -> dict:
    counts = {"timelike": 0, "null": 0, "spacelike-violation": 0}
    for line in lines:
        for c in line.classes:
            counts[c] = counts.get(c, 0) + 1
    return counts


def _run_backward(s: Scenario, builder: WavefunctionBuilder, fld=None, terms=None, final=None):
    psi = builder.wavefunction(s, fld, terms)
    final = s.final_data() if final is None else final
    return psi, integrate_backward(psi, final, s.integration.ht, s.integration.t_end)


def _overrides(s: Scenario, ht=None, t_final=None) -> Scenario:
    if ht is not None:
        s = replace(s, integration=replace(s.integration, ht=float(ht)))
    if t_final is not None:
        s = s.with_final_time(float(t_final))
    return s


# ---------------------------------------------------------------------------
# simulate

def run_simulate(s: Scenario, ht=None, t_final=None, builder=None) -> RunReport:
    """Backward light-cone integration from the scenario's final data."""
    s = _overrides(s, ht, t_final)
    builder = builder or WavefunctionBuilder()
    _, run = _run_backward(s, builder)
    counts = _class_counts(run.lines)
    delays = np.concatenate([line.delays[np.isfinite(line.delays)] for line in run.lines]) if s.n > 1 else np.zeros(0)
    metrics = {
        "steps": run.steps,
        "evaluations": run.evaluations,
        "classifications": counts,
        "min_lookahead": None if math.isinf(run.min_lookahead) else run.min_lookahead,
        "min_delay": float(delays.min()) if delays.size else None,
        "max_delay": float(delays.max()) if delays.size else None,
    }
    verdict = PASS if counts["spacelike-violation"] == 0 else FAIL
    return RunReport("simulate", s.name, scenario_summary(s), metrics, verdict, {"lightcone": run.lines})


# ---------------------------------------------------------------------------
# boost test

def map_worldlines(lines, chi: float, mode=Mode.D1) -> list[WorldLine]:
    """World lines re-expressed in coordinates boosted by chi."""
    lam = lorentz_boost(chi, mode)
    out = []
    for line in lines:
        pos = line.positions @ lam.T
        vel = line.velocities @ lam.T
        ray = (line.ray_anchor @ lam.T, line.ray_velocity @ lam.T)
        out.append(WorldLine.from_samples(pos, vel, line.classes, line.delays, ray))
    return out


def boost_deviation(boosted, mapped) -> float:
    """Max spatial distance at the boosted run's sample times inside the common window."""
    worst = 0.0
    for b, m in zip(boosted, mapped):
        lo, hi = max(b.first_time, m.first_time), min(b.last_time, m.last_time)
        ts = b.times[(b.times >= lo) & (b.times <= hi)]
        for t in ts:
            worst = max(worst, float(np.linalg.norm(b.spatial_at(t) - m.spatial_at(t))))
    return worst


def _boost_once(s: Scenario, chi: float, builder: WavefunctionBuilder):
    psi, run = _run_backward(s, builder)
    resolved = replace(s, final_velocities=np.array([line.ray_velocity for line in run.lines]))
    sb = boost_scenario(resolved, chi)
    mapped = map_worldlines(run.lines, chi, s.mode)
    t_end = min(line.first_time for line in mapped) - s.integration.ht
    sb = replace(sb, integration=replace(sb.integration, t_end=t_end))
    _, brun = _run_backward(sb, builder)
    return run.lines, brun.lines, mapped, boost_deviation(brun.lines, mapped)


def run_boost_test(s: Scenario, chi: float, ht=None, t_final=None, tol=None, refine: bool = False,
                   builder=None) -> RunReport:
    """Compare the boosted-frame solution with the original solution mapped through Lambda.

    With ``refine`` the test is repeated at ht/2 and ht/4 and the ratios of
    successive deviations are reported.
    """
    s = _overrides(s, ht, t_final)
    cfg = s.experiments.get("boost", {}) or {}
    tol = float(tol if tol is not None else cfg.get("tol", 5e-4))
    builder = builder or WavefunctionBuilder()
    lines, blines, mapped, dev = _boost_once(s, chi, builder)
    metrics = {"chi": chi, "deviation": dev, "tol_boost": tol}
    if refine:
        devs = [dev]
        for k in (2, 4):
            sk = replace(s, integration=replace(s.integration, ht=s.integration.ht / k))
            devs.append(_boost_once(sk, chi, builder)[3])
        metrics["refinement_deviations"] = devs
        metrics["refinement_ratios"] = [devs[0] / devs[1] if devs[1] else math.inf,
                                        devs[1] / devs[2] if devs[2] else math.inf]
    verdict = PASS if dev < tol else FAIL
    runs = {"original": lines, "boosted": blines, "original_mapped": mapped}
    return RunReport("boost-test", s.name, scenario_summary(s), metrics, verdict, runs)


# ---------------------------------------------------------------------------
# nonrelativistic limit

def fitted_order(scales, deviations) -> float:
    """Least-squares slope of log(deviation) against log(scale)."""
    x, y = np.log(np.asarray(scales, dtype=float)), np.log(np.asarray(deviations, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def run_nrlimit_test(s: Scenario, scales=None, ht=None, t_final=None, min_order=None, builder=None) -> RunReport:
    """Light-cone law versus equal-time law as every momentum is scaled towards zero.

    For each scale the equal-time law is run forward from the initial data to T;
    its endpoint (positions and velocities) is the final data of the light-cone
    run. The reference is the equal-time law integrated backwards from the same
    endpoint on the same time grid, so the deviation measures the difference of
    the laws rather than of the integration directions.
    """
    cfg = s.experiments.get("nrlimit", {}) or {}
    scales = [float(x) for x in (scales if scales is not None else cfg.get("scales", [0.2, 0.1, 0.05, 0.025]))]
    min_order = float(min_order if min_order is not None else cfg.get("min_order", 0.8))
    ht = float(ht if ht is not None else s.integration.ht)
    t_final = float(t_final if t_final is not None else cfg.get("T", 10.0))
    if s.initial_events is None:
        raise LightconeError("nrlimit test needs an 'initial' section")
    t0 = float(s.initial_events[0, 0])
    builder = builder or WavefunctionBuilder()
    devs, forward_devs, runs = [], [], {}
    for lam in scales:
        sl = scale_momenta(s, lam * s.particles[0].mass)
        psi = builder.wavefunction(sl)
        fwd = integrate_hyperplane(psi, t0, s.initial_events[:, 1:], t_final, ht)
        events = np.array([line.positions[-1] for line in fwd])
        vels = np.array([line.velocities[-1] for line in fwd])
        lc = integrate_backward(psi, FinalData(events, vels), ht, t0)
        ref = integrate_hyperplane(psi, t_final, events[:, 1:], t0, ht)
        devs.append(max_deviation(lc.lines, ref))
        forward_devs.append(max_deviation(lc.lines, fwd))
        runs[f"lightcone_lambda_{lam:g}"] = lc.lines
        runs[f"hyperplane_lambda_{lam:g}"] = ref
    positive = all(d > 0 for d in devs)
    order = fitted_order(scales, devs) if positive and len(scales) > 1 else math.nan
    decreasing = all(devs[k + 1] < devs[k] for k in range(len(devs) - 1))
    ratios = [devs[k] / devs[k + 1] for k in range(len(devs) - 1) if devs[k + 1] > 0]
    metrics = {"scales": scales, "deviations": devs, "deviations_vs_forward": forward_devs,
               "ratios": ratios, "fitted_order": order, "min_order": min_order,
               "monotone_decrease": decreasing, "T": t_final, "ht": ht}
    verdict = PASS if decreasing and positive and order >= min_order else FAIL
    return RunReport("nrlimit-test", s.name, scenario_summary(s), metrics, verdict, runs)


# ---------------------------------------------------------------------------
# nonlocality

def spacelike_certificate(line: WorldLine, fld, t_from: float) -> tuple[bool, float]:
    """Whether every sample with t >= t_from is spacelike to the pulse support box.

    Returns the verdict and the smallest margin min(|x - box|) - max(|t - box|).
    """
    (ta, tb), (xa, xb) = fld.support_box()
    margin = math.inf
    for t, x in zip(line.times, line.spatial[:, 0]):
        if t < t_from:
            continue
        dx = 0.0 if xa <= x <= xb else min(abs(x - xa), abs(x - xb))
        dt = max(abs(t - ta), abs(t - tb))
        margin = min(margin, dx - dt)
    return margin > 0, margin


def _sample_deviation(a: WorldLine, b: WorldLine, t_from: float) -> float:
    """Largest spatial difference between two runs on the same time grid."""
    if len(a) != len(b) or not np.array_equal(a.times, b.times):
        raise LightconeError("runs to compare do not share a time grid")
    mask = a.times >= t_from
    if not mask.any():
        return 0.0
    return float(np.max(np.linalg.norm(a.spatial[mask] - b.spatial[mask], axis=1)))


def run_nonlocality_demo(s: Scenario, ht=None, t_final=None, builder=None) -> RunReport:
    """Field-on versus field-off deflection of an observed particle, entangled versus product state."""
    s = _overrides(s, ht, t_final)
    cfg = s.experiments.get("nonlocality", {}) or {}
    observed = int(cfg.get("observed", 0))
    control = int(cfg.get("control_term", 0))
    ratio_req = float(cfg.get("ratio", 100.0))
    product_tol = float(cfg.get("product_tol", 1e-6))
    t_from = float(cfg.get("window_start", s.integration.t_end))
    if s.mode is not Mode.D1 or s.n != 2 or len(s.terms) < 2 or s.field.kind != "gaussian_pulse":
        raise LightconeError("nonlocality demo needs a 1+1D, N=2, entangled scenario with a gaussian pulse")
    builder = builder or WavefunctionBuilder()
    product_terms = (s.terms[control],)
    runs = {}
    for label, terms in (("entangled", None), ("product", product_terms)):
        for on, fld in (("on", s.field), ("off", ZERO_FIELD)):
            runs[f"{label}_{on}"] = _run_backward(s, builder, fld, terms)[1].lines
    certs = {k: spacelike_certificate(v[observed], s.field, t_from) for k, v in runs.items()}
    certified = all(c[0] for c in certs.values())
    d_ent = _sample_deviation(runs["entangled_on"][observed], runs["entangled_off"][observed], t_from)
    d_prod = _sample_deviation(runs["product_on"][observed], runs["product_off"][observed], t_from)
    d_other = _sample_deviation(runs["entangled_on"][1 - observed], runs["entangled_off"][1 - observed], t_from)
    metrics = {
        "observed_particle": observed,
        "delta_entangled": d_ent,
        "delta_product": d_prod,
        "delta_entangled_other_particle": d_other,
        "ratio_required": ratio_req,
        "product_tol": product_tol,
        "window_start": t_from,
        "spacelike_certified": certified,
        "spacelike_margin": min(c[1] for c in certs.values()),
        "pulse_support_box": [list(b) for b in s.field.support_box()],
        "baseline_delta_entangled": d_ent,
    }
    if not certified:
        verdict = INCONCLUSIVE
    elif d_ent > ratio_req * d_prod and d_prod < product_tol:
        verdict = PASS
    else:
        verdict = FAIL
    return RunReport("nonlocality-demo", s.name, scenario_summary(s), metrics, verdict, runs)


# ---------------------------------------------------------------------------
# consistency and timelike sweeps

def _sample_box(s: Scenario, psi, rng, margin: float):
    """Random configuration inside every factor's domain, each particle with its own time."""
    points = []
    cfg = s.experiments.get("check", {}) or {}
    t_lo, t_hi = cfg.get("time_range", [0.0, 10.0])
    x_half = float(cfg.get("space_half_width", 5.0))
    for i in range(s.n):
        centre = s.final_events[i, 1:] if s.final_events is not None else s.initial_events[i, 1:]
        lo, hi = float(t_lo), float(t_hi)
        xs_lo, xs_hi = centre - x_half, centre + x_half
        for term in psi.terms:
            f = term.factors[i]
            if isinstance(f, GridFactor):
                lo, hi = max(lo, margin), min(hi, f.t_max - margin)
                xs_lo = np.maximum(xs_lo, f.x_min + margin)
                xs_hi = np.minimum(xs_hi, f.x_max - margin)
        t = rng.uniform(lo, hi)
        x = rng.uniform(xs_lo, xs_hi)
        points.append(np.concatenate([[t], x]))
    return points


def _refine_grid(s: Scenario) -> Scenario:
    """Halve the grid time step and lattice spacing of every grid factor."""
    factors = {k: replace(f, dt=f.dt / 2, lattice=replace(f.lattice, points=2 * f.lattice.points))
               if f.kind == "grid_packet" else f for k, f in s.factors.items()}
    return replace(s, factors=factors)


def run_consistency_check(s: Scenario, samples=None, h=None, seed=None, sweep=None, builder=None) -> RunReport:
    """Multi-time consistency and commutator residuals at random configurations.

    Plane-wave scenarios must reach relative residual < ``tol`` (default 1e-5 at h=1e-3).
    On the grid back-end the residual is lattice discretization error, so the worst
    sample is re-evaluated with the grid time step and spacing halved and must shrink
    by at least ``grid_min_ratio`` (default 1.8). The time derivative of the linear
    time interpolant is first order in dt, so 2 is the guaranteed ratio. Optionally
    runs a timelike sweep.
    """
    cfg = s.experiments.get("check", {}) or {}
    samples = int(samples if samples is not None else cfg.get("samples", 100))
    h = float(h if h is not None else cfg.get("h", 1e-3))
    seed = int(seed if seed is not None else cfg.get("seed", 1234))
    sweep = int(sweep if sweep is not None else cfg.get("sweep", 0))
    builder = builder or WavefunctionBuilder()
    psi = builder.wavefunction(s)
    has_grid = any(isinstance(f, GridFactor) for t in psi.terms for f in t.factors)
    tol = float(cfg.get("tol", 1e-5))
    comm_tol = float(cfg.get("commutator_tol", 1e-6))
    rng = np.random.default_rng(seed)
    worst_cons, worst_comm, worst_at = 0.0, 0.0, None
    for _ in range(samples):
        pts = _sample_box(s, psi, rng, margin=3 * h + 1e-6)
        for i in range(s.n):
            ref = np.linalg.norm(psi.apply_hamiltonian(pts, i))
            r = consistency_residual(psi, pts, i, h) / ref
            if r > worst_cons:
                worst_cons, worst_at = r, (pts, i)
        for i in range(s.n):
            for j in range(i + 1, s.n):
                hh = 1e-3
                c = commutator_residual(psi, pts, i, j, hh)
                scale = np.linalg.norm(fd_hamiltonian(psi, fd_hamiltonian(psi, psi.evaluate, j, hh), i, hh)(pts))
                worst_comm = max(worst_comm, c / scale)
    metrics = {"samples": samples, "h": h, "max_relative_consistency_residual": worst_cons,
               "max_relative_commutator_residual": worst_comm, "commutator_tol": comm_tol,
               "grid_backend": has_grid}
    if has_grid:
        pts, i = worst_at
        fine = builder.wavefunction(_refine_grid(s))
        refined = consistency_residual(fine, pts, i, h) / np.linalg.norm(fine.apply_hamiltonian(pts, i))
        metrics["worst_sample"] = {"particle": i, "events": [list(map(float, q)) for q in pts]}
        metrics["refined_consistency_residual"] = refined
        metrics["grid_refinement_ratio"] = worst_cons / refined if refined > 0 else math.inf
        metrics["grid_min_ratio"] = float(cfg.get("grid_min_ratio", 1.8))
    else:
        metrics["consistency_tol"] = tol
    ok = _consistency_ok(metrics)
    if sweep and s.n >= 2:
        counts = timelike_sweep(s, psi, sweep, seed)
        metrics["sweep"] = counts
        ok = ok and counts["spacelike-violation"] == 0
    return RunReport("check", s.name, scenario_summary(s), metrics, PASS if ok else FAIL)


def _consistency_ok(m: dict) -> bool:
    if m["grid_backend"]:
        cons = m["grid_refinement_ratio"] >= m["grid_min_ratio"]
    else:
        cons = m["max_relative_consistency_residual"] < m["consistency_tol"]
    return cons and m["max_relative_commutator_residual"] < m["commutator_tol"]


def timelike_sweep(s: Scenario, psi, n_configs: int, seed: int = 0) -> dict:
    """Light-cone velocities at random configurations with random straight companion lines."""
    rng = np.random.default_rng(seed)
    cfg = s.experiments.get("check", {}) or {}
    t_lo, t_hi = cfg.get("time_range", [0.0, 10.0])
    x_half = float(cfg.get("space_half_width", 5.0))
    dim = s.mode.dim
    centres = s.final_events[:, 1:] if s.final_events is not None else s.initial_events[:, 1:]
    counts = {"timelike": 0, "null": 0, "spacelike-violation": 0}
    for _ in range(n_configs):
        i = int(rng.integers(s.n))
        t_i = rng.uniform(t_lo, t_hi)
        q_i = np.concatenate([[t_i], centres[i] + rng.uniform(-x_half, x_half, dim - 1)])
        lines = []
        for j in range(s.n):
            v = rng.normal(size=dim - 1)
            v *= rng.uniform(0.0, 0.95) / max(np.linalg.norm(v), 1e-300)
            anchor = np.concatenate([[t_i], centres[j] + rng.uniform(-x_half, x_half, dim - 1)])
            if j != i and np.linalg.norm(anchor[1:] - q_i[1:]) < 1e-3:
                anchor[1] += 0.5
            u = np.concatenate([[1.0], v]) / math.sqrt(1.0 - float(np.dot(v, v)))
            line = WorldLine(dim, s.n)
            line.prepend(anchor, u)
            line.set_ray(anchor, u)
            lines.append(line)
        res = lightcone_velocity(i, q_i, lines, psi)
        counts[res.kind] += 1
    counts["configurations"] = n_configs
    return counts


# ---------------------------------------------------------------------------
# export

def _fmt(x) -> str:
    return format(float(x), ".17g")


def export_worldlines(report: RunReport, path, stride: int = 1) -> list[Path]:
    """Write one delimited file per run plus ``summary.json`` into directory ``path``."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for label in sorted(report.runs):
            lines = report.runs[label]
            n = len(lines)
            fname = out / f"{label}.csv"
            with open(fname, "w", newline="") as fh:
                fh.write(f"# experiment={report.experiment} scenario={report.scenario} run={label}\n")
                fh.write("# natural units (hbar = c = 1); t,x,y,z coordinates; u0..u3 4-velocity; "
                         "delay_j = light-cone delay to particle j (nan for self)\n")
                header = COLUMNS + [f"delay_{j + 1}" for j in range(n)]
                fh.write("# " + ",".join(header) + "\n")
                w = csv.writer(fh, lineterminator="\n")
                for pid, line in enumerate(lines):
                    m = len(line)
                    keep = [k for k in range(m) if (m - 1 - k) % stride == 0]
                    for k in keep:
                        pos = np.zeros(4)
                        vel = np.zeros(4)
                        pos[: line.dim] = line.positions[k]
                        vel[: line.dim] = line.velocities[k]
                        delays = line.delays[k] if line.delays.shape[1] == n else np.full(n, np.nan)
                        w.writerow([pid + 1] + [_fmt(v) for v in pos] + [_fmt(v) for v in vel]
                                   + [line.classes[k]] + [_fmt(d) for d in delays])
            written.append(fname)
        summary = out / "summary.json"
        summary.write_text(json.dumps(_jsonable(report.summary()), indent=2, sort_keys=True) + "\n")
        written.append(summary)
    except OSError as exc:
        raise LightconeError(f"cannot write export to {out}: {exc}") from exc
    return written


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def load_worldlines(path, dim: int | None = None) -> list[WorldLine]:
    """Read an exported run file back into world lines (rays from the last row)."""
    rows = {}
    with open(path) as fh:
        for raw in fh:
            if raw.startswith("#") or not raw.strip():
                continue
            rec = raw.rstrip("\n").split(",")
            rows.setdefault(int(rec[0]), []).append(rec)
    lines = []
    for pid in sorted(rows):
        recs = rows[pid]
        pos = np.array([[float(v) for v in r[1:5]] for r in recs])
        vel = np.array([[float(v) for v in r[5:9]] for r in recs])
        if dim is None:
            dim = 2 if not np.any(pos[:, 2:]) and not np.any(vel[:, 2:]) else 4
        classes = [r[9] for r in recs]
        delays = np.array([[float(v) for v in r[10:]] for r in recs])
        lines.append(WorldLine.from_samples(pos[:, :dim], vel[:, :dim], classes, delays))
    return lines


def recompute_verdict(path) -> tuple[str, dict]:
    """Recompute an experiment's verdict from its exported files alone."""
    out = Path(path)
    summary = json.loads((out / "summary.json").read_text())
    exp, m = summary["experiment"], summary["metrics"]
    if exp == "simulate":
        lines = load_worldlines(out / "lightcone.csv")
        counts = _class_counts(lines)
        return (PASS if counts["spacelike-violation"] == 0 else FAIL), {"classifications": counts}
    if exp == "boost-test":
        boosted = load_worldlines(out / "boosted.csv")
        mapped = load_worldlines(out / "original_mapped.csv")
        dev = boost_deviation(boosted, mapped)
        return (PASS if dev < m["tol_boost"] else FAIL), {"deviation": dev}
    if exp == "nrlimit-test":
        devs = []
        for lam in m["scales"]:
            lc = load_worldlines(out / f"lightcone_lambda_{lam:g}.csv")
            ref = load_worldlines(out / f"hyperplane_lambda_{lam:g}.csv")
            devs.append(max_deviation(lc, ref))
        order = fitted_order(m["scales"], devs)
        dec = all(devs[k + 1] < devs[k] for k in range(len(devs) - 1))
        return (PASS if dec and order >= m["min_order"] else FAIL), {"deviations": devs, "fitted_order": order}
    if exp == "nonlocality-demo":
        obs, t_from = m["observed_particle"], m["window_start"]
        runs = {k: load_worldlines(out / f"{k}.csv") for k in
                ("entangled_on", "entangled_off", "product_on", "product_off")}
        d_ent = _sample_deviation(runs["entangled_on"][obs], runs["entangled_off"][obs], t_from)
        d_prod = _sample_deviation(runs["product_on"][obs], runs["product_off"][obs], t_from)
        if not m["spacelike_certified"]:
            return INCONCLUSIVE, {}
        ok = d_ent > m["ratio_required"] * d_prod and d_prod < m["product_tol"]
        return (PASS if ok else FAIL), {"delta_entangled": d_ent, "delta_product": d_prod}
    if exp == "check":
        ok = _consistency_ok(m)
        if "sweep" in m:
            ok = ok and m["sweep"]["spacelike-violation"] == 0
        return (PASS if ok else FAIL), {}
    raise LightconeError(f"unknown experiment {exp!r} in {out / 'summary.json'}")
