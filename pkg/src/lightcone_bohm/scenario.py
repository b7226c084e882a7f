"""Declarative scenario files: schema, validation, boosting and wave-function assembly.

A scenario is a YAML document; see ``scenarios/SCHEMA.md`` for the full schema.
Every numeric piece that depends on the Lorentz frame (factor waves, external
field) carries a ``rapidity`` so that boosting a scenario is exact and reversible.
"""
from __future__ import annotations

import math
import dataclasses
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from .boost import boost_events, lorentz_boost, spinor_boost
from .errors import ModeInconsistencyError, ScenarioParseError, ScenarioSchemaError
from .lightcone import FinalData
from .multitime import (
    ZERO_FIELD,
    ExternalField,
    MultiTimeWavefunction,
    PlaneWaveFactor,
    gaussian_packet_modes,
    grid_evolve,
    positive_energy_spinor,
)
from .spinor_algebra import Mode

FACTOR_KINDS = ("plane_waves", "gaussian_packet", "grid_packet")


@dataclass(frozen=True)
class ParticleSpec:
    mass: float
    charge: float = 0.0


@dataclass(frozen=True)
class Lattice:
    x_min: float
    x_max: float
    points: int


@dataclass(frozen=True)
class FactorSpec:
    """One single-particle wave.

    plane_waves: explicit ``modes`` of (amplitude, momentum, spin).
    gaussian_packet: plane-wave superposition approximating a Gaussian packet.
    grid_packet: Gaussian packet sampled on ``lattice`` at t=0 and evolved on the grid.
    ``momentum_scale`` multiplies every momentum; packets keep their centres and their
    width becomes width/momentum_scale, so the momentum spread scales too.
    """

    name: str
    kind: str
    modes: tuple = ()
    center: tuple = (0.0,)
    momentum: tuple = (0.0,)
    width: float = 1.0
    n_modes: int = 41
    n_sigma: float = 6.0
    lattice: Lattice | None = None
    dt: float = 0.05
    substeps: int = 1
    t_max: float = 0.0
    rapidity: float = 0.0
    momentum_scale: float = 1.0


@dataclass(frozen=True)
class Integration:
    ht: float = 0.01
    t_end: float = 0.0


@dataclass(frozen=True)
class Output:
    stride: int = 1
    path: str = "out"


@dataclass(frozen=True)
class Scenario:
    name: str
    mode: Mode
    particles: tuple
    factors: dict
    terms: tuple  # ((complex coefficient, (factor name, ...)), ...)
    field: ExternalField = ZERO_FIELD
    final_events: np.ndarray | None = None
    final_velocities: np.ndarray | None = None
    initial_events: np.ndarray | None = None
    integration: Integration = Integration()
    output: Output = Output()
    experiments: dict = dataclasses.field(default_factory=dict)
    source: str | None = None

    @property
    def n(self) -> int:
        return len(self.particles)

    def final_data(self) -> FinalData:
        if self.final_events is None:
            raise ScenarioSchemaError(f"scenario {self.name!r} has no 'final' section")
        return FinalData(self.final_events, self.final_velocities)

    def with_final_time(self, t_final: float) -> "Scenario":
        """Shift all final events to time ``t_final`` (simultaneous final data only)."""
        ev = np.array(self.final_events, dtype=float)
        ev[:, 0] = t_final
        return replace(self, final_events=ev)


# ---------------------------------------------------------------------------
# parsing helpers

def _require(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ScenarioSchemaError(f"missing required field '{where}.{key}'" if where else f"missing required field '{key}'")
    return d[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioSchemaError(f"field '{where}' must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ScenarioSchemaError(f"field '{where}' must be finite")
    return float(value)


def _complex(value, where: str) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ScenarioSchemaError(f"field '{where}' must be a number or [re, im]")
        return complex(_number(value[0], where), _number(value[1], where))
    return complex(_number(value, where))


def _vector(value, length: int, where: str) -> tuple:
    if length == 1 and not isinstance(value, (list, tuple)):
        return (_number(value, where),)
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise ScenarioSchemaError(f"field '{where}' must have {length} components")
    return tuple(_number(v, f"{where}[{k}]") for k, v in enumerate(value))


def _events(section: dict, key_prefix: str, mode: Mode, n: int, where: str) -> np.ndarray:
    if "events" in section:
        rows = section["events"]
        if not isinstance(rows, list) or len(rows) != n:
            raise ScenarioSchemaError(f"field '{where}.events' must list {n} events")
        return np.array([_vector(r, mode.dim, f"{where}.events[{k}]") for k, r in enumerate(rows)])
    t = _number(_require(section, "time", where), f"{where}.time")
    pos = _require(section, "positions", where)
    if not isinstance(pos, list) or len(pos) != n:
        raise ScenarioSchemaError(f"field '{where}.positions' must list {n} positions")
    return np.array([(t,) + _vector(p, mode.dim - 1, f"{where}.positions[{k}]") for k, p in enumerate(pos)])


def _parse_factor(name: str, spec: dict, mode: Mode) -> FactorSpec:
    where = f"factors.{name}"
    if not isinstance(spec, dict):
        raise ScenarioSchemaError(f"field '{where}' must be a mapping")
    kind = _require(spec, "type", where)
    if kind not in FACTOR_KINDS:
        raise ScenarioSchemaError(f"field '{where}.type' must be one of {FACTOR_KINDS}, got {kind!r}")
    sdim = mode.dim - 1
    common = dict(
        rapidity=_number(spec.get("rapidity", 0.0), f"{where}.rapidity"),
        momentum_scale=_number(spec.get("momentum_scale", 1.0), f"{where}.momentum_scale"),
    )
    if kind == "plane_waves":
        modes = _require(spec, "modes", where)
        if not isinstance(modes, list) or not modes:
            raise ScenarioSchemaError(f"field '{where}.modes' must be a non-empty list")
        parsed = []
        for k, m in enumerate(modes):
            w = f"{where}.modes[{k}]"
            amp = _complex(_require(m, "amplitude", w), f"{w}.amplitude")
            p = _vector(_require(m, "momentum", w), sdim, f"{w}.momentum")
            spin = int(m.get("spin", 0))
            parsed.append((amp, p, spin))
        return FactorSpec(name, kind, modes=tuple(parsed), **common)
    packet = dict(
        center=_vector(_require(spec, "center", where), sdim, f"{where}.center"),
        momentum=_vector(_require(spec, "momentum", where), sdim, f"{where}.momentum"),
        width=_number(_require(spec, "width", where), f"{where}.width"),
        n_modes=int(spec.get("modes", 41)),
        n_sigma=_number(spec.get("n_sigma", 6.0), f"{where}.n_sigma"),
    )
    if packet["width"] <= 0:
        raise ScenarioSchemaError(f"field '{where}.width' must be positive")
    if kind == "gaussian_packet":
        return FactorSpec(name, kind, **packet, **common)
    if mode is not Mode.D1:
        raise ModeInconsistencyError(f"factor '{name}': grid factors exist only in 1+1D mode")
    lat = _require(spec, "lattice", where)
    lattice = Lattice(_number(_require(lat, "x_min", f"{where}.lattice"), f"{where}.lattice.x_min"),
                      _number(_require(lat, "x_max", f"{where}.lattice"), f"{where}.lattice.x_max"),
                      int(_require(lat, "points", f"{where}.lattice")))
    if lattice.x_max <= lattice.x_min or lattice.points < 8:
        raise ScenarioSchemaError(f"field '{where}.lattice' needs x_max > x_min and at least 8 points")
    dt = _number(_require(spec, "dt", where), f"{where}.dt")
    if dt <= 0:
        raise ScenarioSchemaError(f"field '{where}.dt' must be positive")
    return FactorSpec(name, kind, lattice=lattice, dt=dt, substeps=int(spec.get("substeps", 1)),
                      t_max=_number(_require(spec, "t_max", where), f"{where}.t_max"), **packet, **common)


def _parse_field(spec, mode: Mode) -> ExternalField:
    if spec is None:
        return ZERO_FIELD
    kind = _require(spec, "type", "field")
    if kind == "zero":
        return ZERO_FIELD
    if kind != "gaussian_pulse":
        raise ScenarioSchemaError(f"field 'field.type' must be 'zero' or 'gaussian_pulse', got {kind!r}")
    if mode is not Mode.D1:
        raise ModeInconsistencyError("external fields are only supported in 1+1D mode")
    center = _vector(_require(spec, "center", "field"), 2, "field.center")
    widths = _vector(_require(spec, "widths", "field"), 2, "field.widths")
    if min(widths) <= 0:
        raise ScenarioSchemaError("field 'field.widths' must be strictly positive")
    return ExternalField("gaussian_pulse", _number(_require(spec, "amplitude", "field"), "field.amplitude"),
                         center, widths, _number(spec.get("rapidity", 0.0), "field.rapidity"))


def parse_scenario(doc: dict, source: str | None = None) -> Scenario:
    """Validate a parsed YAML document and return a Scenario."""
    if not isinstance(doc, dict):
        raise ScenarioSchemaError("scenario document must be a mapping")
    try:
        mode = Mode.parse(doc.get("mode", "1+1"))
    except ValueError as exc:
        raise ScenarioSchemaError(f"field 'mode': {exc}") from None
    particles_raw = _require(doc, "particles", "")
    if not isinstance(particles_raw, list) or not particles_raw:
        raise ScenarioSchemaError("field 'particles' must be a non-empty list")
    particles = []
    for k, p in enumerate(particles_raw):
        mass = _number(_require(p, "mass", f"particles[{k}]"), f"particles[{k}].mass")
        if mass <= 0:
            raise ScenarioSchemaError(f"field 'particles[{k}].mass' must be positive")
        particles.append(ParticleSpec(mass, _number(p.get("charge", 0.0), f"particles[{k}].charge")))
    n = len(particles)

    factors_raw = _require(doc, "factors", "")
    if not isinstance(factors_raw, dict) or not factors_raw:
        raise ScenarioSchemaError("field 'factors' must be a non-empty mapping")
    factors = {name: _parse_factor(name, spec, mode) for name, spec in factors_raw.items()}

    wf = _require(doc, "wavefunction", "")
    terms_raw = _require(wf, "terms", "wavefunction")
    if not isinstance(terms_raw, list) or not terms_raw:
        raise ScenarioSchemaError("field 'wavefunction.terms' must be a non-empty list")
    terms = []
    for k, t in enumerate(terms_raw):
        w = f"wavefunction.terms[{k}]"
        coef = _complex(t.get("coefficient", 1.0), f"{w}.coefficient")
        names = _require(t, "factors", w)
        if not isinstance(names, list) or len(names) != n:
            raise ScenarioSchemaError(f"field '{w}.factors' must name exactly {n} factors")
        for nm in names:
            if nm not in factors:
                raise ScenarioSchemaError(f"field '{w}.factors' refers to unknown factor {nm!r}")
        terms.append((coef, tuple(names)))
    if all(c == 0 for c, _ in terms):
        raise ScenarioSchemaError("field 'wavefunction.terms': all coefficients are zero (zero wave function)")

    fld = _parse_field(doc.get("field"), mode)

    final_events = final_velocities = None
    if "final" in doc:
        fin = doc["final"]
        final_events = _events(fin, "final", mode, n, "final")
        if len(set(final_events[:, 0])) != 1:
            raise ScenarioSchemaError("field 'final': all final events must share one time")
        vel = fin.get("velocities", "auto")
        if vel != "auto":
            if not isinstance(vel, list) or len(vel) != n:
                raise ScenarioSchemaError(f"field 'final.velocities' must be 'auto' or list {n} 4-velocities")
            final_velocities = np.array([_vector(v, mode.dim, f"final.velocities[{k}]") for k, v in enumerate(vel)])
            for k, u in enumerate(final_velocities):
                if not (u[0] > 0 and u[0] ** 2 - np.dot(u[1:], u[1:]) > 0):
                    raise ScenarioSchemaError(f"field 'final.velocities[{k}]' must be future timelike")
    initial_events = _events(doc["initial"], "initial", mode, n, "initial") if "initial" in doc else None
    if final_events is None and initial_events is None:
        raise ScenarioSchemaError("scenario needs a 'final' or an 'initial' section")

    integ = doc.get("integration", {}) or {}
    integration = Integration(_number(integ.get("ht", 0.01), "integration.ht"),
                              _number(integ.get("t_end", 0.0), "integration.t_end"))
    if integration.ht <= 0:
        raise ScenarioSchemaError("field 'integration.ht' must be positive")
    out = doc.get("output", {}) or {}
    output = Output(int(out.get("stride", 1)), str(out.get("path", "out")))
    if output.stride < 1:
        raise ScenarioSchemaError("field 'output.stride' must be >= 1")

    scenario = Scenario(str(doc.get("name", "scenario")), mode, tuple(particles), factors, tuple(terms), fld,
                        final_events, final_velocities, initial_events, integration, output,
                        dict(doc.get("experiments", {}) or {}), source)
    _check_time_domain(scenario)
    return scenario


def _check_time_domain(s: Scenario):
    for name, f in s.factors.items():
        if f.kind != "grid_packet":
            continue
        for label, ev in (("final", s.final_events), ("initial", s.initial_events)):
            if ev is None:
                continue
            if ev[:, 0].max() > f.t_max or min(ev[:, 0].min(), s.integration.t_end) < 0:
                raise ScenarioSchemaError(
                    f"{label} times {ev[:, 0].tolist()} fall outside grid factor '{name}' window [0, {f.t_max}]"
                )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioParseError(f"{path}: {exc}") from exc
    return parse_scenario(doc, source=str(path))


# ---------------------------------------------------------------------------
# boosts

def boost_scenario(s: Scenario, chi: float) -> Scenario:
    """The same physical situation described in coordinates boosted by rapidity chi."""
    if s.mode is not Mode.D1:
        raise ModeInconsistencyError("boosting is defined for 1+1D scenarios only")
    lam = lorentz_boost(chi, s.mode)
    factors = {k: replace(f, rapidity=f.rapidity + chi) for k, f in s.factors.items()}
    fld = s.field if s.field.kind == "zero" else replace(s.field, rapidity=s.field.rapidity + chi)
    fe = None if s.final_events is None else boost_events(s.final_events, chi, s.mode)
    fv = None if s.final_velocities is None else s.final_velocities @ lam.T
    ie = None if s.initial_events is None else boost_events(s.initial_events, chi, s.mode)
    return replace(s, factors=factors, field=fld, final_events=fe, final_velocities=fv, initial_events=ie,
                   name=f"{s.name}@chi={chi:g}")


# ---------------------------------------------------------------------------
# wave-function assembly

def _boost_modes(modes, mass: float, mode: Mode, chi: float):
    """(amplitude, momentum, spinor) triples after a boost by chi along x."""
    out = []
    lam = lorentz_boost(chi, mode) if chi else None
    s_mat = spinor_boost(chi, mode) if chi else None
    for a, p, spinor in modes:
        if chi:
            p4 = np.concatenate([[np.sqrt(np.dot(p, p) + mass * mass)], p])
            p = (lam @ p4)[1:]
            spinor = s_mat @ spinor
        out.append((a, np.asarray(p, dtype=float), spinor))
    return out


def _plane_modes(f: FactorSpec, mass: float, mode: Mode):
    lam = f.momentum_scale
    if f.kind == "plane_waves":
        raw = [(a, np.asarray(p, dtype=float) * lam, spin) for a, p, spin in f.modes]
    elif lam == 0.0:
        raw = [(1.0, np.zeros(mode.dim - 1), 0)]
    else:
        raw = [(a, p, 0) for a, p in gaussian_packet_modes(f.center, np.asarray(f.momentum) * lam,
                                                            f.width / abs(lam), f.n_modes, f.n_sigma)]
    return [(a, p, positive_energy_spinor(p, mass, mode, spin)) for a, p, spin in raw]


def _make_plane_factor(triples, mass, charge, mode) -> PlaneWaveFactor:
    return PlaneWaveFactor(mode, float(mass), float(charge),
                           np.array([complex(a) for a, _, _ in triples]),
                           np.array([p for _, p, _ in triples], dtype=float).reshape(len(triples), mode.dim - 1),
                           np.array([s for _, _, s in triples], dtype=complex))


def _grid_initial(f: FactorSpec, mass: float, mode: Mode) -> np.ndarray:
    lat = f.lattice
    length = lat.x_max - lat.x_min
    xs = lat.x_min + (length / lat.points) * np.arange(lat.points)
    k = 2 * np.pi * np.fft.fftfreq(lat.points, d=length / lat.points)
    lam = f.momentum_scale
    p0 = f.momentum[0] * lam
    width = f.width / abs(lam) if lam else math.inf
    if lam == 0.0:
        amps = (k == 0).astype(float)
    else:
        amps = np.exp(-(width * (k - p0)) ** 2)
    keep = amps > 1e-16 * amps.max()
    triples = [(a * np.exp(-1j * kk * f.center[0]), np.array([kk]), positive_energy_spinor([kk], mass, mode))
               for a, kk in zip(amps[keep], k[keep])]
    triples = _boost_modes(triples, mass, mode, f.rapidity)
    wave = _make_plane_factor(triples, mass, 0.0, mode)
    values = wave.values(0.0, xs[:, None])
    norm = np.sqrt(np.sum(np.abs(values) ** 2) * length / lat.points)
    return values / norm


class WavefunctionBuilder:
    """Builds factor waves on demand, caching by (factor, mass, charge, field)."""

    def __init__(self):
        self._cache: dict = {}

    def factor(self, s: Scenario, name: str, particle: int, fld: ExternalField | None = None):
        f = s.factors[name]
        p = s.particles[particle]
        fld = s.field if fld is None else fld
        key = (f, p.mass, p.charge, fld if f.kind == "grid_packet" else None)
        if key not in self._cache:
            if f.kind == "grid_packet":
                init = _grid_initial(f, p.mass, s.mode)
                self._cache[key] = grid_evolve(init, f.lattice.x_min, f.lattice.x_max, p.mass, p.charge,
                                               f.dt, f.t_max, fld, f.substeps)
            else:
                triples = _boost_modes(_plane_modes(f, p.mass, s.mode), p.mass, s.mode, f.rapidity)
                self._cache[key] = _make_plane_factor(triples, p.mass, p.charge, s.mode)
        return self._cache[key]

    def wavefunction(self, s: Scenario, fld: ExternalField | None = None, terms=None) -> MultiTimeWavefunction:
        terms = s.terms if terms is None else terms
        built = [(c, [self.factor(s, nm, j, fld) for j, nm in enumerate(names)]) for c, names in terms]
        return MultiTimeWavefunction.build(built, s.mode)


def build_wavefunction(s: Scenario, fld: ExternalField | None = None) -> MultiTimeWavefunction:
    return WavefunctionBuilder().wavefunction(s, fld)


def scale_momenta(s: Scenario, scale: float) -> Scenario:
    """Multiply every momentum in every factor by ``scale``."""
    factors = {k: replace(f, momentum_scale=f.momentum_scale * scale) for k, f in s.factors.items()}
    return replace(s, factors=factors, name=f"{s.name}@lambda={scale:g}")


def restrict_to_particle(s: Scenario, i: int) -> Scenario:
    """Single-particle scenario for particle ``i`` of a product-state scenario.

    Only defined for a single product term, where the factor of particle ``i``
    is that particle's own wave function.
    """
    if len(s.terms) != 1:
        raise ScenarioSchemaError(f"scenario {s.name!r} is not a single product term")
    coef, names = s.terms[0]
    name = names[i]
    pick = (lambda ev: None if ev is None else np.asarray(ev)[i:i + 1].copy())
    return replace(s, name=f"{s.name}[{i + 1}]", particles=(s.particles[i],), factors={name: s.factors[name]},
                   terms=((coef, (name,)),), final_events=pick(s.final_events),
                   final_velocities=pick(s.final_velocities), initial_events=pick(s.initial_events))


def scenario_summary(s: Scenario) -> dict:
    """Plain-data description of the scenario for the summary document."""
    def fnum(x):
        return float(x)

    return {
        "name": s.name,
        "source": s.source,
        "mode": s.mode.value,
        "particles": [{"mass": p.mass, "charge": p.charge} for p in s.particles],
        "terms": [{"coefficient": [c.real, c.imag], "factors": list(names)} for c, names in s.terms],
        "field": {"type": s.field.kind, "amplitude": s.field.amplitude, "center": list(s.field.center),
                  "widths": list(s.field.widths), "rapidity": s.field.rapidity},
        "factor_rapidities": {k: fnum(f.rapidity) for k, f in sorted(s.factors.items())},
        "integration": {"ht": s.integration.ht, "t_end": s.integration.t_end},
        "final_events": None if s.final_events is None else np.asarray(s.final_events).tolist(),
        "final_velocities": None if s.final_velocities is None else np.asarray(s.final_velocities).tolist(),
    }
