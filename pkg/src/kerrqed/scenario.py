"""Scenario configs, the two engines, and artifact writing.

A config is a JSON object with ``"schema": "kerrqed.scenario/1"``.  Unknown
keys are rejected.  Times are in units of 1/lambda1 and every frequency in
units of lambda1.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis, hilbert, model, oracle, propagator
from .errors import (ConfigError, InvalidInputError, ResourceCapError,
                     SingularParametersError)

SCHEMA = "kerrqed.scenario/1"
OBSERVABLES = ("inversion", "linear_entropy", "concurrence")
DETECTORS = ("revival", "sudden_death")
ENGINES = ("analytic", "oracle")
CSV_HEADER = "t_lambda1,value\n"
DEFAULT_COHERENT_DIM = 41
DEFAULT_MEMORY_CAP_MB = 2048.0


@dataclass(frozen=True)
class InitialState:
    kind: str
    alpha1: float = 0.0
    alpha2: float = 0.0
    phi: float = 0.0
    atom: str = "e"
    m1: int = 0
    m2: int = 0
    gamma: float = 1.0


@dataclass(frozen=True)
class ScenarioConfig:
    params: dict
    chi_over_lambda1: float
    initial_state: InitialState
    t_max: float
    n_points: int
    observables: tuple
    delta_override: Optional[float] = None
    frame: str = "transformed"
    engine: str = "analytic"
    detectors: tuple = ()
    truncation: Optional[tuple] = None
    seed: int = 0
    frame_map: str = "exact"
    omega_form: str = "linear"
    memory_cap_mb: float = DEFAULT_MEMORY_CAP_MB
    t_short: float = 10.0
    esd_eps: float = 1e-4
    esd_dwell: float = 5.0
    revival_window: Optional[float] = None
    label: str = ""

    @property
    def times(self):
        return np.linspace(0.0, self.t_max, self.n_points)

    @property
    def engines(self):
        return ENGINES if self.engine == "both" else (self.engine,)

    def to_dict(self):
        out = asdict(self)
        out["schema"] = SCHEMA
        out["initial_state"] = _state_to_dict(self.initial_state)
        out["grid"] = {"t_max": out.pop("t_max"), "n_points": out.pop("n_points")}
        out["observables"] = list(self.observables)
        out["detectors"] = list(self.detectors)
        out["truncation"] = None if self.truncation is None else list(self.truncation)
        return out


_STATE_KEYS = {
    "coherent": {"kind", "alpha1", "alpha2", "phi", "atom"},
    "fock": {"kind", "m1", "m2", "atom"},
    "mixed_01": {"kind", "gamma"},
}
_PARAM_KEYS = {"omega1", "omega2", "omega0", "lambda1", "lambda2", "lam"}
_TOP_KEYS = {
    "schema", "params", "delta_override", "chi_over_lambda1", "initial_state", "frame",
    "engine", "grid", "observables", "detectors", "truncation", "seed", "frame_map",
    "omega_form", "memory_cap_mb", "t_short", "esd_eps", "esd_dwell", "revival_window", "label",
}


def _state_to_dict(s: InitialState):
    return {k: getattr(s, k) for k in sorted(_STATE_KEYS[s.kind])}


def _reject_unknown(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object", where)
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) {extra} in {where}", f"{where}.{extra[0]}")


def _number(obj, key, where, default=None, required=False, integer=False):
    if key not in obj or obj[key] is None:
        if required:
            raise ConfigError(f"missing required key {key!r}", f"{where}.{key}")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{key!r} must be a number", f"{where}.{key}")
    if integer:
        if int(val) != val:
            raise ConfigError(f"{key!r} must be an integer", f"{where}.{key}")
        return int(val)
    if not math.isfinite(val):
        raise ConfigError(f"{key!r} must be finite", f"{where}.{key}")
    return float(val)


def _choice(obj, key, options, default):
    val = obj.get(key, default)
    if val not in options:
        raise ConfigError(f"{key!r} must be one of {list(options)}, got {val!r}", key)
    return val


def _parse_state(obj) -> InitialState:
    if not isinstance(obj, dict) or obj.get("kind") not in _STATE_KEYS:
        raise ConfigError(f"initial_state.kind must be one of {sorted(_STATE_KEYS)}", "initial_state.kind")
    kind = obj["kind"]
    _reject_unknown(obj, _STATE_KEYS[kind], "initial_state")
    if kind == "mixed_01":
        gamma = _number(obj, "gamma", "initial_state", required=True)
        if not 0.0 <= gamma <= 1.0:
            raise ConfigError("gamma must lie in [0, 1]", "initial_state.gamma")
        return InitialState(kind, gamma=gamma)
    atom = obj.get("atom", "e")
    if atom not in ("e", "g", "plus"):
        raise ConfigError("atom must be 'e', 'g' or 'plus'", "initial_state.atom")
    if kind == "fock":
        m1 = _number(obj, "m1", "initial_state", required=True, integer=True)
        m2 = _number(obj, "m2", "initial_state", required=True, integer=True)
        if m1 < 0 or m2 < 0:
            raise ConfigError("Fock numbers must be non-negative", "initial_state.m1")
        return InitialState(kind, m1=m1, m2=m2, atom=atom)
    a1 = _number(obj, "alpha1", "initial_state", required=True)
    a2 = _number(obj, "alpha2", "initial_state", required=True)
    if a1 < 0 or a2 < 0:
        raise ConfigError("coherent magnitudes must be non-negative", "initial_state.alpha1")
    return InitialState(kind, alpha1=a1, alpha2=a2, phi=_number(obj, "phi", "initial_state", 0.0), atom=atom)


def parse_config(obj: dict) -> ScenarioConfig:
    """Validate a config mapping; raises ConfigError naming the offending field."""
    _reject_unknown(obj, _TOP_KEYS, "config")
    if obj.get("schema") != SCHEMA:
        raise ConfigError(f"schema must be {SCHEMA!r}", "schema")
    params = obj.get("params")
    _reject_unknown(params, _PARAM_KEYS, "params")
    clean = {}
    for key in sorted(_PARAM_KEYS):
        val = _number(params, key, "params")
        if val is not None:
            clean[key] = val
    if clean.get("lambda1", 1.0) != 1.0:
        raise ConfigError("lambda1 is the unit of frequency and must be 1", "params.lambda1")
    if clean.get("lambda2", 0.0) < 0.0:
        raise ConfigError("lambda2 must be non-negative", "params.lambda2")
    delta = _number(obj, "delta_override", "config")
    if delta is None and "omega0" not in clean:
        raise ConfigError("give either delta_override or params.omega0", "delta_override")
    grid = obj.get("grid")
    _reject_unknown(grid, {"t_max", "n_points"}, "grid")
    t_max = _number(grid, "t_max", "grid", required=True)
    n_points = _number(grid, "n_points", "grid", required=True, integer=True)
    if t_max <= 0.0:
        raise ConfigError("t_max must be positive", "grid.t_max")
    if n_points < 2:
        raise ConfigError("n_points must be at least 2", "grid.n_points")
    observables = obj.get("observables")
    if not isinstance(observables, list) or not observables:
        raise ConfigError("observables must be a non-empty list", "observables")
    for o in observables:
        if o not in OBSERVABLES:
            raise ConfigError(f"unknown observable {o!r}", "observables")
    detectors = obj.get("detectors", [])
    if not isinstance(detectors, list):
        raise ConfigError("detectors must be a list", "detectors")
    for d in detectors:
        if d not in DETECTORS:
            raise ConfigError(f"unknown detector {d!r}", "detectors")
    truncation = obj.get("truncation")
    if truncation is not None:
        if (not isinstance(truncation, list) or len(truncation) != 2
                or not all(isinstance(n, int) and not isinstance(n, bool) and n >= 2 for n in truncation)):
            raise ConfigError("truncation must be [n1_dim, n2_dim] with entries >= 2", "truncation")
        truncation = tuple(truncation)
    seed = _number(obj, "seed", "config", 0, integer=True)
    state = _parse_state(obj.get("initial_state"))
    cfg = ScenarioConfig(
        params=clean,
        chi_over_lambda1=_number(obj, "chi_over_lambda1", "config", required=True),
        initial_state=state,
        t_max=t_max,
        n_points=n_points,
        observables=tuple(dict.fromkeys(observables)),
        delta_override=delta,
        frame=_choice(obj, "frame", ("original", "transformed"), "transformed"),
        engine=_choice(obj, "engine", ("analytic", "oracle", "both"), "analytic"),
        detectors=tuple(dict.fromkeys(detectors)),
        truncation=truncation,
        seed=seed,
        frame_map=_choice(obj, "frame_map", ("exact", "leading_order"), "exact"),
        omega_form=_choice(obj, "omega_form", ("linear", "sqrt"), "linear"),
        memory_cap_mb=_number(obj, "memory_cap_mb", "config", DEFAULT_MEMORY_CAP_MB),
        t_short=_number(obj, "t_short", "config", 10.0),
        esd_eps=_number(obj, "esd_eps", "config", 1e-4),
        esd_dwell=_number(obj, "esd_dwell", "config", 5.0),
        revival_window=_number(obj, "revival_window", "config"),
        label=str(obj.get("label", "")),
    )
    _check_consistency(cfg)
    return cfg


def _check_consistency(cfg: ScenarioConfig):
    s = cfg.initial_state
    if "concurrence" in cfg.observables:
        ok = s.kind == "mixed_01" or (s.kind == "fock" and (s.m1, s.m2) == (0, 1) and s.atom in ("e", "g"))
        if not ok:
            raise ConfigError("concurrence needs a mixed_01 or fock(0, 1, e|g) initial state", "observables")
        if cfg.frame != "transformed":
            raise ConfigError("concurrence is defined on rotated-mode Fock labels; use frame 'transformed'",
                              "frame")
    if "sudden_death" in cfg.detectors and "concurrence" not in cfg.observables:
        raise ConfigError("sudden_death detector needs the concurrence observable", "detectors")
    if "revival" in cfg.detectors and "inversion" not in cfg.observables:
        raise ConfigError("revival detector needs the inversion observable", "detectors")
    if cfg.esd_eps <= 0.0 or cfg.esd_dwell < 0.0:
        raise ConfigError("esd_eps must be positive and esd_dwell non-negative", "esd_eps")
    if cfg.memory_cap_mb <= 0.0:
        raise ConfigError("memory_cap_mb must be positive", "memory_cap_mb")


def load_config(path) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}", "file") from exc
    return parse_config(obj)


def with_overrides(cfg: ScenarioConfig, truncation=None, t_max=None, points=None) -> ScenarioConfig:
    changes = {}
    if truncation is not None:
        if len(truncation) != 2 or min(truncation) < 2:
            raise ConfigError("truncation override needs two dimensions >= 2", "truncation")
        changes["truncation"] = tuple(int(n) for n in truncation)
    if t_max is not None:
        if t_max <= 0:
            raise ConfigError("t_max must be positive", "grid.t_max")
        changes["t_max"] = float(t_max)
    if points is not None:
        if points < 2:
            raise ConfigError("n_points must be at least 2", "grid.n_points")
        changes["n_points"] = int(points)
    return replace(cfg, **changes)


# ---------------------------------------------------------------- model setup

@dataclass(frozen=True)
class ResolvedModel:
    raw: model.RawParams
    params: model.TransformedParams
    theta: float
    map_angle: float


def resolve_model(cfg: ScenarioConfig) -> ResolvedModel:
    pr = cfg.params
    base = dict(omega1=pr.get("omega1", 0.0), omega2=pr.get("omega2", 0.0),
                omega0=pr.get("omega0", 0.0), lambda1=1.0, lambda2=pr.get("lambda2", 0.0))
    try:
        raw = model.RawParams.codirectional(chi=cfg.chi_over_lambda1, **base)
        lam = pr.get("lam")
        raw = raw.with_balanced_lambda() if lam is None else replace(raw, lam=lam)
        theta = model.mixing_angle(raw, model.DECOUPLE_MODE1)
        tp = model.transform_params(raw, theta, delta=cfg.delta_override,
                                    sqrt_form=cfg.omega_form == "sqrt")
    except (InvalidInputError, SingularParametersError) as exc:
        raise ConfigError(str(exc), "params") from exc
    # the laboratory Hamiltonian must see the same atomic frequency
    raw = replace(raw, omega0=tp.omega0)
    map_angle = theta if cfg.frame_map == "exact" else model.leading_order_angle(raw)
    return ResolvedModel(raw, tp, theta, map_angle)


def _atom_components(cfg):
    s = cfg.initial_state
    if s.kind == "mixed_01":
        comps = [(s.gamma, "e"), (1.0 - s.gamma, "g")]
        return [(w, a) for w, a in comps if w > 0.0]
    return [(1.0, s.atom)]


def _mean_photons(cfg, angle):
    """(n1, n2) mean photon numbers in the config frame and, rotated by ``angle``, the other."""
    s = cfg.initial_state
    if s.kind == "coherent":
        ph = np.exp(1j * s.phi)
        b1, b2 = model.coherent_frame_change(s.alpha1 * ph, s.alpha2 * ph, angle)
        return (s.alpha1 ** 2, s.alpha2 ** 2), (abs(b1) ** 2, abs(b2) ** 2)
    m1, m2 = (0, 1) if s.kind == "mixed_01" else (s.m1, s.m2)
    return (m1, m2), (m1, m2)


def default_truncation(cfg: ScenarioConfig, resolved: ResolvedModel):
    if cfg.truncation is not None:
        return cfg.truncation
    s = cfg.initial_state
    if s.kind == "coherent":
        here, there = _mean_photons(cfg, resolved.map_angle)
        # the analytic engine rotates original-frame input, so both frames must fit
        n_bar = max(here) if cfg.frame == "transformed" else max(max(here), max(there))
        n = max(DEFAULT_COHERENT_DIM, hilbert.default_n_max(n_bar) + 1)
        return (n, n)
    m1, m2 = (0, 1) if s.kind == "mixed_01" else (s.m1, s.m2)
    # every mode must hold the full excitation number m1 + m2 + 1
    n = m1 + m2 + 2
    return (n, n)


@dataclass
class PreparedState:
    weights: list
    states: list            # PureState per ensemble component
    truncated_mass: list = field(default_factory=list)


def _frame_states(cfg, dims, frame_angle):
    """Ensemble in the config frame, then optionally rotated by ``frame_angle``."""
    s = cfg.initial_state
    _, n1, n2 = dims
    weights, states, masses = [], [], []
    for w, atom in _atom_components(cfg):
        vec = hilbert.atom_vector(atom)
        if s.kind == "coherent":
            ph = np.exp(1j * s.phi)
            a1, a2 = s.alpha1 * ph, s.alpha2 * ph
            if frame_angle is not None:
                a1, a2 = model.coherent_frame_change(a1, a2, frame_angle)
            c1 = hilbert.coherent_amplitudes(a1, n1 - 1)
            c2 = hilbert.coherent_amplitudes(a2, n2 - 1)
            st = hilbert.tensor_state(vec, c1.amplitudes, c2.amplitudes)
            masses.append([c1.truncated_mass, c2.truncated_mass])
        else:
            m1, m2 = (0, 1) if s.kind == "mixed_01" else (s.m1, s.m2)
            st = hilbert.fock_state(vec, m1, m2, dims)
            if frame_angle is not None:
                st = model.fock_frame_change(st, frame_angle, model.A_TO_B)
            masses.append([0.0, 0.0])
        weights.append(w)
        states.append(st)
    return PreparedState(weights, states, masses)


def prepare_state(cfg: ScenarioConfig, resolved: ResolvedModel, engine: str, dims) -> PreparedState:
    """Initial ensemble in the basis the engine propagates in."""
    rotate = engine == "analytic" and cfg.frame == "original"
    return _frame_states(cfg, dims, resolved.map_angle if rotate else None)


# ---------------------------------------------------------------- engines

@dataclass
class EngineResult:
    engine: str
    series: dict                      # observable -> TimeSeries
    diagnostics: dict


def _observables_from_atom(cfg, times, pe, coh):
    out = {}
    if "inversion" in cfg.observables:
        out["inversion"] = analysis.TimeSeries(times, 2.0 * pe - 1.0, "inversion")
    if "linear_entropy" in cfg.observables:
        out["linear_entropy"] = analysis.TimeSeries(
            times, analysis.linear_entropy_from_atom_series(pe, coh), "linear_entropy")
    return out


def _concurrence_series(times, blocks):
    vals = np.array([analysis.concurrence_x(b) for b in blocks])
    return analysis.TimeSeries(times, vals, "concurrence")


def run_analytic(cfg: ScenarioConfig, resolved: ResolvedModel) -> EngineResult:
    times = cfg.times
    dims = (2,) + tuple(default_truncation(cfg, resolved))
    prep = prepare_state(cfg, resolved, "analytic", dims)
    tp = resolved.params
    pe = np.zeros(times.size)
    coh = np.zeros(times.size, dtype=np.complex128)
    for w, st in zip(prep.weights, prep.states):
        p_k, c_k = propagator.atom_series(st, times, tp)
        pe += w * p_k
        coh += w * c_k
    series = _observables_from_atom(cfg, times, pe, coh)
    if "concurrence" in cfg.observables:
        blocks = np.zeros((times.size, 4, 4), dtype=np.complex128)
        for w, st in zip(prep.weights, prep.states):
            for i, t in enumerate(times):
                blocks[i] += w * analysis.x_block(propagator.evolve_pure(st, t, tp).amps, st.dims)
        series["concurrence"] = _concurrence_series(times, blocks)
    diag = {"dims": list(dims), "picture": "interaction", "frame_map": cfg.frame_map,
            "map_angle": resolved.map_angle if cfg.frame == "original" else None,
            "truncated_mass": prep.truncated_mass}
    return EngineResult("analytic", series, diag)


def check_memory(cfg: ScenarioConfig, dims):
    est = oracle.memory_estimate_mb(dims[1], dims[2], cfg.n_points)
    if est <= cfg.memory_cap_mb:
        return est
    n = max(dims[1], dims[2])
    while n > 2 and oracle.memory_estimate_mb(n, n, cfg.n_points) > cfg.memory_cap_mb:
        n -= 1
    raise ResourceCapError(
        f"oracle needs about {est:.0f} MB at truncation {dims[1:]} (cap {cfg.memory_cap_mb:.0f} MB); "
        f"try --truncation {n} {n}", estimate_mb=est, suggested_truncation=(n, n))


def run_oracle(cfg: ScenarioConfig, resolved: ResolvedModel) -> EngineResult:
    times = cfg.times
    trunc = default_truncation(cfg, resolved)
    dims = (2,) + tuple(trunc)
    est = check_memory(cfg, dims)
    if cfg.frame == "original":
        H = oracle.build_original(resolved.raw, *trunc)
    else:
        H = oracle.build_transformed(resolved.params, *trunc)
    dec = oracle.spectral(H)
    prep = prepare_state(cfg, resolved, "oracle", dims)
    pe = np.zeros(times.size)
    coh = np.zeros(times.size, dtype=np.complex128)
    blocks = np.zeros((times.size, 4, 4), dtype=np.complex128)
    want_x = "concurrence" in cfg.observables
    drift = 0.0
    half = dims[1] * dims[2]
    for w, st in zip(prep.weights, prep.states):
        for sl, amps in oracle.propagate_chunks(dec, st, times):
            e, g = amps[:, :half], amps[:, half:]
            pe[sl] += w * np.sum(np.abs(e) ** 2, axis=1)
            coh[sl] += w * np.sum(e * g.conj(), axis=1)
            drift = max(drift, float(np.max(np.abs(np.linalg.norm(amps, axis=1) - 1.0))))
            if want_x:
                idx = analysis.x_block_indices(dims, 0, 1)
                sub = amps[:, idx]
                blocks[sl] += w * np.einsum("ti,tj->tij", sub, sub.conj())
    series = _observables_from_atom(cfg, times, pe, coh)
    if want_x:
        series["concurrence"] = _concurrence_series(times, blocks)
    diag = {"dims": list(dims), "frame": H.frame, "picture": "schrodinger",
            "n_blocks": len(dec.blocks), "norm_drift": drift, "memory_estimate_mb": est,
            "truncated_mass": prep.truncated_mass}
    return EngineResult("oracle", series, diag)


def run_engine(cfg, resolved, engine) -> EngineResult:
    if engine == "analytic":
        return run_analytic(cfg, resolved)
    if engine == "oracle":
        return run_oracle(cfg, resolved)
    raise InvalidInputError(f"unknown engine {engine!r}")


# ---------------------------------------------------------------- reports

def discrepancy(a: analysis.TimeSeries, b: analysis.TimeSeries, t_short: float) -> dict:
    if not np.array_equal(a.times, b.times):
        raise InvalidInputError("series must share a time grid")
    diff = np.abs(a.values - b.values)
    short = diff[a.times <= t_short]
    return {
        "max_abs": float(diff.max()),
        "rms": float(np.sqrt(np.mean(diff ** 2))),
        "max_abs_short": float(short.max()) if short.size else None,
        "t_short": t_short,
    }


def compare_results(ref: EngineResult, cand: EngineResult, t_short: float) -> dict:
    return {name: discrepancy(ref.series[name], cand.series[name], t_short)
            for name in ref.series if name in cand.series}


def _coupled_mode_photons(cfg, resolved):
    """Mean photon numbers (b1, b2) of the rotated modes."""
    here, there = _mean_photons(cfg, resolved.theta)
    return here if cfg.frame == "transformed" else there


def formula_values(cfg: ScenarioConfig, resolved: ResolvedModel) -> dict:
    tp = resolved.params
    n_b1, n_b2 = _coupled_mode_photons(cfg, resolved)
    out = {"n_bar_rotated": [float(n_b1), float(n_b2)]}
    try:
        out["revival_time"] = analysis.revival_time_formula(tp, n_b2, 1) if n_b2 > 0 else None
    except SingularParametersError:
        out["revival_time"] = None
    out["sudden_death_time"] = analysis.sudden_death_formula(tp, resolved.raw.lambda2)
    try:
        out["cnot_kerr"] = analysis.cnot_kerr(tp)
    except InvalidInputError:
        out["cnot_kerr"] = None
    return out


def run_detectors(cfg: ScenarioConfig, resolved: ResolvedModel, result: EngineResult, formulas) -> dict:
    out = {}
    tp = resolved.params
    if "revival" in cfg.detectors:
        n_b1, n_b2 = _coupled_mode_photons(cfg, resolved)
        window = cfg.revival_window or analysis.default_revival_window(tp, n_b2, n_b1)
        try:
            rep = analysis.detect_revivals(result.series["inversion"], window, formulas.get("revival_time"))
            out["revival"] = {
                "window": window,
                "collapse_time": rep.collapse_time,
                "collapsed_fraction": rep.collapsed_fraction,
                "detected_times": [float(t) for t in rep.detected_times],
                "formula_time": rep.formula_time,
            }
        except InvalidInputError as exc:
            out["revival"] = {"window": window, "error": str(exc)}
    if "sudden_death" in cfg.detectors:
        conc = result.series["concurrence"]
        out["sudden_death"] = {
            "eps": cfg.esd_eps,
            "dwell": cfg.esd_dwell,
            "detected_time": analysis.detect_sudden_death(conc, cfg.esd_eps, cfg.esd_dwell),
            "formula_time": formulas.get("sudden_death_time"),
        }
    return out


@dataclass
class ScenarioOutcome:
    config: ScenarioConfig
    results: dict                    # engine -> EngineResult
    report: dict


def simulate(cfg: ScenarioConfig, engines=None) -> ScenarioOutcome:
    """Run the requested engines in memory and assemble the report."""
    resolved = resolve_model(cfg)
    engines = tuple(engines or cfg.engines)
    results = {}
    for eng in dict.fromkeys(engines):
        results[eng] = run_engine(cfg, resolved, eng)
    formulas = formula_values(cfg, resolved)
    report = {
        "schema": SCHEMA,
        "label": cfg.label,
        "config": cfg.to_dict(),
        "raw_params": asdict(resolved.raw),
        "transformed_params": asdict(resolved.params),
        "formulas": formulas,
        "engines": {},
    }
    for eng, res in results.items():
        report["engines"][eng] = {
            "diagnostics": res.diagnostics,
            "detectors": run_detectors(cfg, resolved, res, formulas),
        }
    if "analytic" in results and "oracle" in results:
        report["discrepancy"] = compare_results(results["oracle"], results["analytic"], cfg.t_short)
    return ScenarioOutcome(cfg, results, report)


def compare(cfg: ScenarioConfig, reference: str = "oracle", candidate: str = "analytic") -> dict:
    """Per-observable discrepancy between two engines on the config's grid."""
    outcome = simulate(cfg, engines=(reference, candidate))
    res = outcome.results
    return {
        "schema": SCHEMA,
        "label": cfg.label,
        "reference": reference,
        "candidate": candidate,
        "observables": compare_results(res[reference], res[candidate], cfg.t_short),
    }


# ---------------------------------------------------------------- output

def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_csv(series: analysis.TimeSeries) -> str:
    lines = [CSV_HEADER]
    lines.extend(f"{t:.17g},{v:.17g}\n" for t, v in zip(series.times, series.values))
    return "".join(lines)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default, allow_nan=False) + "\n"


def write_outcome(outcome: ScenarioOutcome, out_dir) -> list:
    """One CSV per observable per engine plus ``report.json``; returns written paths."""
    out_dir = Path(out_dir)
    written = []
    for eng, res in outcome.results.items():
        for name, series in res.series.items():
            path = out_dir / f"{name}_{eng}.csv"
            _atomic_write(path, format_csv(series))
            written.append(path)
    path = out_dir / "report.json"
    _atomic_write(path, dumps(outcome.report))
    written.append(path)
    return written


def run_scenario(cfg: ScenarioConfig, out_dir) -> ScenarioOutcome:
    outcome = simulate(cfg)
    write_outcome(outcome, out_dir)
    return outcome


def write_comparison(report: dict, out_dir) -> Path:
    path = Path(out_dir) / "comparison.json"
    _atomic_write(path, dumps(report))
    return path
