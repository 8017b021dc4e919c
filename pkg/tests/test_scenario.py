import copy
import json

import numpy as np
import pytest

from kerrqed import presets, scenario
from kerrqed.errors import ConfigError, ResourceCapError

BASE = {
    "schema": scenario.SCHEMA,
    "params": {"omega1": 0.2, "omega2": 0.1, "lambda1": 1.0, "lambda2": 0.1, "lam": None},
    "delta_override": 0.0,
    "chi_over_lambda1": 0.01,
    "initial_state": {"kind": "fock", "m1": 1, "m2": 2, "atom": "e"},
    "frame": "transformed",
    "engine": "analytic",
    "grid": {"t_max": 10.0, "n_points": 101},
    "observables": ["inversion", "linear_entropy"],
}


def make(**changes):
    cfg = copy.deepcopy(BASE)
    for key, val in changes.items():
        if val is None:
            cfg.pop(key, None)
        else:
            cfg[key] = val
    return cfg


def test_base_config_parses():
    cfg = scenario.parse_config(make())
    assert cfg.n_points == 101 and cfg.engines == ("analytic",)
    assert cfg.initial_state.m2 == 2


@pytest.mark.parametrize("changes,field", [
    ({"observables": []}, "observables"),
    ({"observables": ["purity"]}, "observables"),
    ({"schema": "kerrqed.scenario/0"}, "schema"),
    ({"colour": "blue"}, "config.colour"),
    ({"grid": {"t_max": 0.0, "n_points": 10}}, "grid.t_max"),
    ({"grid": {"t_max": 1.0, "n_points": 1}}, "grid.n_points"),
    ({"grid": {"t_max": 1.0, "n_points": 10, "dt": 0.1}}, "grid.dt"),
    ({"initial_state": {"kind": "mixed_01", "gamma": 1.5}}, "initial_state.gamma"),
    ({"initial_state": {"kind": "squeezed"}}, "initial_state.kind"),
    ({"initial_state": {"kind": "fock", "m1": 0, "m2": 1, "atom": "e", "alpha1": 2}}, "initial_state.alpha1"),
    ({"params": {"omega1": 0.2, "omega2": 0.1, "lambda1": 2.0}}, "params.lambda1"),
    ({"params": {"omega1": 0.2, "omega2": 0.1, "gamma": 1.0}}, "params.gamma"),
    ({"frame": "lab"}, "frame"),
    ({"truncation": [1, 5]}, "truncation"),
    ({"delta_override": None}, "delta_override"),
    ({"chi_over_lambda1": "big"}, "config.chi_over_lambda1"),
])
def test_invalid_configs(changes, field):
    with pytest.raises(ConfigError) as info:
        scenario.parse_config(make(**changes))
    assert info.value.field == field


def test_concurrence_needs_suitable_state():
    with pytest.raises(ConfigError):
        scenario.parse_config(make(observables=["concurrence"]))
    ok = make(observables=["concurrence"], initial_state={"kind": "fock", "m1": 0, "m2": 1, "atom": "g"})
    scenario.parse_config(ok)
    with pytest.raises(ConfigError):
        scenario.parse_config(dict(ok, frame="original"))


def test_detectors_need_observables():
    with pytest.raises(ConfigError):
        scenario.parse_config(make(detectors=["sudden_death"]))
    with pytest.raises(ConfigError):
        scenario.parse_config(make(observables=["linear_entropy"], detectors=["revival"]))


def test_balanced_lambda_and_delta_override():
    res = scenario.resolve_model(scenario.parse_config(make()))
    assert res.raw.lam == pytest.approx(1 / 99)
    assert abs(res.params.mu1) < 1e-12
    assert res.params.Delta == 0.0
    assert res.raw.omega0 == pytest.approx(res.params.Omega2)


def test_default_truncations():
    cfg = scenario.parse_config(make())
    assert scenario.default_truncation(cfg, scenario.resolve_model(cfg)) == (5, 5)
    coh = scenario.parse_config(make(initial_state={"kind": "coherent", "alpha1": 10 ** 0.5,
                                                    "alpha2": 10 ** 0.5, "atom": "e"}))
    assert scenario.default_truncation(coh, scenario.resolve_model(coh)) == (41, 41)
    assert scenario.default_truncation(scenario.with_overrides(coh, truncation=(12, 13)), None) == (12, 13)


def test_csv_format_and_row_count(tmp_path):
    cfg = scenario.parse_config(make())
    scenario.run_scenario(cfg, tmp_path)
    raw = (tmp_path / "inversion_analytic.csv").read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "t_lambda1,value"
    assert len(lines) - 1 == cfg.n_points
    t, v = lines[1].split(",")
    assert float(t) == 0.0 and float(v) == pytest.approx(1.0)
    data = np.loadtxt(tmp_path / "inversion_analytic.csv", delimiter=",", skiprows=1)
    for row_text, row in zip(lines[1:], data):
        assert np.float64(row_text.split(",")[1]) == row[1]
    assert not list(tmp_path.glob(".*tmp"))


def test_report_contents(tmp_path):
    cfg = scenario.parse_config(make(observables=["concurrence", "inversion"], detectors=["sudden_death"],
                                     initial_state={"kind": "mixed_01", "gamma": 0.5}))
    scenario.run_scenario(cfg, tmp_path)
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["schema"] == scenario.SCHEMA
    assert rep["formulas"]["sudden_death_time"] == pytest.approx(78.545, abs=0.01)
    assert rep["formulas"]["cnot_kerr"] == pytest.approx(0.5 * (4 - 1.01) ** 0.5)
    assert rep["engines"]["analytic"]["detectors"]["sudden_death"]["eps"] == 1e-4
    assert rep["config"]["grid"] == {"t_max": 10.0, "n_points": 101}
    assert rep["engines"]["analytic"]["diagnostics"]["dims"] == [2, 3, 3]
    assert sorted(p.name for p in tmp_path.iterdir()) == ["concurrence_analytic.csv", "inversion_analytic.csv",
                                                          "report.json"]


def test_deterministic_outputs(tmp_path):
    cfg = scenario.parse_config(make(engine="both"))
    scenario.run_scenario(cfg, tmp_path / "a")
    scenario.run_scenario(cfg, tmp_path / "b")
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_compare_transformed_fock_is_exact():
    for state in ({"kind": "fock", "m1": 1, "m2": 2, "atom": "e"},
                  {"kind": "mixed_01", "gamma": 0.3}):
        obs = ["inversion", "linear_entropy"] + (["concurrence"] if state["kind"] == "mixed_01" else [])
        cfg = scenario.parse_config(make(initial_state=state, observables=obs,
                                         grid={"t_max": 50.0, "n_points": 501}))
        rep = scenario.compare(cfg)
        for name, d in rep["observables"].items():
            assert d["max_abs"] < 1e-8, name


def test_compare_same_engine_is_zero():
    cfg = scenario.parse_config(make())
    rep = scenario.compare(cfg, reference="analytic", candidate="analytic")
    assert all(d["max_abs"] == 0.0 and d["rms"] == 0.0 for d in rep["observables"].values())


def test_compare_short_window():
    cfg = scenario.parse_config(make(frame="original", frame_map="leading_order", t_short=3.0,
                                     params={"omega1": 0.2, "omega2": 0.1, "lambda2": 0.1}))
    rep = scenario.compare(cfg)["observables"]["inversion"]
    assert rep["t_short"] == 3.0
    assert 0.0 < rep["max_abs_short"] <= rep["max_abs"]


def test_original_frame_exact_map_matches_oracle():
    cfg = scenario.parse_config(make(frame="original", frame_map="exact",
                                     grid={"t_max": 20.0, "n_points": 201}))
    rep = scenario.compare(cfg)
    assert rep["observables"]["inversion"]["max_abs"] < 1e-8


def test_original_frame_coherent_state_matches_oracle():
    cfg = scenario.parse_config(make(frame="original", truncation=[14, 14],
                                     initial_state={"kind": "coherent", "alpha1": 0.8, "alpha2": 0.5,
                                                    "phi": 0.3, "atom": "plus"},
                                     grid={"t_max": 15.0, "n_points": 151}))
    rep = scenario.compare(cfg)
    assert rep["observables"]["inversion"]["max_abs"] < 1e-6
    assert rep["observables"]["linear_entropy"]["max_abs"] < 1e-6


def test_memory_cap_refusal():
    cfg = scenario.parse_config(make(engine="oracle", memory_cap_mb=1.0, truncation=[30, 30]))
    with pytest.raises(ResourceCapError) as info:
        scenario.simulate(cfg)
    n1, n2 = info.value.suggested_truncation
    assert n1 < 30 and info.value.estimate_mb > 1.0
    from kerrqed import oracle
    assert oracle.memory_estimate_mb(n1, n2, cfg.n_points) <= 1.0


def test_overrides():
    cfg = scenario.with_overrides(scenario.parse_config(make()), t_max=5.0, points=11)
    assert cfg.times[-1] == 5.0 and cfg.times.size == 11
    with pytest.raises(ConfigError):
        scenario.with_overrides(cfg, points=1)


def test_revival_detector_in_report():
    cfg = scenario.parse_config(make(
        params={"omega1": 0.0, "omega2": 0.0, "lambda2": 0.0},
        chi_over_lambda1=0.0,
        initial_state={"kind": "coherent", "alpha1": 0.0, "alpha2": 10 ** 0.5, "atom": "e"},
        observables=["inversion"], detectors=["revival"], grid={"t_max": 60.0, "n_points": 3001}))
    rep = scenario.simulate(cfg).report
    rev = rep["engines"]["analytic"]["detectors"]["revival"]
    assert rep["formulas"]["revival_time"] == pytest.approx(20.354, abs=1e-3)
    assert abs(rev["detected_times"][0] - 19.87) / 19.87 < 0.15


@pytest.mark.parametrize("number", [1, 2, 3, 4])
def test_presets_validate(number):
    cfgs = presets.figure_configs(number)
    assert cfgs
    for name, cfg in cfgs:
        assert cfg.label.startswith(f"figure{number}")


def test_preset_parameters():
    (_, a), (_, b) = presets.figure_configs(1)
    assert (a.chi_over_lambda1, b.chi_over_lambda1) == (0.001, 0.1)
    assert a.params["lambda2"] == 0.01 and a.params["omega1"] == 0.2 and a.initial_state.alpha1 ** 2 == \
        pytest.approx(10)
    (_, f2), = presets.figure_configs(2)
    assert (f2.initial_state.m1, f2.initial_state.m2, f2.initial_state.atom) == (5, 6, "e")
    assert f2.engine == "both"
    with pytest.raises(KeyError):
        presets.figure_configs(5)
