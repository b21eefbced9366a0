import json
from pathlib import Path

import pytest

from stefan_control import ZINC
from stefan_control.errors import ScenarioError
from stefan_control.scenario_file import DEFAULT_T_CAP, load_scenario, parse_scenario, parse_scenario_text

ROOT = Path(__file__).resolve().parents[1]

BASE = {
    "name": "t",
    "material": "zinc",
    "initial": {"s0": 0.01, "H": 1e4},
    "controller": {"kind": "state-feedback", "c": 0.001, "s_r": 0.35},
    "sim": {"n": 200, "t_end": 100.0},
}


def text(**overrides):
    doc = json.loads(json.dumps(BASE))
    for key, value in overrides.items():
        if value is None:
            doc.pop(key, None)
        else:
            doc[key] = value
    return json.dumps(doc, indent=2)


def error_of(src) -> str:
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(src, "f.json")
    return str(info.value)


def test_zinc_preset():
    sc = parse_scenario_text(text())
    assert sc.params.alpha == pytest.approx(4.5322e-5, rel=1e-4)
    assert sc.params == ZINC
    assert sc.law.kind == "state-feedback" and sc.law.actuation == "neumann"
    assert sc.initial.s == 0.01 and sc.H == 1e4 and sc.sim.cfl_fraction == 0.4


def test_explicit_material_matches_preset():
    mat = {"rho": ZINC.rho, "cp": ZINC.cp, "k": ZINC.k, "dh": ZINC.dh, "tm": ZINC.tm}
    assert parse_scenario_text(text(material=mat)).params == ZINC


def test_missing_setpoint_names_field():
    ctrl = {"kind": "state-feedback", "c": 0.001}
    msg = error_of(text(controller=ctrl))
    assert "controller.s_r" in msg and "required field missing" in msg


def test_missing_top_level_section():
    assert "field 'initial'" in error_of(text(initial=None))


def test_eps2_invariant():
    msg = error_of(text(perturbation={"eps1": 0.0, "eps2": -1.0}))
    assert "perturbation" in msg and "eps2" in msg


def test_unknown_key_rejected():
    msg = error_of(text(initial={"s0": 0.01, "H": 1e4, "foo": 1}))
    assert "initial.foo" in msg and "unknown key" in msg
    assert "unknown key" in error_of(text(extra=1))


def test_json_error_reports_line():
    src = text().replace('"n": 200', '"n": 200,,')
    line = next(i for i, l in enumerate(src.splitlines(), 1) if ",," in l)
    with pytest.raises(ScenarioError) as info:
        parse_scenario_text(src, "bad.json")
    assert info.value.line == line
    assert f"bad.json:{line}:" in str(info.value)


def test_unknown_preset():
    assert "unknown preset" in error_of(text(material="lead"))


def test_both_dt_policies_rejected():
    assert "either" in error_of(text(sim={"n": 100, "dt": 1e-4, "cfl_fraction": 0.4, "t_end": 1.0}))


def test_convergence_tol_alone_caps_horizon():
    sc = parse_scenario_text(text(sim={"n": 100, "convergence_tol": 0.01}))
    assert sc.sim.t_end == DEFAULT_T_CAP and sc.sim.convergence_tol == 0.01


def test_pulse_and_observer_sections():
    sc = parse_scenario_text(text(controller={"kind": "pulse", "s_r": 0.35, "pulse": {"duration": 3000.0}}))
    assert sc.law.duration == 3000.0 and sc.law.level is None
    obs = {"lambda": 0.001, "h_hat": 2e4}
    ctrl = {"kind": "output-feedback", "c": 0.001, "s_r": 0.35}
    sc = parse_scenario_text(text(controller=ctrl, observer=obs))
    assert sc.observer.lam == 0.001 and sc.observer.init.h_hat == 2e4
    msg = error_of(text(controller=ctrl))
    assert "observer" in msg


def test_domain_invariant_reported_with_section():
    msg = error_of(text(sim={"n": 4, "t_end": 1.0}))
    assert "field 'sim'" in msg


def test_strict_flag_from_file_and_override():
    assert parse_scenario_text(text(strict=True)).strict
    assert not parse_scenario_text(text(strict=True), strict=False).strict


def test_unreadable_file(tmp_path):
    with pytest.raises(ScenarioError):
        parse_scenario(tmp_path / "missing.json")


@pytest.mark.parametrize("path", sorted((ROOT / "scenarios").glob("*.json")), ids=lambda p: p.stem)
def test_example_files_parse(path):
    sc, out = load_scenario(path)
    assert sc.name == path.stem
    assert out.sample_every > 0


def test_builtin_suite_files_parse():
    from stefan_control.cli import BATCH_SUITES, suite_files

    for suite in BATCH_SUITES:
        files = suite_files(suite)
        assert files
        for f in files:
            parse_scenario(f)
