"""Scenario schema validation, report execution, and the CLI contract."""

import json

import pytest

from conftest import CONTROL_ERRORS, SCENARIO_DIR, scenario_paths
from monodeg import cli
from monodeg.errors import NotStabilized, ParseError, SchemaError
from monodeg.regions import BallDomain, BoxDomain
from monodeg.scenario import (
    Scenario,
    build_domain,
    build_schedule,
    build_space,
    emit_scenario,
    load_scenario,
    run_scenario,
    stabilization_rows,
    validate_scenario,
)
from monodeg.setval import gallery_names


def minimal_doc(**over):
    doc = {
        "schema": 1,
        "label": "tiny",
        "mode": "degree",
        "space": {"p_x": 2.0, "p_y": 2.0},
        "operator": {"name": "diag", "params": {"lam": 2.0}},
        "domain": {"shape": "ball", "center": [0.0], "radius": 1.0},
        "schedule": {"n_list": [1, 2, 3]},
    }
    doc.update(over)
    return doc


# ---------------------------------------------------------------- schema


def test_minimal_document_validates_with_defaults():
    scn = validate_scenario(minimal_doc())
    assert isinstance(scn, Scenario)
    assert scn.seed == 0
    assert scn.mode == "degree"
    assert scn.solve == {} and scn.engine == {}
    assert scn.homotopy is None and scn.theorem is None


def test_top_level_must_be_object():
    with pytest.raises(SchemaError, match="top level"):
        validate_scenario([1, 2, 3])


def test_all_violations_are_collected_not_just_the_first():
    doc = {
        "schema": 2,
        "label": "",
        "seed": -1,
        "mode": "bogus",
        "space": {"p_x": 1.0, "p_y": 2.0, "flavor": "salt"},
        "operator": {"name": "no-such-operator"},
        "domain": {"shape": "cone"},
        "surprise": True,
    }
    with pytest.raises(SchemaError) as exc:
        validate_scenario(doc)
    bad = exc.value.violations
    assert len(bad) >= 6
    joined = "\n".join(bad)
    for needle in (
        "unknown keys ['surprise']",
        "schema: must be the integer 1",
        "label: non-empty string",
        "seed: non-negative integer",
        "mode: one of",
        "space: unknown keys ['flavor']",
        "space.p_x",
        "operator.name: unknown operator",
        "domain.shape: unknown shape 'cone'",
    ):
        assert needle in joined
    # str(exc) carries the same list for plain logging
    assert "schema: must be the integer 1" in str(exc.value)


@pytest.mark.parametrize(
    "over, needle",
    [
        ({"seed": True}, "seed"),
        ({"seed": 1.5}, "seed"),
        ({"space": {"p_x": 2.0, "p_y": 1.0}}, "space.p_y"),
        ({"space": {"p_x": 2.0}}, "space.p_y"),
        (
            {"space": {"p_x": 2.0, "p_y": 2.0, "weights": {"kind": "geometric"}}},
            "unknown kind 'geometric'",
        ),
        (
            {"space": {"p_x": 2.0, "p_y": 2.0,
                       "weights": {"kind": "constant", "value": -1.0}}},
            "positive 'value'",
        ),
        (
            {"space": {"p_x": 2.0, "p_y": 2.0,
                       "weights": {"kind": "list", "values": []}}},
            "positive 'values'",
        ),
        ({"operator": "diag"}, "operator: required object"),
        ({"operator": {"name": "diag", "speed": 3}}, "operator: unknown keys"),
        ({"operator": {"name": "diag", "params": 7}}, "operator.params"),
        ({"domain": {"shape": "ball", "radius": -2.0}}, "domain.radius"),
        (
            {"domain": {"shape": "box", "lo": [0.0], "hi": [0.0]}},
            "strictly below",
        ),
        (
            {"domain": {"shape": "box", "lo": [0.0, 0.0], "hi": [1.0]}},
            "equal-length",
        ),
        ({"schedule": {"n_list": [2, 2]}}, "strictly increasing"),
        ({"schedule": {"n_list": [0, 1]}}, "strictly increasing"),
        ({"schedule": {"n_list": [1, 2], "eps_reg": 0.0}}, "eps_reg"),
        (
            {"schedule": {"n_list": [1, 2], "eps_list": [0.1]}},
            "one per section",
        ),
        ({"schedule": {"n_list": [1, 2], "cadence": 3}}, "schedule: unknown keys"),
        ({"solve": {"tol": -1e-6}}, "solve.tol"),
        ({"solve": {"speed": 1}}, "solve: object"),
        ({"engine": {"per_axis": 1}}, "per_axis"),
        ({"engine": {"per_axis": True}}, "per_axis"),
        (
            {"homotopy": {"target": {"name": "diag"}}},
            "only allowed for mode 'homotopy'",
        ),
        ({"theorem": {"name": "browder"}}, "only allowed for mode 'theorem'"),
    ],
)
def test_single_field_rejections(over, needle):
    with pytest.raises(SchemaError) as exc:
        validate_scenario(minimal_doc(**over))
    assert any(needle in v for v in exc.value.violations), exc.value.violations


def test_domain_required_except_for_theorem_mode():
    doc = minimal_doc()
    del doc["domain"]
    with pytest.raises(SchemaError, match="domain: required"):
        validate_scenario(doc)
    thm = minimal_doc(
        mode="theorem",
        theorem={"name": "defigueiredo", "radius": 1.0},
    )
    del thm["domain"]
    assert validate_scenario(thm).domain is None


def test_homotopy_mode_requirements():
    with pytest.raises(SchemaError, match="homotopy: required"):
        validate_scenario(minimal_doc(mode="homotopy"))
    good = minimal_doc(
        mode="homotopy",
        homotopy={"target": {"name": "diag", "params": {"lam": 2.0}},
                  "t_samples": [0.0, 0.5, 1.0]},
    )
    assert validate_scenario(good).homotopy["t_samples"] == [0.0, 0.5, 1.0]
    for ts in ([0.5, 1.0], [0.0, 0.5], [0.0, 0.5, 0.5, 1.0], [0.0]):
        bad = minimal_doc(
            mode="homotopy",
            homotopy={"target": {"name": "diag"}, "t_samples": ts},
        )
        with pytest.raises(SchemaError, match="t_samples"):
            validate_scenario(bad)


def test_theorem_mode_requirements():
    with pytest.raises(SchemaError, match="theorem: required"):
        validate_scenario(minimal_doc(mode="theorem"))
    with pytest.raises(SchemaError, match="theorem.name"):
        validate_scenario(minimal_doc(mode="theorem", theorem={"name": "fermat"}))
    with pytest.raises(SchemaError, match="theorem.cap"):
        validate_scenario(
            minimal_doc(
                mode="theorem",
                theorem={"name": "range_nr", "radius": 1.0,
                         "targets": [[0.1, 0.2]]},
            )
        )
    with pytest.raises(SchemaError, match="lam_grid"):
        validate_scenario(
            minimal_doc(
                mode="theorem",
                theorem={"name": "defigueiredo", "lam_grid": [0.5, -1.0]},
            )
        )
    with pytest.raises(SchemaError, match="theorem: unknown keys"):
        validate_scenario(
            minimal_doc(
                mode="theorem",
                theorem={"name": "browder", "targets": [[1.0]], "cap": 2.0},
            )
        )


# ------------------------------------------------------------ round trip


@pytest.mark.parametrize(
    "path", scenario_paths(), ids=lambda p: p.stem
)
def test_emit_round_trip_over_shipped_scenarios(path):
    scn = load_scenario(path)
    doc = emit_scenario(scn)
    assert validate_scenario(doc) == scn
    # emitted documents survive a JSON round trip unchanged
    assert validate_scenario(json.loads(json.dumps(doc))) == scn


def test_shipped_scenarios_cover_every_mode():
    modes = {load_scenario(p).mode for p in scenario_paths()}
    assert modes == {"degree", "solve", "homotopy", "theorem"}


def test_load_scenario_missing_file(tmp_path):
    with pytest.raises(ParseError, match="cannot read"):
        load_scenario(tmp_path / "nope.json")


def test_load_scenario_invalid_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{ not json", encoding="utf-8")
    with pytest.raises(ParseError, match="invalid JSON"):
        load_scenario(p)


# --------------------------------------------------------------- builders


def test_ball_domain_uses_source_space_exponent():
    scn = load_scenario(SCENARIO_DIR / "duality_p3.json")
    space = build_space(scn)
    dom = build_domain(scn, space)
    assert isinstance(dom, BallDomain)
    assert dom.p == space.p_y == 3.0


def test_box_domain_builder():
    scn = validate_scenario(
        minimal_doc(domain={"shape": "box", "lo": [-1.0, -1.0], "hi": [1.0, 2.0]})
    )
    dom = build_domain(scn, build_space(scn))
    assert isinstance(dom, BoxDomain)
    assert dom.lo == (-1.0, -1.0) and dom.hi == (1.0, 2.0)


def test_schedule_builder_defaults_and_explicit():
    scn = validate_scenario(minimal_doc())
    sched = build_schedule(scn)
    assert sched.n_list == (1, 2, 3)
    explicit = validate_scenario(
        minimal_doc(schedule={"n_list": [1, 2], "eps_reg": 0.1,
                              "eps_list": [0.05, 0.025]})
    )
    s2 = build_schedule(explicit)
    assert s2.eps_reg == 0.1 and s2.eps_list == (0.05, 0.025)


# ----------------------------------------------------------- run_scenario


def test_run_scenario_degree_report_shape():
    scn = validate_scenario(minimal_doc())
    report = run_scenario(scn)
    assert report["value"] == 1
    assert report["mode"] == "degree"
    assert report["backend"] in ("compiled", "python")
    assert report["scenario"] == emit_scenario(scn)
    deg = report["degree"]
    assert deg["stabilized"] is True
    assert [e["n"] for e in deg["entries"]] == [1, 2, 3]
    assert all(e["degree"] == 1 and e["error"] is None for e in deg["entries"])
    rows = stabilization_rows(report)
    assert [r[0] for r in rows] == [1, 2, 3]
    assert all(len(r) == 4 for r in rows)


def test_run_scenario_solve_attaches_zero():
    scn = load_scenario(SCENARIO_DIR / "diag_shifted_solve.json")
    report = run_scenario(scn)
    sol = report["solve"]
    assert sol["residual"] <= sol["tol"] == 1e-9
    assert sol["zero"][0] == pytest.approx(0.25, abs=1e-8)


def test_run_scenario_failure_attaches_partial_report():
    scn = load_scenario(SCENARIO_DIR / "control_flipflop.json")
    with pytest.raises(NotStabilized) as exc:
        run_scenario(scn)
    partial = exc.value.report
    assert partial["degree"]["stabilized"] is False
    assert partial["value"] is None
    degrees = [e["degree"] for e in partial["degree"]["entries"]]
    assert len(set(degrees)) > 1


# ------------------------------------------------------------------- CLI


def write_doc(tmp_path, doc, name="scn.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc), encoding="utf-8")
    return p


def read_report(out_dir):
    return json.loads((out_dir / "report.json").read_text(encoding="utf-8"))


def test_cli_run_success_writes_json_and_csv(tmp_path, capsys):
    p = write_doc(tmp_path, minimal_doc())
    out = tmp_path / "out"
    rc = cli.main(["run", str(p), "--out", str(out)])
    assert rc == 0
    captured = capsys.readouterr()
    assert "value=1" in captured.out
    assert "report:" in captured.out
    report = read_report(out)
    assert report["value"] == 1 and "timestamp" in report
    csv_bytes = (out / "stabilization.csv").read_bytes()
    lines = csv_bytes.decode("utf-8").splitlines()
    assert lines[0] == "n,eps_n,degree,boundary_margin"
    assert len(lines) == 1 + len(report["degree"]["entries"])
    assert b"\r" not in csv_bytes and csv_bytes.endswith(b"\n")


def test_cli_timestamp_sits_on_its_own_line(tmp_path):
    p = write_doc(tmp_path, minimal_doc())
    out = tmp_path / "out"
    assert cli.main(["run", str(p), "--out", str(out)]) == 0
    lines = (out / "report.json").read_text(encoding="utf-8").splitlines()
    stamped = [ln for ln in lines if "timestamp" in ln]
    assert len(stamped) == 1
    assert stamped[0].strip().startswith('"timestamp":')


def test_cli_format_json_skips_csv(tmp_path):
    p = write_doc(tmp_path, minimal_doc())
    out = tmp_path / "out"
    assert cli.main(["run", str(p), "--out", str(out), "--format", "json"]) == 0
    assert (out / "report.json").exists()
    assert not (out / "stabilization.csv").exists()


def test_cli_seed_override_lands_in_report(tmp_path):
    p = write_doc(tmp_path, minimal_doc(seed=3))
    out = tmp_path / "out"
    assert cli.main(["run", str(p), "--out", str(out), "--seed", "11"]) == 0
    report = read_report(out)
    assert report["seed"] == 11
    assert report["scenario"]["seed"] == 11


def test_cli_default_out_dir_is_slug_of_label(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    p = write_doc(tmp_path, minimal_doc(label="Tiny Ball #1"))
    assert cli.main(["run", str(p)]) == 0
    assert (tmp_path / "reports" / "Tiny-Ball--1" / "report.json").exists()


def test_cli_math_failure_exits_2_with_named_error(tmp_path, capsys):
    src = SCENARIO_DIR / "control_flipflop.json"
    out = tmp_path / "out"
    rc = cli.main(["run", str(src), "--out", str(out)])
    assert rc == 2
    captured = capsys.readouterr()
    assert "NotStabilized" in captured.err
    report = read_report(out)
    assert report["error"] == CONTROL_ERRORS["control_flipflop.json"]
    assert report["error_message"]
    # the partial stabilization trace still lands in the CSV
    lines = (out / "stabilization.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "n,eps_n,degree,boundary_margin"
    assert len(lines) > 1


def test_cli_parse_error_exits_1(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{ nope", encoding="utf-8")
    assert cli.main(["run", str(p)]) == 1
    assert "parse error" in capsys.readouterr().err


def test_cli_schema_error_exits_1_and_lists_violations(tmp_path, capsys):
    p = write_doc(tmp_path, {"schema": 2, "label": "", "mode": "bogus"})
    assert cli.main(["run", str(p)]) == 1
    err = capsys.readouterr().err
    assert err.count("schema error:") >= 3


def test_cli_validate_mixed_files(tmp_path, capsys):
    good = write_doc(tmp_path, minimal_doc(), name="good.json")
    bad = write_doc(tmp_path, {"schema": 1}, name="bad.json")
    assert cli.main(["validate", str(good)]) == 0
    assert "OK" in capsys.readouterr().out
    assert cli.main(["validate", str(good), str(bad)]) == 1
    captured = capsys.readouterr()
    assert "OK" in captured.out
    assert "bad.json" in captured.err


def test_cli_validate_all_shipped_scenarios(capsys):
    paths = [str(p) for p in scenario_paths()]
    assert cli.main(["validate", *paths]) == 0
    out = capsys.readouterr().out
    assert out.count(": OK") == len(paths)


def test_cli_gallery_list_names_every_operator(capsys):
    assert cli.main(["gallery", "list"]) == 0
    out = capsys.readouterr().out
    for name in gallery_names():
        assert any(ln.startswith(name) for ln in out.splitlines())


def test_cli_rejects_unknown_subcommand():
    with pytest.raises(SystemExit):
        cli.main(["frobnicate"])


def strip_timestamp(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return "\n".join(ln for ln in lines if '"timestamp"' not in ln)


def test_cli_reports_are_deterministic_for_fixed_seed(tmp_path):
    src = SCENARIO_DIR / "duality_l2.json"
    texts = []
    for i in range(2):
        out = tmp_path / f"run{i}"
        assert cli.main(["run", str(src), "--out", str(out)]) == 0
        texts.append(strip_timestamp(out / "report.json"))
        csv_text = (out / "stabilization.csv").read_text(encoding="utf-8")
        texts.append(csv_text)
    assert texts[0] == texts[2]
    assert texts[1] == texts[3]
