import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from fidaudit.audit import emit_report, run_audit
from fidaudit.cli import main
from fidaudit.errors import SchemaError
from fidaudit.scenario import load_scenario, parse_scenario, validate_scenario

SCENARIOS = Path(__file__).parent.parent / "scenarios"
GOLDEN = Path(__file__).parent / "golden"


def raw_scenario(name):
    return json.loads((SCENARIOS / name).read_text())


# --- schema validation -----------------------------------------------------


def test_all_bundled_scenarios_validate():
    for path in sorted(SCENARIOS.glob("*.json")):
        assert validate_scenario(json.loads(path.read_text())) == []


def test_missing_schema_version():
    raw = raw_scenario("disclosure_demo.json")
    del raw["schema_version"]
    problems = validate_scenario(raw)
    assert any(path == "schema_version" for path, _ in problems)
    with pytest.raises(SchemaError):
        parse_scenario(raw)


def test_unknown_section_flagged():
    raw = raw_scenario("disclosure_demo.json")
    raw["extras"] = {}
    assert any(path == "extras" for path, _ in validate_scenario(raw))


def test_norm_binding_must_reference_world_nodes():
    raw = raw_scenario("disclosure_demo.json")
    raw["context"]["norms"][0]["binding"]["material_node"] = "ghost"
    problems = validate_scenario(raw)
    assert any("ghost" in message for _, message in problems)


def test_cpd_row_count_checked():
    raw = raw_scenario("disclosure_demo.json")
    raw["world"]["macid"]["cpds"]["C"] = [[0.5, 0.5], [0.5, 0.5]]
    with pytest.raises(SchemaError) as exc:
        parse_scenario(raw)
    assert "cpds.C" in exc.value.path


def test_assessment_requiring_mdp_without_world():
    raw = raw_scenario("disclosure_demo.json")
    raw["assessment"]["methods"].append(
        {"kind": "discount_inference", "beta_grid": [0.5], "behavior": {}}
    )
    problems = validate_scenario(raw)
    assert any("requires world.mdp" in message for _, message in problems)


# --- pipeline semantics -------------------------------------------------------


def test_steps_in_fixed_order_and_pass():
    report = run_audit(load_scenario(SCENARIOS / "disclosure_demo.json"))
    assert [s.step for s in report.steps] == [
        "context",
        "identification",
        "assessment",
        "aggregation",
        "loyalty",
        "care",
    ]
    assert all(s.status == "pass" for s in report.steps)
    assert report.overall == "pass"


def test_muted_report_fails_loyalty_with_witness():
    report = run_audit(load_scenario(SCENARIOS / "disclosure_demo_muted.json"))
    assert report.overall == "fail"
    loyalty = next(s for s in report.steps if s.step == "loyalty")
    assert loyalty.status == "fail"
    failing = [f for f in loyalty.findings if f.status == "fail"]
    assert failing
    for finding in failing:
        assert finding.evidence  # every fail carries a concrete witness


def test_omitted_care_section_skipped_caps_overall_at_warn():
    report = run_audit(load_scenario(SCENARIOS / "care_skipped.json"))
    care = next(s for s in report.steps if s.step == "care")
    assert care.status == "skipped"
    assert report.overall == "warn"


def test_loyalty_skipped_when_aggregation_output_missing():
    raw = raw_scenario("disclosure_demo.json")
    del raw["aggregation"]
    report = run_audit(parse_scenario(raw))
    loyalty = next(s for s in report.steps if s.step == "loyalty")
    assert loyalty.status == "skipped"
    assert "aggregation" in loyalty.findings[0].detail


def test_norm_tension_yields_warn_not_verdict():
    raw = raw_scenario("disclosure_demo.json")
    raw["context"]["norms"].append(
        {
            "sender": "adviser",
            "receiver": "client",
            "subject": "client",
            "attribute": "market-state-secrecy",
            "transmission_principle": "confidentiality",
            "binding": {"report_node": "R_a", "secret_node": "C"},
        }
    )
    report = run_audit(parse_scenario(raw))
    loyalty = next(s for s in report.steps if s.step == "loyalty")
    tension = [f for f in loyalty.findings if f.check == "norm-tension"]
    assert tension and tension[0].status == "warn"
    # neither duty gets a verdict on the conflicted pair
    assert not any(f.check.startswith("disclosure:market-state") for f in loyalty.findings)
    assert not any(f.check.startswith("confidentiality:") for f in loyalty.findings)


def test_bad_method_input_fails_step_but_pipeline_continues():
    raw = raw_scenario("disclosure_demo.json")
    # asymmetric covariance passes shape checks but is rejected at run time
    raw["assessment"]["methods"][0]["sigma"] = [[0.04, 0.02], [0.0, 0.04]]
    report = run_audit(parse_scenario(raw))
    assessment = next(s for s in report.steps if s.step == "assessment")
    assert assessment.status == "fail"
    assert assessment.findings[0].evidence
    # later steps still executed
    care = next(s for s in report.steps if s.step == "care")
    assert care.status == "pass"
    assert report.overall == "fail"


def test_every_fail_finding_has_evidence():
    for path in sorted(SCENARIOS.glob("*.json")):
        report = run_audit(load_scenario(path))
        for step in report.steps:
            for finding in step.findings:
                if finding.status == "fail":
                    assert finding.evidence, f"{path.name}:{step.step}:{finding.check}"


def test_section_key_order_in_file_is_irrelevant():
    raw = raw_scenario("disclosure_demo.json")
    reversed_raw = json.loads(json.dumps(dict(reversed(list(raw.items())))))
    a = emit_report(run_audit(parse_scenario(raw)), "machine")
    b = emit_report(run_audit(parse_scenario(reversed_raw)), "machine")
    assert a == b


def test_reports_reproducible_and_match_goldens():
    for path in sorted(SCENARIOS.glob("*.json")):
        first = emit_report(run_audit(load_scenario(path)), "machine")
        second = emit_report(run_audit(load_scenario(path)), "machine")
        assert first == second
        golden = (GOLDEN / f"{path.stem}.report.json").read_text()
        assert first == golden, f"golden drift for {path.name}"


def test_text_report_has_six_status_lines():
    report = run_audit(load_scenario(SCENARIOS / "disclosure_demo.json"))
    text = emit_report(report, "text")
    lines = [line for line in text.splitlines() if line.startswith("  PASS")]
    assert len(lines) == 6
    order = [line.split(". ")[1] for line in lines]
    assert order == ["Context", "Identification", "Assessment", "Aggregation", "Loyalty", "Care"]


# --- CLI ------------------------------------------------------------------------


def test_cli_check_exit_codes():
    runner = CliRunner()
    expected = {
        "disclosure_demo.json": 0,
        "trust_portfolio.json": 0,
        "care_skipped.json": 1,
        "engagement_prior_warn.json": 1,
        "disclosure_demo_muted.json": 2,
    }
    for name, code in expected.items():
        result = runner.invoke(main, ["check", str(SCENARIOS / name)])
        assert result.exit_code == code, f"{name}: {result.output}"


def test_cli_check_machine_format_and_report_path(tmp_path):
    runner = CliRunner()
    out = tmp_path / "report.json"
    result = runner.invoke(
        main,
        ["check", str(SCENARIOS / "disclosure_demo.json"), "--format", "machine", "--report", str(out)],
    )
    assert result.exit_code == 0
    assert out.read_text() == result.output
    payload = json.loads(out.read_text())
    assert payload["overall"] == "pass"
    assert payload["scenario"]["seed"] == 0


def test_cli_check_schema_error_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": 99}')
    runner = CliRunner()
    result = runner.invoke(main, ["check", str(bad)])
    assert result.exit_code == 2
    assert "schema error" in result.stderr


def test_cli_validate():
    runner = CliRunner()
    ok = runner.invoke(main, ["validate", str(SCENARIOS / "disclosure_demo.json")])
    assert ok.exit_code == 0
    assert "valid" in ok.output


def test_cli_validate_lists_all_problems(tmp_path):
    bad = tmp_path / "bad.json"
    raw = raw_scenario("disclosure_demo.json")
    del raw["schema_version"]
    raw["context"]["roles"].append({"id": "adviser"})
    bad.write_text(json.dumps(raw))
    runner = CliRunner()
    result = runner.invoke(main, ["validate", str(bad)])
    assert result.exit_code == 2
    assert "schema_version" in result.output
    assert "roles[2].id" in result.output


def test_cli_catalog():
    runner = CliRunner()
    result = runner.invoke(main, ["catalog", "Health care"])
    assert result.exit_code == 0
    assert "Confidentiality" in result.output
    assert "Informed consent" in result.output
    missing = runner.invoke(main, ["catalog", "Astrology"])
    assert missing.exit_code == 2


def test_cli_version():
    runner = CliRunner()
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert "0.1.0" in result.output
