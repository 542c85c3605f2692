import json

from evasion.cli import main

from conftest import fixture_path


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestCheck:
    def test_open_crossing_exits_zero_with_witness(self, capsys):
        code, report = run_cli(capsys, "check", fixture_path("crossing_open.json"))
        assert code == 0
        assert report["verdict"] == "EVASION"
        assert set(report["sections"]["witness"]["support"]) == {
            "v1.g0",
            "v2.g1",
            "v3.g1",
            "v4.g0",
        }
        assert report["sections"]["kernel_dim"] == 1
        assert report["path"]["segments"][0]["t"][0] is None

    def test_blocked_crossing_exits_two_with_certificate(self, capsys):
        code, report = run_cli(capsys, "check", fixture_path("crossing_blocked.json"))
        assert code == 2
        assert report["verdict"] == "NO_EVASION"
        assert "certificate" in report["sections"]
        assert "witness" not in report["sections"]

    def test_truncated_json_reports_parse_location(self, capsys, tmp_path):
        bad = tmp_path / "broken.json"
        bad.write_text('{"window": {"x": [0, 9], "y": [0')
        code, report = run_cli(capsys, "check", str(bad))
        assert code == 1
        assert "location" in report and report["location"]["line"] == 1

    def test_float_coordinates_are_rejected(self, capsys, tmp_path):
        bad = tmp_path / "floaty.json"
        bad.write_text(json.dumps({"window": {"x": [0, 9.5], "y": [0, 9]}, "boxes": []}))
        code, report = run_cli(capsys, "check", str(bad))
        assert code == 1
        assert "float" in report["error"]

    def test_disconnected_scene_reports_violation(self, capsys, tmp_path):
        bad = tmp_path / "island.json"
        bad.write_text(
            json.dumps(
                {
                    "window": {"x": [0, 10], "y": [0, 10]},
                    "boxes": [{"t": [0, 1], "x": [4, 5], "y": [4, 5]}],
                }
            )
        )
        code, report = run_cli(capsys, "check", str(bad))
        assert code == 1
        assert any("disconnected" in v for v in report["violations"])

    def test_oracle_flag_cross_checks(self, capsys):
        code, report = run_cli(capsys, "check", "--oracle", fixture_path("crossing_open.json"))
        assert code == 0
        assert report["oracle"]["section_exists"] is True
        code, report = run_cli(capsys, "check", "--oracle", fixture_path("crossing_blocked.json"))
        assert code == 2
        assert report["oracle"]["section_exists"] is False

    def test_matrix_flag_embeds_coboundary(self, capsys):
        code, report = run_cli(capsys, "check", "--matrix", fixture_path("crossing_open.json"))
        assert code == 0
        matrix = report["sections"]["matrix"]
        assert (matrix["rows"], matrix["cols"]) == (7, 8)

    def test_path_and_plot_outputs(self, capsys, tmp_path):
        path_file = tmp_path / "path.json"
        svg_file = tmp_path / "scene.svg"
        code, _ = run_cli(
            capsys,
            "check",
            "--path",
            str(path_file),
            "--plot",
            str(svg_file),
            fixture_path("crossing_open.json"),
        )
        assert code == 0
        payload = json.loads(path_file.read_text())
        assert payload["segments"]
        assert svg_file.read_text().startswith("<svg")

    def test_reports_are_deterministic_modulo_timing(self, capsys):
        _, first = run_cli(capsys, "check", fixture_path("crossing_open.json"))
        _, second = run_cli(capsys, "check", fixture_path("crossing_open.json"))
        first.pop("timing_ms")
        second.pop("timing_ms")
        assert json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)


class TestSheafRoundTrip:
    def test_sheaf_output_feeds_lp_with_identical_verdict(self, capsys, tmp_path):
        code, sheaf_json = run_cli(capsys, "sheaf", fixture_path("crossing_open.json"))
        assert code == 0
        ranks = {cell: len(stalk["labels"]) for cell, stalk in sheaf_json["stalks"].items()}
        assert ranks == {
            "e1": 1, "v1": 1, "e2": 2, "v2": 3, "e3": 3, "v3": 3, "e4": 2, "v4": 1, "e5": 1,
        }
        sheaf_file = tmp_path / "sheaf.json"
        sheaf_file.write_text(json.dumps(sheaf_json))
        code, lp_report = run_cli(capsys, "lp", str(sheaf_file))
        assert code == 0
        code, check_report = run_cli(capsys, "check", fixture_path("crossing_open.json"))
        assert lp_report["sections"]["witness"] == check_report["sections"]["witness"]

    def test_blocked_variant_differs_only_in_restrictions(self, capsys):
        _, open_sheaf = run_cli(capsys, "sheaf", fixture_path("crossing_open.json"))
        _, blocked_sheaf = run_cli(capsys, "sheaf", fixture_path("crossing_blocked.json"))
        assert open_sheaf["stalks"] == blocked_sheaf["stalks"]
        assert open_sheaf["restrictions"] != blocked_sheaf["restrictions"]

    def test_empty_scene_gives_rank_one_sheaf(self, capsys, tmp_path):
        scene = tmp_path / "empty.json"
        scene.write_text(json.dumps({"window": {"x": [0, 4], "y": [0, 4]}, "boxes": []}))
        code, sheaf_json = run_cli(capsys, "sheaf", str(scene))
        assert code == 0
        assert all(len(s["labels"]) == 1 for s in sheaf_json["stalks"].values())


class TestLp:
    def test_reversal_fixture_is_infeasible(self, capsys):
        code, report = run_cli(capsys, "lp", fixture_path("reversal.json"))
        assert code == 2
        assert report["sections"]["certificate"]

    def test_double_lens_fixture_is_feasible(self, capsys):
        code, report = run_cli(capsys, "lp", fixture_path("double_lens.json"))
        assert code == 0
        assert report["sections"]["kernel_dim"] == 3

    def test_nonfree_fixture_is_feasible_with_lambda_witness(self, capsys):
        code, report = run_cli(capsys, "lp", fixture_path("nonfree_feasible.json"))
        assert code == 0
        assert any(k.startswith("v1.") for k in report["sections"]["witness"]["support"])

    def test_cone_map_violation_names_the_incidence(self, capsys, tmp_path):
        bad = {
            "vertices": ["0"],
            "stalks": {
                "e1": {"labels": ["u"]},
                "v1": {"labels": ["a"]},
                "e2": {"labels": ["u"]},
            },
            "restrictions": [
                {"from": "v1", "to": "e1", "matrix": {"rows": 1, "cols": 1, "entries": ["-1"]}},
                {"from": "v1", "to": "e2", "matrix": {"rows": 1, "cols": 1, "entries": ["1"]}},
            ],
        }
        f = tmp_path / "bad_sheaf.json"
        f.write_text(json.dumps(bad))
        code, report = run_cli(capsys, "lp", str(f))
        assert code == 1
        (violation,) = report["violations"]
        assert (violation["vertex"], violation["edge"]) == ("v1", "e1")


class TestMatrixOraclePath:
    def test_matrix_command_prints_labelled_coboundary(self, capsys, tmp_path):
        _, sheaf_json = run_cli(capsys, "sheaf", fixture_path("crossing_open.json"))
        f = tmp_path / "sheaf.json"
        f.write_text(json.dumps(sheaf_json))
        code, report = run_cli(capsys, "matrix", str(f))
        assert code == 0
        assert report["matrix"]["rows"] == 7 and report["matrix"]["cols"] == 8
        assert len(report["rows"]) == 7 and len(report["columns"]) == 8

    def test_oracle_command_exit_codes(self, capsys):
        code, report = run_cli(capsys, "oracle", fixture_path("double_lens.json"))
        assert code == 0 and report["section_exists"]
        code, report = run_cli(capsys, "oracle", fixture_path("reversal.json"))
        assert code == 2 and not report["section_exists"]

    def test_oracle_command_rejects_nonfree(self, capsys):
        code, report = run_cli(capsys, "oracle", fixture_path("nonfree_feasible.json"))
        assert code == 1
        assert "free" in report["error"]

    def test_path_command_writes_file(self, capsys, tmp_path):
        out = tmp_path / "path.json"
        code, report = run_cli(
            capsys, "path", fixture_path("crossing_open.json"), "-o", str(out)
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["chain"]["v2"] == "g1"

    def test_path_command_on_blocked_scene(self, capsys):
        code, report = run_cli(capsys, "path", fixture_path("crossing_blocked.json"))
        assert code == 2
        assert report["verdict"] == "NO_EVASION"


def test_module_entry_point_runs(tmp_path):
    import subprocess
    import sys

    result = subprocess.run(
        [sys.executable, "-m", "evasion.cli", "check", fixture_path("crossing_open.json")],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert json.loads(result.stdout)["verdict"] == "EVASION"


def test_path_json_round_trip():
    from evasion.cli import path_from_jsonable, path_to_jsonable, scene_from_jsonable
    from evasion.geometry import build_sheaf, extract_path, verify_evasion_path
    from evasion.sheaf import global_sections

    from conftest import load_fixture

    scene = scene_from_jsonable(load_fixture("crossing_open.json"))
    path = extract_path(scene, global_sections(build_sheaf(scene)))
    rebuilt = path_from_jsonable(json.loads(json.dumps(path_to_jsonable(path))))
    assert rebuilt.segments == path.segments
    verify_evasion_path(scene, rebuilt)


def test_rational_parsing_round_trip():
    from fractions import Fraction

    import pytest

    from evasion.linalg import format_rational, parse_rational

    for text in ("3", "-7", "5/3", "-22/7"):
        assert format_rational(parse_rational(text)) == text
    assert parse_rational(4) == Fraction(4)
    for bad in (1.5, True, "x", "1/0", None):
        with pytest.raises(ValueError):
            parse_rational(bad)


def test_plot_renders_without_a_path_on_blocked_scenes(capsys, tmp_path):
    svg_file = tmp_path / "blocked.svg"
    code, _ = run_cli(capsys, "check", "--plot", str(svg_file), fixture_path("crossing_blocked.json"))
    assert code == 2
    assert svg_file.read_text().startswith("<svg")


def test_malformed_scene_schema_is_a_clean_input_error(capsys, tmp_path):
    bad = tmp_path / "missing_keys.json"
    bad.write_text(json.dumps({"window": {"x": [0, 9], "y": [0, 9]}, "boxes": [{"t": [0, 1]}]}))
    code, report = run_cli(capsys, "check", str(bad))
    assert code == 1
    assert "malformed scene" in report["error"]


def test_malformed_sheaf_schema_is_a_clean_input_error(capsys, tmp_path):
    bad = tmp_path / "missing_matrix.json"
    bad.write_text(
        json.dumps(
            {
                "vertices": ["0"],
                "stalks": {"e1": {"labels": ["s"]}, "v1": {"labels": ["s"]}, "e2": {"labels": ["s"]}},
                "restrictions": [{"from": "v1", "to": "e1"}],
            }
        )
    )
    code, report = run_cli(capsys, "lp", str(bad))
    assert code == 1
    assert "malformed sheaf" in report["error"]
