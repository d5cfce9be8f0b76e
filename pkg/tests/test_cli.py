"""Tests for the JSON-problem-file command-line front end."""

import json
import os

import pytest

from resnf.cli import (
    EXIT_HYPOTHESIS,
    EXIT_INPUT,
    EXIT_MODEL,
    EXIT_OK,
    load_problem,
    run,
)
from resnf.errors import ProblemFileError
from resnf.fields import VectorField
from resnf.indexing import TruncationContext

DIAGONAL_LINES = [
    "1+ | 1+^1 | 2/1 0/1",
    "2+ | 2+^1 | 1/1 0/1",
    "3+ | 3+^1 | 1393/985 0/1",
    "4+ | 4+^1 | -1393/985 0/1",
    "5+ | 5+^1 | 1351/780 0/1",
    "6+ | 6+^1 | -1351/780 0/1",
]


def dim6_doc(field=None, **extra):
    doc = {
        "schema_version": 1,
        "name": "test problem",
        "model": {"builder": "dim6"},
        "truncation": {
            "mode_cutoff": 6,
            "degree_cutoff": 8,
            "arithmetic": "exact",
        },
    }
    if field is not None:
        doc["field"] = field
    doc.update(extra)
    return doc


def nls_doc(field=None, **extra):
    doc = {
        "schema_version": 1,
        "name": "lattice problem",
        "model": {"builder": "nls"},
        "truncation": {
            "mode_cutoff": 1,
            "degree_cutoff": 3,
            "arithmetic": "exact",
        },
        "field": {"p": 1} if field is None else field,
    }
    doc.update(extra)
    return doc


def write(tmp_path, doc, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A seeded six-mode problem normalized once, artifacts on disk."""
    root = tmp_path_factory.mktemp("cli")
    problem = root / "dim6.json"
    problem.write_text(
        json.dumps(dim6_doc(field={"seed": 3})), encoding="utf-8"
    )
    out = root / "out"
    assert run(["normalize", str(problem), "--out", str(out)]) == EXIT_OK
    return root, str(problem), str(out)


class TestProblemFiles:
    def test_unknown_top_level_key(self, tmp_path, capsys):
        path = write(tmp_path, dim6_doc(surprise=1))
        assert run(["analyze", path]) == EXIT_INPUT
        assert "problem: unknown key(s): surprise" in capsys.readouterr().err

    def test_unknown_nested_key_is_path_labeled(self, tmp_path, capsys):
        doc = dim6_doc()
        doc["truncation"]["slack"] = 2
        path = write(tmp_path, doc)
        assert run(["analyze", path]) == EXIT_INPUT
        err = capsys.readouterr().err
        assert "problem.truncation: unknown key(s): slack" in err

    def test_schema_version_mismatch(self, tmp_path, capsys):
        doc = dim6_doc()
        doc["schema_version"] = 2
        path = write(tmp_path, doc)
        assert run(["analyze", path]) == EXIT_INPUT
        assert "schema_version" in capsys.readouterr().err

    def test_float_rejected_where_rational_expected(self, tmp_path, capsys):
        doc = dim6_doc()
        doc["model"]["zeta1"] = 1.41421356
        path = write(tmp_path, doc)
        assert run(["analyze", path]) == EXIT_INPUT
        assert "p/q" in capsys.readouterr().err

    def test_momentum_flag_must_match_builder(self, tmp_path, capsys):
        doc = dim6_doc()
        doc["truncation"]["momentum"] = True
        assert run(["analyze", write(tmp_path, doc, "a.json")]) == EXIT_INPUT
        doc = nls_doc()
        doc["truncation"]["momentum"] = False
        assert run(["analyze", write(tmp_path, doc, "b.json")]) == EXIT_INPUT
        err = capsys.readouterr().err
        assert "momentum" in err

    def test_field_sources_are_exclusive(self, tmp_path, capsys):
        doc = dim6_doc(field={"seed": 1, "terms": DIAGONAL_LINES})
        assert run(["analyze", write(tmp_path, doc)]) == EXIT_INPUT
        assert "exactly one" in capsys.readouterr().err

    def test_nonlinearity_degree_is_lattice_only(self, tmp_path, capsys):
        doc = dim6_doc(field={"p": 2})
        assert run(["analyze", write(tmp_path, doc)]) == EXIT_INPUT
        assert "nls" in capsys.readouterr().err

    def test_lattice_problem_needs_a_degree(self, tmp_path, capsys):
        doc = nls_doc()
        del doc["field"]
        assert run(["analyze", write(tmp_path, doc)]) == EXIT_INPUT
        assert "no default field" in capsys.readouterr().err

    def test_seed_override_requires_seeded_field(self, tmp_path, capsys):
        doc = dim6_doc(field={"terms": DIAGONAL_LINES})
        path = write(tmp_path, doc)
        assert run(["analyze", path, "--seed", "4"]) == EXIT_INPUT
        assert "--seed" in capsys.readouterr().err

    def test_mode_cutoff_is_pinned_for_dim6(self, tmp_path, capsys):
        doc = dim6_doc()
        doc["truncation"]["mode_cutoff"] = 4
        assert run(["analyze", write(tmp_path, doc)]) == EXIT_INPUT
        assert "6 modes" in capsys.readouterr().err

    def test_malformed_json_leaves_no_partial_report(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text('{"schema_version": 1,', encoding="utf-8")
        report = tmp_path / "report.json"
        code = run(["analyze", str(path), "--json", str(report)])
        assert code == EXIT_INPUT
        assert not report.exists()
        err = capsys.readouterr().err
        assert "line" in err  # parse errors carry a position

    def test_missing_file(self, tmp_path, capsys):
        code = run(["analyze", str(tmp_path / "nope.json")])
        assert code == EXIT_INPUT
        capsys.readouterr()

    def test_bad_arithmetic_value(self, tmp_path, capsys):
        doc = dim6_doc()
        doc["truncation"]["arithmetic"] = "interval"
        assert run(["analyze", write(tmp_path, doc)]) == EXIT_INPUT
        assert "'exact' or 'float'" in capsys.readouterr().err

    def test_thread_count_validated(self, tmp_path, capsys):
        path = write(tmp_path, dim6_doc())
        assert run(["analyze", path, "--threads", "0"]) == EXIT_INPUT
        capsys.readouterr()

    def test_flow_parameters_validated(self, tmp_path, capsys):
        doc = dim6_doc(flow={"steps": 0})
        assert run(["analyze", write(tmp_path, doc, "a.json")]) == EXIT_INPUT
        doc = dim6_doc(flow={"rho": [0.05, -0.1]})
        assert run(["analyze", write(tmp_path, doc, "b.json")]) == EXIT_INPUT
        capsys.readouterr()

    def test_custom_model_rejects_undeclared_symbol(self, tmp_path, capsys):
        doc = {
            "schema_version": 1,
            "model": {
                "name": "tiny",
                "symbols": {"a": 1},
                "modes": {"1+": {"a": 1}, "2+": {"b": 1}},
            },
            "truncation": {"mode_cutoff": 2, "degree_cutoff": 4},
            "field": {"terms": ["1+ | 1+^1 | 1/1 0/1"]},
        }
        assert run(["analyze", write(tmp_path, doc)]) == EXIT_INPUT
        err = capsys.readouterr().err
        assert "problem.model.modes.2+.b: undeclared symbol" in err

    def test_terms_file_resolves_next_to_problem(self, tmp_path):
        (tmp_path / "field.txt").write_text(
            "\n".join(DIAGONAL_LINES) + "\n", encoding="utf-8"
        )
        doc = dim6_doc(field={"terms_file": "field.txt"})
        problem = load_problem(write(tmp_path, doc))
        assert problem.field.term_count() == 6
        assert problem.seed is None

    def test_rational_literals_accepted_in_flow(self, tmp_path):
        doc = dim6_doc(field={"seed": 1}, flow={"rho": ["1/20", "1/40"]})
        problem = load_problem(write(tmp_path, doc))
        assert problem.flow["rho"] == [0.05, 0.025]

    def test_arithmetic_override(self, tmp_path):
        path = write(tmp_path, dim6_doc(field={"seed": 1}))
        problem = load_problem(path, arithmetic="float")
        assert problem.ctx.arithmetic == "float"
        assert all(
            isinstance(c, complex) for _, _, c in problem.field.terms()
        )


class TestAnalyze:
    def test_six_mode_resonance_summary(self, tmp_path, capsys):
        path = write(tmp_path, dim6_doc())
        report_path = tmp_path / "report.json"
        assert run(["analyze", path, "--json", str(report_path)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "generators: 3+^1 4+^1, 5+^1 6+^1" in out
        assert "minimal order 4 (crude bound 6)" in out
        report = json.loads(report_path.read_text())
        res = report["resonance"]
        assert res["m_star_minimal"] == 4
        assert res["module_count"] == 14
        assert res["resonant_pair_count"] == 70
        assert res["delta_equals_m"] is False
        assert report["problem"]["field_terms"] >= 6

    def test_lattice_translates_match_module(self, tmp_path, capsys):
        path = write(tmp_path, nls_doc())
        report_path = tmp_path / "report.json"
        assert run(["analyze", path, "--json", str(report_path)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "translates: none (the translate set equals the module)" in out
        res = json.loads(report_path.read_text())["resonance"]
        assert res["delta_equals_m"] is True
        assert "0-^1 0+^1" in res["q_generators"]

    def test_divisor_scan_in_analyze(self, tmp_path, capsys):
        doc = dim6_doc(diophantine={"tau": 2.0, "degree_bound": 5})
        report_path = tmp_path / "report.json"
        path = write(tmp_path, doc)
        assert run(["analyze", path, "--json", str(report_path)]) == EXIT_OK
        assert "gamma_max" in capsys.readouterr().out
        dio = json.loads(report_path.read_text())["diophantine"]
        assert dio["gamma_max"] == pytest.approx(8.0)
        assert dio["fast_path_hits"] == 6


class TestNormalize:
    def test_artifacts_written(self, workspace):
        _, _, out = workspace
        names = sorted(os.listdir(out))
        assert names == [
            "kam_trace.json",
            "normal_form.txt",
            "report.json",
            "transform_log.txt",
        ]
        ctx = TruncationContext(6, 8, momentum_enabled=False, arithmetic="exact")
        lines = open(os.path.join(out, "normal_form.txt")).read().splitlines()
        assert VectorField.from_lines(ctx, lines).term_count() == len(lines)
        report = json.loads(open(os.path.join(out, "report.json")).read())
        assert report["residual_zero"] is True
        assert report["mstar"] == 4

    def test_progress_lines(self, tmp_path, capsys):
        path = write(tmp_path, dim6_doc(field={"seed": 3}))
        assert run(["normalize", path]) == EXIT_OK
        out = capsys.readouterr().out
        assert "completed 1 step;" in out
        assert "free-part order ladder: 4 -> eliminated" in out

    def test_normal_form_is_a_fixed_point(self, workspace, capsys):
        root, _, out = workspace
        doc = dim6_doc(field={"terms_file": "out/normal_form.txt"})
        path = write(root, doc, "refeed.json")
        assert run(["normalize", path]) == EXIT_OK
        assert "completed 0 steps" in capsys.readouterr().out

    def test_planted_resonant_term_stops_with_exit_3(self, tmp_path, capsys):
        doc = dim6_doc(
            field={"terms": DIAGONAL_LINES + ["1+ | 2+^2 | 1/1 0/1"]}
        )
        path = write(tmp_path, doc)
        report = tmp_path / "report.json"
        code = run(["normalize", path, "--json", str(report)])
        assert code == EXIT_HYPOTHESIS
        err = capsys.readouterr().err
        assert "2+^2" in err and "1+" in err
        assert not report.exists()


class TestVerify:
    def test_tangency_and_scaling_report(self, workspace, tmp_path, capsys):
        _, problem, out = workspace
        report_path = tmp_path / "verify.json"
        csv_path = tmp_path / "table.csv"
        code = run(
            [
                "verify",
                problem,
                "--transform",
                out,
                "--json",
                str(report_path),
                "--csv",
                str(csv_path),
            ]
        )
        assert code == EXIT_OK
        assert "tangency: ok" in capsys.readouterr().out
        report = json.loads(report_path.read_text())
        assert report["tangency"]["ok"] is True
        assert report["tangency"]["offender_count"] == 0
        rows = report["conjugacy"]["rows"]
        assert [row["rho"] for row in rows] == [0.05, 0.025, 0.0125]
        assert all(row["off_sigma_error"] > 0 for row in rows)
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "rho,on_sigma_error,off_sigma_error"
        assert len(lines) == 4

    def test_zero_horizon_gives_zero_error_rows(self, workspace, capsys):
        root, _, out = workspace
        doc = dim6_doc(field={"seed": 3}, flow={"horizon": 0.0, "steps": 16})
        path = write(root, doc, "zero_horizon.json")
        assert run(["verify", path, "--transform", out]) == EXIT_OK
        assert "on-sigma 0.000000e+00" in capsys.readouterr().out

    def test_missing_artifacts(self, workspace, tmp_path, capsys):
        _, problem, _ = workspace
        code = run(["verify", problem, "--transform", str(tmp_path)])
        assert code == EXIT_INPUT
        assert "normalize --out" in capsys.readouterr().err


class TestDiophantine:
    def test_flags_override_problem_section(self, tmp_path, capsys):
        doc = dim6_doc(diophantine={"tau": 3.0, "degree_bound": 3})
        path = write(tmp_path, doc)
        report_path = tmp_path / "report.json"
        code = run(
            [
                "diophantine",
                path,
                "--tau",
                "2",
                "--degree",
                "5",
                "--json",
                str(report_path),
            ]
        )
        assert code == EXIT_OK
        capsys.readouterr()
        dio = json.loads(report_path.read_text())["diophantine"]
        assert dio["tau"] == 2.0
        assert dio["degree_bound"] == 5
        assert dio["gamma_max"] == pytest.approx(8.0)

    def test_parameters_required_somewhere(self, tmp_path, capsys):
        path = write(tmp_path, dim6_doc())
        assert run(["diophantine", path]) == EXIT_INPUT
        assert "--tau and --degree" in capsys.readouterr().err


class TestDeterminism:
    def test_reports_byte_identical_across_thread_counts(
        self, workspace, tmp_path, capsys
    ):
        _, problem, out = workspace
        blobs = []
        for threads in ("1", "4"):
            report_path = tmp_path / ("verify_%s.json" % threads)
            code = run(
                [
                    "verify",
                    problem,
                    "--transform",
                    out,
                    "--threads",
                    threads,
                    "--json",
                    str(report_path),
                ]
            )
            assert code == EXIT_OK
            blobs.append(report_path.read_bytes())
        capsys.readouterr()
        assert blobs[0] == blobs[1]
        assert b"threads" not in blobs[0]

    def test_repeated_runs_byte_identical(self, tmp_path, capsys):
        doc = dim6_doc(diophantine={"tau": 2.0, "degree_bound": 4})
        path = write(tmp_path, doc)
        blobs = []
        for attempt in range(2):
            report_path = tmp_path / ("analyze_%d.json" % attempt)
            assert run(["analyze", path, "--json", str(report_path)]) == EXIT_OK
            blobs.append(report_path.read_bytes())
        capsys.readouterr()
        assert blobs[0] == blobs[1]


class TestExitCodes:
    def test_model_error_for_dependent_symbol_values(self, tmp_path, capsys):
        doc = {
            "schema_version": 1,
            "model": {
                "name": "degenerate",
                "symbols": {"a": 1, "b": 2},
                "modes": {"1+": {"a": 1}, "2+": {"b": 1}, "3+": {"a": -1}},
            },
            "truncation": {"mode_cutoff": 3, "degree_cutoff": 6},
            "field": {
                "terms": [
                    "1+ | 1+^1 | 1/1 0/1",
                    "2+ | 2+^1 | 2/1 0/1",
                    "3+ | 3+^1 | -1/1 0/1",
                ]
            },
        }
        path = write(tmp_path, doc)
        assert run(["analyze", path]) == EXIT_MODEL
        assert "model error:" in capsys.readouterr().err

    def test_model_error_for_zero_eigenvalue(self, tmp_path, capsys):
        doc = {
            "schema_version": 1,
            "model": {
                "name": "flat",
                "symbols": {"a": 1},
                "modes": {"1+": {"a": 1}, "2+": {"a": 0}},
            },
            "truncation": {"mode_cutoff": 2, "degree_cutoff": 4},
            "field": {"terms": ["1+ | 1+^1 | 1/1 0/1"]},
        }
        path = write(tmp_path, doc)
        assert run(["analyze", path]) == EXIT_MODEL
        assert "nondegenerate" in capsys.readouterr().err

    def test_problem_file_error_is_input_error(self, tmp_path):
        with pytest.raises(ProblemFileError):
            load_problem(str(tmp_path / "absent.json"))
