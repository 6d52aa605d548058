"""End-to-end tests of the command-line interface."""

import itertools
import json
from fractions import Fraction

import pytest

from trigroup.cayley import ball_from_json_dict, build_ball
from trigroup.cli import main
from trigroup.complexes import abstract_from_walks, dumps_complex
from trigroup.presentation import relator_count, sample_presentation
from trigroup.thresholds import constants_sweep

_counter = itertools.count()


@pytest.fixture(scope="module")
def pres_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "pres.json"
    path.write_text(sample_presentation(3, Fraction(1, 4), 7).dumps())
    return str(path)


@pytest.fixture(scope="module")
def complex_files(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli-complexes")
    mirror = abstract_from_walks([(1, 2, 3), (-3, -2, -1)], [1, 1])
    shared = abstract_from_walks([(1, 2, 3), (-1, 4, 5)], [1, 2])
    repeated = abstract_from_walks([(1, 1, 2)], [1])
    paths = {}
    for name, Y in (("mirror", mirror), ("shared", shared), ("repeated", repeated)):
        p = base / f"{name}.json"
        p.write_text(dumps_complex(Y))
        paths[name] = str(p)
    return paths


@pytest.fixture(scope="module")
def ball_file(tmp_path_factory, pres_file):
    path = tmp_path_factory.mktemp("cli-ball") / "ball.json"
    assert main(["ball", "--presentation", pres_file, "--radius", "2",
                 "--out", str(path)]) == 0
    return str(path)


def run(tmp_path, *argv):
    out = tmp_path / f"out_{next(_counter)}.json"
    status = main([*argv, "--out", str(out)])
    return status, out.read_bytes()


def run_json(tmp_path, *argv):
    status, blob = run(tmp_path, *argv)
    return status, json.loads(blob)


class TestSample:
    def test_fixed_format_fields(self, tmp_path):
        status, doc = run_json(tmp_path, "sample", "--m", "4", "--d", "1/3",
                               "--seed", "11")
        assert status == 0
        assert doc["m"] == 4
        assert doc["d"] == "1/3"
        assert doc["seed"] == 11
        assert len(doc["relators"]) == relator_count(4, Fraction(1, 3))

    def test_matches_library_sampler(self, tmp_path):
        _, doc = run_json(tmp_path, "sample", "--m", "4", "--d", "1/3",
                          "--seed", "11")
        p = sample_presentation(4, Fraction(1, 3), 11)
        assert doc["relators"] == p.to_json()["relators"]

    def test_bad_density(self, tmp_path, capsys):
        assert main(["sample", "--m", "2", "--d", "3/2", "--seed", "1"]) == 2
        assert "density" in capsys.readouterr().err


class TestWords:
    def test_count_check_passes(self, tmp_path):
        status, doc = run_json(tmp_path, "words", "--m", "3")
        assert status == 0
        assert doc["count"] == doc["expected"] == 5**3 + 1
        assert doc["matches"] is True
        assert "words" not in doc

    def test_list_flag(self, tmp_path):
        _, doc = run_json(tmp_path, "words", "--m", "1", "--list")
        assert sorted(doc["words"]) == ["A", "AAA", "a", "aaa"][:doc["count"]] or \
            len(doc["words"]) == doc["count"]

    def test_cap_suggests_override(self, tmp_path, capsys):
        assert main(["words", "--m", "12"]) == 2
        assert "--max-m 12" in capsys.readouterr().err
        status, doc = run_json(tmp_path, "words", "--m", "12", "--max-m", "12")
        assert status == 0 and doc["matches"]


class TestComplexDiagnostics:
    def test_cancel_mirror(self, tmp_path, complex_files):
        status, doc = run_json(tmp_path, "cancel", "--complex", complex_files["mirror"])
        assert status == 0
        assert doc["cancel"] == 3
        assert doc["degrees"] == [2, 2, 2]
        assert doc["contributions"] == [1, 1, 1]

    def test_red_mirror(self, tmp_path, complex_files):
        status, doc = run_json(tmp_path, "red", "--complex", complex_files["mirror"])
        assert status == 0
        assert doc["red"] == 1
        assert doc["chain"]["holds"] is True
        assert doc["chain"]["cancel"] == 3

    def test_missing_file(self, capsys):
        assert main(["cancel", "--complex", "nope.json"]) == 2
        assert "nope.json" in capsys.readouterr().err

    def test_missing_field_named(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"vertices": 1, "edges": []}')
        assert main(["red", "--complex", str(bad)]) == 2
        assert "missing field 'faces'" in capsys.readouterr().err

    def test_face_fields_named(self, tmp_path, capsys):
        bad = tmp_path / "badface.json"
        bad.write_text('{"vertices": 1, "edges": [], "faces": [{"boundary": [1]}]}')
        assert main(["red", "--complex", str(bad)]) == 2
        assert "'index'" in capsys.readouterr().err


class TestEnumDiagrams:
    def test_report(self, tmp_path, pres_file):
        status, doc = run_json(tmp_path, "enum-diagrams", "--presentation", pres_file,
                               "--max-faces", "3", "--epsilon", "1/25")
        assert status == 0
        assert doc["identity_holds"] and doc["equivalence_holds"]
        assert doc["total"] == len(doc["diagrams"]) > 0

    def test_cap_violation(self, pres_file, capsys):
        assert main(["enum-diagrams", "--presentation", pres_file,
                     "--max-faces", "7"]) == 2
        assert "--face-cap 7" in capsys.readouterr().err

    def test_cap_override(self, tmp_path, pres_file):
        status, _ = run(tmp_path, "enum-diagrams", "--presentation", pres_file,
                        "--max-faces", "6", "--face-cap", "6")
        assert status == 0


class TestFulfil:
    def test_exact_pass(self, tmp_path, complex_files):
        status, doc = run_json(tmp_path, "fulfil", "--complex",
                               complex_files["shared"], "--m", "2", "--exact")
        assert status == 0
        assert doc["all_hold"] is True
        assert [lvl["level"] for lvl in doc["levels"]] == [1, 2]
        assert doc["levels"][0]["count"] == 28
        assert doc["support"] == 28

    def test_exact_nominal_violation_exits_nonzero(self, tmp_path, complex_files):
        # a face spelling (e, e, f) forces a repeated letter; the nominal
        # ratio bound fails while the guaranteed form still holds
        status, doc = run_json(tmp_path, "fulfil", "--complex",
                               complex_files["repeated"], "--m", "2", "--exact")
        assert status == 1
        assert doc["all_hold"] is False
        assert doc["all_hold_guaranteed"] is True

    def test_montecarlo(self, tmp_path, complex_files):
        status, doc = run_json(tmp_path, "fulfil", "--complex",
                               complex_files["shared"], "--m", "2",
                               "--trials", "500", "--seed", "9")
        assert status == 0
        assert doc["mode"] == "montecarlo"
        assert doc["trials"] == 500
        assert 0 <= doc["wilson_low"] <= doc["estimate"] <= doc["wilson_high"] <= 1

    def test_m_cap(self, complex_files, capsys):
        assert main(["fulfil", "--complex", complex_files["shared"],
                     "--m", "5", "--exact"]) == 2
        assert "--max-m 5" in capsys.readouterr().err


class TestPipeline:
    def test_frozen_values(self, tmp_path):
        status, doc = run_json(tmp_path, "pipeline", "--d0", "7/20")
        assert status == 0
        assert (doc["k"], doc["delta"], doc["L"]) == (3, "40", 128162)
        assert doc["N"] == 3 * 192162**2
        assert doc["upper_bound"] < doc["lower_bound"]

    def test_precision_flag(self, tmp_path):
        _, doc = run_json(tmp_path, "pipeline", "--d0", "7/20",
                          "--precision", "20")
        # 20 significant digits: mantissa has 20 digits plus the point
        mantissa = doc["precise"]["d_crit"].split("e")[0].replace(".", "")
        assert len(mantissa.lstrip("0")) == 20

    def test_supercritical_rejected(self, capsys):
        assert main(["pipeline", "--d0", "2/5"]) == 2
        assert "critical density" in capsys.readouterr().err


class TestSweep:
    def test_rows_and_csv(self, tmp_path):
        csv_path = tmp_path / "sweep.csv"
        status, doc = run_json(tmp_path, "sweep", "--d0-grid", "3/10,7/20",
                               "--csv", str(csv_path))
        assert status == 0
        assert doc["rows"] == constants_sweep([Fraction(3, 10), Fraction(7, 20)])
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "d0,k,L,N"
        assert lines[1].startswith("3/10,2,")
        assert len(lines) == 3
        assert doc["csv"] == csv_path.read_text()


class TestBall:
    def test_output_loads_as_ball(self, ball_file, pres_file):
        data = json.loads(open(ball_file).read())
        g = ball_from_json_dict(data)
        p = sample_presentation(3, Fraction(1, 4), 7)
        assert g == build_ball(p, 2)

    def test_radius_cap(self, pres_file, capsys):
        assert main(["ball", "--presentation", pres_file, "--radius", "20"]) == 2
        assert "--radius-cap 20" in capsys.readouterr().err

    def test_vertex_budget_message(self, pres_file, capsys):
        assert main(["ball", "--presentation", pres_file, "--radius", "3",
                     "--max-vertices", "5"]) == 2
        assert "--max-vertices" in capsys.readouterr().err


class TestDeltaEst:
    def test_estimate(self, tmp_path, ball_file):
        status, doc = run_json(tmp_path, "delta-est", "--graph", ball_file,
                               "--samples", "200", "--seed", "3")
        assert status == 0
        assert doc["estimate"] >= 0
        assert doc["closed_vertices"] >= 3

    def test_format_tag(self, tmp_path, capsys):
        bad = tmp_path / "notball.json"
        bad.write_text('{"vertices": []}')
        assert main(["delta-est", "--graph", str(bad)]) == 2
        assert "format tag" in capsys.readouterr().err


class TestFig1Demo:
    def test_passes(self, tmp_path):
        status, doc = run_json(tmp_path, "fig1-demo")
        assert status == 0
        assert doc["all_checks_pass"] is True
        assert doc["hausdorff_distance"] == 1


class TestChainCheck:
    def test_fuzz_clean(self, tmp_path):
        status, doc = run_json(tmp_path, "chain-check", "--count", "300",
                               "--seed", "5")
        assert status == 0
        assert doc["checked"] == 300
        assert doc["violations"] == 0
        assert doc["first_violation"] is None


class TestPlumbing:
    def test_meta_block(self, tmp_path):
        _, doc = run_json(tmp_path, "words", "--m", "2", "--seed", "4")
        meta = doc["meta"]
        assert meta["tool"] == "trigroup"
        assert meta["seed"] == 4
        assert meta["config"]["subcommand"] == "words"
        assert meta["config"]["m"] == 2
        assert "version" in meta

    def test_env_seed_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TRIGROUP_SEED", "42")
        _, doc = run_json(tmp_path, "sample", "--m", "2", "--d", "1/3")
        assert doc["seed"] == 42

    def test_flag_overrides_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TRIGROUP_SEED", "42")
        _, doc = run_json(tmp_path, "sample", "--m", "2", "--d", "1/3",
                          "--seed", "5")
        assert doc["seed"] == 5

    def test_bad_env_seed(self, monkeypatch, capsys):
        monkeypatch.setenv("TRIGROUP_SEED", "pi")
        assert main(["words", "--m", "2"]) == 2
        assert "TRIGROUP_SEED" in capsys.readouterr().err

    def test_workers_accepted_but_sequential(self, tmp_path, pres_file):
        _, doc1 = run_json(tmp_path, "enum-diagrams", "--presentation", pres_file,
                           "--workers", "1")
        _, doc4 = run_json(tmp_path, "enum-diagrams", "--presentation", pres_file,
                           "--workers", "4")
        doc1.pop("meta")
        doc4.pop("meta")
        assert doc1 == doc4

    def test_workers_positive(self, capsys):
        assert main(["words", "--m", "2", "--workers", "0"]) == 2
        assert "--workers" in capsys.readouterr().err

    def test_stdout_when_no_out_flag(self, capsys):
        assert main(["words", "--m", "2"]) == 0
        captured = capsys.readouterr()
        doc = json.loads(captured.out)
        assert doc["matches"] is True
        # wall-clock goes to stderr only
        assert "elapsed" in captured.err
        assert "elapsed" not in captured.out


DETERMINISM_CASES = [
    ("sample", "--m", "4", "--d", "1/3", "--seed", "11"),
    ("words", "--m", "3", "--list"),
    ("pipeline", "--d0", "7/20"),
    ("sweep", "--d0-grid", "3/10,7/20"),
    ("fig1-demo",),
    ("chain-check", "--count", "100", "--seed", "5"),
]


class TestByteDeterminism:
    @pytest.mark.parametrize("argv", DETERMINISM_CASES, ids=lambda a: a[0])
    def test_repeat_runs_identical(self, tmp_path, argv):
        _, first = run(tmp_path, *argv)
        _, second = run(tmp_path, *argv)
        assert first == second

    def test_file_based_subcommands(self, tmp_path, pres_file, complex_files,
                                    ball_file):
        cases = [
            ("enum-diagrams", "--presentation", pres_file, "--epsilon", "1/25"),
            ("ball", "--presentation", pres_file, "--radius", "2"),
            ("delta-est", "--graph", ball_file, "--samples", "100", "--seed", "2"),
            ("cancel", "--complex", complex_files["mirror"]),
            ("red", "--complex", complex_files["mirror"]),
            ("fulfil", "--complex", complex_files["shared"], "--m", "2", "--exact"),
            ("fulfil", "--complex", complex_files["shared"], "--m", "2",
             "--trials", "300", "--seed", "6"),
        ]
        for argv in cases:
            _, first = run(tmp_path, *argv)
            _, second = run(tmp_path, *argv)
            assert first == second, argv[0]
