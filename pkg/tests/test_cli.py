import csv
import io
import json

import pytest

from learnedbloom.cli import main
from learnedbloom.experiments import SCENARIOS


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    comments = [line[2:] for line in text.splitlines() if line.startswith("# ")]
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    return comments, list(csv.DictReader(io.StringIO(body)))


def model_rows(capsys, *argv):
    code, out, err = run(capsys, "model", *argv)
    assert code == 0, err
    comments, rows = parse_csv(out)
    return comments, {r["quantity"]: r for r in rows}


def test_model_worked_example(capsys):
    comments, rows = model_rows(capsys, "--fp", "0.01", "--fn", "0.5", "--alpha", "0.6185", "--b", "10")
    assert float(rows["learned_fpr"]["value"]) == pytest.approx(0.010066, abs=1e-6)
    assert float(rows["sandwich_fpr_b2_6"]["value"]) == pytest.approx(0.001917, abs=1e-6)
    assert float(rows["b2_star"]["value"]) == pytest.approx(4.78, abs=0.01)
    assert float(rows["sandwich_gain_threshold"]["value"]) == pytest.approx(3.36, abs=0.01)
    assert any("erratum" in c for c in comments)
    assert float(rows["sandwich_fpr_optimal"]["value"]) < float(rows["sandwich_fpr_b2_6"]["value"])


def test_model_other_inputs_have_no_erratum(capsys):
    comments, rows = model_rows(capsys, "--fp", "0.02", "--fn", "0.4")
    assert not any("erratum" in c for c in comments)
    assert "sandwich_fpr_b2_6" not in rows


def test_model_degenerate(capsys):
    _, rows = model_rows(capsys, "--fp", "0", "--fn", "1")
    assert "degenerate_plain" in rows
    assert rows["degenerate_plain"]["value"] == rows["plain_bloom_fpp"]["value"]
    assert rows["b2_star"]["display"] == "undefined"


def test_model_small_budget_clamps(capsys):
    _, rows = model_rows(capsys, "--fp", "0.01", "--fn", "0.5", "--b", "2")
    assert float(rows["split_b1"]["value"]) == 0
    assert float(rows["split_b2"]["value"]) == 2


def test_model_explicit_split(capsys):
    _, rows = model_rows(capsys, "--fp", "0.01", "--fn", "0.5", "--b", "6", "--b1", "2", "--b2", "4")
    assert "sandwich_fpr_given" in rows


def test_model_bad_input_exits_nonzero(capsys):
    code, out, err = run(capsys, "model", "--fp", "1.5", "--fn", "0.5")
    assert code != 0 and out == "" and "error" in err
    with pytest.raises(SystemExit):
        main(["model", "--fp", "abc", "--fn", "0.5"])


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_byte_identical_reruns(capsys, scenario):
    cmd = "bloomier" if scenario == "bloomier-supplement" else "simulate"
    argv = [cmd, "--scenario", scenario, "--seed", "3", "--n-queries", "20000", "--trials", "2"]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first[0] == 0, first[2]
    assert first[1] == second[1]
    assert first[1].startswith("# schema_version=1")


def test_reruns_identical_with_parallel_jobs(capsys):
    argv = ["simulate", "--scenario", "paper-section-5", "--n-queries", "20000", "--trials", "2"]
    _, serial, _ = run(capsys, *argv)
    _, parallel, _ = run(capsys, *argv, "--jobs", "2")
    assert serial == parallel


def test_seed_changes_output(capsys):
    argv = ["simulate", "--scenario", "paper-section-5", "--n-queries", "20000"]
    assert run(capsys, *argv, "--seed", "1")[1] != run(capsys, *argv, "--seed", "2")[1]


def test_range_example_ratio(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", "range-example")
    assert code == 0
    comments, rows = parse_csv(out)
    wide = next(r for r in rows if r["query_hi"] == "1000000")
    narrow = next(r for r in rows if r["query_hi"] == "100000")
    assert float(narrow["empirical_fpr"]) >= 4 * float(wide["empirical_fpr"])
    assert any("0.0022" in c for c in comments)
    for r in rows:
        assert r["model_fpr"] and r["stderr"]


def test_sandwich_beats_learned(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", "paper-section-5", "--n-queries", "200000")
    assert code == 0
    _, rows = parse_csv(out)
    by = {r["structure"]: r for r in rows}
    assert float(by["sandwich"]["empirical_fpr"]) < float(by["learned"]["empirical_fpr"])
    assert float(by["sandwich"]["b1"]) + float(by["sandwich"]["b2"]) == 10


def test_section_4_rows(capsys):
    code, out, _ = run(capsys, "simulate", "--scenario", "paper-section-4", "--n-queries", "50000")
    assert code == 0
    _, rows = parse_csv(out)
    assert [r["structure"] for r in rows] == ["plain", "learned"]


def test_sweep_two_point_grid(capsys):
    code, out, _ = run(capsys, "sweep", "--taus", "0", "1.01")
    assert code == 0
    _, rows = parse_csv(out)
    assert [(float(r["fn"]), float(r["fp"])) for r in rows] == [(0, 1), (1, 0)]


def test_sweep_bucket_monotone(capsys):
    code, out, _ = run(capsys, "sweep", "--oracle", "bucket")
    assert code == 0
    _, rows = parse_csv(out)
    assert len(rows) == 11
    fns = [float(r["fn"]) for r in rows]
    fps = [float(r["fp"]) for r in rows]
    assert fns == sorted(fns) and fps == sorted(fps, reverse=True)
    assert all(r["model_fpr"] and r["total_bits"] and r["fp_stderr"] for r in rows)


def test_bloomier_rows(capsys):
    code, out, _ = run(capsys, "bloomier", "--n-queries", "200000")
    assert code == 0
    comments, rows = parse_csv(out)
    r8 = next(r for r in rows if r["structure"] == "plain" and r["r"] == "8")
    p = 2.0**-8
    assert abs(float(r8["empirical_fpr"]) - p) <= 3 * (p * (1 - p) / 200000) ** 0.5
    assert any("winner=" in c for c in comments)
    assert {r["structure"] for r in rows} == {"plain", "learned", "plain-equal-fpr"}


def test_bloomier_perfect_oracle(capsys):
    code, out, _ = run(capsys, "bloomier", "--value-oracle", "perfect", "--n-queries", "10000")
    assert code == 0
    _, rows = parse_csv(out)
    learned = next(r for r in rows if r["structure"] == "learned")
    assert learned["backup_keys"] == "0"
    assert int(learned["size_bits"]) == int(learned["oracle_bits"])


def test_json_mirrors_csv(capsys):
    argv = ["simulate", "--scenario", "paper-section-5", "--n-queries", "20000"]
    _, text, _ = run(capsys, *argv)
    _, js, _ = run(capsys, *argv, "--format", "json")
    doc = json.loads(js)
    comments, rows = parse_csv(text)
    assert doc["schema_version"] == 1 and doc["command"] == "simulate"
    assert comments[0] == "schema_version=1 command=simulate"
    assert doc["comments"] == comments[1:]
    assert list(rows[0]) == doc["columns"]
    for crow, jrow in zip(rows, doc["rows"]):
        for c in doc["columns"]:
            v = jrow[c]
            assert crow[c] == (repr(v) if isinstance(v, float) else str(v))


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "paper-section-5", "n_queries": 20000, "seed": 4}))
    _, from_file, _ = run(capsys, "simulate", "--config", str(cfg))
    _, from_flags, _ = run(capsys, "simulate", "--scenario", "paper-section-5", "--n-queries", "20000", "--seed", "4")
    assert from_file == from_flags
    # flags override the file
    _, override, _ = run(capsys, "simulate", "--config", str(cfg), "--seed", "5")
    assert override != from_file


@pytest.mark.parametrize("content,needle", [
    ('{"n_keys": 10,}', "cfg.json:1:"),
    ('{"no_such_field": 1}', "no_such_field"),
    ('{"n_keys": -5}', "n_keys"),
    ('{"scenario": "nope"}', "nope"),
    ('{"b1": 3, "b2": 3, "b": 10}', "b1"),
])
def test_config_errors(tmp_path, capsys, content, needle):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(content)
    code, out, err = run(capsys, "simulate", "--config", str(cfg))
    assert code != 0 and out == ""
    assert needle in err


def test_missing_config_file(capsys):
    code, _, err = run(capsys, "simulate", "--config", "/nonexistent/cfg.json")
    assert code != 0 and err
