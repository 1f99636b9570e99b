import argparse
import io
import json
import re

import numpy as np
import pytest

from _synth import IDS, SPACE, random_profile
from modcast.cli import int_list, main, metric_list, non_negative_float, positive_int, probability, seed_list
from modcast.io import append_results, save_csv
from modcast.pipeline import config_to_known_model
from modcast.selector import BoostedEnsemble, FEATURE_NAMES, parse_config_id
from modcast.synthetic import sinusoid_trend

BEST = "in0-sd1-temporal-none-mlp"  # the DLinear row


def run(argv):
    buf = io.StringIO()
    status = main([str(a) for a in argv], out=buf)
    return status, buf.getvalue()


def result_rows(dataset, scores, lookback=96, horizon=24):
    rows = []
    for cid, (mse, mae) in scores.items():
        cols = parse_config_id(cid)
        row = dict(dataset=dataset, horizon=horizon, task="multivariate", seed=0, lookback=lookback, status="ok", mse=mse, mae=mae)
        row.update({"in": cols["IN"], "sd": cols["SD"], "fusion": cols["fusion"], "embed": cols["embed"], "ff": cols["arch"]})
        rows.append(row)
    return rows


def profile_json(path, profile, dataset):
    doc = {"dataset": dataset, "lookback": 96, "horizon": 24}
    doc.update({k: getattr(profile, k) for k in ("trend", "seasonality", "stationarity", "shifting", "transition", "correlation", "n_feature", "hl_ratio")})
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def syn_csv(tmp_path):
    path = tmp_path / "syn.csv"
    save_csv(path, sinusoid_trend(300, 2, period=24), ["a", "b"], with_date=True)
    return path


# --- validators ------------------------------------------------------------------------
def test_numeric_validators():
    assert positive_int("3") == 3 and non_negative_float("0") == 0.0 and probability("0.5") == 0.5
    assert int_list("24, 48") == [24, 48] and seed_list("0,1") == [0, 1]
    assert metric_list("mse,mae") == ["mse", "mae"]
    for fn, bad in [(positive_int, "0"), (positive_int, "x"), (non_negative_float, "-1"), (non_negative_float, "nan"),
                    (probability, "1.5"), (int_list, "4,-2"), (int_list, ""), (seed_list, "a"), (metric_list, "mse,rmse")]:
        with pytest.raises(argparse.ArgumentTypeError):
            fn(bad)


def test_usage_errors():
    assert run(["bogus"])[0] == 2
    assert run(["profile", "--data", "x.csv", "--lookback", "-4", "--horizon", "2"])[0] == 2
    assert run(["rank", "--results", "r.csv", "--unknown"])[0] == 2
    assert run([])[0] == 2


def test_missing_file_is_an_error(tmp_path, capsys):
    status, _ = run(["profile", "--data", tmp_path / "none.csv", "--lookback", 8, "--horizon", 4])
    assert status == 1 and "error" in capsys.readouterr().err


# --- subcommands -----------------------------------------------------------------------
def test_rank_reproduces_worked_example(tmp_path):
    path = tmp_path / "r.csv"
    append_results(path, result_rows("d", {IDS[0]: (1.0, 2.0), IDS[1]: (2.0, 1.0), IDS[2]: (3.0, 3.0)}))
    status, text = run(["rank", "--results", path, "--metrics", "mse,mae"])
    assert status == 0
    lines = text.splitlines()
    assert lines[0] == "# d/multivariate/L96/H24"
    assert f"{IDS[0]},1,2,1.5" in lines and f"{IDS[2]},3,3,3" in lines


def test_profile_hl_ratio(syn_csv, tmp_path):
    status, text = run(["profile", "--data", syn_csv, "--lookback", 36, "--horizon", 24, "--period", 24, "--out", tmp_path / "p.txt"])
    assert status == 0
    doc = dict(line.split("=", 1) for line in text.splitlines())
    assert float(doc["hl_ratio"]) == pytest.approx(0.6667, abs=1e-4)
    assert doc["n_feature"] == "2" and doc["dataset"] == "syn"
    assert (tmp_path / "p.txt").read_text() == text


def test_profile_output_is_byte_identical(syn_csv):
    argv = ["profile", "--data", syn_csv, "--lookback", 36, "--horizon", 24, "--target", "a"]
    first, second = run(argv), run(argv)
    assert first == second and "correlation=absent" in first[1]


def test_run_prints_metrics(syn_csv):
    status, text = run(["run", "--data", syn_csv, "--config", BEST, "--lookback", 24, "--horizon", 12, "--period", 24, "--epochs", 1])
    assert status == 0
    doc = dict(line.split("=", 1) for line in text.splitlines())
    assert doc["known_model"] == "DLinear" and doc["status"] == "ok"
    assert float(doc["mse"]) >= 0 and doc["mase"] == "undefined"
    assert run(["run", "--data", syn_csv, "--config", "in1-sd1-temporal-freq-rnn", "--lookback", 24, "--horizon", 12])[0] == 1


def test_benchmark_and_resume(syn_csv, tmp_path):
    out = tmp_path / "r.csv"
    argv = ["benchmark", "--data", syn_csv, "--lookbacks", 24, "--horizons", 12, "--configs", f"{BEST},{IDS[0]}",
            "--seeds", "0,1", "--epochs", 1, "--out", out]
    status, text = run(argv)
    assert status == 0 and text.startswith("rows=4 new_runs=4 failures=0")
    assert run(argv)[1].startswith("rows=4 new_runs=0")


def test_recommend_from_saved_model(tmp_path):
    model = BoostedEnsemble([], 0.1, 0.0, len(FEATURE_NAMES), FEATURE_NAMES)
    model.save(tmp_path / "m.bin")
    p = profile_json(tmp_path / "p.json", random_profile(np.random.default_rng(0)), "x")
    status, text = run(["recommend", "--profile", p, "--model", tmp_path / "m.bin", "--k", 3])
    lines = text.splitlines()
    assert status == 0 and len(lines) == 3
    for i, (line, c) in enumerate(zip(lines, SPACE[:3]), start=1):
        name = config_to_known_model(c)
        assert line == f"{i}. {c.config_id}" + (f"  ({name})" if name else "")


def test_recommend_fits_and_annotates_known_names(tmp_path):
    rng = np.random.default_rng(1)
    results, profiles = tmp_path / "r.csv", []
    best = parse_config_id(BEST)
    for s in range(3):
        # every column of the DLinear row is individually better, plus noise
        scores = {}
        for cid in IDS:
            v = sum(value != best[col] for col, value in parse_config_id(cid).items()) + 0.1 * rng.standard_normal()
            scores[cid] = (v, v)
        append_results(results, result_rows(f"d{s}", scores))
        profiles.append(profile_json(tmp_path / f"p{s}.json", random_profile(rng), f"d{s}"))
    query = profile_json(tmp_path / "q.json", random_profile(rng), "new")
    status, text = run(["recommend", "--profile", query, "--results", results, "--profiles", *profiles,
                        "--model", tmp_path / "m.bin", "--k", 3])
    lines = text.splitlines()
    assert status == 0 and len(lines) == 3
    assert lines[0] == f"1. {BEST}  (DLinear)"
    assert all(re.fullmatch(r"\d\. in[01]-sd[01]-\w+-\w+-\w+(  \(.+\))?", line) for line in lines)
    # the fitted model was written and reloads to the same answer
    assert run(["recommend", "--profile", query, "--model", tmp_path / "m.bin", "--k", 3]) == (0, text)


def test_analyze_prints_claims_table(tmp_path):
    rng = np.random.default_rng(2)
    results, profiles = tmp_path / "r.csv", []
    for s in range(6):
        scores = {cid: (float(v), float(v)) for cid, v in zip(IDS, rng.uniform(1, 10, len(IDS)))}
        append_results(results, result_rows(f"d{s}", scores))
        profiles.append(profile_json(tmp_path / f"p{s}.json", random_profile(rng), f"d{s}"))
    status, text = run(["analyze", "--results", results, "--profiles", *profiles, "--notes"])
    assert status == 0 and text
