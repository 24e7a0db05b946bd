"""CLI tests: every subcommand, config merging, error reporting."""

import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from blocksky.cli import main, parse_functions
from blocksky.datamodel import save_dataset
from tests.synth import AttributeProfile, clustered_dataset


@pytest.fixture(scope="module")
def data_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli-data")
    rng = np.random.default_rng(31)
    profiles = [AttributeProfile("name", 0.95, 30),
                AttributeProfile("city", 0.85, 10),
                AttributeProfile("code", 0.4, 5)]
    ds, truth = clustered_dataset(rng, n_clusters=12, cluster_size=3,
                                  profiles=profiles, n_singletons=4)
    dataset_path = root / "records.csv"
    save_dataset(ds, dataset_path)
    truth_path = root / "truth.csv"
    with truth_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        for pair in sorted(truth, key=lambda p: (p.left, p.right)):
            writer.writerow([pair.left, pair.right])
    return {"dataset": str(dataset_path), "truth": str(truth_path)}


def run_cli(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


def base_args(data_files):
    return ["--dataset", data_files["dataset"],
            "--truth", data_files["truth"], "--functions", "exact"]


def test_learn_writes_report(data_files, tmp_path):
    out = tmp_path / "report.json"
    log = tmp_path / "labels.log"
    result = run_cli("learn", *base_args(data_files),
                     "--algorithm", "pro_sky", "--budget", "120",
                     "--l", "2", "--seed", "4",
                     "--out", str(out), "--log", str(log))
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    assert payload["points"]
    for point in payload["points"]:
        assert {"scheme", "pc_empirical", "pq_empirical",
                "pc_exact", "pq_exact", "rr", "fm"} <= set(point)
    assert log.read_text().startswith("# budget=120")


def test_learn_asl_report_to_stdout(data_files):
    result = run_cli("learn", *base_args(data_files),
                     "--algorithm", "asl", "--budget", "80",
                     "--epsilon", "0.5", "--k", "10", "--seed", "2")
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["scheme"]["scheme"]
    assert payload["trace"]["algorithm"] == "asl"


def test_skyline_accepts_aliases_and_rejects_asl(data_files):
    ok = run_cli("skyline", *base_args(data_files),
                 "--algorithm", "pro", "--budget", "120", "--l", "2")
    assert ok.exit_code == 0, ok.output
    bad = run_cli("skyline", *base_args(data_files),
                  "--algorithm", "asl", "--budget", "80",
                  "--epsilon", "0.5")
    assert bad.exit_code != 0
    assert "algorithm must be one of" in bad.output


def test_replay_reproduces_learn(data_files, tmp_path):
    out_first = tmp_path / "first.json"
    log = tmp_path / "labels.log"
    args = base_args(data_files) + ["--algorithm", "active_sky",
                                    "--delta", "0.25", "--seed", "3"]
    first = run_cli("learn", *args, "--budget", "120",
                    "--out", str(out_first), "--log", str(log))
    assert first.exit_code == 0, first.output
    out_second = tmp_path / "second.json"
    second = run_cli("replay", *args, "--log", str(log),
                     "--out", str(out_second))
    assert second.exit_code == 0, second.output
    assert out_first.read_bytes() == out_second.read_bytes()


def test_cs_command(data_files, tmp_path):
    out = tmp_path / "cs.json"
    result = run_cli("cs", *base_args(data_files),
                     "--algorithm", "asl", "--budget", "200",
                     "--epsilon", "0.5", "--repetitions", "4",
                     "--base-seed", "1", "--out", str(out))
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    assert payload["repetitions"] == 4
    assert sum(o["count"] for o in payload["outcomes"]) == 4
    assert 0.0 < payload["max_cs"] <= 1.0


def test_sweep_command_with_csv(data_files, tmp_path):
    out = tmp_path / "sweep.json"
    table = tmp_path / "sweep.csv"
    result = run_cli("sweep", *base_args(data_files),
                     "--algorithm", "asl", "--budget", "60",
                     "--epsilon", "0.5", "--repetitions", "3",
                     "--target-cs", "0.9", "--step", "60", "--cap", "600",
                     "--out", str(out), "--csv", str(table))
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    assert payload["target_cs"] == 0.9
    assert len(payload["rows"]) == 1
    lines = table.read_text().splitlines()
    assert lines[0] == "epsilon,budget,cs"
    assert len(lines) == 2


def test_compare_command(data_files, tmp_path):
    report = tmp_path / "sky.json"
    learn = run_cli("learn", *base_args(data_files),
                    "--algorithm", "pro_sky", "--budget", "150",
                    "--l", "2", "--seed", "4", "--out", str(report))
    assert learn.exit_code == 0, learn.output
    out = tmp_path / "compare.json"
    result = run_cli("compare", *base_args(data_files),
                     "--skyline", str(report),
                     "--preset", "name-exact=(name.exact_match)",
                     "--out", str(out))
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    (preset,) = payload["presets"]
    assert preset["name"] == "name-exact"
    assert set(preset["measures"]) == {"scheme", "pc", "pq", "rr", "fm"}
    assert payload["skyline"]


def test_config_file_supplies_defaults_and_flags_override(data_files,
                                                          tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({
        "dataset": data_files["dataset"], "truth": data_files["truth"],
        "functions": "exact", "algorithm": "asl", "budget": 80,
        "epsilon": 0.5, "k": 10, "seed": 2}))
    from_config = run_cli("learn", "--config", str(config))
    assert from_config.exit_code == 0, from_config.output
    overridden = run_cli("learn", "--config", str(config), "--seed", "3",
                         "--budget", "60")
    assert overridden.exit_code == 0, overridden.output
    assert json.loads(overridden.output)["trace"]["rounds"] is not None
    assert json.loads(from_config.output) != json.loads(overridden.output)


def test_missing_inputs_fail_cleanly(data_files):
    no_dataset = run_cli("learn", "--algorithm", "asl", "--budget", "50",
                         "--epsilon", "0.5")
    assert no_dataset.exit_code != 0
    assert "--dataset" in no_dataset.output
    no_truth = run_cli("learn", "--dataset", data_files["dataset"],
                       "--algorithm", "asl", "--budget", "50",
                       "--epsilon", "0.5")
    assert no_truth.exit_code != 0
    assert "--truth" in no_truth.output
    two_eps = run_cli("learn", *base_args(data_files),
                      "--algorithm", "asl", "--budget", "50",
                      "--epsilon", "0.4,0.6")
    assert two_eps.exit_code != 0
    assert "exactly one" in two_eps.output


def test_parse_functions_variants():
    funcs = parse_functions("exact,soundex,metaphone,substring:3")
    assert len(funcs) == 4
    with pytest.raises(Exception):
        parse_functions("sorcery")


def test_serve_help_mentions_endpoints():
    result = run_cli("serve", "--help")
    assert result.exit_code == 0
    assert "HTTP" in result.output
