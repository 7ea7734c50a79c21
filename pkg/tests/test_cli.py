import subprocess
import sys
import time

import pytest

from bootcheck import cli

SUBCOMMANDS = {
    "metric": ["--p", "--q", "--metric", "--ground"],
    "infer": ["--replicates", "--stat", "--theta-n", "--alpha", "--n"],
    "run": ["--config", "--seed", "--workers", "--out"],
    "oracle": ["--config", "--seed", "--n", "--reps", "--out"],
    "selftest": ["--seed", "--perturb-lp"],
}

TINY_YAML = """\
scenario: MeanRoot
seed: 3
ladder: {n: [20, 40], M: [10, 20], N: 4, R: 200}
bl: {cap: 32}
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def main(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_metric_identity(tmp_path, capsys):
    p = write(tmp_path, "p.txt", "0 0.25\n1 0.75\n")
    for metric in ("kolmogorov", "bl"):
        code, out, _ = main(capsys, "metric", "--p", p, "--q", p, "--metric", metric)
        assert code == 0 and out == "0.000000000\n"


def test_metric_bl_point_masses(tmp_path, capsys):
    p = write(tmp_path, "p.txt", "# delta at 0\n0 1\n")
    q = write(tmp_path, "q.txt", "1 1\n")
    code, out, _ = main(capsys, "metric", "--p", p, "--q", q, "--metric", "bl")
    assert code == 0 and out == "1.000000000\n"


def test_metric_kolmogorov_ecdfs(tmp_path, capsys):
    p = write(tmp_path, "p.txt", "1\n2\n3\n")
    q = write(tmp_path, "q.txt", "2\n3\n4\n")
    code, out, _ = main(capsys, "metric", "--p", p, "--q", q)
    assert code == 0 and out == "0.333333333\n"


def test_metric_planar_measures(tmp_path, capsys):
    p = write(tmp_path, "p.txt", "0 0 0.5\n1 1 0.5\n")
    q = write(tmp_path, "q.txt", "0 1 0.5\n1 0 0.5\n")
    code, out, _ = main(capsys, "metric", "--p", p, "--q", q)
    assert code == 0 and out == "0.500000000\n"


@pytest.mark.parametrize(
    "text, message",
    [
        ("0 0.5\n1 0.6\n", "sum"),
        ("0 abc\n", "not a number"),
        ("# only a comment\n", "no data"),
        ("1 0.5\n2\n", "columns"),
        ("0 0 0 1\n", "1, 2 or 3 columns"),
    ],
)
def test_metric_bad_files(tmp_path, capsys, text, message):
    p = write(tmp_path, "p.txt", text)
    q = write(tmp_path, "q.txt", "0 1\n")
    code, _, err = main(capsys, "metric", "--p", p, "--q", q)
    assert code == 2 and message in err


def test_metric_dimension_mismatch(tmp_path, capsys):
    p = write(tmp_path, "p.txt", "0 0 1\n")
    q = write(tmp_path, "q.txt", "0 1\n")
    assert main(capsys, "metric", "--p", p, "--q", q)[0] == 2


def parse_infer(out):
    return dict(line.split(" ", 1) for line in out.strip().splitlines())


def test_infer_zero_replicates(tmp_path, capsys):
    r = write(tmp_path, "r.txt", "0\n" * 20)
    code, out, _ = main(capsys, "infer", "--replicates", r, "--stat", "1", "--n", "100")
    fields = parse_infer(out)
    assert code == 0 and fields["ci_lower"] == "1" and fields["ci_upper"] == "1"


def test_infer_order_statistic(tmp_path, capsys):
    r = write(tmp_path, "r.txt", "\n".join(str(k) for k in range(1, 11)))
    code, out, _ = main(capsys, "infer", "--replicates", r, "--stat", "7.5", "--alpha", "0.3", "--n", "10")
    fields = parse_infer(out)
    assert code == 0
    assert fields["critical"] == "7" and fields["reject"] == "true" and fields["p_value"] == "0.3"


def test_infer_stat_above_replicates(tmp_path, capsys):
    r = write(tmp_path, "r.txt", "1\n2\n3\n")
    _, out, _ = main(capsys, "infer", "--replicates", r, "--stat", "9", "--n", "5")
    assert parse_infer(out)["p_value"] == "0"


def test_infer_input_errors(tmp_path, capsys):
    r = write(tmp_path, "r.txt", "1 2\n")
    assert main(capsys, "infer", "--replicates", r, "--stat", "0", "--n", "5")[0] == 2
    r = write(tmp_path, "s.txt", "1\n")
    assert main(capsys, "infer", "--replicates", r, "--stat", "0", "--n", "5", "--alpha", "0.6")[0] == 2
    assert main(capsys, "infer", "--replicates", str(tmp_path / "missing"), "--stat", "0", "--n", "5")[0] == 2


def test_run_bad_config_path(tmp_path, capsys):
    code, _, err = main(capsys, "run", "--config", str(tmp_path / "missing.yaml"))
    assert code == 2 and "cannot read" in err


def test_run_invalid_config(tmp_path, capsys):
    cfg = write(tmp_path, "c.yaml", "scenario: MeanRoot\nladder: {n: [50, 50], M: [1, 2]}\n")
    code, _, err = main(capsys, "run", "--config", cfg)
    assert code == 2 and "ladder.n" in err


def test_run_prints_summary_and_is_worker_independent(tmp_path, capsys):
    cfg = write(tmp_path, "c.yaml", TINY_YAML)
    code, out, _ = main(capsys, "run", "--config", cfg, "--out", str(tmp_path / "a"), "--workers", "1")
    assert code == 0
    assert "config schema version 1" in out and "[d]" in out and "PASS" in out
    code, _, _ = main(capsys, "run", "--config", cfg, "--out", str(tmp_path / "b"), "--workers", "8")
    assert code == 0
    assert (tmp_path / "a" / "records.jsonl").read_bytes() == (tmp_path / "b" / "records.jsonl").read_bytes()


def test_run_seed_override(tmp_path, capsys):
    cfg = write(tmp_path, "c.yaml", TINY_YAML)
    main(capsys, "run", "--config", cfg, "--out", str(tmp_path / "a"))
    main(capsys, "run", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "4")
    assert "seed: 4" in (tmp_path / "b" / "config.resolved.yaml").read_text()
    assert (tmp_path / "a" / "records.jsonl").read_bytes() != (tmp_path / "b" / "records.jsonl").read_bytes()


def test_run_failed_check_exits_one(tmp_path, capsys):
    cfg = write(tmp_path, "c.yaml", TINY_YAML + "expect: inconsistent\nthreshold: 0.9\n")
    code, out, _ = main(capsys, "run", "--config", cfg, "--out", str(tmp_path / "o"))
    assert code == 1 and "FAIL" in out


def test_internal_error_exits_three(tmp_path, capsys, monkeypatch):
    def broken(*args, **kwargs):
        raise KeyError("unexpected")

    monkeypatch.setattr(cli, "run_experiment", broken)
    code, _, err = main(capsys, "run", "--config", write(tmp_path, "c.yaml", TINY_YAML))
    assert code == 3 and "internal error" in err


def test_oracle_output_is_a_measure_file(tmp_path, capsys):
    cfg = write(tmp_path, "c.yaml", TINY_YAML)
    out = tmp_path / "oracle.txt"
    assert main(capsys, "oracle", "--config", cfg, "--n", "20", "--reps", "300", "--out", str(out))[0] == 0
    assert main(capsys, "oracle", "--config", cfg, "--n", "limit", "--reps", "300", "--out", str(tmp_path / "lim.txt"))[0] == 0
    code, text, _ = main(capsys, "metric", "--p", str(out), "--q", str(tmp_path / "lim.txt"))
    assert code == 0 and 0.0 < float(text) < 0.2
    assert main(capsys, "oracle", "--n", "zero")[0] == 2


def test_selftest_passes_quickly(capsys):
    start = time.perf_counter()
    code, out, _ = main(capsys, "selftest")
    assert code == 0 and out.endswith("selftest passed\n")
    assert time.perf_counter() - start < 60
    code2, out2, _ = main(capsys, "selftest")
    assert out2 == out


def test_selftest_detects_lp_perturbation(capsys):
    code, out, _ = main(capsys, "selftest", "--perturb-lp", "1e-6")
    assert code != 0
    assert "FAIL bl-oracle: oracle case 0" in out
    # the hook is reset after the command
    from bootcheck.metrics import bounded_lipschitz

    assert bounded_lipschitz._lp_perturbation == 0.0


@pytest.mark.parametrize("sub", sorted(SUBCOMMANDS))
def test_help_lists_flags_and_schema(sub, capsys):
    with pytest.raises(SystemExit) as info:
        cli.main([sub, "--help"])
    out = capsys.readouterr().out
    assert info.value.code == 0
    for flag in SUBCOMMANDS[sub]:
        assert flag in out
    assert "config schema version 1" in out


def test_usage_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main([])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["metric", "--p", "x"])
    assert info.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "bootcheck", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "config schema version 1" in res.stdout
