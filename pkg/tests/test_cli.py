"""CLI behavior: rendered examples, formats, exit codes, config file."""
import json

import pytest

from lamcycle.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_cycles_verify_example(capsys):
    code, out, _ = run(capsys, "cycles", "--ell", "2", "--n", "11", "--verify")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "power map x^2 mod 11"
    assert "total cycles: 3" in lines
    assert lines[-1] == "oracle: MATCH"


def test_lambda_iter_example(capsys):
    code, out, _ = run(capsys, "lambda-iter", "--n", "91", "--k", "2")
    assert code == 0
    assert out == "2\n"


def test_chain_example(capsys):
    code, out, _ = run(capsys, "chain", "--n", "27")
    assert code == 0
    assert out == "27 → 18 → 6 → 2 → 1 (L=4)\n"


def test_json_round_trip(capsys):
    code, out, _ = run(capsys, "cycles", "--ell", "2", "--n", "11",
                       "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["total_cycles"] == 3
    assert {row["d"] for row in d["cycles"]} == {1, 11}

    code, out, _ = run(capsys, "bounds", "--ell", "2", "--n", "11",
                       "--format", "json")
    d = json.loads(out)
    assert d["lower_bound"] == {"numerator": 5, "denominator": 4, "value": 1.25}
    assert d["upper_holds"] is True


def test_sweep_jsonl(capsys):
    code, out, _ = run(capsys, "sweep", "--x", "40", "--format", "json")
    assert code == 0
    rows = [json.loads(line) for line in out.splitlines()]
    assert [r["n"] for r in rows] == list(range(1, 41))


def test_sweep_csv_header_and_no_meta(capsys):
    code, out1, _ = run(capsys, "sweep", "--x", "25", "--no-meta")
    code2, out2, _ = run(capsys, "sweep", "--x", "25", "--no-meta")
    assert code == code2 == 0
    assert out1 == out2  # byte-identical without the timestamp line
    assert out1.splitlines()[0] == "n,lambda,lambda_lambda,phi_phi,h,ratio_R,mismatch"
    code, out3, _ = run(capsys, "sweep", "--x", "25")
    assert out3.splitlines()[0].startswith("# generated ")


def test_sweep_density_only(capsys):
    code, out, _ = run(capsys, "sweep", "--x", "10000", "--density-only")
    assert code == 0
    assert "283/10000" in out


def test_output_file_and_progress_to_stderr(tmp_path, capsys):
    target = tmp_path / "rows.csv"
    code, out, err = run(capsys, "sweep", "--x", "30", "--no-meta",
                         "--output", str(target))
    assert code == 0
    assert out == ""  # data went to the file
    assert "segment" in err  # progress on stderr
    lines = target.read_text().splitlines()
    assert len(lines) == 31


def test_domain_error_exit_1(capsys):
    code, out, err = run(capsys, "lambda", "--n", "0")
    assert code == 1
    assert err.startswith("error: ")


def test_verify_cap_exit_1(capsys):
    code, _, err = run(capsys, "cycles", "--ell", "2", "--n", str(2 * 10**6),
                       "--verify")
    assert code == 1
    assert "error:" in err


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_config_file_defaults_and_flag_override(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "sweep.conf"
    cfg.write_text("sample_stride = 9\n# comment\nsegment_size=65536\n")
    monkeypatch.setenv("LAMCYCLE_CONFIG", str(cfg))
    _, out, _ = run(capsys, "sweep", "--x", "50", "--no-meta")
    ns = [int(line.split(",")[0]) for line in out.splitlines()[1:]]
    assert ns == list(range(1, 51, 9))
    # explicit flag beats the file
    _, out, _ = run(capsys, "sweep", "--x", "50", "--no-meta",
                    "--sample-stride", "1")
    assert len(out.splitlines()) == 51


def test_config_file_bad_key(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "sweep.conf"
    cfg.write_text("who_knows=3\n")
    monkeypatch.setenv("LAMCYCLE_CONFIG", str(cfg))
    code, _, err = run(capsys, "sweep", "--x", "50")
    assert code == 1
    assert "who_knows" in err


def test_moments_extras(capsys):
    code, out, _ = run(capsys, "moments", "--x", "100", "--cutoff-q", "10",
                       "--hp-t", "100", "--recip-m", "3", "--recip-eps", "none",
                       "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["x"] == 100 and d["cutoff_q"] == 10
    assert "h_prime_partial_sum" in d and "reciprocal_prime_sum" in d


def test_h_and_hk(capsys):
    code, out, _ = run(capsys, "h", "--n", "11", "--cutoff-q", "100")
    assert code == 0
    assert out.strip() == "1.3862943611198906"
    code, out, _ = run(capsys, "hk", "--n", "11", "--k", "3", "--cutoff-q",
                       "100", "--format", "json")
    assert json.loads(out)["h_k"] == 0.0


def test_nj_and_sophie_and_progression(capsys):
    code, out, _ = run(capsys, "nj", "--j", "30", "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["count"] == 421 and d["lambda_divides"] is True
    code, out, _ = run(capsys, "sophie", "--start", "2")
    assert "2 → 5 → 11 → 23 → 47" in out
    code, out, _ = run(capsys, "progression", "--t", "1000", "--modulus", "4",
                       "--residue", "1")
    assert out.strip() == "80"


def test_factor_csv_format(capsys):
    code, out, _ = run(capsys, "factor", "--n", "360", "--format", "csv")
    assert code == 0
    header, row = out.splitlines()
    assert header.split(",")[0] == "n"
    assert row.split(",")[0] == "360"
