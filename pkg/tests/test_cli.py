import json
import subprocess
import sys

import pytest

from pggsvd.cli import main
from pggsvd.harness import read_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def error_of(err):
    line = err.strip().splitlines()[-1]
    return json.loads(line)


def test_gsvd_info(capsys):
    code, out, _ = run(capsys, "gsvd-info", "--nt", "4", "--nr", "3", "--ne", "2", "--seed", "0")
    assert code == 0
    assert "(k, r, s) = (4, 2, 1)" in out
    assert "rank(H_ba) = 3, rank(H_ea) = 2" in out
    err = float(out.strip().splitlines()[-1].split("=")[-1])
    assert err < 1e-10


def test_counts_default_tables(capsys):
    code, out, _ = run(capsys, "counts")
    assert code == 0
    assert "4x3x2, Ns=2" in out and "64x48x48, Ns=2" in out
    assert "3.40e+38" in out and "1.16e+77" in out
    assert "65536" in out


def test_counts_custom(capsys):
    code, out, _ = run(capsys, "counts", "--nt", "6", "--ns", "3", "--mod", "bpsk")
    assert code == 0
    assert "N_t=6, Ns=3" in out
    rows = [line.split() for line in out.splitlines()[2:]]
    assert rows[0][-1] == "12" and rows[1][-1] == str(2 * 2**6) and rows[2][-1] == str(2**12)


def test_counts_rejects_nondividing_group(capsys):
    code, _, err = run(capsys, "counts", "--nt", "5", "--ns", "2")
    assert code == 1
    assert error_of(err)["error"] == "ValueError"


@pytest.mark.parametrize(
    "argv,verdict",
    [(("--nt", "4", "--nr", "3", "--ne", "2"), "holds"), (("--nt", "6", "--nr", "4", "--ne", "4"), "fails")],
)
def test_bound(capsys, argv, verdict):
    code, out, _ = run(capsys, "bound", *argv, "--mod", "qpsk")
    assert code == 0
    assert out.strip().endswith(verdict)
    assert "GSVD ceiling" in out and "PG-GSVD ceiling" in out


def test_optimize_trace(capsys, tmp_path):
    argv = ["optimize", "--mod", "bpsk", "--snr-db", "10", "--max-iters", "5", "--mc-samples", "100"]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "iter,rate_bits"
    vals = [float(line.split(",")[1]) for line in lines[1:]]
    assert vals == sorted(vals)
    p = tmp_path / "trace.csv"
    assert main(argv + ["-o", str(p)]) == 0
    assert p.read_text() == out


def test_optimize_high_snr_init(capsys):
    code, out, _ = run(capsys, "optimize", "--mod", "bpsk", "--snr-db", "40", "--init", "high_snr",
                       "--max-iters", "2", "--mc-samples", "100")
    assert code == 0
    assert float(out.strip().splitlines()[1].split(",")[1]) >= 3.8


def test_sweep_to_stdout_and_file(capsys, tmp_path):
    argv = ["sweep", "--mod", "bpsk", "--snr-db", "0", "20", "--designs", "gsvd,pg_gsvd",
            "--max-iters", "5", "--mc-samples", "100", "--seed", "2"]
    code, out, err = run(capsys, *argv)
    assert code == 0
    assert "[2/2] 20 dB done" in err
    assert out.splitlines()[0] == "# pggsvd secrecy curve"
    p = tmp_path / "s.csv"
    assert main(argv + ["-o", str(p)]) == 0
    capsys.readouterr()
    assert p.read_text() == out
    cv = read_csv(p)
    assert len(cv.rows) == 4
    assert cv.metadata["channel_seed"] == cv.metadata["noise_seed"] == 2


def test_sweep_config_file_with_overrides(capsys, tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("modulation = bpsk\nsnr_grid_db = [0, 10]\ndesigns = gsvd\nchannel_seed = 5\n")
    code, out, _ = run(capsys, "sweep", str(cfg), "--noise-seed", "9", "--snr-db", "5")
    assert code == 0
    meta = json.loads(out.splitlines()[1][len("# metadata: "):])
    assert meta["channel_seed"] == 5 and meta["noise_seed"] == 9
    assert meta["config"]["snr_grid_db"] == [5.0]


def test_sweep_bad_config_is_json_error(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("N_t = 4\nfoo = 1\n")
    code, _, err = run(capsys, "sweep", str(cfg))
    assert code == 1
    e = error_of(err)
    assert e["error"] == "ConfigError" and "bad.cfg:2" in e["message"]


def test_missing_config_is_json_error(capsys, tmp_path):
    code, _, err = run(capsys, "sweep", str(tmp_path / "nope.cfg"))
    assert code == 1
    assert "nope.cfg" in error_of(err)["message"]


@pytest.mark.parametrize(
    "argv",
    [(), ("frobnicate",), ("gsvd-info", "--nt", "four"), ("sweep", "--strategy", "greedy")],
)
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert error_of(err)["error"] == "UsageError"


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "pggsvd" in capsys.readouterr().out


def test_console_entry_point():
    r = subprocess.run(
        [sys.executable, "-m", "pggsvd.cli", "gsvd-info", "--nt", "2", "--nr", "2", "--ne", "2"],
        capture_output=True, text=True, check=False,
    )
    assert r.returncode == 0 and "(k, r, s)" in r.stdout
