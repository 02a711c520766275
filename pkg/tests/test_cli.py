import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from compredict import harness, source
from compredict.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def bits_file(tmp_path, capsys):
    path = tmp_path / "x.txt"
    assert run(capsys, "generate", "--order", 4, "--p1", 0.3, "--n", 10000, "--seed", 1,
               "--out", path)[0] == 0
    return path


def test_generate(tmp_path, capsys, bits_file):
    assert len(bits_file.read_bytes().rstrip(b"\n")) == 10000
    again = tmp_path / "y.txt"
    code, out, err = run(capsys, "generate", "--order", 4, "--p1", 0.3, "--n", 10000,
                         "--seed", 1, "--out", again)
    assert code == 0 and "bayes=0.3" in err and out == ""
    assert again.read_bytes() == bits_file.read_bytes()


def test_generate_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(["generate", "--order", "x", "--n", "10", "--out", str(tmp_path / "x")])
    assert info.value.code == 2
    assert run(capsys, "generate", "--order", 40, "--n", 10, "--out", tmp_path / "x")[0] == 2


def test_predict_prints_summary_and_trace(tmp_path, capsys, bits_file):
    trace = tmp_path / "t.csv"
    code, out, _ = run(capsys, "predict", "--in", bits_file, "--k", 4, "--h", 300, "--r", 5,
                       "--q", 10, "--ppm-order", 3, "--n-pred", 20, "--trace-out", trace)
    assert code == 0
    last = out.strip().splitlines()[-1]
    fields = dict(kv.split("=") for kv in last.split())
    assert set(fields) == {"p_err", "errors", "n_pred"} and fields["n_pred"] == "20"
    assert float(fields["p_err"]) == int(fields["errors"]) / 20
    assert len(trace.read_text().splitlines()) == 21


def test_predict_deterministic_source(tmp_path, capsys):
    path = tmp_path / "ones.txt"
    source.write_bits(path, [1] * 400)
    code, out, _ = run(capsys, "predict", "--in", path, "--k", 4, "--h", 200)
    assert code == 0 and out.startswith("p_err=0.0 ")


def test_predict_pinned(capsys, bits_file):
    code, out, _ = run(capsys, "predict", "--in", bits_file, "--k", 4, "--h", 500, "--n-pred",
                       50, "--ppm-order", 3)
    assert (code, out) == (0, "p_err=0.24 errors=12 n_pred=50\n")


def test_predict_short_file_is_data_error(tmp_path, capsys):
    path = tmp_path / "short.txt"
    source.write_bits(path, [0, 1] * 50)
    assert run(capsys, "predict", "--in", path, "--k", 4, "--h", 100)[0] == 3
    path.write_text("01x1")
    assert run(capsys, "predict", "--in", path, "--k", 4, "--h", 100)[0] == 3
    assert run(capsys, "predict", "--in", tmp_path / "missing", "--k", 4, "--h", 100)[0] == 3


def test_predict_backend_failure(capsys, bits_file):
    code, _, err = run(capsys, "predict", "--in", bits_file, "--k", 4, "--h", 100,
                       "--compressor", "external", "--external-cmd", "false")
    assert code == 4 and "error" in err


def test_block_predict(capsys, bits_file):
    code, out, _ = run(capsys, "block-predict", "--in", bits_file, "--h", 100, "--l", 2,
                       "--n-pred", 10)
    assert code == 0 and out.endswith("n_pred=10\n")
    assert run(capsys, "block-predict", "--in", bits_file, "--h", 100, "--l", 9)[0] == 2


def test_compress_round_trip(tmp_path, capsys, bits_file):
    z, back = tmp_path / "x.z", tmp_path / "x.back"
    code, out, _ = run(capsys, "compress", "--in", bits_file, "--out", z)
    assert code == 0 and out == f"lambda={z.stat().st_size}\n"
    assert run(capsys, "compress", "--in", z, "--out", back, "--decompress")[0] == 0
    assert back.read_bytes() == bits_file.read_bytes()
    z.write_bytes(z.read_bytes()[:30])
    assert run(capsys, "compress", "--in", z, "--decompress")[0] == 3


def test_compress_empty(tmp_path, capsys):
    empty = tmp_path / "e"
    empty.write_bytes(b"")
    for flags in ([], ["--compressor", "lz", "--dict-size", 4096]):
        assert run(capsys, "compress", "--in", empty, *flags)[1] == "lambda=9\n"


SMALL = """
[source]
order = 3
[grid]
h = 60
k = 3
r = 2
q = 3
d = 2, 3
[run]
runs = 2
n_pred = 5
name = small
plots = d, h
"""


def test_sweep_writes_csv_and_plots(tmp_path, capsys):
    cfg = tmp_path / "s.ini"
    cfg.write_text(SMALL)
    code, out, _ = run(capsys, "sweep", "--config", cfg, "--out-dir", tmp_path / "o1")
    assert code == 0 and out.startswith("results=")
    for name in ("results.csv", "small.svg", "small.dat", "small_vs_h.svg"):
        assert (tmp_path / "o1" / name).exists()
    run(capsys, "sweep", "--config", cfg, "--out-dir", tmp_path / "o8", "--workers", 8)
    assert (tmp_path / "o1" / "results.csv").read_bytes() == \
        (tmp_path / "o8" / "results.csv").read_bytes()


def test_sweep_config_errors(tmp_path, capsys):
    cfg = tmp_path / "s.ini"
    cfg.write_text(SMALL.replace("d = 2, 3", "d ="))
    assert run(capsys, "sweep", "--config", cfg, "--out-dir", tmp_path / "o")[0] == 2
    cfg.write_text(SMALL + "colour = red\n")
    code, _, err = run(capsys, "sweep", "--config", cfg, "--out-dir", tmp_path / "o")
    assert code == 2 and "colour" in err


def test_sweep_all_cells_failed(tmp_path, capsys):
    cfg = tmp_path / "s.ini"
    cfg.write_text(SMALL.replace("name = small", "compressor = external\nexternal_cmd = false"))
    code, _, err = run(capsys, "sweep", "--config", cfg, "--out-dir", tmp_path / "o")
    assert code == 5 and "failed" in err


def test_plot(tmp_path, capsys):
    csv_path = tmp_path / "r.csv"
    harness.write_csv([harness.ExperimentRecord(3, 4, 100, 2, 20, 100, 1, 10, 3, 0.3, 0.3)],
                      csv_path)
    code, _, _ = run(capsys, "plot", "--in", csv_path, "--out", tmp_path / "p.svg")
    assert code == 0 and ET.parse(tmp_path / "p.svg").getroot().tag.endswith("svg")
    csv_path.write_text(csv_path.read_text().replace("schema 1", "schema 2"))
    assert run(capsys, "plot", "--in", csv_path, "--out", tmp_path / "q.svg")[0] == 2


def test_module_entry_point_help():
    out = subprocess.run([sys.executable, "-m", "compredict", "predict", "--help"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "--ppm-order" in out.stdout and "--external-cmd" in out.stdout
