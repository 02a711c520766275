import io
import xml.etree.ElementTree as ET

import pytest

from compredict import harness
from compredict.errors import ParameterError
from compredict.harness import (CellStats, ExperimentRecord, SweepConfig, aggregate, emit_plot,
                                load_config, padded_range, read_csv, run_sweep, write_csv)

TINY = """
[source]
order = 3
p1 = 0.3
seed = 7
[grid]
h = 60, 80
k = 3
r = 2
q = 3
d = 2, 4
[run]
runs = 5
n_pred = 4
name = tiny
plots = d, h
"""


def record(h, d, p_err, seed=0, n_pred=10):
    return ExperimentRecord(3, 4, h, d, 20, 100, seed, n_pred, round(p_err * n_pred), p_err, 0.3)


def csv_text(records):
    f = io.StringIO()
    write_csv(records, f)
    return f.getvalue()


@pytest.fixture(scope="module")
def tiny_sweep():
    return run_sweep(load_config(TINY))


def test_sweep_cardinality_and_order(tiny_sweep):
    recs = tiny_sweep.records
    assert len(recs) == 20 and not tiny_sweep.failures
    keys = [(r.h, r.d_or_logD) for r in recs]
    assert keys == sorted(keys)


def test_sweep_records_consistent(tiny_sweep):
    for r in tiny_sweep.records:
        assert r.p_err == r.errors / r.n_pred
        assert r.bayes == pytest.approx(0.3, abs=1e-9)
    # cells share the same five run seeds
    assert len({r.seed for r in tiny_sweep.records}) == 5


def test_sweep_deterministic_and_parallel_safe(tiny_sweep):
    config = load_config(TINY)
    again = csv_text(run_sweep(config).records)
    assert again == csv_text(tiny_sweep.records)
    assert csv_text(run_sweep(config, workers=3).records) == again


def test_csv_format(tmp_path, tiny_sweep):
    path = tmp_path / "r.csv"
    write_csv(tiny_sweep.records, path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == harness.SCHEMA_LINE
    assert lines[1] == "rho,k,h,d_or_logD,r,q,seed,n_pred,errors,p_err,bayes"
    assert read_csv(path) == tiny_sweep.records


def test_read_csv_rejects_other_schema(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("# compredict results schema 0\n" + ",".join(harness.COLUMNS) + "\n")
    with pytest.raises(ParameterError, match="schema"):
        read_csv(path)


def test_failed_cells_are_recorded():
    config = SweepConfig(order=3, h=(60,), k=(3,), r=(2,), q=(3,), d=(2,), runs=2, n_pred=2,
                         compressor="external", external_cmd="false")
    result = run_sweep(config)
    assert not result.records and len(result.failures) == 2
    assert "BackendError" in result.failures[0][2]


def test_aggregate_examples():
    [one] = aggregate([record(100, 2, 0.25)])
    assert (one.mean, one.sd, one.n) == (0.25, 0.0, 1)
    [two] = aggregate([record(100, 2, 0.2), record(100, 2, 0.4, seed=1)])
    assert two.mean == pytest.approx(0.3) and (two.min, two.max) == (0.2, 0.4)


def test_aggregate_golden_means():
    ps = [0.1, 0.2, 0.3, 0.4, 0.5, 0.3, 0.3, 0.4, 0.5, 0.6]
    recs = [record(100, 2 if i < 5 else 4, p, seed=i) for i, p in enumerate(ps)]
    a, b = aggregate(recs)
    # hand-computed: mean(0.1..0.5) = 0.3, pstdev = sqrt(0.02); mean(0.3,0.3,0.4,0.5,0.6) = 0.42
    assert a.mean == pytest.approx(0.3) and a.sd == pytest.approx(0.02 ** 0.5)
    assert b.mean == pytest.approx(0.42) and b.sd == pytest.approx(0.0136 ** 0.5)


def test_padded_range():
    assert padded_range([2, 8]) == pytest.approx((1.7, 8.3))
    lo, hi = padded_range([0.3])
    assert lo < 0.3 < hi


def parse_svg(path):
    return ET.parse(path).getroot()


def gids(root, prefix):
    return [e.get("id") for e in root.iter() if (e.get("id") or "").startswith(prefix)]


def test_plot_single_point(tmp_path):
    svg, dat = emit_plot(aggregate([record(100, 2, 0.4)]), "d", str(tmp_path / "p.svg"))
    root = parse_svg(svg)
    assert root.tag.endswith("svg")
    assert gids(root, "series-") == ["series-h-100"] and gids(root, "bayes")
    assert open(dat).readline() == "# x=d bayes=0.3\n"


def test_plot_one_series_per_h(tmp_path):
    recs = [record(h, d, 0.3 + 0.01 * d) for h in (1000, 2000, 3000) for d in range(2, 9)]
    svg, _ = emit_plot(aggregate(recs), "d", str(tmp_path / "p.svg"))
    assert sorted(gids(parse_svg(svg), "series-")) == ["series-h-1000", "series-h-2000",
                                                      "series-h-3000"]
    svg, _ = emit_plot(aggregate(recs), "h", str(tmp_path / "q.svg"))
    assert len(gids(parse_svg(svg), "series-d-")) == 7


def test_plot_is_reproducible(tmp_path):
    stats = aggregate([record(h, d, 0.35) for h in (100, 200) for d in (2, 3)])
    a, _ = emit_plot(stats, "d", str(tmp_path / "a.svg"))
    b, _ = emit_plot(stats, "d", str(tmp_path / "b.svg"))
    assert open(a).read() == open(b).read()


def test_plot_errors(tmp_path):
    with pytest.raises(ParameterError):
        emit_plot([], "d", str(tmp_path / "p.svg"))
    with pytest.raises(OSError, match="no-such-dir"):
        emit_plot(aggregate([record(100, 2, 0.4)]), "d", str(tmp_path / "no-such-dir" / "p.svg"))


def test_cellstats_axis_lookup():
    s = CellStats(3, 4, 100, 6, 20, 100, 1, 0.3, 0.0, 0.3, 0.3, 0.3)
    assert (s.get("d"), s.get("logD"), s.get("h")) == (6, 6, 100)


@pytest.mark.parametrize("text,key", [
    ("[grid]\nh = 100\nwidth = 3\n", "width"),
    ("[source]\nrho = 3\n", "rho"),
    ("[extra]\nx = 1\n", "extra"),
])
def test_config_unknown_keys_are_named(text, key):
    with pytest.raises(ParameterError, match=key):
        load_config(text)


@pytest.mark.parametrize("text", [
    "[grid]\nd =\n",
    "[run]\nruns = 0\n",
    "[run]\ncompressor = lz\n",
    "[grid]\nd = 2\nlog2_dict_size = 12\n",
    "[grid]\nh = many\n",
    "[run]\nplots = t\n",
    "[grid]\nd = 40\n",
])
def test_config_validation(text):
    with pytest.raises(ParameterError):
        load_config(text)


def test_shipped_configs_load():
    import pathlib
    root = pathlib.Path(__file__).parent.parent / "configs"
    for name in ("fig1", "fig2", "fig3", "fig4", "fig5"):
        c = load_config(str(root / f"{name}.ini"))
        assert c.name == name and c.runs == 5 and c.n_pred == 500
    assert load_config(str(root / "fig5.ini")).compressor_spec(12).dict_size == 1 << 12
