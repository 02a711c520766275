"""Parameter sweeps: run the predictor over a grid, aggregate, plot.

A sweep config is an INI file::

    [source]
    order = 3           ; rho
    p1 = 0.3
    table = random      ; random (per-state p1 or 1-p1) or uniform
    seed = 1            ; master seed

    [grid]
    h = 2000
    k = 4
    r = 20
    q = 100
    d = 2, 3, 4         ; ppm orders; lz uses log2_dict_size instead

    [run]
    runs = 5
    n_pred = 500
    compressor = ppm    ; ppm, lz or external
    external_cmd =      ; external only
    name = fig1
    plots = d, h        ; x axes to plot

Every run draws its source table and bit sequence from a seed that depends
only on the master seed, the source settings and the run index, so all grid
cells see the same sequences and differences between cells are not seed noise.
"""

import configparser
import csv
import hashlib
import io
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

from . import source
from .compressor import CompressorSpec
from .errors import ParameterError
from .predictor import PredictorParams, run_prediction

SCHEMA_VERSION = 1
SCHEMA_LINE = f"# compredict results schema {SCHEMA_VERSION}"
COLUMNS = ("rho", "k", "h", "d_or_logD", "r", "q", "seed", "n_pred", "errors", "p_err", "bayes")
AXES = ("d", "h", "logD")

_KEYS = {
    "source": {"order", "p1", "table", "seed"},
    "grid": {"h", "k", "r", "q", "d", "log2_dict_size"},
    "run": {"runs", "n_pred", "compressor", "external_cmd", "score", "name", "plots"},
}


@dataclass(frozen=True)
class SweepConfig:
    order: int = 3
    p1: float = 0.3
    table: str = "random"
    seed: int = 1
    h: tuple = (2000,)
    k: tuple = (4,)
    r: tuple = (20,)
    q: tuple = (100,)
    d: tuple = (6,)  # ppm orders, or log2 dictionary sizes for lz
    runs: int = 5
    n_pred: int = 500
    compressor: str = "ppm"
    external_cmd: str = None
    score: str = "syx"
    name: str = "sweep"
    plots: tuple = ("d",)

    def __post_init__(self):
        for name in ("h", "k", "r", "q", "d"):
            if not getattr(self, name):
                raise ParameterError(f"grid list {name!r} is empty")
        if self.runs < 1 or self.n_pred < 1:
            raise ParameterError("runs and n_pred must be >= 1")
        if self.table not in ("random", "uniform"):
            raise ParameterError(f"table must be random or uniform, got {self.table!r}")
        if self.compressor not in ("ppm", "lz", "external"):
            raise ParameterError(f"unknown compressor {self.compressor!r}")
        if self.score != "syx":
            raise ParameterError("sweeps use the syx score")
        for a in self.plots:
            if a not in AXES:
                raise ParameterError(f"unknown plot axis {a!r}")
        self.source_model(0)  # validates order and p1
        for d in self.d:
            self.compressor_spec(d)

    def source_model(self, run_seed):
        if self.table == "uniform":
            return source.uniform_source(self.order, self.p1)
        return source.random_source(self.order, self.p1, run_seed)

    def compressor_spec(self, d):
        if self.compressor == "ppm":
            return CompressorSpec("ppm", ppm_order=d)
        if self.compressor == "lz":
            return CompressorSpec("lz", dict_size=1 << d)
        return CompressorSpec("external", command=self.external_cmd)

    def cells(self):
        """Grid cells in canonical order."""
        return [dict(k=k, h=h, d=d, r=r, q=q)
                for k in sorted(self.k) for h in sorted(self.h) for d in sorted(self.d)
                for r in sorted(self.r) for q in sorted(self.q)]


def _ints(text):
    return tuple(int(v) for v in text.replace(",", " ").split())


def load_config(path_or_text):
    """Parse an INI sweep config; unknown sections or keys are errors."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if os.path.exists(path_or_text):
        with open(path_or_text) as f:
            cp.read_file(f)
    else:
        cp.read_string(path_or_text)
    for section in cp.sections():
        if section not in _KEYS:
            raise ParameterError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in _KEYS[section]:
                raise ParameterError(f"unknown config key {key!r} in [{section}]")
    kw = {}
    try:
        src = cp["source"] if cp.has_section("source") else {}
        grid = cp["grid"] if cp.has_section("grid") else {}
        run = cp["run"] if cp.has_section("run") else {}
        for key, conv in (("order", int), ("p1", float), ("table", str), ("seed", int)):
            if key in src:
                kw[key] = conv(src[key])
        for key in ("h", "k", "r", "q"):
            if key in grid:
                kw[key] = _ints(grid[key])
        if "d" in grid and "log2_dict_size" in grid:
            raise ParameterError("give either d or log2_dict_size, not both")
        for key in ("d", "log2_dict_size"):
            if key in grid:
                kw["d"] = _ints(grid[key])
        for key, conv in (("runs", int), ("n_pred", int), ("compressor", str),
                          ("external_cmd", str), ("score", str), ("name", str)):
            if key in run and run[key] != "":
                kw[key] = conv(run[key])
        if "plots" in run:
            kw["plots"] = tuple(run["plots"].replace(",", " ").split())
    except ValueError as exc:
        raise ParameterError(f"bad config value: {exc}") from exc
    if kw.get("compressor") == "lz" and "log2_dict_size" not in grid:
        raise ParameterError("lz sweeps need log2_dict_size in [grid]")
    return SweepConfig(**kw)


def derive_seed(*parts):
    """Stable 63-bit seed from the repr of ``parts`` (blake2b)."""
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


@dataclass(frozen=True)
class ExperimentRecord:
    rho: int
    k: int
    h: int
    d_or_logD: int
    r: int
    q: int
    seed: int
    n_pred: int
    errors: int
    p_err: float
    bayes: float

    def row(self):
        return [repr(getattr(self, f.name)) for f in fields(self)]


@dataclass
class SweepResult:
    records: list
    failures: list = field(default_factory=list)  # (cell, run, message)


def run_cell(config, cell, run):
    """One prediction run; returns an ExperimentRecord."""
    run_seed = derive_seed(config.seed, config.order, config.p1, config.table, run)
    model = config.source_model(run_seed)
    x = source.generate(model, cell["h"] + config.n_pred, derive_seed(run_seed, "bits"))
    params = PredictorParams(
        h=cell["h"], k=cell["k"], r=cell["r"], q=cell["q"], score=config.score,
        compressor=config.compressor_spec(cell["d"]),
        seed=derive_seed(run_seed, "predictor"))
    trace = run_prediction(x, cell["h"], params, record_scores=False)
    return ExperimentRecord(config.order, cell["k"], cell["h"], cell["d"], cell["r"],
                            cell["q"], run_seed, trace.n_pred, trace.errors,
                            trace.errors / trace.n_pred, source.bayes_error(model))


def _task(args):
    config, cell, run = args
    try:
        return run_cell(config, cell, run), None
    except Exception as exc:  # recorded per cell, the sweep goes on
        return None, f"{type(exc).__name__}: {exc}"


def run_sweep(config, workers=1, progress=None):
    """All (cell, run) pairs; records come back in canonical order."""
    tasks = [(config, cell, run) for cell in config.cells() for run in range(config.runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = []
        for i, t in enumerate(tasks):
            results.append(_task(t))
            if progress:
                progress(i + 1, len(tasks))
    out = SweepResult([])
    for (_, cell, run), (rec, err) in zip(tasks, results):
        if err is None:
            out.records.append(rec)
        else:
            out.failures.append((cell, run, err))
    return out


def write_csv(records, path_or_file):
    buf = io.StringIO()
    buf.write(SCHEMA_LINE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for rec in records:
        w.writerow(rec.row())
    text = buf.getvalue()
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", newline="") as f:
            f.write(text)


def read_csv(path):
    """Records from a results CSV; raises ParameterError on schema mismatch."""
    with open(path, newline="") as f:
        first = f.readline().rstrip("\n")
        if first != SCHEMA_LINE:
            raise ParameterError(f"{path}: expected schema line {SCHEMA_LINE!r}, got {first!r}")
        rows = list(csv.reader(f))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise ParameterError(f"{path}: bad header")
    conv = [int] * 9 + [float, float]
    return [ExperimentRecord(*(c(v) for c, v in zip(conv, row))) for row in rows[1:]]


@dataclass(frozen=True)
class CellStats:
    rho: int
    k: int
    h: int
    d_or_logD: int
    r: int
    q: int
    n: int
    mean: float
    sd: float
    min: float
    max: float
    bayes: float

    def get(self, axis):
        return {"d": self.d_or_logD, "logD": self.d_or_logD, "h": self.h}[axis]


def aggregate(records):
    """Per-cell mean, population sd, min and max of p_err."""
    groups = {}
    for rec in records:
        key = (rec.rho, rec.k, rec.h, rec.d_or_logD, rec.r, rec.q)
        groups.setdefault(key, []).append(rec)
    out = []
    for key in sorted(groups):
        recs = groups[key]
        p = [r.p_err for r in recs]
        out.append(CellStats(*key, len(p), statistics.fmean(p), statistics.pstdev(p),
                             min(p), max(p), recs[0].bayes))
    return out


def padded_range(values, margin=0.05):
    """(lo, hi) enclosing ``values`` with ``margin`` of their span on each side."""
    lo, hi = min(values), max(values)
    pad = margin * (hi - lo) if hi > lo else margin * max(abs(hi), 1)
    return lo - pad, hi + pad


_AXIS_LABEL = {"d": "PPM order d", "h": "history size h", "logD": "log2 dictionary size D"}


def emit_plot(stats, x_axis, out_path):
    """SVG line chart of mean p_err versus ``x_axis`` plus a ``.dat`` table.

    One series per value of the other grid parameter (h when plotting
    against d or logD, d when plotting against h).  A dashed line marks the
    Bayes error.
    """
    if not stats:
        raise ParameterError("nothing to plot")
    if x_axis not in AXES:
        raise ParameterError(f"unknown axis {x_axis!r}")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series_axis = "h" if x_axis != "h" else "d"
    series = {}
    for s in stats:
        series.setdefault((s.k, s.r, s.q, s.get(series_axis)), []).append(s)
    bayes = stats[0].bayes

    matplotlib.rcParams["svg.hashsalt"] = "compredict"
    fig, ax = plt.subplots(figsize=(6, 4))
    lines = []
    for key in sorted(series):
        pts = sorted(series[key], key=lambda s: s.get(x_axis))
        xs = [p.get(x_axis) for p in pts]
        ys = [p.mean for p in pts]
        label = f"{series_axis}={key[3]}"
        (line,) = ax.plot(xs, ys, marker="o", label=label)
        line.set_gid(f"series-{series_axis}-{key[3]}")
        lines.append((label, xs, ys, [p.sd for p in pts]))
    ref = ax.axhline(bayes, linestyle="--", color="gray", label="Bayes error")
    ref.set_gid("bayes")
    all_x = [x for _, xs, _, _ in lines for x in xs]
    all_y = [y for _, _, ys, _ in lines for y in ys] + [bayes]
    ax.set_xlim(*padded_range(all_x))
    ax.set_ylim(*padded_range(all_y))
    ax.set_xlabel(_AXIS_LABEL[x_axis])
    ax.set_ylabel("P(err)")
    ax.legend(fontsize="small")
    fig.tight_layout()
    try:
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OSError(f"cannot write plot {out_path}: {exc}") from exc
    finally:
        plt.close(fig)

    dat = os.path.splitext(out_path)[0] + ".dat"
    try:
        with open(dat, "w") as f:
            f.write(f"# x={x_axis} bayes={bayes!r}\n")
            f.write("# series x mean sd\n")
            for label, xs, ys, sds in lines:
                for x, y, sd in zip(xs, ys, sds):
                    f.write(f"{label} {x} {y!r} {sd!r}\n")
    except OSError as exc:
        raise OSError(f"cannot write data table {dat}: {exc}") from exc
    return out_path, dat


def plot_paths(config, out_dir):
    """{axis: svg path}; the first axis gets the plain config name."""
    out = {}
    for i, axis in enumerate(config.plots):
        stem = config.name if i == 0 else f"{config.name}_vs_{axis}"
        out[axis] = os.path.join(out_dir, stem + ".svg")
    return out

