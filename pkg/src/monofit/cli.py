"""Command-line entry point: experiment orchestration, CSV output, SVG plots.

Four subcommands:

- ``conjecture``  run the occupancy-product sweep and emit a summary table
  plus one SVG line chart per C value;
- ``rates``       run a generate-fit-measure rate sweep and emit the risk
  records (plus a fitted log-log slope on stdout);
- ``estimate``    fit a single dataset read from CSV;
- ``selftest``    run the library's invariant checks.

Every value may come from a flag, from an INI-style config file (section
named after the subcommand; flags win), or from the documented default.
Outputs are a pure function of (config, seed) down to the byte level.
Exit codes: 0 success, 2 usage error, 1 runtime failure.
"""

import argparse
import csv
import dataclasses
import math
import os
import sys
from configparser import ConfigParser
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .deconv import auto_grid, deconvolve_cdf, select_bandwidth
from .dist1d import EmpiricalMeasure
from .experiments import (
    DEFAULT_C_LIST,
    DEFAULT_SEED,
    ConjectureConfig,
    conjecture_sweep,
    fit_loglog_slope,
    rate_sweep,
)
from .regress import FitConfig, fit_shuffled, fit_unlinked, stepfn_to_csv
from .synth import (
    LinkSpec,
    NoiseSpec,
    affine_link,
    cube_link,
    dataset_from_csv,
    identity_link,
    step_link,
    unbounded_tail_link,
)

__all__ = ["main", "run", "RunConfig", "write_records", "render_plot", "parse_link"]

_FLOAT_FMT = "%.17g"

WORKERS_ENV = "MONOFIT_WORKERS"

_DEFAULT_N_GRID = (100, 316, 1000, 3162, 10000)


@dataclass(frozen=True)
class RunConfig:
    """Resolved run context shared by all subcommands."""

    subcommand: str
    config_path: str
    out_dir: str
    seed: int
    workers: int


def _float_list(text):
    return tuple(float(v) for v in text.split(",") if v.strip() != "")


def _int_list(text):
    return tuple(int(v) for v in text.split(",") if v.strip() != "")


def parse_link(text):
    """Parse a link description: a catalog name or name:params.

    Accepted forms: ``identity``, ``cube``, ``affine:slope,offset``,
    ``step:v1,v2,...``, ``unbounded-tail:eps,a,scale,n``.
    """
    text = text.strip()
    name, _, arg = text.partition(":")
    if name == "identity":
        return identity_link()
    if name == "cube":
        return cube_link()
    if name == "affine":
        slope, offset = _float_list(arg)
        return affine_link(slope, offset)
    if name == "step":
        return step_link(_float_list(arg))
    if name == "unbounded-tail":
        eps, a, scale, n = _float_list(arg)
        return unbounded_tail_link(eps, a, scale, int(n))
    raise ValueError("unknown link: %r" % (text,))


def write_records(path, records, fields=None):
    """Write homogeneous records as CSV: header first, floats at 17 digits.

    Records may be dataclass instances or plain mappings.  ``fields`` fixes
    the column order; it defaults to the first record's natural order and is
    required when ``records`` is empty.
    """
    records = list(records)
    if fields is None:
        if not records:
            raise ValueError("fields is required for an empty record set")
        first = records[0]
        if dataclasses.is_dataclass(first):
            fields = tuple(f.name for f in dataclasses.fields(first))
        else:
            fields = tuple(first.keys())

    def cell(value):
        if isinstance(value, bool):
            return "1" if value else "0"
        if isinstance(value, float):
            return _FLOAT_FMT % value
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        return str(value)

    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(fields)
            for rec in records:
                if dataclasses.is_dataclass(rec):
                    rec = dataclasses.asdict(rec)
                writer.writerow([cell(rec[f]) for f in fields])
    except OSError as exc:
        raise RuntimeError("failed writing %s: %s" % (path, exc))


_PALETTE = (
    "#1f6f8b",
    "#c44536",
    "#3a7d44",
    "#7d3ac1",
    "#b8860b",
    "#2e2e8f",
    "#8f2e5f",
    "#444444",
)

_SVG_W, _SVG_H = 640, 420
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 24, 20, 52


def _row_fields(row):
    if dataclasses.is_dataclass(row):
        row = dataclasses.asdict(row)
    return int(row["n"]), float(row["C"]), float(row["mean"]), float(row["stderr"])


def render_plot(table, path):
    """Standalone SVG line chart of mean vs log10(n), one series per C.

    Whiskers mark plus/minus one standard error.  Output bytes depend only
    on the table contents.
    """
    rows = sorted((_row_fields(r) for r in table), key=lambda t: (t[1], t[0]))
    if not rows:
        raise ValueError("cannot plot an empty table")
    xs = [math.log10(n) for n, _, _, _ in rows]
    los = [m - s for _, _, m, s in rows]
    his = [m + s for _, _, m, s in rows]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(los), max(his)
    if x_hi - x_lo < 1e-12:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 0.05, y_hi + 0.05
    x_pad = 0.04 * (x_hi - x_lo)
    y_pad = 0.06 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def px(x):
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (_SVG_W - _MARGIN_L - _MARGIN_R)

    def py(y):
        return _SVG_H - _MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (_SVG_H - _MARGIN_T - _MARGIN_B)

    out = []
    out.append(
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
        'viewBox="0 0 %d %d">' % (_SVG_W, _SVG_H, _SVG_W, _SVG_H)
    )
    out.append('<rect width="%d" height="%d" fill="white"/>' % (_SVG_W, _SVG_H))
    ax_b = _SVG_H - _MARGIN_B
    out.append(
        '<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>'
        % (_MARGIN_L, ax_b, _SVG_W - _MARGIN_R, ax_b)
    )
    out.append(
        '<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>' % (_MARGIN_L, _MARGIN_T, _MARGIN_L, ax_b)
    )
    # x ticks at integer powers
    for k in range(math.ceil(x_lo), math.floor(x_hi) + 1):
        x = px(k)
        out.append('<line x1="%.2f" y1="%d" x2="%.2f" y2="%d" stroke="black"/>' % (x, ax_b, x, ax_b + 5))
        out.append(
            '<text x="%.2f" y="%d" font-size="12" text-anchor="middle">%d</text>' % (x, ax_b + 18, k)
        )
    # y ticks
    for i in range(5):
        y_val = y_lo + (y_hi - y_lo) * i / 4.0
        y = py(y_val)
        out.append(
            '<line x1="%d" y1="%.2f" x2="%d" y2="%.2f" stroke="black"/>'
            % (_MARGIN_L - 5, y, _MARGIN_L, y)
        )
        out.append(
            '<text x="%d" y="%.2f" font-size="12" text-anchor="end">%.3g</text>'
            % (_MARGIN_L - 8, y + 4, y_val)
        )
    out.append(
        '<text x="%.2f" y="%d" font-size="13" text-anchor="middle">'
        "value of n (in log scale with base 10)</text>"
        % ((_MARGIN_L + _SVG_W - _MARGIN_R) / 2.0, _SVG_H - 12)
    )
    out.append(
        '<text x="16" y="%.2f" font-size="13" text-anchor="middle" '
        'transform="rotate(-90 16 %.2f)">value of expectation approximated by averaging</text>'
        % ((_MARGIN_T + ax_b) / 2.0, (_MARGIN_T + ax_b) / 2.0)
    )
    series = sorted({c for _, c, _, _ in rows})
    for idx, C in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = [(px(math.log10(n)), py(m), py(m - s), py(m + s)) for n, c, m, s in rows if c == C]
        for x, _, w_lo, w_hi in pts:
            out.append(
                '<line x1="%.2f" y1="%.2f" x2="%.2f" y2="%.2f" stroke="%s"/>' % (x, w_lo, x, w_hi, color)
            )
            for w in (w_lo, w_hi):
                out.append(
                    '<line x1="%.2f" y1="%.2f" x2="%.2f" y2="%.2f" stroke="%s"/>'
                    % (x - 3, w, x + 3, w, color)
                )
        path_pts = " ".join("%.2f,%.2f" % (x, y) for x, y, _, _ in pts)
        out.append('<polyline points="%s" fill="none" stroke="%s" stroke-width="1.5"/>' % (path_pts, color))
        out.append(
            '<text x="%d" y="%d" font-size="12" fill="%s">C=%g</text>'
            % (_SVG_W - _MARGIN_R - 70, _MARGIN_T + 16 + 16 * idx, color, C)
        )
    out.append("</svg>")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(out) + "\n")
    except OSError as exc:
        raise RuntimeError("failed writing %s: %s" % (path, exc))


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="monofit",
        description="monotone-link estimation and Monte-Carlo experiment runner",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--config", help="INI config file; section per subcommand, flags win")
        p.add_argument("--out", help="output directory (default: current directory)")
        p.add_argument("--seed", type=int, help="base seed (default %d)" % DEFAULT_SEED)

    p_conj = sub.add_parser("conjecture", help="occupancy-product Monte-Carlo sweep")
    common(p_conj)
    p_conj.add_argument("--n-min", type=int)
    p_conj.add_argument("--n-max", type=int)
    p_conj.add_argument("--grid-points", type=int)
    p_conj.add_argument("--reps", type=int)
    p_conj.add_argument("--c", type=float)
    p_conj.add_argument("--C-list", dest="c_list", type=_float_list)
    p_conj.add_argument("--workers", type=int, help="process count (default: $%s or 1)" % WORKERS_ENV)

    p_rates = sub.add_parser("rates", help="risk rate sweep over an n-grid")
    common(p_rates)
    p_rates.add_argument("--problem", choices=("shuffled", "unlinked", "deconv"))
    p_rates.add_argument("--sigma-rule", dest="sigma_rule")
    p_rates.add_argument("--n-grid", dest="n_grid", type=_int_list)
    p_rates.add_argument("--reps", type=int)
    p_rates.add_argument("--link")

    p_est = sub.add_parser("estimate", help="fit one dataset from CSV")
    common(p_est)
    p_est.add_argument("--data", help="dataset CSV (columns mode,index,x,y)")
    p_est.add_argument("--sigma", type=float)

    p_self = sub.add_parser("selftest", help="run library invariant checks")
    common(p_self)
    return parser


def _resolve(args, ini, section, spec):
    """flag > config file > default, per key."""
    out = {}
    for key, (conv, default) in spec.items():
        dest = key.replace("-", "_")
        val = getattr(args, dest, None)
        if val is None and ini is not None and ini.has_option(section, key):
            val = conv(ini.get(section, key))
        out[dest] = default if val is None else val
    return out


def _load_ini(path):
    if path is None:
        return None
    if not os.path.exists(path):
        raise RuntimeError("config file not found: %s" % path)
    ini = ConfigParser()
    ini.read(path, encoding="utf-8")
    return ini


def _default_workers():
    raw = os.environ.get(WORKERS_ENV)
    return int(raw) if raw else 1


_COMMON_SPEC = {
    "out": (str, "."),
    "seed": (int, DEFAULT_SEED),
}


def _run_config(cmd, args, ini, workers):
    common = _resolve(args, ini, cmd, _COMMON_SPEC)
    out_dir = Path(common["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    return RunConfig(
        subcommand=cmd,
        config_path=args.config,
        out_dir=str(out_dir),
        seed=common["seed"],
        workers=workers,
    )


def _cmd_conjecture(args, ini):
    spec = {
        "n-min": (int, 100),
        "n-max": (int, 1_000_000),
        "grid-points": (int, 30),
        "reps": (int, 500),
        "c": (float, 20.0),
        "c-list": (_float_list, DEFAULT_C_LIST),
        "workers": (int, None),
    }
    opts = _resolve(args, ini, "conjecture", spec)
    workers = opts["workers"] if opts["workers"] is not None else _default_workers()
    rc = _run_config("conjecture", args, ini, workers)
    cfg = ConjectureConfig(
        n_min=opts["n_min"],
        n_max=opts["n_max"],
        grid_points=opts["grid_points"],
        reps=opts["reps"],
        c=opts["c"],
        C_list=opts["c_list"],
        seed=rc.seed,
    )
    rows = conjecture_sweep(cfg, workers=rc.workers)
    out = Path(rc.out_dir)
    table_path = out / "conjecture.csv"
    write_records(table_path, rows, fields=("n", "C", "mean", "stderr"))
    for C in cfg.C_list:
        render_plot([r for r in rows if r.C == C], out / ("conjecture_C%g.svg" % C))
    print("wrote %s (%d rows) and %d plots" % (table_path, len(rows), len(cfg.C_list)))
    return 0


def _cmd_rates(args, ini):
    spec = {
        "problem": (str, "shuffled"),
        "sigma-rule": (str, "below-root"),
        "n-grid": (_int_list, _DEFAULT_N_GRID),
        "reps": (int, 30),
        "link": (str, "identity"),
    }
    opts = _resolve(args, ini, "rates", spec)
    rc = _run_config("rates", args, ini, _default_workers())
    link = parse_link(opts["link"])
    records = rate_sweep(
        opts["problem"],
        opts["n_grid"],
        opts["sigma_rule"],
        reps=opts["reps"],
        seed=rc.seed,
        link=link,
    )
    out_path = Path(rc.out_dir) / "risks.csv"
    write_records(out_path, records, fields=("problem", "n", "sigma", "seed", "risk_kind", "value"))
    by_n = {}
    for r in records:
        by_n.setdefault(r.n, []).append(r.value)
    print("wrote %s (%d records)" % (out_path, len(records)))
    if len(by_n) >= 2:
        points = [(n, float(np.mean(vals))) for n, vals in sorted(by_n.items())]
        slope, _, r2 = fit_loglog_slope(points)
        print("mean-risk slope vs n: %.4f (r^2 %.4f)" % (slope, r2))
    return 0


def _cmd_estimate(args, ini):
    spec = {
        "data": (str, None),
        "sigma": (float, 0.0),
    }
    opts = _resolve(args, ini, "estimate", spec)
    rc = _run_config("estimate", args, ini, _default_workers())
    if not opts["data"]:
        raise RuntimeError("estimate needs --data (or data= in the config file)")
    ds = dataset_from_csv(opts["data"], sigma=opts["sigma"], seed=rc.seed)
    noise = NoiseSpec()
    out = Path(rc.out_dir)
    if ds.mode == "deconv":
        ys = EmpiricalMeasure.from_sample(ds.y)
        h = select_bandwidth(ds.n, ds.sigma, noise)
        grid = auto_grid(ys, ds.sigma)
        est = deconvolve_cdf(ys, noise, ds.sigma, h, grid)
        out_path = out / "cdf.csv"
        rows = [{"x": float(x), "cdf": float(c)} for x, c in zip(est.grid, est.cdf)]
        write_records(out_path, rows, fields=("x", "cdf"))
        print("wrote %s (bandwidth %.6g)" % (out_path, h))
        return 0
    if ds.mode == "shuffled":
        m, info = fit_shuffled(ds.x_ordered, ds.y, ds.sigma, FitConfig("shuffled"), full_output=True)
    else:
        m, info = fit_unlinked(ds.x_ordered, ds.y, noise, ds.sigma, FitConfig("unlinked"), full_output=True)
    out_path = out / "fit.csv"
    stepfn_to_csv(m, out_path, n=ds.n, sigma=ds.sigma, eta=info["eta"], projected=info["projected"])
    print("wrote %s (%d knots)" % (out_path, m.knots.size))
    return 0


def _cmd_selftest(args, ini):
    from .selftest import run_selftest

    return 0 if run_selftest() == 0 else 1


_DISPATCH = {
    "conjecture": _cmd_conjecture,
    "rates": _cmd_rates,
    "estimate": _cmd_estimate,
    "selftest": _cmd_selftest,
}


def run(argv):
    """Parse argv (without the program name) and execute; return exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        ini = _load_ini(args.config)
        return _DISPATCH[args.cmd](args, ini)
    except Exception as exc:  # noqa: BLE001 - boundary: report, signal failure
        print("error: %s" % exc, file=sys.stderr)
        return 1


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
