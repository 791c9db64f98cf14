"""Cross-product parameter sweeps; each cell is an isolated run."""

import csv
import io
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor

from .. import analysis, model
from ..errors import ConfigError
from . import config as cfg
from .output import fmt, write_timeseries
from .scenario import run_scenario, tail_rate

BOUNDED = "bounded"
VIOLATED = "bound-violated"
UNCLASSIFIED = "unclassified"


def parse_axis(spec):
    """``"params.chi_over_chi0=0.5,0.9,5"`` -> ``(key, ["0.5", "0.9", "5"])``."""
    if "=" not in spec:
        raise ConfigError(f"axis must look like key=v1,v2,...; got {spec!r}")
    key, values = (p.strip() for p in spec.split("=", 1))
    key = cfg.ALIASES.get(key, key)
    if key not in cfg.SCHEMA:
        raise ConfigError(f"unknown sweep key {key!r}")
    items = [v.strip() for v in values.split(",") if v.strip()]
    if not items:
        raise ConfigError(f"axis {key!r} has no values")
    return key, items


def cells(axes):
    keys = [k for k, _ in axes]
    for combo in itertools.product(*(vals for _, vals in axes)):
        yield dict(zip(keys, combo))


def classify(params, norms, result):
    """Outcome label for one cell.

    Below χ0 the boundedness estimate applies, so a failed check is a
    violation; at or above χ0 no statement is made.
    """
    if result.abort is not None:
        return f"non-finite at t={result.abort.t:.6g}"
    chi0 = model.chi0(params, norms)
    bounded = next(r for r in result.reports if r.check == "boundedness").passed
    if params.chi < chi0:
        return BOUNDED if bounded else VIOLATED
    return UNCLASSIFIED


def _run_cell(text, overrides, index, out_dir):
    config = cfg.build(cfg.parse_text(text), overrides)
    checks = tuple(dict.fromkeys(("boundedness",) + config.checks))
    result = run_scenario(config, checks=checks)
    params, norms, record = result.params, result.norms, result.record
    if out_dir is not None and record is not None and len(record):
        write_timeseries(record, os.path.join(out_dir, f"cell_{index:03d}.csv"))
    chi0 = model.chi0(params, norms)
    bound = next((r for r in result.reports if r.check == "boundedness"), None)
    persistence = math.nan
    if record is not None and len(record) and record["t"][-1] >= config.t_transient:
        persistence, _ = analysis.check_persistence(record, config.t_transient)
    return {
        "cell": index,
        "overrides": overrides,
        "chi": params.chi,
        "chi0": chi0,
        "chi_over_chi0": params.chi / chi0,
        "outcome": classify(params, norms, result),
        "bound_margin": bound.worst_margin if bound else math.nan,
        "persistence_floor": persistence,
        "fitted_rate": tail_rate(record) if record is not None and len(record) else math.nan,
        "final_sup_u": float(record["sup_u"][-1]) if record is not None and len(record) else math.nan,
        "aborted": result.abort is not None,
    }


def run_sweep(config_text, axes, out_dir=None, jobs=1, base=None):
    """Run every cell; returns summary rows ordered by cell index.

    ``base`` holds overrides applied to every cell before the axis values.
    """
    base = dict(base or {})
    tasks = [(config_text, {**base, **ov}, i, out_dir) for i, ov in enumerate(cells(axes))]
    # validate every cell up front so config errors surface before any run
    for text, ov, _, _ in tasks:
        cfg.build(cfg.parse_text(text), ov)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_cell(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_cell, *t) for t in tasks]
        return [f.result() for f in futures]


def summary_csv(rows, axes):
    keys = [k for k, _ in axes]
    header = (["cell"] + keys + ["chi", "chi0", "chi_over_chi0", "outcome", "bound_margin",
                                 "persistence_floor", "fitted_rate", "final_sup_u"])
    buf = io.StringIO()
    buf.write("# sweep summary; floats printed with 17 significant digits\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [row["cell"]] + [row["overrides"][k] for k in keys]
            + [fmt(float(row[c])) for c in ("chi", "chi0", "chi_over_chi0")]
            + [row["outcome"]]
            + [fmt(float(row[c])) for c in ("bound_margin", "persistence_floor",
                                            "fitted_rate", "final_sup_u")]
        )
    return buf.getvalue()


def exit_status(rows):
    """0 unless a cell inside the theory's range violated a bound (1) or aborted (3)."""
    status = 0
    for row in rows:
        covered = row["chi"] < row["chi0"]
        if row["outcome"] == VIOLATED:
            status = max(status, 1)
        if row["aborted"] and covered:
            status = 3
    return status
