"""One scenario end to end: initial data, integration, checks."""

import math
import os
from dataclasses import dataclass, field

from .. import analysis, model
from ..errors import NumericalAbort
from ..integrator import SnapshotWriter, run
from .initial import constants_for, resolve


@dataclass
class ScenarioResult:
    params: model.ModelParams
    norms: model.InitialDataNorms
    record: analysis.TimeSeriesRecord
    reports: list = field(default_factory=list)
    abort: NumericalAbort = None
    fits: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.abort is None and all(r.passed for r in self.reports)


def simulate(config, snapshot_dir=None, snapshot_every=None):
    """Integrate ``config``; returns ``(params, norms, record, abort)``."""
    params, norms, state = resolve(config)
    observers = []
    every = snapshot_every if snapshot_every is not None else config.snapshot_every
    if snapshot_dir is not None and every and every > 0:
        os.makedirs(snapshot_dir, exist_ok=True)
        observers.append(SnapshotWriter(snapshot_dir, every))
    try:
        record = run(state, params, config.ctl, config.t_end, observers=observers,
                     observe_every=config.observe_every)
        abort = None
    except NumericalAbort as exc:
        record, abort = exc.record, exc
    return params, norms, record, abort


def evaluate(config, params, norms, record, checks):
    """Run the named checks on a completed record."""
    reports = []
    fits = {}
    for name in checks:
        if name == "boundedness":
            reports.append(analysis.check_boundedness(
                record, params, norms, tol_u=config.tol_u, tol_v=config.tol_v))
        elif name == "persistence":
            _, rep = analysis.check_persistence(record, config.t_transient, params)
            reports.append(rep)
        elif name == "decay":
            consts = constants_for(config, params, norms)
            rep, fit_u, fit_v = analysis.check_decay(
                record, params, consts.sigma, consts.epsilon,
                tail_fraction=config.tail_fraction, final_dev_max=config.final_dev_max,
            )
            rep.details["chi_star"] = consts.chi_star
            rep.details["chi_below_chi_star"] = params.chi < consts.chi_star
            reports.append(rep)
            reports.append(analysis.check_decay_constants(
                params, norms, consts.sigma, consts.epsilon))
            fits = {"u": fit_u, "v": fit_v}
        else:
            raise ValueError(f"unknown check {name!r}")
    return reports, fits


def run_scenario(config, checks=None, snapshot_dir=None, snapshot_every=None):
    checks = config.checks if checks is None else checks
    params, norms, record, abort = simulate(config, snapshot_dir, snapshot_every)
    result = ScenarioResult(params, norms, record, abort=abort)
    if abort is None:
        result.reports, result.fits = evaluate(config, params, norms, record, checks)
    return result


def tail_rate(record, fraction=0.6):
    """Fitted u-decay rate over the last ``fraction`` of a record, or nan."""
    try:
        t = record["t"]
        fit = analysis.fit_decay(record, "dev_u", (t[-1] - fraction * (t[-1] - t[0]), t[-1]))
        return fit.rate
    except ValueError:
        return math.nan
