"""Command line entry point.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 numerical abort.
"""

import argparse
import logging
import os
import sys

from .. import analysis, model
from ..errors import ConfigError, DomainError
from . import config as cfg
from .initial import constants_for, resolve
from .output import fmt, reports_summary_csv, reports_text, write_timeseries
from .scenario import evaluate, simulate
from .sweep import parse_axis, run_sweep, summary_csv, exit_status

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3

log = logging.getLogger("kslogistic")

# formula shown next to each constant by `constants`
FORMULAS = {
    "u_star": "(a/b)^(1/(gamma-1))",
    "v_star": "(mu/lambda) u_star",
    "c_bar": "2 |u0|_inf + 3 u_star",
    "c_N": "sqrt(N/pi), L1 norm of the heat-kernel gradient times sqrt(t)",
    "c1": "int_0^inf s^-1/2 e^(-lambda s) ds = sqrt(pi/lambda)",
    "c2": "(N/sqrt(pi)) int_0^inf s^-1/2 e^(-(gamma-1) a s) ds",
    "c3": "int_0^inf s^-1/2 e^(-(lambda - sigma (gamma-1)) s) ds",
    "c4": "int_0^inf s^-1/2 e^(-(gamma-1)(a - sigma) s) ds",
    "chi0": "u_star / (2 c_bar c2 (|grad v0|_inf + mu c_bar c_N c1))",
    "chi1": "sqrt(pi) xi / (4 N (2 u_star - xi) (|grad v0|_inf + mu c_bar c_N c1) "
            "sqrt(pi/(a (gamma-1))))",
    "chi_star": "min(chi0, chi1, eps^2 a^((2-gamma)/(gamma-1)) sigma sqrt(pi) / "
                "(4 b^(1/(gamma-1)) N c_vtilde c4 (c_tilde + u_star)))",
    "sigma": "decay-rate parameter in (0, min(a/2, lambda/(gamma-1)))",
    "epsilon": "smallness parameter in (0, 1)",
    "xi": "persistence floor parameter in (0, u_star/4)",
    "c_tilde": "eps a^((2-gamma)/(gamma-1)) (a - sigma) / (2 b^(1/(gamma-1)))",
    "c_vtilde": "|grad v0|_inf + mu c_bar c_N c1 + mu c_tilde c_N c3",
    "smallness": "eps^2 a^((2-gamma)/(gamma-1)) (a - 2 sigma) / (4 b^(1/(gamma-1)))",
}


def _parser():
    p = argparse.ArgumentParser(
        prog="kslogistic",
        description="Keller-Segel with logistic source: constants, simulation and checks.",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_config=True):
        sp.add_argument("--config", required=needs_config, help="scenario file (key = value)")
        sp.add_argument("--out", default=None, help="output directory (default: output.dir)")
        sp.add_argument("--seed", type=int, default=None, help="override run.seed")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key; repeatable")
        return sp

    common(sub.add_parser("constants", help="evaluate the explicit constants"))
    sim = common(sub.add_parser("simulate", help="integrate and write the time series"))
    sim.add_argument("--snapshot-every", type=float, default=None,
                     help="write KSFLD1 snapshots every T time units")
    for name in ("verify-bounds", "verify-decay", "verify-persistence"):
        sp = common(sub.add_parser(name, help=f"simulate and run the {name[7:]} check"))
        sp.add_argument("--snapshot-every", type=float, default=None)
    ln = common(sub.add_parser("lnseq", help="iterate the floor recursion"), needs_config=False)
    ln.add_argument("--xi", type=float, required=True)
    ln.add_argument("--n-max", type=int, default=10_000)
    ln.add_argument("--tol", type=float, default=1e-12)
    sw = common(sub.add_parser("sweep", help="cross-product parameter sweep"))
    sw.add_argument("--axis", action="append", required=True, metavar="KEY=V1,V2,...")
    sw.add_argument("--jobs", type=int, default=1)
    return p


def _overrides(args):
    out = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    if args.seed is not None:
        out["run.seed"] = str(args.seed)
    return out


def _load(args):
    return cfg.load(args.config, _overrides(args))


def _out_dir(args, config=None):
    out = args.out or (config.out_dir if config is not None else "out")
    os.makedirs(out, exist_ok=True)
    return out


def cmd_constants(args):
    config = _load(args)
    params, norms, _ = resolve(config)
    consts = constants_for(config, params, norms)
    lines = [f"# norms: u0_sup={fmt(norms.u0_sup)} grad_v0_sup={fmt(norms.grad_v0_sup)} "
             f"v0_sup={fmt(norms.v0_sup)} u0_inf={fmt(norms.u0_inf)}"]
    for key, value in consts.as_dict().items():
        if key == "decay_in_scope":
            continue
        lines.append(f"{key} = {fmt(float(value))}  # {FORMULAS[key]}")
    if not consts.decay_in_scope:
        lines.append("chi_star_scope = out of scope: the decay estimate needs 1 < gamma < 2")
    else:
        lines.append("chi_star_scope = in scope")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    with open(os.path.join(_out_dir(args, config), "constants.txt"), "w") as fh:
        fh.write(text)
    return EXIT_OK


def _simulate_to_disk(args, config):
    out = _out_dir(args, config)
    snap_dir = os.path.join(out, "snapshots")
    params, norms, record, abort = simulate(
        config, snapshot_dir=snap_dir, snapshot_every=getattr(args, "snapshot_every", None))
    if record is not None:
        write_timeseries(record, os.path.join(out, "timeseries.csv"))
    if record is not None and record.clip_flagged:
        log.warning("positivity clipping exceeded 1e-8 of the mean density; "
                    "the run may be under-resolved")
    return out, params, norms, record, abort


def cmd_simulate(args):
    config = _load(args)
    _, _, _, record, abort = _simulate_to_disk(args, config)
    if abort is not None:
        print(f"outcome = non-finite at t={abort.t:.6g}")
        return EXIT_ABORT
    print(f"outcome = completed\nsamples = {len(record)}\nt_end = {fmt(record['t'][-1])}")
    return EXIT_OK


def _verify(args, checks):
    config = _load(args)
    if "decay" in checks:
        sigma = config.sigma if config.sigma is not None else model.default_sigma(config.params)
        model.check_decay_ranges(config.params, sigma, config.epsilon)
    out, params, norms, record, abort = _simulate_to_disk(args, config)
    if abort is not None:
        print(f"outcome = non-finite at t={abort.t:.6g}")
        return EXIT_ABORT
    reports, _ = evaluate(config, params, norms, record, checks)
    text = reports_text(reports)
    sys.stdout.write(text)
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write(text)
    with open(os.path.join(out, "report_summary.csv"), "w") as fh:
        fh.write(reports_summary_csv(reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_lnseq(args):
    if args.config:
        config = _load(args)
        params = config.params
    else:
        over = _overrides(args)
        params = cfg.loads("", over).params
    seq = analysis.ln_recursion(args.xi, params, n_max=args.n_max, tol=args.tol)
    u_star, _ = model.equilibrium(params)
    lines = [f"# xi = {fmt(seq.xi)}  beta = {fmt(seq.beta)}  upper = {fmt(u_star / seq.xi - 0.5)}",
             "n,l_n"]
    lines += [f"{i},{fmt(v)}" for i, v in enumerate(seq.iterates)]
    lines.append(f"# l_tilde = {fmt(seq.l_tilde)}  converged = {fmt(seq.converged)}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        with open(os.path.join(_out_dir(args), "lnseq.csv"), "w") as fh:
            fh.write(text)
    return EXIT_OK if seq.converged else EXIT_FAIL


def cmd_sweep(args):
    with open(args.config) as fh:
        text = fh.read()
    over = _overrides(args)
    axes = [parse_axis(a) for a in args.axis]
    config = cfg.loads(text, over)
    out = _out_dir(args, config)
    rows = run_sweep(text, axes, out_dir=out, jobs=args.jobs, base=over)
    summary = summary_csv(rows, axes)
    with open(os.path.join(out, "sweep_summary.csv"), "w") as fh:
        fh.write(summary)
    sys.stdout.write(summary)
    return exit_status(rows)


COMMANDS = {
    "constants": cmd_constants,
    "simulate": cmd_simulate,
    "verify-bounds": lambda a: _verify(a, ("boundedness",)),
    "verify-decay": lambda a: _verify(a, ("decay",)),
    "verify-persistence": lambda a: _verify(a, ("persistence",)),
    "lnseq": cmd_lnseq,
    "sweep": cmd_sweep,
}


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
