"""Flat ``key = value`` scenario files.

Keys use dotted sections (``params.gamma = 1.5``); ``#`` starts a comment.
Numeric values may be simple arithmetic over literals and ``pi``, e.g.
``grid.length = 2*pi*8``. Unknown keys are rejected so that typos fail
loudly with their line number.
"""

import ast
import math
import operator
from dataclasses import dataclass, field, replace

from ..errors import ConfigError, DomainError
from ..field import Grid
from ..integrator import StepControl
from ..model import ModelParams

INITIAL_KINDS = ("constant", "equilibrium", "perturbed_equilibrium", "random_band", "bump")
V_KINDS = ("zero", "equilibrium", "random_band")
CHECKS = ("boundedness", "persistence", "decay")

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_NAMES = {"pi": math.pi, "e": math.e, "inf": math.inf}


def _eval_number(text):
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = ev(node.operand)
            return -val if isinstance(node.op, ast.USub) else val
        raise ValueError(f"unsupported expression {text!r}")

    return ev(ast.parse(text.strip(), mode="eval"))


def _as_float(key, text, line):
    try:
        return float(_eval_number(text))
    except (ValueError, SyntaxError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f"{key}: expected a number, got {text!r} ({exc})", line) from None


def _as_int(key, text, line):
    value = _as_float(key, text, line)
    if value != int(value):
        raise ConfigError(f"{key}: expected an integer, got {text!r}", line)
    return int(value)


def _as_bool(key, text, line):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}", line)


def _as_list(key, text, line):
    return [item.strip() for item in text.split(",") if item.strip()]


def _as_floats(key, text, line):
    return [_as_float(key, item, line) for item in _as_list(key, text, line)]


def _as_str(key, text, line):
    return text.strip()


# key -> (converter, default)
SCHEMA = {
    "params.chi": (_as_float, 0.0),
    "params.chi_over_chi0": (_as_float, None),
    "params.chi_over_chi_star": (_as_float, None),
    "params.a": (_as_float, 1.0),
    "params.b": (_as_float, 1.0),
    "params.gamma": (_as_float, 1.5),
    "params.mu": (_as_float, 1.0),
    "params.lambda": (_as_float, 1.0),
    "params.dim": (_as_int, 2),
    "grid.points": (_as_int, 64),
    "grid.length": (_as_float, 2 * math.pi),
    "step.dt": (_as_float, 0.01),
    "step.scheme": (_as_str, "etd2rk"),
    "step.positivity_clip": (_as_bool, True),
    "step.dealias": (_as_bool, True),
    "run.t_end": (_as_float, 10.0),
    "run.observe_every": (_as_float, 0.1),
    "run.snapshot_every": (_as_float, 0.0),
    "run.seed": (_as_int, 0),
    "initial.kind": (_as_str, "random_band"),
    "initial.value": (_as_float, 1.0),
    "initial.amplitude": (_as_float, 0.1),
    "initial.min": (_as_float, 0.5),
    "initial.max": (_as_float, 1.5),
    "initial.smoothing": (_as_float, 1.0),
    "initial.center": (_as_floats, None),
    "initial.width": (_as_float, 1.0),
    "initial.height": (_as_float, 1.0),
    "initial.floor": (_as_float, 0.25),
    "initial.v_kind": (_as_str, "zero"),
    "initial.v_min": (_as_float, 0.0),
    "initial.v_max": (_as_float, 1.0),
    "analysis.sigma": (_as_float, None),
    "analysis.epsilon": (_as_float, 0.5),
    "analysis.xi": (_as_float, None),
    "analysis.t_transient": (_as_float, 10.0),
    "analysis.tol_u": (_as_float, 1e-2),
    "analysis.tol_v": (_as_float, 1e-2),
    "analysis.tail_fraction": (_as_float, 0.6),
    "analysis.final_dev_max": (_as_float, None),
    "checks": (_as_list, ["boundedness"]),
    "output.dir": (_as_str, "out"),
}
ALIASES = {"seed": "run.seed"}


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "random_band"
    value: float = 1.0
    amplitude: float = 0.1
    min: float = 0.5
    max: float = 1.5
    smoothing: float = 1.0
    center: tuple = None
    width: float = 1.0
    height: float = 1.0
    floor: float = 0.25
    v_kind: str = "zero"
    v_min: float = 0.0
    v_max: float = 1.0


@dataclass(frozen=True)
class ScenarioConfig:
    params: ModelParams
    grid: Grid
    ctl: StepControl
    t_end: float
    seed: int = 0
    initial: InitialSpec = field(default_factory=InitialSpec)
    checks: tuple = ("boundedness",)
    chi_rule: tuple = ("absolute", 0.0)
    observe_every: float = 0.1
    snapshot_every: float = 0.0
    sigma: float = None
    epsilon: float = 0.5
    xi: float = None
    t_transient: float = 10.0
    tol_u: float = 1e-2
    tol_v: float = 1e-2
    tail_fraction: float = 0.6
    final_dev_max: float = None
    out_dir: str = "out"
    raw: tuple = ()

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


def parse_text(text):
    """Parse config text into ``{key: (raw_value, line)}``."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        key = ALIASES.get(key, key)
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if not value:
            raise ConfigError(f"empty value for {key!r}", lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first on line {entries[key][1]})", lineno)
        entries[key] = (value, lineno)
    return entries


def build(entries, overrides=None):
    """Turn parsed entries (plus ``{key: raw}`` overrides) into a ScenarioConfig."""
    entries = dict(entries)
    for key, value in (overrides or {}).items():
        key = ALIASES.get(key, key)
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
        entries[key] = (str(value), None)
    vals = {}
    for key, (conv, default) in SCHEMA.items():
        if key in entries:
            text, line = entries[key]
            vals[key] = conv(key, text, line)
        else:
            vals[key] = default

    def line_of(*keys):
        for k in keys:
            if k in entries:
                return entries[k][1]
        return None

    rules = [k for k in ("params.chi_over_chi0", "params.chi_over_chi_star") if k in entries]
    if len(rules) > 1 or (rules and "params.chi" in entries):
        raise ConfigError(
            "set only one of params.chi, params.chi_over_chi0, params.chi_over_chi_star",
            line_of(*rules),
        )
    if rules:
        rule = ("chi0" if rules[0].endswith("chi0") else "chi_star", vals[rules[0]])
        if rule[1] < 0:
            raise ConfigError(f"{rules[0]} must be >= 0", line_of(rules[0]))
    else:
        rule = ("absolute", vals["params.chi"])

    try:
        params = ModelParams(
            chi=rule[1] if rule[0] == "absolute" else 0.0,
            a=vals["params.a"], b=vals["params.b"], gamma=vals["params.gamma"],
            mu=vals["params.mu"], lam=vals["params.lambda"], dim=vals["params.dim"],
        )
    except DomainError as exc:
        raise ConfigError(str(exc), line_of("params.a", "params.gamma")) from None
    try:
        grid = Grid(vals["params.dim"], vals["grid.points"], vals["grid.length"])
    except ValueError as exc:
        raise ConfigError(str(exc), line_of("grid.points", "grid.length")) from None
    try:
        ctl = StepControl(
            vals["step.dt"], vals["step.scheme"],
            vals["step.positivity_clip"], vals["step.dealias"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc), line_of("step.dt", "step.scheme")) from None

    center = vals["initial.center"]
    if center is not None and len(center) != params.dim:
        raise ConfigError(
            f"initial.center needs {params.dim} coordinates, got {len(center)}",
            line_of("initial.center"),
        )
    init = InitialSpec(
        kind=vals["initial.kind"],
        value=vals["initial.value"],
        amplitude=vals["initial.amplitude"],
        min=vals["initial.min"],
        max=vals["initial.max"],
        smoothing=vals["initial.smoothing"],
        center=tuple(center) if center is not None else None,
        width=vals["initial.width"],
        height=vals["initial.height"],
        floor=vals["initial.floor"],
        v_kind=vals["initial.v_kind"],
        v_min=vals["initial.v_min"],
        v_max=vals["initial.v_max"],
    )
    checks = tuple(vals["checks"])
    for name in checks:
        if name not in CHECKS:
            raise ConfigError(f"unknown check {name!r}; expected {CHECKS}", line_of("checks"))
    _validate_initial(init, checks, line_of)
    if vals["run.t_end"] < 0:
        raise ConfigError("run.t_end must be >= 0", line_of("run.t_end"))
    if vals["run.observe_every"] <= 0:
        raise ConfigError("run.observe_every must be > 0", line_of("run.observe_every"))
    return ScenarioConfig(
        params=params,
        grid=grid,
        ctl=ctl,
        t_end=vals["run.t_end"],
        seed=vals["run.seed"],
        initial=init,
        checks=checks,
        chi_rule=rule,
        observe_every=vals["run.observe_every"],
        snapshot_every=vals["run.snapshot_every"],
        sigma=vals["analysis.sigma"],
        epsilon=vals["analysis.epsilon"],
        xi=vals["analysis.xi"],
        t_transient=vals["analysis.t_transient"],
        tol_u=vals["analysis.tol_u"],
        tol_v=vals["analysis.tol_v"],
        tail_fraction=vals["analysis.tail_fraction"],
        final_dev_max=vals["analysis.final_dev_max"],
        out_dir=vals["output.dir"],
        raw=tuple(sorted((k, v[0]) for k, v in entries.items())),
    )


def _validate_initial(init, checks, line_of):
    line = line_of("initial.kind")
    if init.kind not in INITIAL_KINDS:
        raise ConfigError(f"unknown initial.kind {init.kind!r}; expected {INITIAL_KINDS}", line)
    if init.v_kind not in V_KINDS:
        raise ConfigError(
            f"unknown initial.v_kind {init.v_kind!r}; expected {V_KINDS}",
            line_of("initial.v_kind"),
        )
    needs_floor = any(c in checks for c in ("persistence", "decay"))
    if init.kind == "constant" and init.value < 0:
        raise ConfigError("initial.value must be >= 0", line_of("initial.value"))
    if init.kind == "perturbed_equilibrium" and not 0 <= init.amplitude < 1:
        raise ConfigError("initial.amplitude must lie in [0, 1)", line_of("initial.amplitude"))
    if init.kind == "random_band":
        if init.min < 0 or init.max < init.min:
            raise ConfigError("random_band needs 0 <= initial.min <= initial.max",
                              line_of("initial.min", "initial.max"))
        if init.smoothing <= 0:
            raise ConfigError("initial.smoothing must be > 0", line_of("initial.smoothing"))
        if needs_floor and init.min <= 0:
            raise ConfigError("persistence/decay checks need initial.min > 0",
                              line_of("initial.min"))
    if init.kind == "bump":
        if init.width <= 0 or init.height < 0 or init.floor < 0:
            raise ConfigError("bump needs width > 0, height >= 0, floor >= 0",
                              line_of("initial.width", "initial.floor"))
        if needs_floor and init.floor <= 0:
            raise ConfigError("persistence/decay checks need initial.floor > 0",
                              line_of("initial.floor"))
    if init.v_kind == "random_band" and (init.v_min < 0 or init.v_max < init.v_min):
        raise ConfigError("v random_band needs 0 <= initial.v_min <= initial.v_max",
                          line_of("initial.v_min"))


def load(path, overrides=None):
    with open(path) as fh:
        text = fh.read()
    return build(parse_text(text), overrides)


def loads(text, overrides=None):
    return build(parse_text(text), overrides)
