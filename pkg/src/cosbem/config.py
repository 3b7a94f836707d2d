"""Experiment configuration files.

A config is an INI file of flat ``key = value`` sections::

    [model]
    type = heston            # or bs
    lam = 4
    vbar = 0.04
    eta = 0.1
    rho = -0.5
    r = 0.05
    dividend = 0.02

    [option]
    payoff = vanilla_call    # vanilla_put | vanilla_call | cash_or_nothing_call
    barrier_kind = down_and_out
    strike = 100
    barrier = 110
    maturity = 1

    [grid]
    n_dt = 15
    n_dv = 15

    [evaluation]
    points =
        150, 0.01, 0
        115, 0.01, 0

Black-Scholes models take ``sigma``, ``dividend`` and either ``rate`` or a
piecewise schedule ``rates = 0:0.01, 0.25:0.03`` (breakpoint:rate pairs).
Optional sections: ``[grid]`` keys ``v_max``, ``n_f``, ``L``; ``[oracle]``
keys ``delta``, ``n_paths``, ``n_steps``, ``seed``, ``confidence``,
``monitoring``, ``eps``, ``nf_min``, ``nf_max``, ``nf_step``, ``tail_terms``.
Every validation failure raises :class:`ConfigError` carrying the line number.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field

from .cosexp import CosConfig
from .errors import ArgumentError, ConfigError
from .models.params import BarrierKind, BSParams, HestonParams, OptionSpec, Payoff
from .oracles.montecarlo import McConfig

MODEL_KEYS = {
    "bs": {"type", "sigma", "rate", "rates", "dividend"},
    "heston": {"type", "lam", "vbar", "eta", "rho", "r", "dividend"},
}
SECTION_KEYS = {
    "option": {"payoff", "barrier_kind", "strike", "barrier", "maturity"},
    "grid": {"n_dt", "n_dv", "v_max", "n_f", "l"},
    "evaluation": {"points"},
    "oracle": {
        "delta", "n_paths", "n_steps", "seed", "confidence", "monitoring",
        "eps", "nf_min", "nf_max", "nf_step", "tail_terms",
    },
}
REQUIRED_SECTIONS = ("model", "option", "evaluation")

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^([^\s=:#;][^=:]*?)\s*[=:]")


@dataclass(frozen=True)
class GridConfig:
    n_dt: int
    n_dv: int | None
    v_max: float | None
    cos: CosConfig


@dataclass(frozen=True)
class EvalPoint:
    S: float
    v: float
    t: float


@dataclass(frozen=True)
class SweepConfig:
    """Settings of the N_F estimator and the truncation-error table."""

    eps: float = 1e-3
    nf_min: int = 4
    nf_max: int = 64
    nf_step: int = 2
    tail_terms: int = 2000


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    params: BSParams | HestonParams
    option: OptionSpec
    grid: GridConfig
    points: tuple[EvalPoint, ...]
    mc: McConfig | None
    delta: bool
    sweep: SweepConfig
    source: str = field(default="", repr=False)

    def echo(self) -> dict:
        """Plain-data view of the parsed config for run manifests."""
        parser = _read(self.source)
        return {s: dict(parser[s]) for s in parser.sections()}


class _Lines:
    """Line numbers of sections, keys and continuation lines."""

    def __init__(self, text: str):
        self.sections: dict[str, int] = {}
        self.keys: dict[tuple[str, str], int] = {}
        self.values: dict[tuple[str, str], list[int]] = {}
        section, key = None, None
        for n, raw in enumerate(text.splitlines(), start=1):
            stripped = raw.strip()
            if not stripped or stripped[0] in "#;":
                continue
            m = _SECTION_RE.match(raw)
            if m:
                section, key = m.group(1).strip(), None
                self.sections.setdefault(section, n)
                continue
            if raw[0].isspace() and key is not None:
                self.values[(section, key)].append(n)
                continue
            m = _KEY_RE.match(raw)
            if m and section is not None:
                key = m.group(1).strip().lower()
                self.keys.setdefault((section, key), n)
                self.values.setdefault((section, key), [])
                if raw[m.end():].split("#", 1)[0].strip():
                    self.values[(section, key)].append(n)

    def of(self, section: str, key: str | None = None) -> int | None:
        if key is None:
            return self.sections.get(section)
        return self.keys.get((section, key), self.sections.get(section))


def _read(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str.lower
    parser.read_string(text)
    return parser


class _Section:
    def __init__(self, parser: configparser.ConfigParser, lines: _Lines, name: str):
        self.name = name
        self.lines = lines
        self.data = parser[name] if parser.has_section(name) else {}

    def line(self, key: str | None = None) -> int | None:
        return self.lines.of(self.name, key)

    def has(self, key: str) -> bool:
        return key in self.data

    def raw(self, key: str) -> str:
        if key not in self.data:
            raise ConfigError(f"[{self.name}] missing required key '{key}'", self.line())
        return self.data[key].strip()

    def number(self, key: str, default: float | None = None) -> float:
        if default is not None and key not in self.data:
            return default
        text = self.raw(key)
        try:
            value = float(text)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key}: expected a number, got {text!r}", self.line(key)) from None
        if not math.isfinite(value):
            raise ConfigError(f"[{self.name}] {key}: value must be finite", self.line(key))
        return value

    def integer(self, key: str, default: int | None = None) -> int:
        if default is not None and key not in self.data:
            return default
        text = self.raw(key)
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key}: expected an integer, got {text!r}", self.line(key)) from None

    def flag(self, key: str, default: bool) -> bool:
        if key not in self.data:
            return default
        text = self.raw(key).lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"[{self.name}] {key}: expected a boolean, got {text!r}", self.line(key))

    def check_keys(self, allowed: set[str]) -> None:
        for key in self.data:
            if key not in allowed:
                raise ConfigError(f"[{self.name}] unknown key '{key}'", self.line(key))


def _build(section: _Section, key: str | None, make):
    """Run a constructor, turning precondition failures into line-anchored errors."""
    try:
        return make()
    except ArgumentError as exc:
        raise ConfigError(f"[{section.name}] {exc}", section.line(key)) from None


def _rate_schedule(sec: _Section) -> tuple[tuple[float, float], ...]:
    if sec.has("rate") and sec.has("rates"):
        raise ConfigError("[model] give either 'rate' or 'rates', not both", sec.line("rates"))
    if sec.has("rate"):
        return ((0.0, sec.number("rate")),)
    pairs = []
    for item in sec.raw("rates").split(","):
        try:
            t_break, rate = (float(x) for x in item.split(":"))
        except ValueError:
            raise ConfigError(f"[model] rates: cannot parse {item.strip()!r} as time:rate", sec.line("rates")) from None
        pairs.append((t_break, rate))
    return tuple(pairs)


def _parse_model(sec: _Section):
    kind = sec.raw("type").lower()
    if kind not in MODEL_KEYS:
        raise ConfigError(f"[model] type must be 'bs' or 'heston', got {kind!r}", sec.line("type"))
    sec.check_keys(MODEL_KEYS[kind])
    if kind == "bs":
        sched = _rate_schedule(sec)
        return kind, _build(sec, None, lambda: BSParams(sec.number("sigma"), sched, sec.number("dividend", 0.0)))
    values = {k: sec.number(k) for k in ("lam", "vbar", "eta", "rho", "r")}
    return kind, _build(sec, None, lambda: HestonParams(**values, delta=sec.number("dividend", 0.0)))


def _parse_points(sec: _Section, kind: str) -> tuple[EvalPoint, ...]:
    text = sec.raw("points")
    rows = [r for r in text.splitlines() if r.strip()]
    line_nos = sec.lines.values.get(("evaluation", "points"), [])
    points = []
    for n, row in enumerate(rows):
        line = line_nos[n] if n < len(line_nos) else sec.line("points")
        try:
            vals = [float(x) for x in row.replace(",", " ").split()]
        except ValueError:
            raise ConfigError(f"[evaluation] cannot parse point {row.strip()!r}", line) from None
        if len(vals) != 3:
            raise ConfigError(f"[evaluation] point needs 'S, v, t', got {row.strip()!r}", line)
        S, v, t = vals
        if not S > 0:
            raise ConfigError(f"[evaluation] spot must be positive, got {S}", line)
        if kind == "heston" and not v > 0:
            raise ConfigError(f"[evaluation] variance must be positive, got {v}", line)
        points.append((EvalPoint(S, v, t), line))
    if not points:
        raise ConfigError("[evaluation] the evaluation list is empty", sec.line("points"))
    return points


def parse_config(text: str) -> ExperimentConfig:
    """Parse and cross-validate an experiment config held in ``text``."""
    lines = _Lines(text)
    try:
        parser = _read(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}", getattr(exc, "lineno", None)) from None
    for name in parser.sections():
        if name != "model" and name not in SECTION_KEYS:
            raise ConfigError(f"unknown section [{name}]", lines.of(name))
    for name in REQUIRED_SECTIONS:
        if not parser.has_section(name):
            raise ConfigError(f"missing required section [{name}]")

    kind, params = _parse_model(_Section(parser, lines, "model"))

    osec = _Section(parser, lines, "option")
    osec.check_keys(SECTION_KEYS["option"])
    _check_enums(osec)
    option = _build(osec, None, lambda: OptionSpec(
        osec.raw("payoff").lower(), osec.raw("barrier_kind").lower(),
        osec.number("strike"), osec.number("barrier"), osec.number("maturity"),
    ))

    gsec = _Section(parser, lines, "grid")
    gsec.check_keys(SECTION_KEYS["grid"])
    default_cos = CosConfig.bs_default() if kind == "bs" else CosConfig.heston_default()
    cos = CosConfig(gsec.number("l", default_cos.L), gsec.integer("n_f", default_cos.n_terms))
    if not cos.L > 0 or cos.n_terms < 1:
        raise ConfigError("[grid] L must be positive and n_f at least 1", gsec.line("n_f"))
    n_dt = gsec.integer("n_dt", 16)
    n_dv = gsec.integer("n_dv", 16) if kind == "heston" else None
    if n_dt < 1 or (n_dv is not None and n_dv < 1):
        raise ConfigError("[grid] n_dt and n_dv must be at least 1", gsec.line("n_dt"))
    v_max = gsec.number("v_max") if gsec.has("v_max") else None
    if v_max is not None and not v_max > 0:
        raise ConfigError("[grid] v_max must be positive", gsec.line("v_max"))
    grid = GridConfig(n_dt, n_dv, v_max, cos)

    esec = _Section(parser, lines, "evaluation")
    esec.check_keys(SECTION_KEYS["evaluation"])
    points = _parse_points(esec, kind)
    for pt, line in points:
        _check_point(kind, option, pt, line)

    rsec = _Section(parser, lines, "oracle")
    rsec.check_keys(SECTION_KEYS["oracle"])
    mc = None
    if rsec.has("n_paths") or rsec.has("n_steps"):
        mc = _build(rsec, "n_paths", lambda: McConfig(
            rsec.integer("n_paths"), rsec.integer("n_steps"), rsec.integer("seed", 20240101),
            rsec.number("confidence", 0.95), rsec.raw("monitoring") if rsec.has("monitoring") else "bridge",
        ))
    sweep = SweepConfig(
        rsec.number("eps", 1e-3), rsec.integer("nf_min", 4), rsec.integer("nf_max", 64),
        rsec.integer("nf_step", 2), rsec.integer("tail_terms", 2000),
    )
    if not 0 < sweep.eps < 1:
        raise ConfigError(f"[oracle] eps must lie in (0, 1), got {sweep.eps}", rsec.line("eps"))
    if not (1 <= sweep.nf_min <= sweep.nf_max and sweep.nf_step >= 1 and sweep.tail_terms > sweep.nf_max):
        raise ConfigError("[oracle] need 1 <= nf_min <= nf_max < tail_terms and nf_step >= 1", rsec.line("nf_min"))
    return ExperimentConfig(
        kind, params, option, grid, tuple(p for p, _ in points), mc,
        rsec.flag("delta", kind == "heston"), sweep, text,
    )


def _check_enums(sec: _Section) -> None:
    for key, enum in (("payoff", Payoff), ("barrier_kind", BarrierKind)):
        value = sec.raw(key).lower()
        if value not in {e.value for e in enum}:
            choices = ", ".join(e.value for e in enum)
            raise ConfigError(f"[option] {key} must be one of {choices}; got {value!r}", sec.line(key))


def _check_point(kind: str, option: OptionSpec, pt: EvalPoint, line: int | None) -> None:
    if option.barrier_kind is BarrierKind.UP_AND_OUT:
        beyond = pt.S > option.barrier
    else:
        beyond = pt.S < option.barrier
    if beyond:
        raise ConfigError(
            f"[evaluation] spot {pt.S:g} lies beyond the {option.barrier_kind.value} barrier {option.barrier:g}",
            line,
        )
    if not 0.0 <= pt.t < option.maturity:
        raise ConfigError(f"[evaluation] time must lie in [0, maturity), got {pt.t}", line)
    if kind == "heston" and pt.t != 0.0:
        raise ConfigError("[evaluation] Heston prices are evaluated at t = 0 only", line)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}: {path}") from None
    return parse_config(text)
