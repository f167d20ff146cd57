"""Flat ``key = value`` configuration files.

Keys may be dotted (``second_order.alpha``). Lines starting with ``#`` or
``;`` are comments. There are no sections; duplicate keys are an error.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field

from .errors import ConfigError
from .expfam import FamilyDescriptor
from .second_order import SecondOrderDist, family_of_config, from_config

_ROOT = "__root__"
SEED_ENV = "UQREG_SEED"


def parse_flat(text: str, source: str = "<config>") -> dict:
    parser = configparser.ConfigParser(
        interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"), strict=True
    )
    parser.optionxform = str
    try:
        parser.read_string(f"[{_ROOT}]\n" + text, source=source)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", exc.option) from None
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {source}: {exc}") from None
    if parser.sections() != [_ROOT]:
        raise ConfigError(f"sections are not allowed in {source}", parser.sections()[1])
    return dict(parser[_ROOT])


def read_flat(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    return parse_flat(text, str(path))


def _sub(mapping, prefix):
    head = prefix + "."
    return {k[len(head):]: v for k, v in mapping.items() if k.startswith(head)}


def get_int(mapping, key, default=None, minimum=None) -> int:
    if key not in mapping:
        if default is None:
            raise ConfigError("missing value", key)
        return default
    try:
        value = int(mapping[key])
    except ValueError:
        raise ConfigError(f"not an integer: {mapping[key]!r}", key) from None
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value}", key)
    return value


def get_float(mapping, key, default=None) -> float:
    if key not in mapping:
        if default is None:
            raise ConfigError("missing value", key)
        return default
    try:
        return float(mapping[key])
    except ValueError:
        raise ConfigError(f"not a number: {mapping[key]!r}", key) from None


def get_choice(mapping, key, choices, default=None) -> str:
    value = mapping.get(key, default)
    if value is None:
        raise ConfigError("missing value", key)
    if value not in choices:
        raise ConfigError(f"expected one of {', '.join(choices)}, got {value!r}", key)
    return value


def check_keys(mapping, allowed, prefixes=()):
    for key in mapping:
        if key not in allowed and not any(key.startswith(p + ".") for p in prefixes):
            raise ConfigError("unknown key", key)


def seed_override(seed: int) -> int:
    """Apply the UQREG_SEED environment override, if set."""
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return seed
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"not an integer: {raw!r}", SEED_ENV) from None
    if not 0 <= value < 2 ** 64:
        raise ConfigError("must be an unsigned 64-bit integer", SEED_ENV)
    return value


@dataclass(frozen=True)
class RunConfig:
    family: FamilyDescriptor
    q: SecondOrderDist
    measure: str = "both"
    estimator: str = "closed_form"
    seed: int = 0
    mc_samples: int = 100_000
    output: str = "human"
    marginal: bool = False

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RunConfig":
        check_keys(mapping, {"family", "measure", "estimator", "seed", "mc_samples", "output", "marginal"},
                   prefixes=("second_order",))
        family = family_of_config(mapping)
        q = from_config(family, _sub(mapping, "second_order"))
        estimator = get_choice(mapping, "estimator", ("closed_form", "monte_carlo", "quadrature"), "closed_form")
        marginal = get_choice(mapping, "marginal", ("true", "false"), "false") == "true"
        mc_min = 1000 if estimator == "monte_carlo" or marginal else 1
        return cls(
            family=family,
            q=q,
            measure=get_choice(mapping, "measure", ("entropy", "variance", "both"), "both"),
            estimator=estimator,
            seed=seed_override(get_int(mapping, "seed", 0, minimum=0)),
            mc_samples=get_int(mapping, "mc_samples", 100_000, minimum=mc_min),
            output=get_choice(mapping, "output", ("human", "json", "csv"), "human"),
            marginal=marginal,
        )


@dataclass(frozen=True)
class SyntheticEnsembleSpec:
    x_min: float = -4.0
    x_max: float = 4.0
    n_points: int = 81
    members: int = 5
    mean_curve: str = "sine"
    mean_jitter_scale: float = 0.3
    variance_curve: str = "bowl"
    variance_jitter_logscale: float = 0.3
    seed: int = 7

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ConfigError("x_min must be below x_max", "grid.x_min")
        if self.n_points < 2:
            raise ConfigError("need at least 2 grid points", "grid.n_points")
        if self.members < 2:
            raise ConfigError("an ensemble needs at least 2 members", "members")
        if self.mean_curve not in ("sine", "cubic", "flat"):
            raise ConfigError(f"unknown mean curve {self.mean_curve!r}", "mean_curve")
        if self.mean_jitter_scale < 0 or self.variance_jitter_logscale < 0:
            raise ConfigError("jitter scales must be >= 0", "mean_jitter_scale")
        self.variance_constant  # validates the curve name

    @property
    def variance_constant(self):
        """c for ``constant(c)``, else None."""
        name = self.variance_curve.replace(" ", "")
        if name in ("bowl", "increasing"):
            return None
        if name.startswith("constant(") and name.endswith(")"):
            try:
                c = float(name[len("constant("):-1])
            except ValueError:
                c = -1.0
            if c > 0:
                return c
        raise ConfigError(f"expected bowl, increasing or constant(c) with c > 0, got {self.variance_curve!r}",
                          "variance_curve")

    @classmethod
    def from_mapping(cls, mapping: dict) -> "SyntheticEnsembleSpec":
        check_keys(mapping, {"grid.x_min", "grid.x_max", "grid.n_points", "members", "mean_curve",
                             "mean_jitter_scale", "variance_curve", "variance_jitter_logscale", "seed"})
        d = cls()
        return cls(
            x_min=get_float(mapping, "grid.x_min", d.x_min),
            x_max=get_float(mapping, "grid.x_max", d.x_max),
            n_points=get_int(mapping, "grid.n_points", d.n_points),
            members=get_int(mapping, "members", d.members),
            mean_curve=mapping.get("mean_curve", d.mean_curve),
            mean_jitter_scale=get_float(mapping, "mean_jitter_scale", d.mean_jitter_scale),
            variance_curve=mapping.get("variance_curve", d.variance_curve),
            variance_jitter_logscale=get_float(mapping, "variance_jitter_logscale", d.variance_jitter_logscale),
            seed=seed_override(get_int(mapping, "seed", d.seed, minimum=0)),
        )


SWEEP_PARAMS = {
    "nig": ("gamma", "upsilon", "alpha", "beta"),
    "ensemble2": ("mu1", "mu2", "sigma2_1", "sigma2_2"),
}


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    n: int


@dataclass(frozen=True)
class SweepSpec:
    representation: str
    fixed: dict
    axis1: Axis
    axis2: Axis

    @classmethod
    def from_mapping(cls, mapping: dict) -> "SweepSpec":
        rep = get_choice(mapping, "representation", tuple(SWEEP_PARAMS))
        names = SWEEP_PARAMS[rep]
        axis_keys = {f"axis{i}.{k}" for i in (1, 2) for k in ("name", "min", "max", "n")}
        check_keys(mapping, {"representation", *names} | axis_keys)
        axes = []
        for i in (1, 2):
            name = get_choice(mapping, f"axis{i}.name", names)
            lo, hi = get_float(mapping, f"axis{i}.min"), get_float(mapping, f"axis{i}.max")
            n = get_int(mapping, f"axis{i}.n", minimum=1)
            if hi < lo:
                raise ConfigError("max must be >= min", f"axis{i}.max")
            axes.append(Axis(name, lo, hi, n))
        if axes[0].name == axes[1].name:
            raise ConfigError("swept axes must differ", "axis2.name")
        swept = {a.name for a in axes}
        fixed = {p: get_float(mapping, p) for p in names if p not in swept}
        spec = cls(rep, fixed, axes[0], axes[1])
        spec._check_domain()
        return spec

    def _check_domain(self):
        def bounds(p):
            for i, a in enumerate((self.axis1, self.axis2), start=1):
                if a.name == p:
                    return a.lo, f"axis{i}.min"
            return self.fixed[p], p

        positive = {"nig": ("upsilon", "beta"), "ensemble2": ("sigma2_1", "sigma2_2")}[self.representation]
        for p in positive:
            lo, key = bounds(p)
            if not lo > 0:
                raise ConfigError(f"{p} must stay > 0", key)
        if self.representation == "nig":
            lo, key = bounds("alpha")
            if not lo > 1:
                raise ConfigError("alpha must stay > 1 over the whole range", key)
