"""Table generators behind the toy-ensemble and parameter-sweep commands."""

from __future__ import annotations

import math

import numpy as np

from .config import SweepSpec, SyntheticEnsembleSpec
from .errors import UqregError
from .expfam import GAUSSIAN, ParamPoint
from .measures import measure
from .numerics import RandomnessContract
from .second_order import EmpiricalMixture, NormalInverseGamma

TOY_COLUMNS = ("x", "au_var", "eu_var", "tu_var", "au_ent", "eu_ent", "tu_ent")
SWEEP_COLUMNS = ("axis1", "axis2", "au_var", "eu_var", "au_ent", "eu_ent")


def mean_curve(name: str, x: np.ndarray) -> np.ndarray:
    if name == "sine":
        return np.sin(x)
    if name == "cubic":
        return 0.1 * x ** 3
    return np.zeros_like(x)


def variance_curve(spec: SyntheticEnsembleSpec, x: np.ndarray) -> np.ndarray:
    c = spec.variance_constant
    if c is not None:
        return np.full_like(x, c)
    if spec.variance_curve == "bowl":
        return 0.01 + 0.1 * x ** 2
    return 0.05 + 0.1 * (x - spec.x_min)


def toy_members(spec: SyntheticEnsembleSpec):
    """Member mean and variance curves, each of shape ``(members, n_points)``.

    Member m has mean f(x) + s (a_m + b_m u) with u the grid rescaled to
    [-1, 1], and variance g(x) exp(l c_m); a, b, c are standard normal.
    Constant variance curves are not jittered.
    """
    x = np.linspace(spec.x_min, spec.x_max, spec.n_points)
    u = 2.0 * (x - spec.x_min) / (spec.x_max - spec.x_min) - 1.0
    gen = RandomnessContract(spec.seed).generator()
    coef = gen.standard_normal((spec.members, 3))
    means = mean_curve(spec.mean_curve, x)[None, :] + spec.mean_jitter_scale * (
        coef[:, :1] + coef[:, 1:2] * u[None, :]
    )
    g = variance_curve(spec, x)[None, :]
    if spec.variance_constant is None:
        variances = g * np.exp(spec.variance_jitter_logscale * coef[:, 2:3])
    else:
        variances = np.repeat(g, spec.members, axis=0)
    return x, means, variances


def toy_rows(spec: SyntheticEnsembleSpec):
    x, means, variances = toy_members(spec)
    rows = []
    for i, xi in enumerate(x):
        q = EmpiricalMixture(tuple(ParamPoint(GAUSSIAN, (m, v)) for m, v in zip(means[:, i], variances[:, i])))
        rv, re_ = measure(q, "variance"), measure(q, "entropy")
        rows.append((float(xi), rv.au, rv.eu, rv.tu, re_.au, re_.eu, re_.tu))
    return rows


def _axis_values(axis):
    return np.linspace(axis.lo, axis.hi, axis.n) if axis.n > 1 else np.array([axis.lo])


def _sweep_q(spec: SweepSpec, point: dict):
    if spec.representation == "nig":
        return NormalInverseGamma(point["gamma"], point["upsilon"], point["alpha"], point["beta"])
    return EmpiricalMixture.from_columns(
        GAUSSIAN, mu=[point["mu1"], point["mu2"]], sigma2=[point["sigma2_1"], point["sigma2_2"]]
    )


def sweep_rows(spec: SweepSpec):
    rows = []
    for a in _axis_values(spec.axis1):
        for b in _axis_values(spec.axis2):
            point = dict(spec.fixed)
            point[spec.axis1.name] = float(a)
            point[spec.axis2.name] = float(b)
            q = _sweep_q(spec, point)
            rv, re_ = measure(q, "variance"), measure(q, "entropy")
            for r in (rv, re_):
                if any(e != "closed_form" for e in r.estimator.values()):
                    raise UqregError("sweeps are restricted to closed-form cells")
            rows.append((float(a), float(b), rv.au, rv.eu, re_.au, re_.eu))
    return rows


def format_number(v: float) -> str:
    """9 significant digits; inf/nan spelled out."""
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.9g}"


def write_csv(path, columns, rows):
    lines = [",".join(columns)]
    lines += [",".join(format_number(v) for v in row) for row in rows]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
