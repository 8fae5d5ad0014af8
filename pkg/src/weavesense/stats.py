"""One-way ANOVA with an F-distribution tail from the regularized incomplete beta."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import AnovaError, InvalidParameterError

_EPS = 1e-10
_TINY = 1e-300
_MAX_ITER = 500


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if a <= 0 or b <= 0:
        raise InvalidParameterError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise InvalidParameterError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(f: float, dfn: float, dfd: float) -> float:
    """Survival function P(F > f) of the F(dfn, dfd) distribution."""
    if dfn <= 0 or dfd <= 0:
        raise InvalidParameterError("degrees of freedom must be positive")
    if math.isinf(f):
        return 0.0
    if f <= 0:
        return 1.0
    return betainc_regularized(dfd / 2.0, dfn / 2.0, dfd / (dfd + dfn * f))


def anova_one_way(groups: Sequence[Sequence[float]]) -> tuple[float, float]:
    """Classical one-way ANOVA; returns ``(F, p)``.

    With no within-group spread the statistic is guarded: F = 0, p = 1 when
    the group means also coincide, otherwise F = inf, p = 0.
    """
    arrays = [np.asarray(g, dtype=float) for g in groups]
    if len(arrays) < 2 or any(len(g) < 1 for g in arrays):
        raise AnovaError("need at least two non-empty groups")
    n_total = sum(len(g) for g in arrays)
    k = len(arrays)
    df_between, df_within = k - 1, n_total - k
    if df_within < 1:
        raise AnovaError("need at least one within-group degree of freedom")

    pooled = np.concatenate(arrays)
    grand = pooled.mean()
    ss_between = float(sum(len(g) * (g.mean() - grand) ** 2 for g in arrays))
    ss_within = float(sum(((g - g.mean()) ** 2).sum() for g in arrays))
    # sums of squares at rounding level count as exact zeros
    tol = n_total * (16.0 * np.finfo(float).eps * float(np.abs(pooled).max())) ** 2
    if ss_within <= tol:
        return (0.0, 1.0) if ss_between <= tol else (math.inf, 0.0)
    f = (ss_between / df_between) / (ss_within / df_within)
    return f, f_sf(f, df_between, df_within)
