"""Rank and location tests for comparing two samples, with no external deps.

Mann-Whitney U uses the large-sample normal approximation with the standard
tie correction (no continuity correction); predicted probabilities are
multiples of 1/k, so heavy ties are the norm here. Welch's t-test gets its
p-value from the regularized incomplete beta function, evaluated with the
Lentz continued fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class UTestResult:
    u: float  # U statistic of the first sample
    z: float
    p_value: float


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p_value: float


def midranks(values: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of the ranks they occupy."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2.0 + 1.0
        for idx in order[i : j + 1]:
            ranks[idx] = rank
        i = j + 1
    return ranks


def normal_sf(z: float) -> float:
    """P(Z > z) for a standard normal."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def mann_whitney_u(x: Sequence[float], y: Sequence[float]) -> UTestResult:
    """Two-sided Mann-Whitney U test; returns the U statistic of x.

    U counts (x, y) pairs where x ranks higher, with ties counting half, so
    U / (len(x) * len(y)) is the ROC AUC of x over y.
    """
    n1, n0 = len(x), len(y)
    if n1 == 0 or n0 == 0:
        raise ValueError("both samples must be non-empty")
    n = n1 + n0
    ranks = midranks(list(x) + list(y))
    r1 = math.fsum(ranks[:n1])
    u = r1 - n1 * (n1 + 1) / 2.0

    tie_sum = 0.0
    for run in _tie_runs(ranks):
        tie_sum += run**3 - run
    if n < 2:
        return UTestResult(u=u, z=0.0, p_value=1.0)
    variance = (n1 * n0 / 12.0) * ((n + 1.0) - tie_sum / (n * (n - 1.0)))
    if variance <= 0.0:
        # every pooled value identical: no evidence either way
        return UTestResult(u=u, z=0.0, p_value=1.0)
    z = (u - n1 * n0 / 2.0) / math.sqrt(variance)
    return UTestResult(u=u, z=z, p_value=min(1.0, 2.0 * normal_sf(abs(z))))


def _tie_runs(ranks: Sequence[float]) -> list[int]:
    counts: dict[float, int] = {}
    for r in ranks:
        counts[r] = counts.get(r, 0) + 1
    return list(counts.values())


def welch_t(x: Sequence[float], y: Sequence[float]) -> TTestResult:
    """Welch's unequal-variance t-test, two-sided. Needs >= 2 values per sample."""
    n1, n0 = len(x), len(y)
    if n1 < 2 or n0 < 2:
        raise ValueError("welch_t needs at least two values in each sample")
    m1, m0 = math.fsum(x) / n1, math.fsum(y) / n0
    v1 = math.fsum((v - m1) ** 2 for v in x) / (n1 - 1)
    v0 = math.fsum((v - m0) ** 2 for v in y) / (n0 - 1)
    se2 = v1 / n1 + v0 / n0
    if se2 == 0.0:
        # zero variance in both samples: identical means carry no signal,
        # distinct means are infinitely significant
        if m1 == m0:
            return TTestResult(t=0.0, df=float(n1 + n0 - 2), p_value=1.0)
        return TTestResult(t=math.copysign(math.inf, m1 - m0),
                           df=float(n1 + n0 - 2), p_value=0.0)
    t = (m1 - m0) / math.sqrt(se2)
    df = se2**2 / ((v1 / n1) ** 2 / (n1 - 1) + (v0 / n0) ** 2 / (n0 - 1))
    return TTestResult(t=t, df=df, p_value=student_t_two_sided_p(t, df))


def student_t_two_sided_p(t: float, df: float) -> float:
    """P(|T| > |t|) for Student's t with df degrees of freedom."""
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) via the continued fraction, accurate to ~1e-12."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # the continued fraction converges fast only below the distribution mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def _beta_continued_fraction(a: float, b: float, x: float,
                             max_iter: int = 300, eps: float = 1e-14) -> float:
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        coeff = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + coeff * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + coeff / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        coeff = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + coeff * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + coeff / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta failed to converge for a={a}, b={b}, x={x}")
