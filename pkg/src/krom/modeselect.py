"""Shapiro-Wilk normality test and the minimum-mode-count heuristic.

The W statistic and p-value follow Royston's AS R94 approximations
(Applied Statistics 44, 1995), valid for 3 <= n <= 5000.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

MAX_N = 5000
SUBSAMPLE_SEED = 20240101

_STD_NORMAL = NormalDist()

# polynomial coefficients, lowest order first
_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


class NormalityError(ValueError):
    pass


def _poly(c, x):
    return sum(ci * x**i for i, ci in enumerate(c))


def ppnd(p: float) -> float:
    """Normal quantile by AS 111, the approximation AS R94 was published with."""
    q = p - 0.5
    if abs(q) <= 0.42:
        r = q * q
        num = ((-25.44106049637 * r + 41.39119773534) * r - 18.61500062529) * r + 2.50662823884
        den = (((3.13082909833 * r - 21.06224101826) * r + 23.08336743743) * r - 8.47351093090) * r + 1.0
        return q * num / den
    r = math.sqrt(-math.log(p if q < 0 else 1.0 - p))
    v = (((2.32121276858 * r + 4.85014127135) * r - 2.29796479134) * r - 2.78718931138) / (
        (1.63706781897 * r + 3.54388924762) * r + 1.0
    )
    return -v if q < 0 else v


def shapiro_coefficients(n: int) -> np.ndarray:
    """Royston's approximate W coefficients ``a_1..a_{n//2}`` (positive, largest first)."""
    if n < 3:
        raise NormalityError("Shapiro-Wilk needs at least 3 observations")
    nn2 = n // 2
    if n == 3:
        return np.array([math.sqrt(0.5)])
    an25 = n + 0.25
    m = np.array([ppnd((i - 0.375) / an25) for i in range(1, nn2 + 1)])
    summ2 = 2.0 * np.sum(m**2)
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a = np.empty(nn2)
    a[0] = _poly(_C1, rsn) - m[0] / ssumm2
    if n > 5:
        a[1] = _poly(_C2, rsn) - m[1] / ssumm2
        fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a[0] ** 2 - 2 * a[1] ** 2))
        first = 2
    else:
        fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a[0] ** 2))
        first = 1
    a[first:] = -m[first:] / fac
    return a


def shapiro_wilk(sample) -> tuple[float, float]:
    """Return ``(W, p)`` for the Shapiro-Wilk test of normality."""
    x = np.sort(np.asarray(sample, dtype=float).reshape(-1))
    n = x.size
    if n < 3:
        raise NormalityError("Shapiro-Wilk needs at least 3 observations")
    if n > MAX_N:
        raise NormalityError(f"n={n} exceeds {MAX_N}; subsample first")
    if not np.all(np.isfinite(x)):
        raise NormalityError("sample contains NaN or Inf")
    rng = x[-1] - x[0]
    if rng <= 0:
        raise NormalityError("zero-variance sample")
    # shift and scale for accuracy; W is affine invariant
    x = (x - x[n // 2]) / rng

    a = shapiro_coefficients(n)
    nn2 = a.size
    num = np.dot(a, x[::-1][:nn2] - x[:nn2]) ** 2
    ssq = np.sum((x - x.mean()) ** 2)
    w = min(float(num / ssq), 1.0)

    if n == 3:
        # exact null distribution for n = 3
        pw = (6.0 / math.pi) * (math.asin(math.sqrt(w)) - math.pi / 3)
        return w, min(max(pw, 0.0), 1.0)

    w1 = 1.0 - w
    if w1 <= 0:
        return w, 1.0
    y = math.log(w1)
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return w, 1e-99
        y = -math.log(gamma - y)
        mean = _poly(_C3, n)
        sd = math.exp(_poly(_C4, n))
    else:
        xx = math.log(n)
        mean = _poly(_C5, xx)
        sd = math.exp(_poly(_C6, xx))
    pw = 1.0 - NormalDist(mean, sd).cdf(y)
    return w, min(max(pw, 0.0), 1.0)


def subsample(sample, max_n: int = MAX_N, seed: int = SUBSAMPLE_SEED) -> np.ndarray:
    """Deterministic uniform subsample without replacement (order preserved)."""
    sample = np.asarray(sample)
    if sample.size <= max_n:
        return sample
    idx = np.sort(np.random.default_rng(seed).choice(sample.size, size=max_n, replace=False))
    return sample[idx]


@dataclass
class NormalityReport:
    model_sizes: list[int]
    p_values: list[np.ndarray]
    means: list[float]
    medians: list[float]
    selected_J: int | None
    threshold: float = 0.05
    statistics: list[np.ndarray] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "model_sizes": list(self.model_sizes),
            "p_values": [p.tolist() for p in self.p_values],
            "W": [w.tolist() for w in self.statistics],
            "means": list(self.means),
            "medians": list(self.medians),
            "threshold": self.threshold,
            "selected_J": self.selected_J,
        }

    @classmethod
    def from_dict(cls, d) -> "NormalityReport":
        return cls(
            model_sizes=list(d["model_sizes"]),
            p_values=[np.asarray(p, dtype=float) for p in d["p_values"]],
            means=list(d["means"]),
            medians=list(d["medians"]),
            selected_J=d["selected_J"],
            threshold=d.get("threshold", 0.05),
            statistics=[np.asarray(w, dtype=float) for w in d.get("W", [])],
        )


def pick_smallest(sizes, means, medians, threshold: float = 0.05):
    for J, mean, median in zip(sizes, means, medians):
        if mean > threshold and median > threshold:
            return J
    return None


def _test_row(row):
    # a constant sequence is a point mass: reject normality outright
    if np.ptp(row) == 0:
        return float("nan"), 0.0
    return shapiro_wilk(row)


def select_min_modes(modal_sets, threshold: float = 0.05, part: str = "real") -> NormalityReport:
    """Smallest model whose per-coordinate p-values have mean and median above ``threshold``.

    ``modal_sets`` is an ordered sequence of ``(J, rho)`` pairs where ``rho`` holds
    one modal noise sequence per row. ``part`` selects which component of complex
    sequences is tested.
    """
    modal_sets = list(modal_sets)
    if not modal_sets:
        raise NormalityError("no models to compare")
    sizes = [int(J) for J, _ in modal_sets]
    if sizes != sorted(sizes):
        raise NormalityError("models must be ordered smallest to largest")
    take = {"real": np.real, "imag": np.imag}[part]

    p_values, stats, means, medians = [], [], [], []
    for _, rho in modal_sets:
        rows = np.atleast_2d(take(np.asarray(rho)))
        results = [_test_row(subsample(row)) for row in rows]
        W = np.array([r[0] for r in results])
        p = np.array([r[1] for r in results])
        stats.append(W)
        p_values.append(p)
        means.append(float(np.mean(p)))
        medians.append(float(np.median(p)))
    return NormalityReport(
        model_sizes=sizes,
        p_values=p_values,
        means=means,
        medians=medians,
        selected_J=pick_smallest(sizes, means, medians, threshold),
        threshold=threshold,
        statistics=stats,
    )


def qq_pairs(sample) -> np.ndarray:
    """``(theoretical normal quantile, order statistic)`` rows at positions ``(i - 0.5)/n``."""
    x = np.sort(np.asarray(sample, dtype=float).reshape(-1))
    n = x.size
    if n < 3:
        raise NormalityError("QQ data needs at least 3 points")
    q = np.array([_STD_NORMAL.inv_cdf((i - 0.5) / n) for i in range(1, n + 1)])
    return np.column_stack([q, x])
