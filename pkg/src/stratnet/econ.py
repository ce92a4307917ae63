"""Individual economic indicators, inequality measures, and class partitioning."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats


class EconError(ValueError):
    pass


class InactiveUserError(EconError):
    """User has no active months for the requested indicator."""


@dataclass(frozen=True)
class TransactionRecord:
    user: str
    month: int
    purchase_total: float
    debt: Optional[float] = None

    def __post_init__(self):
        if self.purchase_total < 0:
            raise ValueError("purchase_total must be >= 0")
        if self.debt is not None and self.debt < 0:
            raise ValueError("debt must be >= 0")


@dataclass
class EgoProfile:
    user: str
    amp: float = 0.0
    amd: Optional[float] = None
    salary: Optional[float] = None
    income: Optional[float] = None
    age: Optional[float] = None
    gender: Optional[str] = None
    zip_point: Optional[Tuple[float, float]] = None
    home: Optional[Tuple[float, float]] = None
    work: Optional[Tuple[float, float]] = None


def average_monthly_purchase(records: Sequence[TransactionRecord]) -> float:
    """Total spend divided by the number of months with at least one purchase."""
    active = [r.purchase_total for r in records if r.purchase_total > 0]
    if not active:
        raise InactiveUserError("user has no month with a purchase")
    return float(sum(active)) / len(active)


def average_monthly_debt(records: Sequence[TransactionRecord]) -> Optional[float]:
    """Mean debt over debt-active months; None when the user never had debt."""
    debts = [r.debt for r in records if r.debt is not None and r.debt > 0]
    if not debts:
        return None
    return float(sum(debts)) / len(debts)


@dataclass(frozen=True)
class LorenzCurve:
    """Cumulative wealth share at each sorted rank; (0,0) and (1,1) included."""

    f: np.ndarray
    share: np.ndarray

    def __post_init__(self):
        if self.f[0] != 0.0 or self.share[0] != 0.0:
            raise EconError("curve must start at (0, 0)")
        if abs(self.f[-1] - 1.0) > 1e-12 or abs(self.share[-1] - 1.0) > 1e-12:
            raise EconError("curve must end at (1, 1)")


def lorenz_curve(values: Iterable[float]) -> LorenzCurve:
    vals = np.sort(np.asarray(list(values), dtype=np.float64))
    if vals.size == 0:
        raise EconError("no values")
    if vals[0] < 0:
        raise EconError("negative values not allowed")
    total = vals.sum()
    if total <= 0:
        raise EconError("all values are zero")
    n = vals.size
    f = np.arange(n + 1) / n
    share = np.concatenate([[0.0], np.cumsum(vals) / total])
    share[-1] = 1.0  # clamp float residue
    return LorenzCurve(f=f, share=share)


def gini(curve: LorenzCurve) -> float:
    """1 minus twice the trapezoidal area under the Lorenz curve."""
    trapezoid = getattr(np, "trapezoid", np.trapz)
    area = float(trapezoid(curve.share, curve.f))
    return 1.0 - 2.0 * area


def pareto_split(curve: LorenzCurve) -> Tuple[float, float]:
    """Intersection of the Lorenz curve with the anti-diagonal 1 - C(f) = f.

    Returns (top people fraction, wealth share they hold), e.g. (0.2, 0.8)
    for an 80:20 society.  Linear interpolation between ranks.
    """
    g = curve.share + curve.f - 1.0  # increasing, g(0) = -1, g(1) = 1
    idx = int(np.searchsorted(g, 0.0))
    if idx == 0:
        f = curve.f[0]
    else:
        g0, g1 = g[idx - 1], g[idx]
        w = 0.0 if g1 == g0 else -g0 / (g1 - g0)
        f = curve.f[idx - 1] + w * (curve.f[idx] - curve.f[idx - 1])
    c = float(np.interp(f, curve.f, curve.share))
    return (1.0 - float(f), 1.0 - c)


def pareto_tail_index(values: Iterable[float], tail_fraction: float = 0.2,
                      min_tail: int = 50) -> float:
    """Hill maximum-likelihood tail exponent over the top ``tail_fraction``."""
    vals = np.sort(np.asarray(list(values), dtype=np.float64))[::-1]
    k = int(np.floor(vals.size * tail_fraction))
    if k < min_tail or k >= vals.size:
        raise EconError(f"tail of {k} values is too small (need >= {min_tail})")
    threshold = vals[k]
    if threshold <= 0 or vals[0] == threshold:
        raise EconError("degenerate tail (constant or non-positive values)")
    logs = np.log(vals[:k] / threshold)
    return float(k / logs.sum())


def gini_from_pareto_alpha(alpha: float) -> float:
    """Analytic Gini of a Pareto distribution with tail exponent alpha > 1."""
    if alpha <= 1:
        raise EconError("alpha must exceed 1")
    return 1.0 / (2.0 * alpha - 1.0)


def pearson_with_se(x: Iterable[float], y: Iterable[float]) -> Tuple[float, float, float]:
    """Sample Pearson r with two-sided p-value and asymptotic standard error."""
    xa = np.asarray(list(x), dtype=np.float64)
    ya = np.asarray(list(y), dtype=np.float64)
    if xa.size != ya.size or xa.size < 3:
        raise EconError("need paired samples with n >= 3")
    if np.ptp(xa) == 0 or np.ptp(ya) == 0:
        raise EconError("zero variance input")
    r, p = stats.pearsonr(xa, ya)
    se = float(np.sqrt((1.0 - r * r) / (xa.size - 2)))
    return float(r), float(p), se


@dataclass
class ClassPartition:
    """Assignment of every node to one of n equal-total-wealth classes.

    Class indices run 1..n in ascending wealth.  ``labels`` is aligned
    with the node order of the wealth vector the partition was built from.
    """

    n_classes: int
    labels: np.ndarray       # per-node class index, 1-based
    class_sums: np.ndarray   # per-class total wealth, index 0 = class 1
    class_sizes: np.ndarray

    def members(self, class_index: int) -> np.ndarray:
        return np.flatnonzero(self.labels == class_index)


def partition_equal_wealth(wealth: Sequence[float], n_classes: int = 9) -> ClassPartition:
    """Split individuals into classes each holding ~1/n of total wealth.

    Individuals are scanned in ascending wealth order (ties by node id);
    the class index advances right after cumulative wealth reaches the
    next multiple of total/n, so the boundary individual stays in the
    lower class.
    """
    w = np.asarray(wealth, dtype=np.float64)
    if np.any(w <= 0):
        raise EconError("all wealth values must be positive")
    if n_classes < 1:
        raise EconError("need at least one class")
    if w.size < n_classes:
        raise EconError("fewer individuals than classes")
    order = np.lexsort((np.arange(w.size), w))
    total = w.sum()
    labels = np.zeros(w.size, dtype=np.int64)
    k = 1
    cum = 0.0
    for node in order:
        cum += w[node]
        labels[node] = k
        if k < n_classes and cum >= k * total / n_classes:
            k += 1
    sums = np.zeros(n_classes)
    sizes = np.zeros(n_classes, dtype=np.int64)
    np.add.at(sums, labels - 1, w)
    np.add.at(sizes, labels - 1, 1)
    if np.any(sizes == 0):
        raise EconError("a class ended up empty; too few individuals for n")
    return ClassPartition(n_classes=n_classes, labels=labels,
                          class_sums=sums, class_sizes=sizes)


def class_demographics(partition: ClassPartition,
                       profiles: Sequence[EgoProfile]) -> List[Dict[str, float]]:
    """Per-class size, mean wealth, mean age, and fraction of women.

    Profiles must be aligned with the partition's node order.  Individuals
    missing age or gender are excluded from those aggregates only.
    """
    if len(profiles) != partition.labels.size:
        raise EconError("profiles and partition cover different node sets")
    out = []
    for k in range(1, partition.n_classes + 1):
        idx = partition.members(k)
        amps = [profiles[i].amp for i in idx]
        ages = [profiles[i].age for i in idx if profiles[i].age is not None]
        genders = [profiles[i].gender for i in idx if profiles[i].gender]
        out.append({
            "class": k,
            "size": int(idx.size),
            "mean_amp": float(np.mean(amps)) if amps else float("nan"),
            "mean_age": float(np.mean(ages)) if ages else float("nan"),
            "fraction_women": (sum(1 for g in genders if g.lower() in ("f", "female", "w"))
                               / len(genders)) if genders else float("nan"),
        })
    return out
