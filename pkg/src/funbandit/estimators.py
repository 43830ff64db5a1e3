"""Functional specifications and their sample estimators.

Every estimator maps a one-dimensional reward sample to a real score
where larger is better, so the best arm always maximizes the estimate.
Risk functionals follow the negated-quantile convention: VaR is
``-q(lambda)`` and AVaR is the average of VaR over levels in ``(0, lambda]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import digamma

from .errors import DegenerateSample, DomainError, EmptySample, InsufficientSamples

LN2 = math.log(2.0)

# Distances below this are clamped before taking logs in the k-NN estimator.
MIN_KNN_DISTANCE = 1e-12


# ---------------------------------------------------------------------------
# Functional specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Mean:
    name = "mean"


@dataclass(frozen=True)
class MeanVariance:
    lam: float
    name = "mean_variance"

    def __post_init__(self) -> None:
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise DomainError(f"mean-variance lambda must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class ValueAtRisk:
    lam: float
    name = "var"

    def __post_init__(self) -> None:
        if not 0.0 < self.lam < 1.0:
            raise DomainError(f"VaR level must lie in (0, 1), got {self.lam}")


@dataclass(frozen=True)
class AverageValueAtRisk:
    lam: float
    name = "avar"

    def __post_init__(self) -> None:
        if not 0.0 < self.lam < 1.0:
            raise DomainError(f"AVaR level must lie in (0, 1), got {self.lam}")


@dataclass(frozen=True)
class ShannonEntropy:
    mode: str = "plugin"
    k: Optional[int] = None
    name = "entropy"

    def __post_init__(self) -> None:
        if self.mode not in ("plugin", "knn"):
            raise DomainError(f"entropy mode must be 'plugin' or 'knn', got {self.mode!r}")
        if self.k is not None and self.k < 1:
            raise DomainError(f"k must be positive, got {self.k}")


FunctionalSpec = Union[Mean, MeanVariance, ValueAtRisk, AverageValueAtRisk, ShannonEntropy]


# ---------------------------------------------------------------------------
# Sample storage
# ---------------------------------------------------------------------------


class SampleBuffer:
    """Append-only reward history of one arm."""

    def __init__(self, values: Sequence[float] | np.ndarray = ()) -> None:
        self._chunks: list[np.ndarray] = []
        self._cache: Optional[np.ndarray] = None
        if len(values):
            self.append(values)

    def append(self, values: Sequence[float] | np.ndarray) -> None:
        arr = np.asarray(values, dtype=float).ravel()
        if arr.size:
            self._chunks.append(arr.copy())
            self._cache = None

    @property
    def values(self) -> np.ndarray:
        if self._cache is None:
            self._cache = np.concatenate(self._chunks) if self._chunks else np.empty(0)
            self._chunks = [self._cache]
        return self._cache

    @property
    def N(self) -> int:
        return sum(c.size for c in self._chunks)

    def __len__(self) -> int:
        return self.N

    def __repr__(self) -> str:
        return f"SampleBuffer(N={self.N})"


Samples = Union[SampleBuffer, Sequence[float], np.ndarray]


def _as_array(samples: Samples) -> np.ndarray:
    if isinstance(samples, SampleBuffer):
        arr = samples.values
    else:
        arr = np.asarray(samples, dtype=float).ravel()
    if arr.size == 0:
        raise EmptySample("estimator called on an empty sample")
    return arr


# ---------------------------------------------------------------------------
# Index arithmetic
# ---------------------------------------------------------------------------


def snap_product(lam: float, n: int) -> float:
    """Return ``lam * n``, snapped to the nearest integer when within rounding noise.

    ``0.3 * 10`` evaluates to ``3.0000000000000004`` in binary floating
    point; the ceil/floor of order-statistic indices must see ``3``.
    """
    x = lam * n
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, abs(x)):
        return float(r)
    return x


def ceil_index(lam: float, n: int) -> int:
    """``ceil(lam * n)`` clamped to ``[1, n]``."""
    return min(max(math.ceil(snap_product(lam, n)), 1), n)


def floor_index(lam: float, n: int) -> int:
    return math.floor(snap_product(lam, n))


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------


def estimate_mean(samples: Samples) -> float:
    return float(np.mean(_as_array(samples)))


def estimate_mean_variance(samples: Samples, lam: float) -> float:
    """``-mean + lam * s^2`` with the unbiased (1/(N-1)) sample variance."""
    x = _as_array(samples)
    if x.size < 2:
        raise InsufficientSamples(f"mean-variance needs N >= 2, got N={x.size}")
    mu = float(np.mean(x))
    return -mu + lam * float(np.var(x, ddof=1))


def estimate_var(samples: Samples, lam: float) -> float:
    """Negated ``ceil(lam*N)``-th smallest sample (1-indexed, clamped to [1, N])."""
    x = _as_array(samples)
    if not 0.0 < lam <= 1.0:
        raise DomainError(f"VaR level must lie in (0, 1], got {lam}")
    idx = ceil_index(lam, x.size)
    return -float(np.partition(x, idx - 1)[idx - 1])


def estimate_avar(samples: Samples, lam: float) -> float:
    """Riemann sum of lower order statistics.

    ``-(1/lam) * (sum_{j < floor(lam N)} X_(j+1) / N + (lam - floor(lam N)/N) * X_(ceil(lam N)))``
    """
    x = _as_array(samples)
    if not 0.0 < lam <= 1.0:
        raise DomainError(f"AVaR level must lie in (0, 1], got {lam}")
    n = x.size
    xs = np.sort(x)
    lo = floor_index(lam, n)
    total = math.fsum(xs[:lo]) / n
    if snap_product(lam, n) != lo:
        total += (lam - lo / n) * xs[ceil_index(lam, n) - 1]
    return -total / lam


def estimate_entropy_plugin(samples: Samples) -> float:
    """Shannon entropy in bits of the empirical atom frequencies."""
    x = _as_array(samples)
    _, counts = np.unique(x, return_counts=True)
    p = counts / x.size
    h = -float(np.sum(p * np.log2(p)))
    return max(h, 0.0)


def kth_neighbor_distances(x: np.ndarray, k: int) -> np.ndarray:
    """Distance from each point to its k-th nearest neighbour, 1-D, O(N k).

    On the sorted line the point and its k nearest neighbours occupy a
    contiguous window of k+1 points; the k-th neighbour distance is the
    smallest window radius over the k+1 windows that contain the point.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    n = xs.size
    pad = np.full(k, np.inf)
    padded = np.concatenate([-pad, xs, pad])
    best = np.full(n, np.inf)
    centre = np.arange(n) + k
    for left in range(k + 1):
        lo = padded[centre - left]
        hi = padded[centre + (k - left)]
        np.minimum(best, np.maximum(xs - lo, hi - xs), out=best)
    out = np.empty(n)
    out[order] = best
    return out


def estimate_entropy_knn(samples: Samples, k: Optional[int] = None) -> float:
    """Kozachenko-Leonenko differential entropy estimate in bits (1-D).

    ``[psi(N) - psi(k) + log 2 + mean(log eps_i)] / log 2`` where ``eps_i``
    is the distance to the k-th nearest neighbour. ``k`` defaults to
    ``floor(sqrt(N))``.
    """
    x = _as_array(samples)
    n = x.size
    if k is None:
        k = max(1, math.isqrt(n))
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    if n < k + 1:
        raise InsufficientSamples(f"k-NN entropy needs N >= k+1 = {k + 1}, got N={n}")
    if np.all(x == x[0]):
        raise DegenerateSample("all samples identical; differential entropy undefined")
    eps = np.maximum(kth_neighbor_distances(x, k), MIN_KNN_DISTANCE)
    nats = digamma(n) - digamma(k) + LN2 + float(np.mean(np.log(eps)))
    return float(nats / LN2)


def estimate(functional: FunctionalSpec, samples: Samples) -> float:
    """Dispatch to the estimator matching ``functional``."""
    if isinstance(functional, Mean):
        return estimate_mean(samples)
    if isinstance(functional, MeanVariance):
        return estimate_mean_variance(samples, functional.lam)
    if isinstance(functional, ValueAtRisk):
        return estimate_var(samples, functional.lam)
    if isinstance(functional, AverageValueAtRisk):
        return estimate_avar(samples, functional.lam)
    if isinstance(functional, ShannonEntropy):
        if functional.mode == "plugin":
            return estimate_entropy_plugin(samples)
        return estimate_entropy_knn(samples, functional.k)
    raise DomainError(f"unknown functional {functional!r}")


def min_samples(functional: FunctionalSpec) -> int:
    """Smallest sample count the estimator accepts."""
    if isinstance(functional, MeanVariance):
        return 2
    if isinstance(functional, ShannonEntropy) and functional.mode == "knn":
        return (functional.k or 1) + 1
    return 1


_FUNCTIONAL_NAMES = {
    "mean": Mean,
    "mean_variance": MeanVariance,
    "var": ValueAtRisk,
    "avar": AverageValueAtRisk,
    "entropy": ShannonEntropy,
}


def functional_from_dict(doc: dict) -> FunctionalSpec:
    """Build a functional from ``{"name": ..., "lambda"?, "mode"?, "k"?}``."""
    name = doc.get("name")
    if name not in _FUNCTIONAL_NAMES:
        raise DomainError(f"unknown functional {name!r}")
    if name == "mean":
        return Mean()
    if name == "entropy":
        return ShannonEntropy(doc.get("mode", "plugin"), doc.get("k"))
    if "lambda" not in doc:
        raise DomainError(f"functional {name!r} needs 'lambda'")
    return _FUNCTIONAL_NAMES[name](float(doc["lambda"]))


def functional_to_dict(f: FunctionalSpec) -> dict:
    out: dict = {"name": f.name}
    if isinstance(f, ShannonEntropy):
        out["mode"] = f.mode
        if f.k is not None:
            out["k"] = f.k
    elif not isinstance(f, Mean):
        out["lambda"] = f.lam
    return out
