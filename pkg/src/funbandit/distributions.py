"""Arm reward laws, seeded sampling and ground-truth functional values."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, special, stats

from .errors import DomainError, InternalError, UnsupportedDistribution, UnsupportedFunctional
from .estimators import (
    LN2,
    AverageValueAtRisk,
    FunctionalSpec,
    Mean,
    MeanVariance,
    ShannonEntropy,
    ValueAtRisk,
)

MASK64 = (1 << 64) - 1

QUANTILE_TOL = 1e-12
QUANTILE_MAX_ITER = 200
AVAR_ABS_TOL = 1e-9


# ---------------------------------------------------------------------------
# Seeding
# ---------------------------------------------------------------------------


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed; stable across platforms and runs."""
    h = 0x6A09E667F3BCC908
    for p in parts:
        h = splitmix64(h ^ (int(p) & MASK64))
    return h


def _label_hash(label: str) -> int:
    return int.from_bytes(hashlib.blake2b(label.encode(), digest_size=8).digest(), "little")


class Rng:
    """Seeded random stream with reproducible labelled sub-streams."""

    def __init__(self, seed: int) -> None:
        self.seed = int(seed) & MASK64
        self.counter = 0
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def child(self, label: str) -> "Rng":
        """Sub-stream determined by ``(seed, label)`` alone."""
        return Rng(mix_seed(self.seed, _label_hash(label)))

    def spawn(self) -> "Rng":
        """Next unlabelled sub-stream; advances the stream counter."""
        self.counter += 1
        return Rng(mix_seed(self.seed, 0xC0FFEE, self.counter))

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, counter={self.counter})"


# ---------------------------------------------------------------------------
# Distribution specifications
# ---------------------------------------------------------------------------


def _check_prob(p: float, what: str) -> None:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"{what} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class Bernoulli:
    p: float
    kind = "bernoulli"

    def __post_init__(self) -> None:
        _check_prob(self.p, "p")

    @property
    def support_lo(self) -> float:
        return 0.0

    @property
    def support_hi(self) -> float:
        return 1.0


@dataclass(frozen=True)
class Categorical:
    values: tuple[float, ...]
    probs: tuple[float, ...]
    kind = "categorical"

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if not self.values or len(self.values) != len(self.probs):
            raise DomainError("categorical needs equally many (>= 1) values and probs")
        for p in self.probs:
            _check_prob(p, "categorical prob")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise DomainError(f"categorical probs sum to {math.fsum(self.probs)}, not 1")

    @property
    def support_lo(self) -> float:
        return min(self.values)

    @property
    def support_hi(self) -> float:
        return max(self.values)


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float
    kind = "uniform"

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise DomainError(f"uniform needs a < b, got a={self.a}, b={self.b}")

    @property
    def support_lo(self) -> float:
        return self.a

    @property
    def support_hi(self) -> float:
        return self.b


@dataclass(frozen=True)
class TruncatedGaussian:
    mu: float
    sigma: float
    a: float
    b: float
    kind = "truncated_gaussian"

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not self.a < self.b:
            raise DomainError(f"truncation needs a < b, got a={self.a}, b={self.b}")

    @property
    def support_lo(self) -> float:
        return self.a

    @property
    def support_hi(self) -> float:
        return self.b

    @property
    def frozen(self):
        alpha = (self.a - self.mu) / self.sigma
        beta = (self.b - self.mu) / self.sigma
        return stats.truncnorm(alpha, beta, loc=self.mu, scale=self.sigma)

    @property
    def _mass(self) -> float:
        return special.ndtr((self.b - self.mu) / self.sigma) - special.ndtr(
            (self.a - self.mu) / self.sigma
        )


@dataclass(frozen=True)
class Beta:
    alpha: float
    beta: float
    kind = "beta"

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError(f"beta parameters must be positive, got {self.alpha}, {self.beta}")

    @property
    def support_lo(self) -> float:
        return 0.0

    @property
    def support_hi(self) -> float:
        return 1.0


DistributionSpec = Union[Bernoulli, Categorical, Uniform, TruncatedGaussian, Beta]
DISCRETE = (Bernoulli, Categorical)
CONTINUOUS = (Uniform, TruncatedGaussian, Beta)


def atoms(spec: DistributionSpec) -> tuple[np.ndarray, np.ndarray]:
    """Sorted atoms and their probabilities for a discrete spec (duplicates merged)."""
    if isinstance(spec, Bernoulli):
        vals, probs = [0.0, 1.0], [1.0 - spec.p, spec.p]
    elif isinstance(spec, Categorical):
        merged: dict[float, float] = {}
        for v, p in zip(spec.values, spec.probs):
            merged[v] = merged.get(v, 0.0) + p
        vals = sorted(merged)
        probs = [merged[v] for v in vals]
    else:
        raise UnsupportedDistribution(f"{spec.kind} is not discrete")
    return np.asarray(vals, dtype=float), np.asarray(probs, dtype=float)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_n(spec: DistributionSpec, rng: Rng, n: int) -> np.ndarray:
    """Draw ``n`` i.i.d. rewards from ``spec`` using ``rng``'s generator."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    g = rng.generator
    if isinstance(spec, Bernoulli):
        return (g.random(n) < spec.p).astype(float)
    if isinstance(spec, Categorical):
        idx = g.choice(len(spec.values), size=n, p=np.asarray(spec.probs) / math.fsum(spec.probs))
        return np.asarray(spec.values, dtype=float)[idx]
    if isinstance(spec, Uniform):
        return g.uniform(spec.a, spec.b, size=n)
    if isinstance(spec, TruncatedGaussian):
        lo = special.ndtr((spec.a - spec.mu) / spec.sigma)
        hi = special.ndtr((spec.b - spec.mu) / spec.sigma)
        out = spec.mu + spec.sigma * special.ndtri(g.uniform(lo, hi, size=n))
        return np.clip(out, spec.a, spec.b)
    if isinstance(spec, Beta):
        return g.beta(spec.alpha, spec.beta, size=n)
    raise DomainError(f"unknown distribution {spec!r}")


# ---------------------------------------------------------------------------
# CDF, quantile, density
# ---------------------------------------------------------------------------


def cdf(spec: DistributionSpec, x: float) -> float:
    if isinstance(spec, DISCRETE):
        vals, probs = atoms(spec)
        return min(1.0, math.fsum(probs[vals <= x]))
    if isinstance(spec, Uniform):
        return min(1.0, max(0.0, (x - spec.a) / (spec.b - spec.a)))
    if isinstance(spec, TruncatedGaussian):
        if x <= spec.a:
            return 0.0
        if x >= spec.b:
            return 1.0
        lo = special.ndtr((spec.a - spec.mu) / spec.sigma)
        return float((special.ndtr((x - spec.mu) / spec.sigma) - lo) / spec._mass)
    if isinstance(spec, Beta):
        if x <= 0.0:
            return 0.0
        if x >= 1.0:
            return 1.0
        return float(special.betainc(spec.alpha, spec.beta, x))
    raise DomainError(f"unknown distribution {spec!r}")


def quantile(spec: DistributionSpec, lam: float) -> float:
    """Right-continuous quantile ``inf{x : F(x) > lam}``."""
    if not 0.0 < lam < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {lam}")
    if isinstance(spec, DISCRETE):
        vals, probs = atoms(spec)
        cum = 0.0
        for v, p in zip(vals, probs):
            cum += p
            if cum > lam:
                return float(v)
        return float(vals[-1])
    return _bisect_quantile(spec, lam)


def _bisect_quantile(spec: DistributionSpec, lam: float) -> float:
    lo, hi = float(spec.support_lo), float(spec.support_hi)
    for _ in range(QUANTILE_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            return mid
        f = cdf(spec, mid)
        if abs(f - lam) <= QUANTILE_TOL:
            return mid
        if f > lam:
            hi = mid
        else:
            lo = mid
    raise InternalError(f"quantile bisection did not converge for {spec!r} at {lam}")


def density_info(spec: DistributionSpec, x: float) -> tuple[float, float]:
    """Density and its derivative at ``x`` (zero outside the support)."""
    if isinstance(spec, DISCRETE):
        raise UnsupportedDistribution(f"{spec.kind} has no density")
    if isinstance(spec, Uniform):
        if spec.a <= x <= spec.b:
            return 1.0 / (spec.b - spec.a), 0.0
        return 0.0, 0.0
    if isinstance(spec, TruncatedGaussian):
        if not spec.a <= x <= spec.b:
            return 0.0, 0.0
        z = (x - spec.mu) / spec.sigma
        pdf = math.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * spec.sigma * spec._mass)
        return pdf, -pdf * z / spec.sigma
    if isinstance(spec, Beta):
        if not 0.0 < x < 1.0:
            return 0.0, 0.0
        a, b = spec.alpha, spec.beta
        pdf = math.exp((a - 1) * math.log(x) + (b - 1) * math.log1p(-x) - special.betaln(a, b))
        return pdf, pdf * ((a - 1) / x - (b - 1) / (1 - x))
    raise DomainError(f"unknown distribution {spec!r}")


# ---------------------------------------------------------------------------
# Ground truth
# ---------------------------------------------------------------------------


def moments(spec: DistributionSpec) -> tuple[float, float]:
    """Mean and population variance."""
    if isinstance(spec, DISCRETE):
        vals, probs = atoms(spec)
        mu = math.fsum(vals * probs)
        return mu, math.fsum(probs * (vals - mu) ** 2)
    if isinstance(spec, Uniform):
        return 0.5 * (spec.a + spec.b), (spec.b - spec.a) ** 2 / 12.0
    if isinstance(spec, TruncatedGaussian):
        m, v = spec.frozen.stats(moments="mv")
        return float(m), float(v)
    if isinstance(spec, Beta):
        a, b = spec.alpha, spec.beta
        return a / (a + b), a * b / ((a + b) ** 2 * (a + b + 1))
    raise DomainError(f"unknown distribution {spec!r}")


def avar(spec: DistributionSpec, lam: float) -> float:
    """``(1/lam) * integral_0^lam -q(phi) dphi``."""
    if isinstance(spec, DISCRETE):
        vals, probs = atoms(spec)
        acc, used = 0.0, 0.0
        for v, p in zip(vals, probs):
            w = min(p, lam - used)
            if w <= 0:
                break
            acc += w * v
            used += w
        return -acc / lam
    if isinstance(spec, Uniform):
        # Closed form; the quadrature path is exercised by the other variants.
        return -(spec.a + 0.5 * lam * (spec.b - spec.a))
    val, _ = integrate.quad(
        lambda phi: quantile(spec, phi), 0.0, lam, epsabs=AVAR_ABS_TOL, epsrel=0.0, limit=200
    )
    return -val / lam


def entropy_bits(spec: DistributionSpec) -> float:
    """Shannon entropy (discrete) or differential entropy (continuous), in bits."""
    if isinstance(spec, DISCRETE):
        _, probs = atoms(spec)
        p = probs[probs > 0]
        return max(0.0, -float(np.sum(p * np.log2(p))))
    if isinstance(spec, Uniform):
        return math.log2(spec.b - spec.a)
    if isinstance(spec, TruncatedGaussian):
        return float(spec.frozen.entropy()) / LN2
    if isinstance(spec, Beta):
        return float(stats.beta(spec.alpha, spec.beta).entropy()) / LN2
    raise DomainError(f"unknown distribution {spec!r}")


def true_functional(spec: DistributionSpec, f: FunctionalSpec) -> float:
    """Exact (or numerically converged) value ``G(F)`` of ``f`` for ``spec``."""
    if isinstance(f, Mean):
        return moments(spec)[0]
    if isinstance(f, MeanVariance):
        mu, var = moments(spec)
        return -mu + f.lam * var
    if isinstance(f, ValueAtRisk):
        return -quantile(spec, f.lam)
    if isinstance(f, AverageValueAtRisk):
        return avar(spec, f.lam)
    if isinstance(f, ShannonEntropy):
        if f.mode == "plugin" and not isinstance(spec, DISCRETE):
            raise UnsupportedFunctional(f"plug-in entropy needs a discrete arm, got {spec.kind}")
        if f.mode == "knn" and not isinstance(spec, CONTINUOUS):
            raise UnsupportedFunctional(f"k-NN entropy needs a continuous arm, got {spec.kind}")
        return entropy_bits(spec)
    raise UnsupportedFunctional(f"no ground truth for {f!r} on {spec!r}")


def distribution_from_dict(doc: dict) -> DistributionSpec:
    """Build a spec from ``{"dist": name, **params}``."""
    params = dict(doc)
    name = params.pop("dist")
    table = {
        "bernoulli": Bernoulli,
        "categorical": Categorical,
        "uniform": Uniform,
        "truncated_gaussian": TruncatedGaussian,
        "beta": Beta,
    }
    if name not in table:
        raise DomainError(f"unknown distribution {name!r}")
    return table[name](**params)


def distribution_to_dict(spec: DistributionSpec) -> dict:
    out: dict = {"dist": spec.kind}
    for k, v in spec.__dict__.items():
        out[k] = list(v) if isinstance(v, tuple) else v
    return out
