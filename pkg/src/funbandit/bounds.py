"""Closed-form error, regret and sample-complexity bounds for Batch Elimination.

All functions return raw values, which may exceed 1 for probability
bounds; display code clamps. Unknown distribution-dependent constants are
explicit inputs (see :class:`BoundConstants`), never guessed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import BiasDominates, DomainError, SampleConditionUnmet
from .estimators import floor_index


@dataclass(frozen=True)
class BoundConstants:
    """Distribution-dependent constants of the functional-specific bounds.

    ``C1``/``C2`` are the order-statistic remainder constants of the
    quantile bias/variance expansion; ``c1, c2, c4, c5`` and ``M_knn`` the
    k-NN entropy bias/variance constants; ``D``/``D_prime`` upper bounds on
    arm densities and their derivatives (AVaR sample-size condition).
    """

    C1: float = 0.0
    C2: float = 0.0
    c1: float = 0.0
    c2: float = 0.0
    c4: float = 0.0
    c5: float = 0.0
    M_knn: Optional[int] = None
    D: Optional[float] = None
    D_prime: Optional[float] = None

    def __post_init__(self) -> None:
        for name in ("C1", "C2", "c1", "c2", "c4", "c5"):
            if getattr(self, name) < 0:
                raise DomainError(f"constant {name} must be nonnegative")
        if self.M_knn is not None and self.M_knn < 1:
            raise DomainError("M_knn must be a positive count")
        if self.D is not None and self.D <= 0:
            raise DomainError("D must be positive")
        if self.D_prime is not None and self.D_prime < 0:
            raise DomainError("D_prime must be nonnegative")


@dataclass(frozen=True)
class QFunction:
    """Deviation-probability bound ``Q(n, x)`` of a Q-efficient estimator.

    ``inverse(y, x)`` returns the ``n`` solving ``Q(n, x) = y``; it is only
    meaningful when ``strict`` (strictly decreasing in ``n``).
    """

    evaluate: Callable[[float, float], float]
    strict: bool = True
    inverse: Optional[Callable[[float, float], float]] = None

    def __call__(self, n: float, x: float) -> float:
        return self.evaluate(n, x)


def q_mean(n: float, x: float) -> float:
    """``exp(-n x^2)``, the Q function of the empirical mean of [0, 1] rewards."""
    if n < 0 or x < 0:
        raise DomainError(f"q_mean needs n >= 0 and x >= 0, got n={n}, x={x}")
    return math.exp(-n * x * x)


def _q_mean_inverse(y: float, x: float) -> float:
    return math.log(1.0 / y) / (x * x)


Q_MEAN = QFunction(q_mean, strict=True, inverse=_q_mean_inverse)


def _check_gap(d: float) -> None:
    if not d > 0:
        raise DomainError(f"gap d must be positive, got {d}")


def generic_error_bound(H: int, K: int, T: float, d: float, q: QFunction = Q_MEAN) -> float:
    """``2 (H - K + 1) Q((T - H) / H, d / 2)``."""
    if not T > H:
        raise DomainError(f"bound needs T > H, got T={T}, H={H}")
    _check_gap(d)
    return 2 * (H - K + 1) * q((T - H) / H, d / 2)


def sample_complexity(delta: float, H: int, K: int, d: float, q: QFunction = Q_MEAN) -> float:
    """Smallest budget ``T`` whose generic error bound equals ``delta``."""
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    _check_gap(d)
    if not q.strict or q.inverse is None:
        raise DomainError("sample complexity needs a strictly monotone Q with an inverse")
    return H * q.inverse(delta / (2 * H - 2 * K + 2), d / 2) + H


def sample_complexity_mean(delta: float, H: int, K: int, d: float) -> float:
    """``H (4/d^2) ln((2H - 2K + 2)/delta) + H``."""
    return sample_complexity(delta, H, K, d, Q_MEAN)


def regret_and_pac_bounds(
    H: int,
    K: int,
    T: float,
    d: float,
    gamma_max: float,
    delta: float,
    q: QFunction = Q_MEAN,
) -> tuple[float, float]:
    """Expected-regret bound and the regret level holding w.p. ``1 - delta``."""
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if gamma_max < 0:
        raise DomainError("gamma_max must be nonnegative")
    regret = gamma_max * generic_error_bound(H, K, T, d, q)
    return regret, regret / delta


def mean_case_bound(K: int, T: float, d: float) -> float:
    """``(K + log2 K) exp(-(T - 2K) d^2 / (8K))`` for the mean functional."""
    if not T > 2 * K:
        raise DomainError(f"bound needs T > 2K, got T={T}, K={K}")
    _check_gap(d)
    return (K + math.log2(K)) * math.exp(-(T - 2 * K) * d * d / (8 * K))


def mv_error_bound(H: int, K: int, T: float, d: float, lam: float, A: float, B: float) -> float:
    """Mean-variance error bound with ``N = (T - H) / H`` effective samples per arm.

    ``lam = 0`` is accepted and gives the limit in which the variance term
    vanishes.
    """
    if not T > 2 * H:
        raise DomainError(f"mean-variance bound needs T > 2H, got T={T}, H={H}")
    _check_gap(d)
    if not B > A:
        raise DomainError(f"need B > A, got A={A}, B={B}")
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    n = (T - H) / H
    width = B - A
    mean_term = math.exp(-n * d * d / (8 * width**2))
    if lam == 0:
        var_term = 0.0
    else:
        shrunk = (n - 1) / n * d / lam
        var_term = math.exp(-n * shrunk * shrunk / (8 * width**4))
    return 2 * (H - K + 1) * (mean_term + var_term)


def var_bias_variance(
    lam: float, N: int, pdf_at_q: float, pdf_deriv_at_q: float, consts: BoundConstants
) -> tuple[float, float]:
    """Bounds on |bias| and variance of the ``ceil(lam N)``-th order statistic."""
    if not pdf_at_q > 0:
        raise DomainError(f"density at the quantile must be positive, got {pdf_at_q}")
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    spread = lam * (1 - lam)
    v_abs = abs(spread * pdf_deriv_at_q / (2 * (N + 2) * pdf_at_q**3)) + consts.C1 / N**2
    w = spread / ((N + 2) * pdf_at_q**2) + consts.C2 / N**2
    return v_abs, w


def _chebyshev_elimination_bound(H: int, K: int, d_gap: float, v_abs: float, w: float) -> float:
    _check_gap(d_gap)
    margin = d_gap / 2 - abs(v_abs)
    if margin <= 0:
        raise BiasDominates(f"bias {v_abs:g} >= d/2 = {d_gap / 2:g}; bound is vacuous")
    return 4 * (H - K + 1) * w / margin**2


def var_error_bound(H: int, K: int, T: float, d_gap: float, V_abs: float, W: float) -> float:
    """``4 (H - K + 1) W / (d/2 - |V|)^2``.

    ``W`` and ``V_abs`` are the worst case over suboptimal arms at
    ``N = floor(T / H)``; ``T`` is accepted for signature symmetry.
    """
    return _chebyshev_elimination_bound(H, K, d_gap, V_abs, W)


def var_error_bound_from_density(
    H: int,
    K: int,
    T: float,
    d_gap: float,
    lam: float,
    densities: list[tuple[float, float]],
    consts: BoundConstants,
) -> float:
    """Compose the order-statistic bias/variance with the VaR error bound.

    ``densities`` holds ``(pdf, pdf')`` at each suboptimal arm's true
    ``lam``-quantile.
    """
    n = int(T // H)
    pairs = [var_bias_variance(lam, n, p, dp, consts) for p, dp in densities]
    v = max(p[0] for p in pairs)
    w = max(p[1] for p in pairs)
    return var_error_bound(H, K, T, d_gap, v, w)


def lambda_prime(N: int, lam: float) -> float:
    """Smallest real above ``lam`` making ``N * lambda'`` an integer."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if not 0 < lam < 1:
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")
    return (floor_index(lam, N) + 1) / N


def avar_sample_threshold(N: int, lam: float, eps: float, consts: BoundConstants) -> float:
    """Minimum per-arm sample count demanded by the AVaR concentration result."""
    if consts.D_prime is None or consts.D is None:
        raise DomainError("AVaR bound needs density bounds D and D_prime")
    bias = consts.D_prime / (6 * consts.D**3) + 2 * consts.C1 * lambda_prime(N, lam)
    return max(bias / (eps * lam), 2.0)


def avar_error_bound(
    H: int,
    K: int,
    T: float,
    d_gap: float,
    lam: float,
    M_reward: float,
    consts: BoundConstants,
) -> float:
    """``4 (H-K+1) exp(-(T-H) eps^2 lam^2 / (32 H lambda'(floor(T/H)) M^2))``, eps = d/2."""
    _check_gap(d_gap)
    if not M_reward > 0:
        raise DomainError(f"reward bound M must be positive, got {M_reward}")
    n = int(T // H)
    if n < 1:
        raise DomainError(f"need T >= H, got T={T}, H={H}")
    eps = d_gap / 2
    need = avar_sample_threshold(n, lam, eps, consts)
    if n < need:
        raise SampleConditionUnmet(f"floor(T/H) = {n} < required {need:g}")
    lp = lambda_prime(n, lam)
    return 4 * (H - K + 1) * math.exp(
        -(T - H) * eps**2 * lam**2 / (32 * H * lp * M_reward**2)
    )


def entropy_bias_variance(N: int, consts: BoundConstants, k: int, dim: int = 1) -> tuple[float, float]:
    """Leading-order bias and variance of the k-NN entropy estimator."""
    if consts.M_knn is None:
        raise DomainError("entropy bound needs the constant M_knn")
    if N < 1 or k < 1 or dim < 1:
        raise DomainError("N, k and dim must be positive")
    m = consts.M_knn
    v = consts.c1 * (k / m) ** (1 / dim) + consts.c2 / k
    w = consts.c4 / N + consts.c5 / m
    return v, w


def entropy_error_bound(
    H: int,
    K: int,
    T: float,
    d_gap: float,
    N: int,
    consts: BoundConstants,
    k: int,
    dim: int = 1,
) -> float:
    """``4 (H-K+1) W / (d/2 - V)^2`` with the k-NN entropy bias/variance terms."""
    v, w = entropy_bias_variance(N, consts, k, dim)
    return _chebyshev_elimination_bound(H, K, d_gap, v, w)


def clamp_probability(x: float) -> float:
    if math.isnan(x):
        return 1.0
    return min(1.0, max(0.0, x))


def q_hoeffding(width: float) -> QFunction:
    """``exp(-2 n x^2 / width^2)``: Hoeffding's one-sided bound for rewards in a range of ``width``."""
    if not width > 0:
        raise DomainError(f"reward range must be positive, got {width}")
    scale = 2.0 / width**2

    def evaluate(n: float, x: float) -> float:
        if n < 0 or x < 0:
            raise DomainError(f"Q needs n >= 0 and x >= 0, got n={n}, x={x}")
        return math.exp(-scale * n * x * x)

    def inverse(y: float, x: float) -> float:
        return math.log(1.0 / y) / (scale * x * x)

    return QFunction(evaluate, strict=True, inverse=inverse)
