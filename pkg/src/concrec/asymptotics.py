"""Closed-form second-order (Gaussian) quantities for the trade-off curves.

All logarithms are base 2: EPR counts are qubit dimensions 2^m, so the
entropy is in bits per copy and the log-spectrum variance in bits squared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import DegenerateVariance, InvalidEpsilon, OutOfDomain
from .spectrum import SchmidtVector

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class AsymptoticProfile:
    """First- and second-order rate parameters of a state."""

    entropy_S: float
    variance_V: float
    sqrt_V: float
    loss_scale: float  # 2*sqrt(V)/S; nan when the entropy is zero


def profile(sv: SchmidtVector) -> AsymptoticProfile:
    """Entropy (bits), log-spectrum variance (bits^2) and derived scales.

    Zero entropy or zero variance are reported, not raised; only operations
    that genuinely need V > 0 reject such states.
    """
    neg_logs = [-math.log2(p) for p in sv.probs]
    entropy = math.fsum(p * nl for p, nl in zip(sv.probs, neg_logs))
    variance = math.fsum(p * (nl - entropy) ** 2 for p, nl in zip(sv.probs, neg_logs))
    variance = max(variance, 0.0)
    sqrt_v = math.sqrt(variance)
    loss_scale = 2.0 * sqrt_v / entropy if entropy > 0.0 else math.nan
    return AsymptoticProfile(
        entropy_S=entropy, variance_V=variance, sqrt_V=sqrt_v, loss_scale=loss_scale
    )


def normal_cdf(x: float) -> float:
    """Standard normal CDF, accurate to well below 1e-12 absolute."""
    return 0.5 * math.erfc(-x / _SQRT2)


# Acklam's rational approximation of the normal quantile (abs err ~ 1e-9),
# used only as the starting point for Newton refinement.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _tail_ratio(q: float) -> float:
    return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
        (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
    )


def _quantile_estimate(u: float) -> float:
    if u < _P_LOW:
        return _tail_ratio(math.sqrt(-2.0 * math.log(u)))
    if u > 1.0 - _P_LOW:
        return -_tail_ratio(math.sqrt(-2.0 * math.log(1.0 - u)))
    q = u - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
        ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    )


def normal_quantile(u: float) -> float:
    """Inverse of :func:`normal_cdf`; |cdf(quantile(u)) - u| <= 1e-10."""
    if not 0.0 < u < 1.0:
        raise OutOfDomain(f"quantile needs 0 < u < 1, got {u}")
    if u == 0.5:
        return 0.0
    z = _quantile_estimate(u)
    for _ in range(3):
        err = normal_cdf(z) - u
        if err == 0.0:
            break
        pdf = math.exp(-0.5 * z * z) / _SQRT_2PI
        if pdf <= 0.0:
            break
        # The rational estimate is already within ~1e-7, so a genuine Newton
        # step is tiny; the clamp only guards against pathological inputs.
        z -= max(-1.0, min(1.0, err / pdf))
    return z


def _positive_variance(sv: SchmidtVector) -> AsymptoticProfile:
    prof = profile(sv)
    if prof.variance_V <= 0.0:
        raise DegenerateVariance(
            "second-order quantities need a non-flat spectrum (V > 0)"
        )
    return prof


def K(sv: SchmidtVector, b: float, b_prime: float) -> float:
    """Limiting kept-mass fraction G((b - S*b') / sqrt(V))."""
    prof = _positive_variance(sv)
    return normal_cdf((b - prof.entropy_S * b_prime) / prof.sqrt_V)


def prop3_limits(sv: SchmidtVector, a: float, b: float = 0.0) -> tuple[float, float]:
    """Limits of the concentration and dilution errors at rates (a, b).

    ``a`` selects the branch by exact comparison with the state's entropy;
    pass ``profile(sv).entropy_S`` to hit the critical-rate branch, where the
    pair is (G(b/sqrt(V)), 1 - G(b/sqrt(V))).  The two components always sum
    to 1.
    """
    prof = profile(sv)
    if a == prof.entropy_S:
        if prof.variance_V <= 0.0:
            raise DegenerateVariance("critical-rate branch needs V > 0")
        conc = normal_cdf(b / prof.sqrt_V)
    elif a < prof.entropy_S:
        conc = 0.0
    else:
        conc = 1.0
    return conc, 1.0 - conc


def mcre_limit(sv: SchmidtVector, b_prime: float) -> float:
    """Limit of the trade-off error when recovering n + b'*sqrt(n) copies.

    2*G(S*b' / (2*sqrt(V))) for b' < 0; for b' >= 0 the limit is 1: full
    recovery is asymptotically maximally lossy.
    """
    prof = _positive_variance(sv)
    if b_prime < 0.0:
        return 2.0 * normal_cdf(prof.entropy_S * b_prime / (2.0 * prof.sqrt_V))
    return 1.0


def nmax_approx(sv: SchmidtVector, n: int, eps: float) -> float:
    """Second-order approximation of the maximum recoverable copy count:
    n - (2*sqrt(V)/S) * quantile(1 - eps/2) * sqrt(n), not floored."""
    if not 0.0 < eps < 1.0:
        raise InvalidEpsilon(f"need 0 < eps < 1, got {eps}")
    prof = _positive_variance(sv)
    if prof.entropy_S <= 0.0:
        raise DegenerateVariance("approximation needs positive entropy")
    return n - prof.loss_scale * normal_quantile(1.0 - eps / 2.0) * math.sqrt(n)


def loss_coefficient(
    sv: SchmidtVector, eps: float, *, loss_scale: Union[float, None] = None
) -> float:
    """Coefficient of sqrt(n) in the asymptotic copy loss after compression.

    ``loss_scale`` overrides the state-derived 2*sqrt(V)/S; pass 1.0 for the
    normalized curve.
    """
    if not 0.0 < eps < 1.0:
        raise InvalidEpsilon(f"need 0 < eps < 1, got {eps}")
    scale = loss_scale if loss_scale is not None else profile(sv).loss_scale
    return scale * normal_quantile(1.0 - eps / 2.0)
