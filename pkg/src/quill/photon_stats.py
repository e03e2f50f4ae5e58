"""Analytic photon-counting statistics for one signal/reference pixel pair.

Every quantity here is exact for the mode model: ``M`` independent, identical
source pairs and ``M_beta`` independent thermal bath modes on the signal pixel.
Fourth-order statistics of the detector sums are built from joint cumulants of
a single pair (cumulants of independent summands add) and converted back to
moments at the end. See ``docs/photon_moments.md`` for the derivation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, factorial

from .errors import DomainError, ParameterError
from .model import Scenario, SourceKind, mu_per_mode

POPULATION = "population"
EMPIRICAL = "empirical"
ESTIMATORS = (POPULATION, EMPIRICAL)


@dataclass(frozen=True)
class PerModeMoments:
    """Detected per-mode means, variances and the pair cross-covariance."""

    n_r: float
    n_s: float
    n_beta: float
    var_r: float
    var_s: float
    var_beta: float
    cov_pair: float


@dataclass(frozen=True)
class CountMoments:
    mean_s: float
    mean_r: float
    var_s: float
    var_r: float
    cov_sr: float
    object_present: bool


@dataclass(frozen=True)
class DeltaStats:
    mean_in: float
    mean_out: float
    var_in: float
    var_out: float


@dataclass(frozen=True)
class _Central:
    """Means and central moments of (N_s, N_r) up to total order four."""

    m_s: float
    m_r: float
    c20: float
    c02: float
    c11: float
    c21: float
    c12: float
    k22: float

    @property
    def c22(self) -> float:
        return self.k22 + self.c20 * self.c02 + 2.0 * self.c11**2


def _pair_joint_factorial(kind: SourceKind, mu: float, k: int, l: int) -> float:
    """E[n^(k) n^(l)] for the pair photon number before loss.

    TWB: ``n`` geometric, both arms share it; falling factorials multiply as
    ``n^(k) n^(l) = sum_j C(k,j) C(l,j) j! n^(k+l-j)`` and ``E[n^(m)] = m! mu^m``.
    THB: both arms are Poisson given a common exponential intensity, so the
    mixed factorial moment is ``E[I^(k+l)] = (k+l)! mu^(k+l)``.
    """
    if kind is SourceKind.THB:
        return factorial(k + l) * mu ** (k + l)
    return sum(
        comb(k, j) * comb(l, j) * factorial(j) * factorial(k + l - j) * mu ** (k + l - j)
        for j in range(min(k, l) + 1)
    )


# Stirling numbers of the second kind, S(i, k) for i <= 2.
_STIRLING2 = {(0, 0): 1, (1, 1): 1, (2, 1): 1, (2, 2): 1}


def _pair_raw_moments(kind: SourceKind, mu: float, p: float, q: float) -> dict:
    """Raw moments E[x^i y^j], i, j <= 2, of one detected pair.

    ``x`` (signal) and ``y`` (reference) are thinned with probabilities ``p``
    and ``q``; thinning multiplies factorial moments by ``p^k q^l``.
    """
    raw = {}
    for i in range(3):
        for j in range(3):
            total = 0.0
            for (ii, k), sk in _STIRLING2.items():
                if ii != i:
                    continue
                for (jj, l), sl in _STIRLING2.items():
                    if jj != j:
                        continue
                    total += sk * sl * p**k * q**l * _pair_joint_factorial(kind, mu, k, l)
            raw[i, j] = total
    return raw


def _pair_central(raw: dict) -> tuple[float, ...]:
    mx, my = raw[1, 0], raw[0, 1]
    c20 = raw[2, 0] - mx * mx
    c02 = raw[0, 2] - my * my
    c11 = raw[1, 1] - mx * my
    c21 = raw[2, 1] - 2 * mx * raw[1, 1] - my * raw[2, 0] + 2 * mx * mx * my
    c12 = raw[1, 2] - 2 * my * raw[1, 1] - mx * raw[0, 2] + 2 * my * my * mx
    c22 = (
        raw[2, 2]
        - 2 * my * raw[2, 1]
        - 2 * mx * raw[1, 2]
        + my * my * raw[2, 0]
        + mx * mx * raw[0, 2]
        + 4 * mx * my * raw[1, 1]
        - 3 * mx * mx * my * my
    )
    k22 = c22 - c20 * c02 - 2 * c11 * c11
    return mx, my, c20, c02, c11, c21, c12, k22


def _thinning(s: Scenario) -> tuple[float, float]:
    p = s.eta * s.tau if s.object_present else 0.0
    return p, s.eta


def _detector_central(s: Scenario) -> _Central:
    mu1, mu_beta = mu_per_mode(s)
    p, q = _thinning(s)
    mx, my, c20, c02, c11, c21, c12, k22 = _pair_central(
        _pair_raw_moments(s.source_kind, mu1, p, q)
    )
    n_beta = s.eta_beta * mu_beta
    M, Mb = s.M, s.M_beta
    return _Central(
        m_s=M * mx + Mb * n_beta,
        m_r=M * my,
        c20=M * c20 + Mb * n_beta * (n_beta + 1.0),
        c02=M * c02,
        c11=M * c11,
        c21=M * c21,
        c12=M * c12,
        k22=M * k22,
    )


def per_mode_moments(s: Scenario) -> PerModeMoments:
    mu1, mu_beta = mu_per_mode(s)
    p, q = _thinning(s)
    n_r = q * mu1
    n_s = p * mu1
    n_beta = s.eta_beta * mu_beta
    if s.source_kind is SourceKind.TWB:
        cov = p * q * mu1 * (mu1 + 1.0)
    else:
        cov = p * q * mu1 * mu1
    return PerModeMoments(
        n_r=n_r,
        n_s=n_s,
        n_beta=n_beta,
        var_r=n_r * (n_r + 1.0),
        var_s=n_s * (n_s + 1.0),
        var_beta=n_beta * (n_beta + 1.0),
        cov_pair=cov,
    )


def count_moments(s: Scenario) -> CountMoments:
    pm = per_mode_moments(s)
    return CountMoments(
        mean_s=s.M * pm.n_s + s.M_beta * pm.n_beta,
        mean_r=s.M * pm.n_r,
        var_s=s.M * pm.var_s + s.M_beta * pm.var_beta,
        var_r=s.M * pm.var_r,
        cov_sr=s.M * pm.cov_pair,
        object_present=s.object_present,
    )


def _product_variance(c: _Central) -> float:
    # var(N_s N_r) expanded around the means; the m_s^2 m_r^2 terms cancel
    # analytically, so they never appear.
    return (
        c.m_s**2 * c.c02
        + c.m_r**2 * c.c20
        + 2.0 * c.m_s * c.m_r * c.c11
        + 2.0 * c.m_s * c.c12
        + 2.0 * c.m_r * c.c21
        + c.c22
        - c.c11**2
    )


def _sample_cov_variance(c: _Central, n: int) -> float:
    """Variance of the unbiased sample covariance over ``n`` i.i.d. pixel pairs."""
    return (c.c22 - (n - 2) / (n - 1) * c.c11**2 + c.c20 * c.c02 / (n - 1)) / n


def product_variance(s: Scenario) -> float:
    """Exact ``var(N_s N_r)`` for the scenario as given (object flag respected)."""
    return _product_variance(_detector_central(s))


def delta_stats(s: Scenario, estimator: str = POPULATION) -> DeltaStats:
    """Mean and variance of the covariance observable with the object in and out.

    ``population``: ``Delta = N_s N_r - <N_s><N_r>`` with known means.
    ``empirical``: per-frame unbiased sample covariance over ``N_pix`` pairs.
    """
    if estimator not in ESTIMATORS:
        raise ParameterError(f"unknown estimator {estimator!r}")
    c_in = _detector_central(s.replace(object_present=True))
    c_out = _detector_central(s.replace(object_present=False))
    if estimator == POPULATION:
        return DeltaStats(c_in.c11, c_out.c11, _product_variance(c_in), _product_variance(c_out))
    if s.N_pix < 2:
        raise ParameterError("empirical estimator needs N_pix >= 2")
    return DeltaStats(
        c_in.c11,
        c_out.c11,
        _sample_cov_variance(c_in, s.N_pix),
        _sample_cov_variance(c_out, s.N_pix),
    )


def snr(s: Scenario, estimator: str = POPULATION) -> float:
    """Per-pixel-pair SNR, i.e. the frame SNR divided by ``sqrt(N_pix)``."""
    ds = delta_stats(s, estimator)
    noise = ds.var_in + ds.var_out
    if estimator == EMPIRICAL:
        noise *= s.N_pix
    signal = abs(ds.mean_in - ds.mean_out)
    if noise <= 0:
        # A dark arm makes both terms vanish; only the all-vacuum case is undefined.
        if signal == 0 and (s.N > 0 or s.N_beta > 0):
            return 0.0
        raise DomainError("SNR undefined: covariance observable has zero variance")
    return signal / math.sqrt(noise)


def snr_frame(s: Scenario, estimator: str = POPULATION) -> float:
    return math.sqrt(s.N_pix) * snr(s, estimator)


def snr_ratio(s_twb: Scenario, s_thb: Scenario, estimator: str = POPULATION) -> float:
    denom = snr(s_thb, estimator)
    if denom == 0:
        raise DomainError("THB SNR is zero; ratio undefined")
    return snr(s_twb, estimator) / denom


def snr_ratio_dominant_bath(s_twb: Scenario, s_thb: Scenario) -> float:
    """Ratio of the signal terms alone, the large-bath approximation of ``snr_ratio``."""
    num = delta_stats(s_twb)
    den = delta_stats(s_thb)
    signal_thb = abs(den.mean_in - den.mean_out)
    if signal_thb == 0:
        raise DomainError("THB signal term is zero; ratio undefined")
    return abs(num.mean_in - num.mean_out) / signal_thb


def cauchy_schwarz_epsilon(s: Scenario) -> float:
    """Normally ordered cross-correlation over the geometric mean of auto-correlations.

    For photon counts ``<:dN^2:> = var(N) - <N>``; counts on different
    detectors commute, so the cross term is the plain covariance.
    """
    cm = count_moments(s)
    norm_s = cm.var_s - cm.mean_s
    norm_r = cm.var_r - cm.mean_r
    if norm_s <= 0 or norm_r <= 0:
        raise DomainError("epsilon undefined: normally ordered variance is zero")
    return cm.cov_sr / math.sqrt(norm_s * norm_r)


def noise_reduction_factor(s: Scenario) -> float:
    cm = count_moments(s)
    total = cm.mean_s + cm.mean_r
    if total <= 0:
        raise DomainError("noise reduction factor undefined: no photons detected")
    return (cm.var_s + cm.var_r - 2.0 * cm.cov_sr) / total
