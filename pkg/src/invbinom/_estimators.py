"""
Single-trial estimators of log p for a Bernoulli oracle with unknown p:
inverse binomial sampling (IBS), the fixed-sampling baselines, their exact
bias and variance, and the averaging of repeated IBS estimates.

IBS draws until the first hit; with K the number of draws,

    L_IBS(K) = -sum_{k=1..K-1} 1/k = psi(1) - psi(K)
    Var_est(K) = psi_1(1) - psi_1(K)

and E[L_IBS] = log p exactly, Var[L_IBS] = Li_2(1 - p).

@date: 18.10.2026
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np
import numpy.typing as npt
from scipy import stats

from ._checks import (
    ContractViolation,
    SampleCapReached,
    check_hits,
    check_probability,
    check_sample_count,
)
from ._results import Err, Ok, Result
from ._special import dilog, harmonic_numbers, inverse_square_sums


@dataclass(frozen=True)
class TrialEstimate:
    """
    IBS (or fixed-sampling) estimate of a single trial log-likelihood.

    Attributes
    ----------
    loglik: float
        Estimate of log p, in nats. Never positive.
    variance: float
        Estimated variance of `loglik`, zero iff a single IBS draw was used.
    samples_used: int
        K for IBS, M for fixed sampling.
    """

    loglik: float
    variance: float
    samples_used: int


@dataclass(frozen=True)
class RepeatedEstimate:
    """
    Average of R independent IBS estimates of the same quantity.
    """

    loglik: float
    variance: float
    repeats: int

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance)


class Estimate(Protocol):
    loglik: float
    variance: float


class BernoulliOracle:
    """
    A binary source with hidden success probability `p`, drawing from
    the caller-supplied random stream.
    """

    def __init__(self, p: float, rng: np.random.Generator) -> None:
        self._p = check_probability(p, allow_zero=True).unwrap()
        self._rng = rng

    def draw(self) -> int:
        return int(self._rng.random() < self._p)


def ibs_value_from_k(k: int) -> float:
    """
    Converts a sample count K into the IBS estimate of log p.
    """
    check_sample_count(k, "ibs_value_from_k").unwrap()
    return -float(harmonic_numbers(k - 1))


def ibs_variance_from_k(k: int) -> float:
    """
    Variance estimate psi_1(1) - psi_1(K) of the IBS estimate for K samples.
    """
    check_sample_count(k, "ibs_variance_from_k").unwrap()
    return float(inverse_square_sums(k - 1))


def ibs_values(k: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """
    Vectorised `ibs_value_from_k` (no validation).
    """
    return -harmonic_numbers(np.asarray(k) - 1)


def ibs_variances(k: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """
    Vectorised `ibs_variance_from_k` (no validation).
    """
    return inverse_square_sums(np.asarray(k) - 1)


def ibs_log_likelihood_posterior(k: int) -> tuple[float, float]:
    """
    Posterior mean and variance of log q after observing the first hit at
    draw K, under the Haldane prior Beta(0, 0). These coincide with the IBS
    estimate and its variance estimate.
    """
    return ibs_value_from_k(k), ibs_variance_from_k(k)


def ibs_trial(
    oracle: BernoulliOracle, max_samples: int | None = None, trial: int = 0
) -> Result[TrialEstimate, SampleCapReached]:
    """
    Draws from `oracle` until the first hit.

    Returns
    -------
    Result[TrialEstimate, SampleCapReached]
        The estimate, or the truncation signal carrying the partial count if
        `max_samples` draws were all misses.
    """
    k = 1
    while not oracle.draw():
        if max_samples is not None and k >= max_samples:
            return Err(SampleCapReached(trial, k))
        k += 1
    return Ok(TrialEstimate(ibs_value_from_k(k), ibs_variance_from_k(k), k))


def ibs_k_samples(
    p: npt.ArrayLike, rng: np.random.Generator, size: int | tuple[int, ...] | None = None
) -> npt.NDArray[np.int64]:
    """
    Draws IBS sample counts directly, K ~ Geometric(p) on {1, 2, ...}.
    """
    return np.asarray(rng.geometric(p, size=size), dtype=np.int64)


def exact_ibs_variance(p: float) -> float:
    """
    Var[L_IBS] = Li_2(1 - p), for p in (0, 1].
    """
    p = check_probability(p).unwrap()
    return dilog(1.0 - p)


def ibs_expectation_exact(p: float, tail: float = 1e-12) -> float:
    """
    E[L_IBS] by direct summation over the geometric distribution of K,
    stopped once the remaining tail mass is below `tail`.
    """
    p = check_probability(p).unwrap()
    if p == 1.0:
        return 0.0
    # (1 - p)^(K - 1) < tail
    k_max = int(math.ceil(math.log(tail) / math.log1p(-p))) + 1
    k = np.arange(1, k_max + 1)
    log_pmf = math.log(p) + (k - 1) * math.log1p(-p)
    return float(np.sum(np.exp(log_pmf) * ibs_values(k)))


def fixed_estimate(m: int, big_m: int) -> float:
    """
    log((m + 1) / (M + 1)) for m hits out of M samples.
    """
    check_hits(m, big_m, "fixed_estimate").unwrap()
    return math.log((m + 1) / (big_m + 1))


def fixed_estimate_naive(m: int, big_m: int) -> float:
    """
    log(m / M), which is -inf when no sample hit.
    """
    check_hits(m, big_m, "fixed_estimate_naive").unwrap()
    if m == 0:
        return -math.inf
    return math.log(m / big_m)


def fixed_estimate_bounded(m: int, big_m: int, m_min: float = 0.5) -> float:
    """
    log(max(m, m_min) / M), bounding the estimate below by log(m_min / M).
    """
    check_hits(m, big_m, "fixed_estimate_bounded").unwrap()
    if not 0.0 < m_min < 1.0:
        ContractViolation("fixed_estimate_bounded", f"m_min={m_min} not in (0, 1)").throw()
    return math.log(max(m, m_min) / big_m)


def fixed_estimates(
    hits: npt.ArrayLike, big_m: int, variant: str = "standard", m_min: float = 0.5
) -> npt.NDArray[np.float64]:
    """
    Vectorised fixed-sampling estimates for arrays of hit counts.
    `variant` is one of 'standard', 'naive' or 'bounded'.
    """
    hits = np.asarray(hits, dtype=np.float64)
    match variant:
        case "standard":
            return np.log((hits + 1.0) / (big_m + 1.0))
        case "naive":
            with np.errstate(divide="ignore"):
                return np.log(hits / big_m)
        case "bounded":
            return np.log(np.maximum(hits, m_min) / big_m)
        case _:
            ContractViolation("fixed_estimates", f"unknown variant {variant!r}").throw()


def _binomial_moments(p: float, big_m: int) -> tuple[float, float]:
    m = np.arange(big_m + 1)
    pmf = stats.binom.pmf(m, big_m, p)
    values = np.log((m + 1.0) / (big_m + 1.0))
    mean = float(np.sum(pmf * values))
    return mean, float(np.sum(pmf * (values - mean) ** 2))


def fixed_bias_exact(p: float, big_m: int) -> float:
    """
    Exact bias E[log((m + 1)/(M + 1))] - log p of fixed sampling.
    """
    p = check_probability(p).unwrap()
    mean, _ = _binomial_moments(p, big_m)
    return mean - math.log(p)


def fixed_variance_exact(p: float, big_m: int) -> float:
    """
    Exact variance of the fixed-sampling estimate. Used for analysis curves
    only: fixed sampling offers no calibrated variance estimate.
    """
    p = check_probability(p).unwrap()
    return _binomial_moments(p, big_m)[1]


def bias_master_curve(lam: float, tol: float = 1e-12) -> float:
    """
    Limit of the fixed-sampling bias for M -> inf, p -> 0 at fixed
    lambda = p M: exp(-lambda) sum_m lambda^m / m! log(m + 1) - log(lambda).
    """
    if not lam > 0:
        ContractViolation("bias_master_curve", f"lambda must be > 0, got {lam}").throw()
    total = 0.0
    log_term = -lam
    m = 0
    # terms grow until m ~ lambda, then decay
    while True:
        term = math.exp(log_term) * math.log(m + 1)
        total += term
        if m > lam and term < tol:
            break
        m += 1
        log_term += math.log(lam) - math.log(m)
    return total - math.log(lam)


def combine_repeats(estimates: Sequence[Estimate]) -> RepeatedEstimate:
    """
    Averages R independent estimates; the variance is (1/R^2) sum Var_r.
    """
    if not estimates:
        ContractViolation("combine_repeats", "no estimates to combine").throw()
    r = len(estimates)
    loglik = math.fsum(e.loglik for e in estimates) / r
    variance = math.fsum(e.variance for e in estimates) / r**2
    return RepeatedEstimate(loglik, variance, r)


def update_repeats(current: RepeatedEstimate, new: Estimate) -> RepeatedEstimate:
    """
    Folds one more repeat into a running average without keeping the
    previous repeats around.
    """
    r = current.repeats
    if r < 1:
        ContractViolation("update_repeats", f"repeats must be >= 1, got {r}").throw()
    loglik = (r * current.loglik + new.loglik) / (r + 1)
    variance = (r**2 * current.variance + new.variance) / (r + 1) ** 2
    return RepeatedEstimate(loglik, variance, r + 1)


def convexity_corrected_likelihood(loglik: float, variance: float) -> float:
    """
    exp(L + Var / 2): a near-unbiased likelihood from an unbiased,
    approximately Gaussian log-likelihood estimate.
    """
    if variance < 0:
        ContractViolation("convexity_corrected_likelihood", "negative variance").throw()
    return math.exp(loglik + variance / 2.0)
