"""Convergence in mean versus convergence in probability.

A zero mean of ``z = (1/M) g_i^H g_k`` says nothing about ``z`` itself
going to zero: a variable that is +1 or -1 with equal probability has mean
zero and never gets small. The tools here sweep statistics over the array
size, estimate tail probabilities ``P(|z| > eps)``, and compute the exact
mean of the Rademacher counter-example by full enumeration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ArgumentError, ConfigurationError
from .metrics import Estimate, estimate_mean_z, steering_cross_term, z_samples
from .streams import as_streams

MAX_ENUMERATION_L = 24
_ENUM_CHUNK = 1 << 16

METRICS = ("mean_z", "cross_term", "tail_prob")


@dataclass(frozen=True)
class SyntheticZEnsemble:
    """An ensemble that emits ``z`` directly, uniformly over ``values``.

    It stands in for a channel whose inner product has a prescribed law; it
    has no steering matrix or gains.
    """

    values: tuple = (1.0, -1.0)
    name: str = "footnote"
    K: int = 2

    @property
    def label(self) -> str:
        return self.name

    def with_m(self, m: int) -> "SyntheticZEnsemble":
        # the law of z does not depend on the array size
        return self

    def sample_z(self, i, k, n, aoa_rng, gain_rng) -> np.ndarray:
        vals = np.asarray(self.values, dtype=complex)
        return vals[gain_rng.integers(0, len(vals), size=n)]


FOOTNOTE_ENSEMBLE = SyntheticZEnsemble((1.0, -1.0), "footnote")
ZERO_ENSEMBLE = SyntheticZEnsemble((0.0,), "zero")


def footnote_ensemble(rng: np.random.Generator) -> float:
    """One draw of a z that is +1 or -1 with equal probability."""
    return float(rng.choice((1.0, -1.0)))


def tail_probability(ensemble, i: int, k: int, eps: float, trials: int, rng,
                     workers: int = 1) -> Estimate:
    """Empirical ``P(|z| > eps)`` with binomial standard error in ``se_re``."""
    if not eps > 0:
        raise ArgumentError("eps must be positive")
    if trials < 100:
        raise ArgumentError("tail probability needs at least 100 trials")
    z = z_samples(ensemble, i, k, trials, rng, workers)
    p = float(np.mean(np.abs(z) > eps))
    return Estimate(complex(p), math.sqrt(p * (1 - p) / trials), 0.0, trials)


@dataclass
class SweepResult:
    metric_name: str
    m_values: list[int]
    values: list[Estimate]
    fitted_log_slope: float | None
    excluded: list[int] = field(default_factory=list)

    def magnitudes(self) -> np.ndarray:
        return np.array([abs(v.value) for v in self.values])


def fit_log_slope(m_values: Sequence[int], values: Sequence[Estimate],
                  noise_factor: float = 10.0) -> tuple[float | None, list[int]]:
    """Least-squares slope of ``log|metric|`` against ``log M``.

    Points with ``|metric| <= noise_factor * SE`` are left out (this also
    drops exact zeros); fewer than three usable points give ``None``.
    """
    xs, ys, excluded = [], [], []
    for m, v in zip(m_values, values):
        if abs(v.value) <= noise_factor * v.mc_error or v.value == 0:
            excluded.append(m)
            continue
        xs.append(math.log(m))
        ys.append(math.log(abs(v.value)))
    if len(xs) < 3:
        return None, excluded
    slope = float(np.polyfit(xs, ys, 1)[0])
    return slope, excluded


def sweep_over_m(family, m_values: Sequence[int],
                 metric: str, trials: int, rng, *, i: int = 0, k: int = 1, r: int = 0,
                 s: int = 1, eps: float = 0.5, workers: int = 1) -> SweepResult:
    """Evaluate ``metric`` at each antenna count and fit its log-log slope.

    ``family`` is either an ensemble (resized with ``with_m``) or a
    callable returning the ensemble for a given M. Each M draws from its own
    stream ``"M:<M>"``.
    """
    m_values = [int(m) for m in m_values]
    if not m_values or any(b <= a for a, b in zip(m_values, m_values[1:])):
        raise ArgumentError("m_values must be non-empty and strictly increasing")
    if metric not in METRICS:
        raise ArgumentError(f"unknown sweep metric {metric!r}; choose from {METRICS}")
    make = family.with_m if hasattr(family, "with_m") else family
    streams = as_streams(rng)
    values = []
    for m in m_values:
        ens = make(m)
        sub = streams.child(f"M:{m}")
        if metric == "mean_z":
            est = estimate_mean_z(ens, i, k, trials, sub, workers)
        elif metric == "cross_term":
            est = steering_cross_term(ens, r, s, trials, sub, workers)
        else:
            est = tail_probability(ens, i, k, eps, trials, sub, workers)
        values.append(est)
    slope, excluded = fit_log_slope(m_values, values)
    name = {"mean_z": f"mean_z({i},{k})", "cross_term": f"cross_term({r},{s})",
            "tail_prob": f"tail_prob({i},{k};eps={eps:g})"}[metric]
    return SweepResult(name, m_values, values, slope, excluded)


@dataclass(frozen=True)
class ExactCounterexample:
    """Exact expectations of the Rademacher counter-example.

    ``bound_rhs`` is ``(C_alpha^2 / M) sum_{r,s,m} E{w_mr w_ms}`` with
    ``C_alpha = 1``.
    """

    L: int
    M: int
    mean_z: Fraction
    bound_rhs: Fraction
    outcomes: int

    @property
    def margin(self) -> Fraction:
        return self.mean_z - self.bound_rhs


def enumerate_exact_mean(L: int, M: int) -> ExactCounterexample:
    """Average ``z`` over all ``2^L`` equiprobable sign vectors, exactly.

    Each outcome builds ``W`` (every row equal to the sign vector ``a``) and
    ``V = [a, a]``, forms ``G = W V`` in integer arithmetic and accumulates
    ``g_1^T g_2`` and ``sum_m (sum_r w_mr)^2``.
    """
    if L > MAX_ENUMERATION_L:
        raise ArgumentError(
            f"refusing to enumerate 2^{L} outcomes (limit L <= {MAX_ENUMERATION_L})")
    if L < 2:
        raise ConfigurationError("counter-example requires L >= 2")
    if M < 1:
        raise ConfigurationError("M must be at least 1")
    total = 1 << L
    z_sum = 0
    bound_sum = 0
    shifts = np.arange(L, dtype=np.int64)
    for start in range(0, total, _ENUM_CHUNK):
        codes = np.arange(start, min(start + _ENUM_CHUNK, total), dtype=np.int64)
        a = 1 - 2 * ((codes[:, None] >> shifts) & 1)        # (n, L) in {+1, -1}
        W = np.broadcast_to(a[:, None, :], (a.shape[0], M, L))
        V = np.stack([a, a], axis=2)                          # (n, L, 2)
        G = np.matmul(W, V)                                   # (n, M, 2)
        z_sum += int(np.sum(G[:, :, 0] * G[:, :, 1]))
        bound_sum += int(np.sum(W.sum(axis=2) ** 2))
    denom = M * total
    return ExactCounterexample(L, M, Fraction(z_sum, denom), Fraction(bound_sum, denom), total)
