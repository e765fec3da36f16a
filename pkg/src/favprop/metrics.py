"""Favorable-propagation statistics and theorem-audit quantities.

All estimators take ``rng`` as a master seed or a
:class:`~favprop.streams.SeedStreams` and draw their trials block by block
from it, so two estimators called with the same ``rng`` see the same
channel draws. Standard errors are reported separately for the real and
imaginary parts (sample std with ``ddof=1`` over ``sqrt(N)``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelEnsemble, sample_batch
from .errors import ArgumentError, HypothesisViolation
from .streams import as_streams, run_blocks

# max |alpha| may exceed C_alpha by this relative slack (rounding in gain_scale)
_BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo estimate of a complex mean.

    Deterministic quantities are carried with zero standard errors.
    """

    value: complex
    se_re: float = 0.0
    se_im: float = 0.0
    trials: int = 1

    @classmethod
    def from_samples(cls, x) -> "Estimate":
        x = np.asarray(x)
        n = x.shape[0]
        if n < 2:
            raise ArgumentError("need at least two samples for a standard error")
        mean = complex(np.mean(x))
        se_re = float(np.std(x.real, ddof=1) / math.sqrt(n))
        se_im = float(np.std(x.imag, ddof=1) / math.sqrt(n)) if np.iscomplexobj(x) else 0.0
        return cls(mean, se_re, se_im, n)

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag

    @property
    def se(self) -> float:
        return max(self.se_re, self.se_im)

    @property
    def mc_error(self) -> float:
        return math.hypot(self.se_re, self.se_im)

    def within_zero(self, k: float = 4.0) -> bool:
        """``|value| <= k * max(se_re, se_im)``."""
        return abs(self.value) <= k * self.se

    def scaled(self, c: float) -> "Estimate":
        return Estimate(self.value * c, self.se_re * abs(c), self.se_im * abs(c), self.trials)

    def to_dict(self) -> dict:
        return {"re": self.value.real, "im": self.value.imag,
                "se_re": self.se_re, "se_im": self.se_im, "trials": self.trials}


def _check_users(ensemble, i, k):
    K = ensemble.K
    for idx in (i, k):
        if not isinstance(idx, (int, np.integer)) or not 0 <= idx < K:
            raise ArgumentError(f"user index {idx!r} out of range for K = {K}")


def _check_paths(ensemble, r, s):
    for idx in (r, s):
        if not isinstance(idx, (int, np.integer)) or not 0 <= idx < ensemble.L:
            raise ArgumentError(f"path index {idx!r} out of range for L = {ensemble.L}")


def _check_trials(trials, minimum=2):
    if not isinstance(trials, (int, np.integer)) or trials < minimum:
        raise ArgumentError(f"trials must be an integer >= {minimum}, got {trials!r}")


def inner_product_z(G, i: int, k: int) -> complex:
    """``(1/M) g_i^H g_k`` for the columns ``i`` and ``k`` of ``G``."""
    G = np.asarray(G)
    if G.ndim != 2:
        raise ArgumentError("G must be an M x K matrix")
    M, K = G.shape
    for idx in (i, k):
        if not isinstance(idx, (int, np.integer)) or not 0 <= idx < K:
            raise ArgumentError(f"user index {idx!r} out of range for K = {K}")
    if i == k:
        return complex(np.sum(np.abs(G[:, i]) ** 2) / M)
    return complex(np.vdot(G[:, i], G[:, k]) / M)


def z_samples(ensemble, i: int, k: int, trials: int, rng, workers: int = 1) -> np.ndarray:
    """Per-trial ``z`` values, in trial order."""
    _check_users(ensemble, i, k)
    streams = as_streams(rng)
    return run_blocks(trials, streams,
                      lambda n, ar, gr: ensemble.sample_z(i, k, n, ar, gr), workers)


def estimate_mean_z(ensemble, i: int, k: int, trials: int, rng, workers: int = 1) -> Estimate:
    """Sample mean of ``z = (1/M) g_i^H g_k`` over ``trials`` independent draws."""
    _check_trials(trials)
    if i == k:
        raise ArgumentError("the favorable-propagation statistic needs distinct users (i != k)")
    return Estimate.from_samples(z_samples(ensemble, i, k, trials, rng, workers))


def _gram(W: np.ndarray) -> np.ndarray:
    """``(1/M) W^H W`` per draw, shape ``(n, L, L)``."""
    M = W.shape[1]
    return np.conj(np.swapaxes(W, 1, 2)) @ W / M


def steering_cross_term(ensemble: ChannelEnsemble, r: int, s: int, trials: int = 2,
                        rng=0, workers: int = 1) -> Estimate:
    """Estimate ``T_rs = (1/M) sum_m E{conj(w_mr) w_ms}``.

    For fixed AoAs the steering matrix is deterministic and the value is
    exact (``trials`` is ignored).
    """
    _check_paths(ensemble, r, s)
    if ensemble.deterministic_steering:
        W = ensemble.fixed_steering
        if r == s:
            val = complex(np.sum(np.abs(W[:, r]) ** 2) / ensemble.M)
        else:
            val = complex(np.vdot(W[:, r], W[:, s]) / ensemble.M)
        return Estimate(val)
    _check_trials(trials)

    def block(n, ar, gr):
        W = sample_batch(ensemble, n, ar, gr).W
        if r == s:
            return np.sum(np.abs(W[:, :, r]) ** 2, axis=1).astype(complex) / ensemble.M
        return np.einsum("nm,nm->n", W[:, :, r].conj(), W[:, :, s]) / ensemble.M

    return Estimate.from_samples(run_blocks(trials, as_streams(rng), block, workers))


def cross_term_table(ensemble: ChannelEnsemble, trials: int = 2, rng=0,
                     workers: int = 1) -> list[list[Estimate]]:
    """All ``T_rs`` for ``r, s < L`` estimated from the same draws."""
    L = ensemble.L
    if ensemble.deterministic_steering:
        T = _gram(ensemble.fixed_steering[None])[0]
        diag = np.sum(np.abs(ensemble.fixed_steering) ** 2, axis=0) / ensemble.M
        T[np.diag_indices(L)] = diag
        return [[Estimate(complex(T[r, s])) for s in range(L)] for r in range(L)]
    _check_trials(trials)

    def block(n, ar, gr):
        W = sample_batch(ensemble, n, ar, gr).W
        T = _gram(W)
        idx = np.arange(L)
        T[:, idx, idx] = np.sum(np.abs(W) ** 2, axis=1) / ensemble.M
        return T

    T = run_blocks(trials, as_streams(rng), block, workers)
    return [[Estimate.from_samples(T[:, r, s]) for s in range(L)] for r in range(L)]


@dataclass(frozen=True)
class Decomposition:
    """Split of the mean inner product into same-path and cross-path terms.

    ``diag_part`` and ``offdiag_part`` are per-draw splits averaged over the
    same draws as ``mean_z``, so ``total`` reproduces it up to rounding.
    ``offdiag_factored`` is the plug-in product
    ``(1/M) sum_{r!=s} mean(conj(a_ri) a_sk) * mean(sum_m conj(w_mr) w_ms)``,
    valid when gains and steering vectors are uncorrelated.
    """

    diag_part: Estimate
    offdiag_part: Estimate
    total: Estimate
    mean_z: Estimate
    offdiag_factored: complex
    diag_factored: complex

    @property
    def consistency_error(self) -> float:
        return abs(self.total.value - self.mean_z.value)


def decompose_mean_z(ensemble: ChannelEnsemble, i: int, k: int, trials: int, rng,
                     workers: int = 1) -> Decomposition:
    """Split ``E{z}`` into ``r = s`` and ``r != s`` path terms.

    Only defined for ensembles whose gains and steering vectors are drawn
    independently; the term-by-term factorization is invalid otherwise.
    """
    if not isinstance(ensemble, ChannelEnsemble):
        raise ArgumentError("decomposition needs a channel ensemble")
    if not ensemble.uncoupled:
        raise HypothesisViolation(
            "decomposition requires conj(alpha_ri) alpha_sk and conj(w_mr) w_ms to be "
            "uncorrelated, but the ensemble couples W and V", ensemble.label)
    _check_trials(trials)
    _check_users(ensemble, i, k)
    if i == k:
        raise ArgumentError("the favorable-propagation statistic needs distinct users (i != k)")
    L = ensemble.L
    offmask = ~np.eye(L, dtype=bool)

    def block(n, ar, gr):
        batch = sample_batch(ensemble, n, ar, gr)
        A = batch.V[:, :, i].conj()[:, :, None] * batch.V[:, None, :, k]
        B = _gram(batch.W)
        diag = np.einsum("nrr,nrr->n", A, B)
        off = np.sum((A * B)[:, offmask], axis=1)
        g = batch.W @ batch.V[:, :, [i, k]]
        z = np.einsum("nm,nm->n", g[:, :, 0].conj(), g[:, :, 1]) / batch.W.shape[1]
        out = np.empty((n, 3 + 2 * L * L), dtype=complex)
        out[:, 0], out[:, 1], out[:, 2] = diag, off, z
        out[:, 3:3 + L * L] = A.reshape(n, -1)
        out[:, 3 + L * L:] = B.reshape(n, -1)
        return out

    res = run_blocks(trials, as_streams(rng), block, workers)
    A_mean = res[:, 3:3 + L * L].mean(axis=0).reshape(L, L)
    B_mean = res[:, 3 + L * L:].mean(axis=0).reshape(L, L)
    return Decomposition(
        diag_part=Estimate.from_samples(res[:, 0]),
        offdiag_part=Estimate.from_samples(res[:, 1]),
        total=Estimate.from_samples(res[:, 0] + res[:, 1]),
        mean_z=Estimate.from_samples(res[:, 2]),
        offdiag_factored=complex(np.sum((A_mean * B_mean)[offmask])),
        diag_factored=complex(np.trace(A_mean)),
    )


def bound_rhs_21(ensemble: ChannelEnsemble, c_alpha: float | None, trials: int, rng,
                 workers: int = 1) -> Estimate:
    """Estimate ``(C_alpha^2 / M) sum_r sum_s sum_m E{conj(w_mr) w_ms}``.

    This is the right-hand side of the bound once used to claim that the
    steering cross terms control ``E{z}``. Note that the double sum over all
    ``(r, s)`` equals ``|sum_r w_r|^2``, so every draw, and hence the estimate,
    is real; the value is still returned as a complex :class:`Estimate` so it
    can be set against the (complex) ``E{z}`` directly.
    """
    _check_trials(trials)
    if c_alpha is None:
        c_alpha = ensemble.c_alpha
    if c_alpha is None:
        raise ArgumentError(f"ensemble {ensemble.label} is unbounded; pass c_alpha explicitly")
    if not c_alpha > 0:
        raise ArgumentError("c_alpha must be positive")
    M = ensemble.M
    limit = c_alpha * (1 + _BOUND_SLACK)

    def block(n, ar, gr):
        batch = sample_batch(ensemble, n, ar, gr)
        worst = float(np.max(np.abs(batch.V)))
        if worst > limit:
            raise HypothesisViolation(
                f"sampled |alpha| = {worst:.6g} exceeds C_alpha = {c_alpha:.6g}", ensemble.label)
        col_sum = batch.W.sum(axis=2)
        return (c_alpha ** 2 / M) * np.sum(np.abs(col_sum) ** 2, axis=1).astype(complex)

    return Estimate.from_samples(run_blocks(trials, as_streams(rng), block, workers))


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two real vectors, ``b.a / (|b| |a|)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ArgumentError("cosine_similarity needs two real vectors of equal length")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ArgumentError("cosine of a zero vector is undefined")
    return float(np.clip(np.dot(b, a) / (nb * na), -1.0, 1.0))


@dataclass
class FPReport:
    """Everything measured about one ensemble and one user pair."""

    ensemble: str
    users: tuple[int, int]
    mean_z: Estimate
    cross_terms: list[list[Estimate]]
    trials: int
    master_seed: int
    decomposition: Decomposition | None = None
    bound_rhs: Estimate | None = None
    c_alpha: float | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def diag_part(self):
        return None if self.decomposition is None else self.decomposition.diag_part

    @property
    def offdiag_part(self):
        return None if self.decomposition is None else self.decomposition.offdiag_part

    @property
    def bound_violated(self) -> bool | None:
        """True when ``E{z} - bound`` is real-valued and positive beyond MC error."""
        if self.bound_rhs is None:
            return None
        diff = self.mean_z.value - self.bound_rhs.value
        err = self.mean_z.mc_error + self.bound_rhs.mc_error
        return abs(diff.imag) <= 4 * err and diff.real > 4 * err

    def to_dict(self) -> dict:
        out = {
            "ensemble": self.ensemble,
            "users": list(self.users),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "mean_z": self.mean_z.to_dict(),
            "cross_terms": [[t.to_dict() for t in row] for row in self.cross_terms],
            "c_alpha": self.c_alpha,
            "notes": list(self.notes),
        }
        if self.decomposition is not None:
            d = self.decomposition
            out["decomposition"] = {
                "diag_part": d.diag_part.to_dict(),
                "offdiag_part": d.offdiag_part.to_dict(),
                "total": d.total.to_dict(),
                "offdiag_factored": [d.offdiag_factored.real, d.offdiag_factored.imag],
                "consistency_error": d.consistency_error,
            }
        if self.bound_rhs is not None:
            out["bound_rhs"] = self.bound_rhs.to_dict()
            out["bound_violated"] = self.bound_violated
        return out


def fp_report(ensemble: ChannelEnsemble, i: int, k: int, trials: int, master_seed: int,
              workers: int = 1) -> FPReport:
    """Assemble an :class:`FPReport`; optional parts are skipped when undefined."""
    streams = as_streams(master_seed)
    report = FPReport(
        ensemble=ensemble.label,
        users=(i, k),
        mean_z=estimate_mean_z(ensemble, i, k, trials, streams, workers),
        cross_terms=cross_term_table(ensemble, trials, streams, workers),
        trials=trials,
        master_seed=streams.master_seed,
        c_alpha=ensemble.c_alpha,
    )
    if ensemble.uncoupled:
        report.decomposition = decompose_mean_z(ensemble, i, k, trials, streams, workers)
    else:
        report.notes.append("decomposition skipped: W and V are coupled")
    if ensemble.c_alpha is not None:
        report.bound_rhs = bound_rhs_21(ensemble, ensemble.c_alpha, trials, streams, workers)
    else:
        report.notes.append("bound skipped: gains are unbounded")
    return report
