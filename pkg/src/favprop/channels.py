"""Gain-matrix generators and joint (W, V) channel ensembles.

The composite channel of K single-antenna users seen by an M-antenna base
station is ``G = W @ V`` with ``W`` the ``M x L`` steering matrix of the L
multipath components and ``V`` the ``L x K`` matrix of path gains
``alpha[r, i]``.

Gain models
-----------
``iid-complex-gaussian``
    Independent circularly-symmetric entries of a given variance.
``rademacher``
    Independent +/-1 entries (bounded, ``C_alpha = 1``).
``factorized``
    ``alpha[r, i] = a[r] * b[i]`` with zero-mean, independent user factors.
``path-shifted``
    One iid zero-mean path-gain vector ``x`` per draw, user ``k`` sees it
    cyclically shifted by ``k`` paths: ``alpha[r, k] = x[(r + k) % L]``.
    Distinct users are uncorrelated on every path, yet the gain of path r for
    one user is correlated with the gain of another path for the next user,
    so the steering cross terms r != s carry weight.
``shared-component``
    ``alpha[r, i] = sqrt(shared_power) * u[r] + sqrt(variance) * n[r, i]``;
    every pair of users has ``E{conj(alpha[r, i]) alpha[r, k]} = shared_power``.
``fixed``
    A deterministic gain matrix.
``counterexample``
    ``w[m, r] = alpha[r, 1] = alpha[r, 2] = a[r]`` with Rademacher ``a``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import ConfigurationError
from .geometry import ULA, ArrayGeometry, SteeringMatrix, steering_batch, steering_matrix

IID = "iid-complex-gaussian"
FACTORIZED = "factorized"
RADEMACHER = "rademacher"
COUNTEREXAMPLE = "counterexample"
PATH_SHIFTED = "path-shifted"
SHARED_COMPONENT = "shared-component"
FIXED = "fixed"
GAIN_MODELS = (IID, FACTORIZED, RADEMACHER, COUNTEREXAMPLE, PATH_SHIFTED,
               SHARED_COMPONENT, FIXED)

INDEPENDENT = "independent"
SHARED_AOA = "shared-aoa"
COUNTEREXAMPLE_COUPLED = "counterexample-coupled"
COUPLINGS = (INDEPENDENT, SHARED_AOA, COUNTEREXAMPLE_COUPLED)

FIXED_AOA = "fixed"
UNIFORM_AOA = "uniform"
AOA_MODELS = (FIXED_AOA, UNIFORM_AOA)

USER_FACTOR_KINDS = ("complex-gaussian", "rademacher", "unit-phase")
# marginal of the iid / path-shifted entries
GAIN_DISTRIBUTIONS = ("complex-gaussian", "unit-phase")


def complex_gaussian(rng: np.random.Generator, size, variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric CN(0, variance) samples."""
    z = rng.standard_normal(size=tuple(np.atleast_1d(size)) + (2,))
    return np.sqrt(variance / 2) * (z[..., 0] + 1j * z[..., 1])


def rademacher(rng: np.random.Generator, size) -> np.ndarray:
    return 2.0 * rng.integers(0, 2, size=size) - 1.0


@dataclass(frozen=True)
class UserFactor:
    """Distribution of the user-side factor ``b_i`` of a factorized channel.

    ``offset`` shifts the distribution away from zero mean; it exists only so
    that a non-zero-mean factor can be described, and such a factor is
    rejected by :func:`gen_gains_factorized`.
    """

    kind: str = "complex-gaussian"
    scale: float = 1.0
    offset: complex = 0j

    @property
    def mean(self) -> complex:
        return complex(self.offset)

    @property
    def bound(self) -> float | None:
        if self.kind == "complex-gaussian":
            return None
        return abs(self.scale) + abs(self.offset)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "complex-gaussian":
            b = complex_gaussian(rng, size, self.scale ** 2)
        elif self.kind == "rademacher":
            b = self.scale * rademacher(rng, size)
        elif self.kind == "unit-phase":
            b = self.scale * np.exp(1j * rng.uniform(0, 2 * np.pi, size=size))
        else:
            raise ConfigurationError(f"unknown user factor kind {self.kind!r}")
        return b + self.offset


@dataclass(frozen=True)
class GainMatrix:
    """``L x K`` path-gain matrix; ``c_alpha`` is the entry bound, if any."""

    entries: np.ndarray
    model_tag: str
    c_alpha: float | None = None

    @property
    def L(self) -> int:
        return self.entries.shape[0]

    @property
    def K(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class ChannelEnsemble:
    """A sampleable distribution over ``(W, V)`` pairs.

    Angles of arrival are either a fixed list (``aoa_model="fixed"``) or
    drawn uniformly on ``[-pi/2, pi/2]`` per path and per draw. Coupling
    decides how W and V relate: drawn from independent streams, through the
    shared AoA (``a_r = exp(j*2*pi*spacing*sin(aoa_r))`` for the factorized
    model), or the counter-example construction.
    """

    geometry: ArrayGeometry
    L: int
    K: int = 2
    gain_model: str = IID
    coupling: str = INDEPENDENT
    aoa_model: str = UNIFORM_AOA
    aoas: tuple | None = None
    variance: float = 1.0
    path_factors: tuple | None = None
    user_factor: UserFactor = field(default_factory=UserFactor)
    shared_power: float = 1.0
    gains: tuple | None = None
    gain_distribution: str = "complex-gaussian"
    gain_scale: float = 1.0
    name: str = ""

    def __post_init__(self):
        if self.aoas is not None and not isinstance(self.aoas, tuple):
            object.__setattr__(self, "aoas", tuple(self.aoas))
        if self.path_factors is not None and not isinstance(self.path_factors, tuple):
            object.__setattr__(self, "path_factors", tuple(complex(a) for a in self.path_factors))
        if self.gains is not None and not isinstance(self.gains, tuple):
            object.__setattr__(self, "gains",
                               tuple(tuple(complex(x) for x in row) for row in self.gains))
        errors = self.validation_errors()
        if errors:
            raise ConfigurationError("; ".join(f"{p}: {m}" for p, m in errors), errors)

    def validation_errors(self) -> list[tuple[str, str]]:
        errs = []
        if self.gain_model not in GAIN_MODELS:
            errs.append(("gain_model", f"unknown gain model {self.gain_model!r}"))
        if self.coupling not in COUPLINGS:
            errs.append(("coupling", f"unknown coupling {self.coupling!r}"))
        if self.aoa_model not in AOA_MODELS:
            errs.append(("aoa_model", f"unknown AoA model {self.aoa_model!r}"))
        if not isinstance(self.L, (int, np.integer)) or self.L < 1:
            errs.append(("L", "L must be a positive integer"))
            return errs
        if not isinstance(self.K, (int, np.integer)) or self.K < 2:
            errs.append(("K", "K must be at least 2 (two users are needed)"))
        if self.gain_model == COUNTEREXAMPLE:
            if self.L < 2:
                errs.append(("L", "counter-example requires L >= 2"))
            if self.coupling != COUNTEREXAMPLE_COUPLED:
                errs.append(("coupling", "counterexample gain model requires "
                                         "coupling = counterexample-coupled"))
        elif self.coupling == COUNTEREXAMPLE_COUPLED:
            errs.append(("coupling", "counterexample-coupled needs gain_model = counterexample"))
        if self.coupling == SHARED_AOA and self.gain_model != FACTORIZED:
            errs.append(("coupling", "shared-aoa coupling is defined for the factorized model"))
        if self.aoa_model == FIXED_AOA and self.gain_model != COUNTEREXAMPLE:
            if self.aoas is None or len(self.aoas) != self.L:
                errs.append(("aoas", f"fixed AoA model needs exactly L = {self.L} angles"))
            elif self.geometry.kind == ULA and np.any(
                    np.abs(np.asarray(self.aoas, dtype=float)) > np.pi / 2):
                errs.append(("aoas", "linear-array angles must lie in [-pi/2, pi/2]"))
        if self.gain_model in (IID, PATH_SHIFTED, SHARED_COMPONENT) and not self.variance > 0:
            errs.append(("variance", "variance must be positive"))
        if self.gain_distribution not in GAIN_DISTRIBUTIONS:
            errs.append(("gain_distribution",
                         f"unknown gain distribution {self.gain_distribution!r}"))
        if self.gain_model == SHARED_COMPONENT and not self.shared_power > 0:
            errs.append(("shared_power", "shared_power must be positive"))
        if self.gain_model == PATH_SHIFTED:
            if self.L < 2 or self.K > self.L:
                errs.append(("K", "path-shifted model needs 2 <= K <= L"))
        if self.gain_model == FACTORIZED:
            if self.user_factor.kind not in USER_FACTOR_KINDS:
                errs.append(("user_factor", f"unknown user factor {self.user_factor.kind!r}"))
            if self.user_factor.mean != 0:
                errs.append(("user_factor", "user factors must be zero-mean"))
            if self.path_factors is not None and len(self.path_factors) != self.L:
                errs.append(("path_factors", f"need L = {self.L} path factors"))
        if self.gain_model == FIXED:
            if self.gains is None or np.shape(self.gains) != (self.L, self.K):
                errs.append(("gains", f"fixed gain model needs an L x K = "
                                      f"{self.L} x {self.K} matrix"))
        if not self.gain_scale > 0:
            errs.append(("gain_scale", "gain_scale must be positive"))
        return errs

    @property
    def M(self) -> int:
        return self.geometry.M

    @property
    def label(self) -> str:
        return self.name or f"{self.gain_model}/{self.coupling}"

    @property
    def uncoupled(self) -> bool:
        return self.coupling == INDEPENDENT

    @property
    def deterministic_steering(self) -> bool:
        return self.aoa_model == FIXED_AOA and self.gain_model != COUNTEREXAMPLE

    @property
    def c_alpha(self) -> float | None:
        """Bound on ``|alpha|`` for bounded models, ``None`` if unbounded."""
        if self.gain_model in (RADEMACHER, COUNTEREXAMPLE):
            c = 1.0
        elif self.gain_model in (IID, PATH_SHIFTED) and self.gain_distribution == "unit-phase":
            c = float(np.sqrt(self.variance))
        elif self.gain_model == FIXED:
            c = float(np.max(np.abs(np.asarray(self.gains, dtype=complex))))
        elif self.gain_model == FACTORIZED:
            b = self.user_factor.bound
            if b is None:
                return None
            if self.coupling == SHARED_AOA:
                a = 1.0
            elif self.path_factors is None:
                return None
            else:
                a = float(np.max(np.abs(np.asarray(self.path_factors))))
            c = a * b
        else:
            return None
        return c * self.gain_scale

    def with_m(self, m: int) -> "ChannelEnsemble":
        return replace(self, geometry=self.geometry.with_element_count(m))

    @cached_property
    def fixed_steering(self) -> np.ndarray:
        return steering_matrix(self.geometry, list(self.aoas)).entries

    def sample_z(self, i: int, k: int, n: int, aoa_rng, gain_rng) -> np.ndarray:
        """``n`` draws of ``z = (1/M) g_i^H g_k``."""
        return user_inner_products(sample_batch(self, n, aoa_rng, gain_rng), i, k)


@dataclass
class ChannelBatch:
    """``n`` joint channel draws: ``W`` is ``(n, M, L)``, ``V`` is ``(n, L, K)``."""

    W: np.ndarray
    V: np.ndarray
    aoas: np.ndarray | None = None

    @property
    def G(self) -> np.ndarray:
        return self.W @ self.V


def _path_phase(geometry: ArrayGeometry, aoas: np.ndarray) -> np.ndarray:
    spacing = np.atleast_1d(np.asarray(geometry.spacing, dtype=float))[0]
    return 2 * np.pi * spacing * np.sin(aoas)


def _entries(ens: ChannelEnsemble, rng: np.random.Generator, size) -> np.ndarray:
    if ens.gain_distribution == "unit-phase":
        return np.sqrt(ens.variance) * np.exp(1j * rng.uniform(0, 2 * np.pi, size=size))
    return complex_gaussian(rng, size, ens.variance)


def sample_batch(ens: ChannelEnsemble, n: int, aoa_rng: np.random.Generator,
                 gain_rng: np.random.Generator) -> ChannelBatch:
    """Draw ``n`` channels; AoAs come from ``aoa_rng``, gains from ``gain_rng``."""
    L, K, M = ens.L, ens.K, ens.M

    if ens.gain_model == COUNTEREXAMPLE:
        a = rademacher(gain_rng, (n, L))
        W = np.broadcast_to(a[:, None, :], (n, M, L))
        V = np.broadcast_to(a[:, :, None], (n, L, K)) * ens.gain_scale
        return ChannelBatch(W, V)

    if ens.aoa_model == FIXED_AOA:
        aoas = np.broadcast_to(np.asarray(ens.aoas, dtype=float), (n, L))
        W = np.broadcast_to(ens.fixed_steering, (n, M, L))
    else:
        aoas = aoa_rng.uniform(-np.pi / 2, np.pi / 2, size=(n, L))
        W = steering_batch(ens.geometry, aoas)

    gm = ens.gain_model
    if gm == IID:
        V = _entries(ens, gain_rng, (n, L, K))
    elif gm == RADEMACHER:
        V = rademacher(gain_rng, (n, L, K)).astype(complex)
    elif gm == FACTORIZED:
        if ens.coupling == SHARED_AOA:
            a = np.exp(1j * _path_phase(ens.geometry, aoas))
        elif ens.path_factors is not None:
            a = np.broadcast_to(np.asarray(ens.path_factors, dtype=complex), (n, L))
        else:
            a = complex_gaussian(gain_rng, (n, L), ens.variance)
        b = ens.user_factor.sample(gain_rng, (n, K))
        V = a[:, :, None] * b[:, None, :]
    elif gm == PATH_SHIFTED:
        x = _entries(ens, gain_rng, (n, L))
        idx = (np.arange(L)[:, None] + np.arange(K)[None, :]) % L
        V = x[:, idx]
    elif gm == SHARED_COMPONENT:
        u = complex_gaussian(gain_rng, (n, L, 1))
        V = np.sqrt(ens.shared_power) * u + complex_gaussian(gain_rng, (n, L, K), ens.variance)
    elif gm == FIXED:
        V = np.broadcast_to(np.asarray(ens.gains, dtype=complex), (n, L, K))
    else:  # pragma: no cover - rejected by validation
        raise ConfigurationError(f"unknown gain model {gm!r}")
    if ens.gain_scale != 1.0:
        V = V * ens.gain_scale
    return ChannelBatch(W, V, aoas)


def user_inner_products(batch: ChannelBatch, i: int, k: int) -> np.ndarray:
    """Per-draw ``(1/M) g_i^H g_k`` for a batch."""
    M = batch.W.shape[1]
    g = batch.W @ batch.V[:, :, [i, k]]
    return np.einsum("nm,nm->n", g[:, :, 0].conj(), g[:, :, 1]) / M


def sample_channel(ensemble: ChannelEnsemble, rng: np.random.Generator):
    """One draw ``(W, V, G)`` with ``G = W @ V``.

    AoAs and gains come from two independent child streams of ``rng``.
    """
    aoa_rng, gain_rng = rng.spawn(2)
    batch = sample_batch(ensemble, 1, aoa_rng, gain_rng)
    W = np.array(batch.W[0])
    V = np.array(batch.V[0])
    G = W @ V
    assert G.shape == (ensemble.M, ensemble.K), "W @ V has the wrong shape"
    aoas = () if batch.aoas is None else tuple(batch.aoas[0].tolist())
    steering = SteeringMatrix(W, aoas, synthetic=ensemble.gain_model == COUNTEREXAMPLE)
    return steering, GainMatrix(V, ensemble.gain_model, ensemble.c_alpha), G


def gen_gains_iid(L: int, K: int, variance: float, rng: np.random.Generator) -> GainMatrix:
    """L x K matrix of iid CN(0, variance) path gains."""
    if not variance > 0:
        raise ConfigurationError("variance must be positive")
    if L < 1 or K < 2:
        raise ConfigurationError("need L >= 1 and K >= 2")
    return GainMatrix(complex_gaussian(rng, (L, K), variance), IID)


def gen_gains_factorized(a, b_distribution: UserFactor, K: int,
                         rng: np.random.Generator) -> GainMatrix:
    """Rank-one gains ``alpha[r, i] = a[r] * b[i]`` with iid user factors ``b``."""
    if b_distribution.mean != 0:
        raise ConfigurationError(
            "user factor distribution must be zero-mean for the factorized model")
    if K < 2:
        raise ConfigurationError("need K >= 2")
    a = np.asarray(a, dtype=complex)
    b = b_distribution.sample(rng, K)
    bound = b_distribution.bound
    c_alpha = None if bound is None else float(np.max(np.abs(a))) * bound
    return GainMatrix(np.outer(a, b), FACTORIZED, c_alpha)


def counterexample_ensemble(L: int, M: int, K: int = 2, name: str = "") -> ChannelEnsemble:
    """The Rademacher ensemble ``w[m, r] = alpha[r, 1] = alpha[r, 2] = a[r]``."""
    return ChannelEnsemble(
        geometry=ArrayGeometry(ULA, M), L=L, K=K, gain_model=COUNTEREXAMPLE,
        coupling=COUNTEREXAMPLE_COUPLED, aoa_model=FIXED_AOA, name=name or "counterexample")


def gen_counterexample(L: int, M: int, rng: np.random.Generator):
    """One counter-example draw ``(W, V)``; W is flagged synthetic, C_alpha = 1."""
    if L < 2:
        raise ConfigurationError("counter-example requires L >= 2")
    if M < 1:
        raise ConfigurationError("M must be at least 1")
    a = rademacher(rng, L)
    W = np.tile(a, (M, 1)).astype(complex)
    V = np.stack([a, a], axis=1).astype(complex)
    return SteeringMatrix(W, (), synthetic=True), GainMatrix(V, COUNTEREXAMPLE, 1.0)


__all__ = [
    "AOA_MODELS", "COUPLINGS", "GAIN_MODELS", "ChannelBatch", "ChannelEnsemble",
    "GainMatrix", "UserFactor", "complex_gaussian", "counterexample_ensemble",
    "gen_counterexample", "gen_gains_factorized", "gen_gains_iid", "rademacher",
    "sample_batch", "sample_channel", "user_inner_products",
]
