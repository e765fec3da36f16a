"""Antenna array layouts and their far-field steering vectors.

Element positions are expressed in carrier wavelengths, so a plane wave
arriving from azimuth ``az`` and elevation ``el`` produces on element ``p``
the phase factor ``exp(j*2*pi*<p, u(az, el)>)`` with

    u = (sin(az)*cos(el), sin(el), cos(az)*cos(el)).

For a uniform linear array along the x-axis this reduces to
``exp(j*2*pi*spacing*m*sin(aoa))``. Every entry has unit modulus, which makes
each steering vector satisfy ``|w|^2 = M``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ArgumentError, ConfigurationError

ULA = "uniform-linear"
UPA = "uniform-planar"
EXPLICIT = "explicit-positions"
KINDS = (ULA, UPA, EXPLICIT)

# relative tolerance for exact identities (norm^2 = M, T_rr = 1)
IDENTITY_RTOL = 1e-9


@dataclass(frozen=True)
class ArrayGeometry:
    """Element layout of a base-station array.

    Parameters
    ----------
    kind : str
        One of ``"uniform-linear"``, ``"uniform-planar"`` or
        ``"explicit-positions"``.
    element_count : int
        Number of antennas M. For planar arrays it must equal rows * cols.
    spacing : float or (float, float)
        Inter-element spacing in wavelengths; per axis for planar arrays.
    shape : (int, int), optional
        ``(rows, cols)`` of a planar array.
    positions : array_like, optional
        ``(M, 3)`` coordinates in wavelengths, explicit kind only.
    """

    kind: str = ULA
    element_count: int = 1
    spacing: float | tuple[float, float] = 0.5
    shape: tuple[int, int] | None = None
    positions: tuple[tuple[float, float, float], ...] | None = field(default=None)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown array kind {self.kind!r}")
        if int(self.element_count) != self.element_count or self.element_count < 1:
            raise ConfigurationError(
                f"element_count must be a positive integer, got {self.element_count!r}")
        spacings = np.atleast_1d(np.asarray(self.spacing, dtype=float))
        if np.any(~np.isfinite(spacings)) or np.any(spacings <= 0):
            raise ConfigurationError(f"spacing must be positive, got {self.spacing!r}")
        if self.kind == UPA:
            if self.shape is None or len(self.shape) != 2 or min(self.shape) < 1:
                raise ConfigurationError("uniform-planar array needs shape=(rows, cols)")
            rows, cols = self.shape
            if rows * cols != self.element_count:
                raise ConfigurationError(
                    f"uniform-planar array: rows*cols = {rows * cols} "
                    f"but element_count = {self.element_count}")
            if spacings.size not in (1, 2):
                raise ConfigurationError("planar spacing takes one or two values")
        elif spacings.size != 1:
            raise ConfigurationError("spacing must be a single value for this kind")
        if self.kind == EXPLICIT:
            if self.positions is None:
                raise ConfigurationError("explicit-positions array needs positions")
            pos = np.asarray(self.positions, dtype=float)
            if pos.shape != (self.element_count, 3):
                raise ConfigurationError(
                    f"positions must have shape ({self.element_count}, 3), got {pos.shape}")

    @property
    def M(self) -> int:
        return int(self.element_count)

    def element_positions(self) -> np.ndarray:
        """Element coordinates, shape ``(M, 3)``, in wavelengths."""
        if self.kind == ULA:
            pos = np.zeros((self.M, 3))
            pos[:, 0] = np.arange(self.M) * float(self.spacing)
            return pos
        if self.kind == UPA:
            rows, cols = self.shape
            dx, dy = np.broadcast_to(np.asarray(self.spacing, dtype=float), (2,))
            p, q = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
            pos = np.zeros((self.M, 3))
            pos[:, 0] = p.ravel() * dx
            pos[:, 1] = q.ravel() * dy
            return pos
        return np.asarray(self.positions, dtype=float)

    def with_element_count(self, m: int) -> "ArrayGeometry":
        """Same layout family with ``m`` elements (linear arrays only)."""
        if self.kind != ULA:
            raise ConfigurationError(
                f"resizing is only defined for {ULA} arrays, not {self.kind}")
        return replace(self, element_count=m)


@dataclass(frozen=True)
class SteeringMatrix:
    """``M x L`` matrix whose column ``l`` is the steering vector of path ``l``.

    ``synthetic`` marks matrices that are not built from a geometry (the
    counter-example ensemble); they keep the norm but not unit modulus.
    """

    entries: np.ndarray
    aoas: tuple = ()
    synthetic: bool = False

    @property
    def M(self) -> int:
        return self.entries.shape[0]

    @property
    def L(self) -> int:
        return self.entries.shape[1]


def _split_angles(aoas) -> tuple[np.ndarray, np.ndarray]:
    """Return azimuth and elevation arrays from scalars or (az, el) pairs."""
    a = np.asarray(aoas, dtype=float)
    if a.ndim == 2 and a.shape[1] == 2:
        return a[:, 0], a[:, 1]
    return a, np.zeros_like(a)


def steering_phases(geometry: ArrayGeometry, azimuth, elevation=None) -> np.ndarray:
    """Element phases in radians for arbitrary-shaped angle arrays.

    The result has shape ``azimuth.shape[:-1] + (M,) + azimuth.shape[-1:]``
    when ``azimuth`` is at least 1-d, i.e. the element axis is inserted just
    before the last (path) axis. For a scalar angle the shape is ``(M,)``.
    """
    az = np.asarray(azimuth, dtype=float)
    el = np.zeros_like(az) if elevation is None else np.asarray(elevation, dtype=float)
    pos = geometry.element_positions()
    ux = np.sin(az) * np.cos(el)
    uy = np.sin(el)
    uz = np.cos(az) * np.cos(el)
    if az.ndim == 0:
        return 2 * np.pi * (pos[:, 0] * ux + pos[:, 1] * uy + pos[:, 2] * uz)
    # (..., 1, L) * (M, 1) -> (..., M, L); axes with all-zero coordinates skipped
    out = None
    for axis, u in enumerate((ux, uy, uz)):
        if not np.any(pos[:, axis]):
            continue
        term = (2 * np.pi * pos[:, axis:axis + 1]) * u[..., None, :]
        out = term if out is None else out + term
    if out is None:
        out = np.zeros(az.shape[:-1] + (pos.shape[0],) + az.shape[-1:])
    return out


def unit_phasor(phase: np.ndarray) -> np.ndarray:
    """``exp(1j*phase)`` computed as cos + j*sin (faster for large arrays)."""
    phase = np.asarray(phase, dtype=float)
    out = np.empty(phase.shape, dtype=complex)
    np.cos(phase, out=out.real)
    np.sin(phase, out=out.imag)
    return out


def _check_linear_angle(geometry, az):
    if geometry.kind == ULA and np.any(np.abs(az) > np.pi / 2 + 1e-12):
        raise ArgumentError("angle of arrival for a linear array must lie in [-pi/2, pi/2]")


def steering_vector(geometry: ArrayGeometry, aoa) -> np.ndarray:
    """Steering vector of length M for one angle of arrival.

    ``aoa`` is an azimuth in radians, or an ``(azimuth, elevation)`` pair
    for planar and explicit arrays (elevation defaults to broadside).
    """
    geometry.validate()
    if np.ndim(aoa) == 1 and len(aoa) == 2:
        az, el = float(aoa[0]), float(aoa[1])
    else:
        az, el = float(aoa), 0.0
    _check_linear_angle(geometry, az)
    return unit_phasor(steering_phases(geometry, az, el))


def steering_matrix(geometry: ArrayGeometry, aoas: Sequence) -> SteeringMatrix:
    """Stack steering vectors for ``aoas`` column-wise into an M x L matrix."""
    if aoas is None or len(aoas) == 0:
        raise ConfigurationError("steering_matrix needs at least one angle of arrival")
    geometry.validate()
    az, el = _split_angles(aoas)
    _check_linear_angle(geometry, az)
    W = unit_phasor(steering_phases(geometry, az, el))
    return SteeringMatrix(W, tuple(np.asarray(aoas, dtype=float).tolist()))


def steering_batch(geometry: ArrayGeometry, azimuths: np.ndarray) -> np.ndarray:
    """Steering matrices for a batch of AoA draws.

    ``azimuths`` has shape ``(n, L)``; returns ``(n, M, L)``.
    """
    if geometry.kind == ULA:
        return _ula_batch(geometry.M, float(geometry.spacing), np.asarray(azimuths, dtype=float))
    return unit_phasor(steering_phases(geometry, azimuths))


def _ula_batch(M: int, spacing: float, az: np.ndarray) -> np.ndarray:
    # exp(j*psi*m) with m = q*B + r as exp(j*psi*q*B) * exp(j*psi*r): two
    # small trig tables and one complex multiply per element
    B = max(1, math.isqrt(M - 1) + 1)
    Q = -(-M // B)
    psi = 2 * np.pi * spacing * np.sin(az)[..., None, :]          # (n, 1, L)
    low = unit_phasor(psi * np.arange(B)[:, None])                # (n, B, L)
    high = unit_phasor(psi * (B * np.arange(Q))[:, None])         # (n, Q, L)
    W = high[:, :, None, :] * low[:, None, :, :]                  # (n, Q, B, L)
    return W.reshape(az.shape[0], Q * B, az.shape[-1])[:, :M]


@dataclass
class NormalizationReport:
    deviations: np.ndarray
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.all(self.deviations <= self.tol))

    @property
    def worst(self) -> float:
        return float(np.max(self.deviations))


def check_normalization(W, tol: float = IDENTITY_RTOL) -> NormalizationReport:
    """Per-column relative deviation ``| |w_r|^2 - M | / M``.

    Accepts a :class:`SteeringMatrix` or a raw ``(M, L)`` / ``(n, M, L)``
    array; for a batch the deviation is the worst over samples.
    """
    if tol <= 0:
        raise ArgumentError("tol must be positive")
    entries = W.entries if isinstance(W, SteeringMatrix) else np.asarray(W)
    M = entries.shape[-2]
    norms = np.sum(np.abs(entries) ** 2, axis=-2)
    dev = np.abs(norms - M) / M
    if dev.ndim > 1:
        dev = dev.reshape(-1, dev.shape[-1]).max(axis=0)
    return NormalizationReport(dev, tol)
