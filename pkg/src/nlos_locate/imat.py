"""Masked sparse recovery by iterative adaptive thresholding (IMAT).

The unknown signal is observed only where ``mask`` is true and is sparse
under some transform. Each iteration transforms the current estimate,
thresholds the coefficients, transforms back and re-imposes the observed
samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class MaskedObservation:
    """Signal samples ``values``; only entries with ``mask`` true are known."""

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        mask = np.asarray(self.mask, dtype=bool)
        if values.ndim != 1 or mask.shape != values.shape:
            raise ValueError(f"values and mask must be 1-D of equal length, got {values.shape} and {mask.shape}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def observed_count(self) -> int:
        return int(np.count_nonzero(self.mask))


@dataclass(frozen=True)
class SparseDomainPair:
    """A transform into the sparse domain and its inverse."""

    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def identity(cls):
        return cls(np.array, np.array)

    @classmethod
    def dft(cls):
        """Unitary discrete Fourier transform."""
        return cls(lambda v: np.fft.fft(v, norm="ortho"), lambda c: np.fft.ifft(c, norm="ortho"))

    @classmethod
    def dct(cls):
        """Orthonormal DCT-II."""
        from scipy.fft import dct, idct

        return cls(lambda v: dct(v, norm="ortho"), lambda c: idct(c, norm="ortho"))

    @classmethod
    def from_matrix(cls, q):
        """``forward = q @ v``; ``q`` must be unitary so the inverse is ``q^H``."""
        q = np.asarray(q)
        qh = q.conj().T
        return cls(lambda v: q @ v, lambda c: qh @ c)

    def roundtrip_error(self, v) -> float:
        """Relative error of ``inverse(forward(v))``."""
        v = np.asarray(v)
        back = self.inverse(self.forward(v))
        return float(np.linalg.norm(back - v) / max(np.linalg.norm(v), np.finfo(float).tiny))


@dataclass(frozen=True)
class GeometricDecay:
    """Keep coefficients with magnitude at least ``T_k = T_0 exp(-alpha k)``.

    ``initial_scale=None`` sets ``T_0`` to the largest coefficient magnitude
    of the first transform.
    """

    initial_scale: float | None = None
    alpha: float = 0.2

    def threshold(self, iteration: int, scale: float) -> float:
        t0 = scale if self.initial_scale is None else self.initial_scale
        return t0 * math.exp(-self.alpha * iteration)

    def apply(self, coeffs: np.ndarray, iteration: int, scale: float) -> np.ndarray:
        return np.where(np.abs(coeffs) >= self.threshold(iteration, scale), coeffs, 0)


@dataclass(frozen=True)
class KeepLargestK:
    """Keep the ``k`` largest-magnitude coefficients; ties go to the lowest index."""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be >= 0")

    def apply(self, coeffs: np.ndarray, iteration: int = 0, scale: float = 0.0) -> np.ndarray:
        order = np.argsort(-np.abs(coeffs), kind="stable")
        out = np.zeros_like(coeffs)
        keep = order[: self.k]
        out[keep] = coeffs[keep]
        return out


def required_measurements(sparsity_k: int) -> int:
    """Observations needed to recover a ``k``-sparse vector with unknown support."""
    if sparsity_k < 0:
        raise ValueError("sparsity must be >= 0")
    return 2 * sparsity_k


def imat_recover(obs: MaskedObservation, domain: SparseDomainPair, policy, iter_max: int,
                 callback: Callable[[int, np.ndarray], None] | None = None) -> np.ndarray:
    """Recover a signal from its masked samples.

    Args:
        obs: known samples and their mask.
        domain: sparsifying transform pair.
        policy: :class:`GeometricDecay` or :class:`KeepLargestK` (anything
            with a compatible ``apply``).
        iter_max: number of iterations, at least 1.
        callback: called as ``callback(i, x)`` after iteration ``i`` with the
            current estimate (a copy).

    Returns:
        The estimate after ``iter_max`` iterations; observed entries equal the
        observation exactly.
    """
    if iter_max < 1:
        raise ValueError("iter_max must be >= 1")
    mask = obs.mask
    if not mask.any():
        raise ValueError("mask has no observed entries")
    known = obs.values[mask]
    x = np.where(mask, obs.values, 0)

    coeffs = np.asarray(domain.forward(x))
    if coeffs.ndim != 1:
        raise ValueError(f"forward transform must return a vector, got shape {coeffs.shape}")
    scale = float(np.max(np.abs(coeffs)))
    for i in range(iter_max):
        if i:
            coeffs = np.asarray(domain.forward(x))
        x = np.array(domain.inverse(policy.apply(coeffs, i, scale)))
        if x.shape != mask.shape:
            raise ValueError(f"inverse transform returned shape {x.shape}, expected {mask.shape}")
        x[mask] = known
        if callback is not None:
            callback(i, x.copy())
    return x


def overdetermined_solve(phi, y) -> np.ndarray:
    """Least-squares ``S`` from ``Y = phi S`` when ``phi`` has at least as many rows as columns."""
    phi = np.asarray(phi)
    if phi.shape[0] < phi.shape[1]:
        raise ValueError("system is underdetermined; use imat_recover")
    ph = phi.conj().T
    return np.linalg.solve(ph @ phi, ph @ np.asarray(y))
