"""Signal model: hypotheses, scene parameters, Gaussian sampling and the energy statistic.

Observations are real, zero-mean Gaussian with a variance that identifies the
hypothesis. The energy ``Y = sum(y_n^2)`` is sufficient for every test in this
package, and ``Y / sigma^2`` is chi-square with ``N`` degrees of freedom, so
``Pr(Y < eta) = P(N/2, eta / (2 sigma^2))``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .numerics import inv_reg_lower_gamma, reg_gamma, reg_gamma_p_array


class Hypothesis(enum.IntEnum):
    H0 = 0  # idle channel
    H1 = 1  # legitimate user only
    H2 = 2  # misuse: illegitimate access or rogue power

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class SceneConfig:
    """Hypothesis variances (Watt), sample count and sensor count."""

    sigma0_sq: float
    sigma1_sq: float
    sigma2_sq: float
    n_samples: int = 300
    n_sensors: int = 1

    def __post_init__(self) -> None:
        if not 0 < self.sigma0_sq < self.sigma1_sq:
            raise InvalidParameterError(
                f"need 0 < sigma0_sq < sigma1_sq, got {self.sigma0_sq}, {self.sigma1_sq}"
            )
        if not self.sigma2_sq > self.sigma0_sq:
            raise InvalidParameterError(f"sigma2_sq must exceed sigma0_sq, got {self.sigma2_sq}")
        if self.sigma2_sq == self.sigma1_sq:
            raise InvalidParameterError("sigma2_sq must differ from sigma1_sq")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise InvalidParameterError(f"n_samples must be a positive integer, got {self.n_samples}")
        if int(self.n_sensors) != self.n_sensors or self.n_sensors < 1:
            raise InvalidParameterError(f"n_sensors must be a positive integer, got {self.n_sensors}")

    def variance(self, h: Hypothesis) -> float:
        return (self.sigma0_sq, self.sigma1_sq, self.sigma2_sq)[int(h)]

    def to_dict(self) -> dict:
        return {
            "sigma0_sq": self.sigma0_sq,
            "sigma1_sq": self.sigma1_sq,
            "sigma2_sq": self.sigma2_sq,
            "n_samples": self.n_samples,
            "n_sensors": self.n_sensors,
        }


def db_to_ratio(db: float) -> float:
    return 10.0 ** (db / 10.0)


def scene_from_illegitimate_access(
    p_s: float, p_x: float, noise: float, coexist: bool = False, n: int = 300, k: int = 1
) -> SceneConfig:
    """Scene for an illegitimate user with received power ``p_x``.

    With ``coexist`` the legitimate user transmits at the same time, so the
    misuse variance is ``p_s + p_x + noise``; otherwise it is ``p_x + noise``.
    """
    if not (p_s > 0 and p_x > 0 and noise > 0):
        raise InvalidParameterError("p_s, p_x and noise must all be positive")
    sigma2 = p_s + p_x + noise if coexist else p_x + noise
    if sigma2 == p_s + noise:
        raise InvalidParameterError("illegitimate power makes sigma2_sq equal to sigma1_sq")
    return SceneConfig(noise, p_s + noise, sigma2, n, k)


def scene_from_rogue_power(p_s: float, noise: float, delta: float, n: int = 300, k: int = 1) -> SceneConfig:
    """Scene for a licensed user transmitting at ``delta`` times its nominal power."""
    if not (p_s > 0 and noise > 0):
        raise InvalidParameterError("p_s and noise must be positive")
    if not delta > 0 or delta == 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1) or (1, inf), got {delta}")
    return SceneConfig(noise, p_s + noise, noise + delta * p_s, n, k)


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generator keyed by a master seed and an optional stream id path."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def sample_observations(variance: float, n: int, seed: int, stream: int = 0) -> np.ndarray:
    """``n`` i.i.d. zero-mean Gaussian samples, reproducible per ``(seed, stream)``."""
    if not variance > 0:
        raise InvalidParameterError(f"variance must be positive, got {variance}")
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"n must be a positive integer, got {n}")
    return make_rng(seed, stream).standard_normal(int(n)) * math.sqrt(variance)


def sample_energy(rng: np.random.Generator, variance: float, n: int, shape: tuple[int, ...]) -> np.ndarray:
    """Energy statistics of ``shape`` independent batches of ``n`` Gaussian samples each."""
    y = rng.standard_normal((*shape, n))
    y *= math.sqrt(variance)
    return np.einsum("...i,...i->...", y, y)


def energy_statistic(batch) -> float:
    """Sum of squared samples."""
    values = np.asarray(batch, dtype=float)
    if values.size == 0:
        raise InvalidParameterError("energy statistic needs a nonempty batch")
    return float(np.dot(values, values))


def energy_cdf(eta: float, variance: float, n: int) -> float:
    """``Pr(Y < eta)`` for the energy of ``n`` samples with the given variance."""
    if eta < 0:
        raise InvalidParameterError(f"eta must be nonnegative, got {eta}")
    return reg_gamma(0.5 * n, eta / (2.0 * variance))[0]


def energy_sf(eta: float, variance: float, n: int) -> float:
    """``Pr(Y > eta)``, computed from the upper ratio to keep tail precision."""
    if eta < 0:
        raise InvalidParameterError(f"eta must be nonnegative, got {eta}")
    return reg_gamma(0.5 * n, eta / (2.0 * variance))[1]


def energy_cdf_array(eta: np.ndarray, variance: float, n: int) -> np.ndarray:
    return reg_gamma_p_array(0.5 * n, np.asarray(eta, dtype=float) / (2.0 * variance))


def energy_quantile(p: float, variance: float, n: int) -> float:
    """Inverse of :func:`energy_cdf` in ``eta``."""
    return 2.0 * variance * inv_reg_lower_gamma(0.5 * n, p)
