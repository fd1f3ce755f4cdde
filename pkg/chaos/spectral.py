"""
Fourier power spectrum of a sampled series and the 0-1 test for chaos.
"""

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from utils.exceptions import EmptyWindowError, ParameterError

logger = logging.getLogger(__name__)

MIN_ZERO_ONE_LENGTH = 100


@dataclass
class SpectrumResult:
    """
    Coefficients of Z_t = sum_k a_k cos(w_k t) + b_k sin(w_k t), t = 1..n, w_k = 2 pi k/n.

    a[0] is the mean; for even n the last entry of `a` is a_{n/2} and its
    `b` is zero.
    """

    n: int
    a: np.ndarray
    b: np.ndarray
    energy: float

    @property
    def frequencies(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.a.size) / self.n

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.a.size, 0.5)
        w[0] = 1.0
        if self.n % 2 == 0:
            w[-1] = 1.0
        return w

    @property
    def spectral_power(self) -> np.ndarray:
        """Per-frequency contribution to the power."""
        return self.weights * (self.a ** 2 + self.b ** 2)

    @property
    def power(self) -> float:
        return float(self.spectral_power.sum())

    @property
    def spectral_energy(self) -> float:
        return self.n * self.power

    @property
    def parseval_gap(self) -> float:
        return abs(self.spectral_energy - self.energy) / max(self.energy, 1e-300)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "energy": self.energy,
            "power": self.power,
            "parseval_gap": self.parseval_gap,
        }

    def to_csv(self, path: Path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["k", "omega", "a", "b", "power"])
            for k, (w, a, b, p) in enumerate(zip(self.frequencies, self.a, self.b, self.spectral_power)):
                writer.writerow([k, repr(float(w)), repr(float(a)), repr(float(b)), repr(float(p))])


def power_spectrum(series: Sequence[float]) -> SpectrumResult:
    """
    a_k = (2/n) sum Z_t cos(w_k t), b_k = (2/n) sum Z_t sin(w_k t), with 1/n
    instead of 2/n for k = 0 and k = n/2.

    Energy is sum Z_t^2; power is energy per sample and equals
    a_0^2 + (1/2) sum (a_k^2 + b_k^2) (+ a_{n/2}^2 for even n).
    """
    Z = np.asarray(series, dtype=float)
    if Z.ndim != 1 or Z.size < 2:
        raise ParameterError("series", Z.shape, "a one-dimensional series of length >= 2")
    if not np.all(np.isfinite(Z)):
        raise ParameterError("series", "non-finite values", "finite samples")
    n = Z.size
    k = np.arange(n // 2 + 1)
    # t starts at 1: shift the FFT phase by one sample
    F = np.fft.rfft(Z) * np.exp(-2j * np.pi * k / n)
    scale = np.full(k.size, 2.0 / n)
    scale[0] = 1.0 / n
    if n % 2 == 0:
        scale[-1] = 1.0 / n
    a = scale * F.real
    b = -scale * F.imag
    b[0] = 0.0
    if n % 2 == 0:
        b[-1] = 0.0
    result = SpectrumResult(n=n, a=a, b=b, energy=float(np.sum(Z ** 2)))
    if result.parseval_gap > 1e-8:
        logger.warning(f"Parseval identity off by {result.parseval_gap:.3e}")
    return result


@dataclass
class ZeroOneResult:
    """
    Mean-square displacement M_c(n) of the translation variables for each c.

    `growth[i]` is the correlation of M_{c_i}(n) with n; the verdict uses
    their median.
    """

    c: np.ndarray
    n: np.ndarray
    msd: np.ndarray = field(repr=False)
    growth: np.ndarray = field(default=None)
    threshold: float = 0.9

    @property
    def statistic(self) -> float:
        return float(np.median(self.growth))

    @property
    def verdict(self) -> str:
        return "chaotic" if self.statistic > self.threshold else "regular"

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "verdict": self.verdict,
            "threshold": self.threshold,
            "c_draws": int(self.c.size),
            "n_max": int(self.n[-1]),
        }

    def to_csv(self, path: Path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["n", *(f"M_c{i}" for i in range(self.c.size))])
            for j, n in enumerate(self.n):
                writer.writerow([int(n), *(repr(float(v)) for v in self.msd[:, j])])


def _msd(phi: np.ndarray, c: float, n_max: int) -> np.ndarray:
    j = np.arange(1, phi.size + 1)
    p = np.cumsum(phi * np.cos(j * c))
    q = np.cumsum(phi * np.sin(j * c))
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        dp = p[n:] - p[:-n]
        dq = q[n:] - q[:-n]
        out[n - 1] = np.mean(dp * dp + dq * dq)
    return out


def zero_one_test(
    series: Sequence[float],
    c_draws: int = 100,
    n_max: Optional[int] = None,
    seed: int = 20240611,
    threshold: float = 0.9,
    max_workers: int = 4,
) -> ZeroOneResult:
    """
    0-1 test on the mean-removed series with c uniform in (pi/5, 4 pi/5).

    Raises:
        EmptyWindowError: fewer than 100 samples
        ParameterError: n_max above a tenth of the length, or c_draws < 1
    """
    phi = np.asarray(series, dtype=float)
    if phi.size < MIN_ZERO_ONE_LENGTH:
        raise EmptyWindowError("0-1 test", int(phi.size))
    limit = phi.size // 10
    n_max = limit if n_max is None else int(n_max)
    if not 2 <= n_max <= limit:
        raise ParameterError("n_max", n_max, f"2 <= n_max <= {limit}")
    if c_draws < 1:
        raise ParameterError("c_draws", c_draws, "c_draws >= 1")

    phi = phi - phi.mean()
    rng = np.random.default_rng(seed)
    c = rng.uniform(math.pi / 5, 4 * math.pi / 5, size=c_draws)
    n = np.arange(1, n_max + 1)

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        msd = np.array(list(executor.map(lambda value: _msd(phi, value, n_max), c)))

    growth = np.array([
        np.corrcoef(n, row)[0, 1] if np.ptp(row) > 0 else 0.0
        for row in msd
    ])
    result = ZeroOneResult(c=c, n=n, msd=msd, growth=growth, threshold=threshold)
    logger.info(f"0-1 test: median growth correlation {result.statistic:.4f} -> {result.verdict}")
    return result
