"""SNR coverage probability Pr[Gamma > T] by five routes.

* Monte Carlo over blockage realizations (independent Bernoulli draws, or
  correlated realizations supplied by a sampler).
* Gaussian approximation: Q((T - mean) / std) from the exact first two
  moments of the weighted Bernoulli sum, good for large N.
* Equal-weight approximation: replace every path weight by the average, so
  Gamma lives on a lattice and the surviving-path count has a
  Poisson-binomial distribution, evaluated either by a DFT closed form or
  by explicit subset enumeration (small N).
* Chernoff tail bounds from the moments.

Analytic routines take linear SNR thresholds; the Monte Carlo curve takes a
dB grid (the CLI's native unit) and converts internally.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from . import rng as rngmod
from .blockage import LinkBlockage
from .channel import LinkGains, db_to_linear
from .errors import CapExceededError, NumericInstabilityError

ENUMERATION_CAP = 20          # hard N cap for subset enumeration
DFT_LOG_PRODUCT_MIN_N = 257   # switch products to log accumulation above this
IMAG_RESIDUE_TOL = 1e-9


@dataclass(frozen=True)
class GaussianMoments:
    mean: float     # E[Gamma], linear SNR
    variance: float  # Var[Gamma]

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


@dataclass
class CoverageCurve:
    """Per-method coverage over a common threshold grid."""
    thresholds_db: np.ndarray
    coverage: dict = field(default_factory=dict)   # method -> array
    stderr: dict = field(default_factory=dict)     # method -> array (MC only)
    trials: dict = field(default_factory=dict)     # method -> int (MC only)

    def add(self, method: str, values, stderr=None, trials=None):
        self.coverage[method] = np.asarray(values, dtype=float)
        if stderr is not None:
            self.stderr[method] = np.asarray(stderr, dtype=float)
        if trials is not None:
            self.trials[method] = int(trials)


def q_function(x):
    """Gaussian tail probability Q(x) = P[N(0,1) > x]."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def moments(gains: LinkGains, blockage: LinkBlockage) -> GaussianMoments:
    """Exact mean and variance of Gamma under independent path survival."""
    p = blockage.p_e2e
    if len(p) != gains.n_paths:
        raise ValueError("blockage and gains disagree on the number of paths")
    mean = gains.big_g * float(np.sum(gains.a * (1.0 - p)))
    var = gains.big_g ** 2 * float(np.sum(gains.a ** 2 * (1.0 - p) * p))
    return GaussianMoments(mean=mean, variance=var)


def coverage_gaussian(m: GaussianMoments, threshold: float) -> float:
    """Gaussian-approximation coverage at a linear threshold."""
    if m.variance == 0.0:
        return 1.0 if threshold < m.mean else 0.0
    return float(q_function((threshold - m.mean) / m.std))


def pmf_enumeration(p, k: int) -> float:
    """P[k of the N paths survive], by explicit sum over k-subsets.

    Exact but exponential in N; refuses N > ENUMERATION_CAP.
    """
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    if n > ENUMERATION_CAP:
        raise CapExceededError(
            f"subset enumeration supports N <= {ENUMERATION_CAP}, got {n}")
    if not 0 <= k <= n:
        return 0.0
    q = 1.0 - p
    total = 0.0
    for survivors in itertools.combinations(range(n), k):
        mask = np.zeros(n, dtype=bool)
        mask[list(survivors)] = True
        total += float(np.prod(np.where(mask, q, p)))
    return total


def _characteristic_samples(p: np.ndarray) -> np.ndarray:
    """x_l = prod_n [1 + (C^l - 1)(1 - p_n)] on the (N+1)-point unit-root grid."""
    n = p.shape[0]
    ell = np.arange(n + 1)
    roots = np.exp(2j * np.pi * ell / (n + 1))            # C^l
    terms = 1.0 + np.outer(roots - 1.0, 1.0 - p)          # (N+1, N)
    if n < DFT_LOG_PRODUCT_MIN_N:
        return np.prod(terms, axis=1)
    # Accumulate in log magnitude/angle to bound rounding for long products.
    mags = np.abs(terms)
    zero_rows = np.any(mags == 0.0, axis=1)
    x = np.zeros(n + 1, dtype=complex)
    safe = ~zero_rows
    if np.any(safe):
        logs = np.log(terms[safe])
        x[safe] = np.exp(np.sum(logs, axis=1))
    return x


def pmf_dft_all(p) -> np.ndarray:
    """Poisson-binomial PMF over 0..N surviving paths via the DFT closed form."""
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    x = _characteristic_samples(p)
    spectrum = np.fft.fft(x) / (n + 1)
    residue = float(np.max(np.abs(spectrum.imag)))
    if residue >= IMAG_RESIDUE_TOL:
        raise NumericInstabilityError(
            f"imaginary residue {residue:.3e} exceeds {IMAG_RESIDUE_TOL:.0e}")
    return np.clip(spectrum.real, 0.0, 1.0)


def pmf_dft(p, k: int) -> float:
    p = np.asarray(p, dtype=float)
    if not 0 <= k <= p.shape[0]:
        raise ValueError(f"k must be in 0..{p.shape[0]}, got {k}")
    return float(pmf_dft_all(p)[k])


def coverage_approx2(gains: LinkGains, blockage: LinkBlockage, threshold: float,
                     backend: str = "dft") -> float:
    """Equal-weight lattice coverage at a linear threshold.

    Every path weight is replaced by the average A, so Gamma = G*A*S with S
    the surviving-path count; the lattice point k = floor(T / (G*A)) counts
    as non-exceeding.  `backend` picks the PMF route: "dft" or "enum".
    """
    if threshold < 0:
        return 1.0
    p = blockage.p_e2e
    n = gains.n_paths
    ga = gains.big_g * float(np.mean(gains.a))
    if ga <= 0.0:
        return 0.0
    if threshold >= n * ga:
        return 0.0
    k = int(math.floor(threshold / ga))
    if backend == "dft":
        head = float(np.sum(pmf_dft_all(p)[:k + 1]))
    elif backend == "enum":
        head = sum(pmf_enumeration(p, q) for q in range(k + 1))
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return float(np.clip(1.0 - head, 0.0, 1.0))


def coverage_chernoff(m: GaussianMoments, threshold: float) -> float:
    """Chernoff-bound coverage value at a linear threshold.

    For T > mean this upper-bounds the coverage; at T = mean the bound is
    vacuous (1).  Both branches are evaluated in log space and clamped.
    """
    mu = m.mean
    if mu <= 0:
        raise ValueError("Chernoff bound requires a positive mean SNR")
    t = float(threshold)
    if t == mu:
        return 1.0
    if t < mu:
        log_term = (t - 2.0 * mu) * math.log(2.0 - t / mu) + (mu - t)
        return float(np.clip(1.0 - math.exp(min(log_term, 0.0)), 0.0, 1.0))
    log_term = (t - mu) - t * math.log(t / mu)
    return float(np.clip(math.exp(min(log_term, 0.0)), 0.0, 1.0))


def _survival_probabilities(blockage: LinkBlockage) -> np.ndarray:
    return 1.0 - blockage.p_e2e


def snr_samples(gains: LinkGains, blockage: LinkBlockage, trials: int, seed: int,
                sampler=None, workers: int = 1) -> np.ndarray:
    """Monte Carlo draws of Gamma (one value per trial), deterministic in seed.

    `sampler(generator, size) -> (size, N) bool` supplies correlated survival
    vectors; the default draws independent Bernoulli survivals.
    """
    survive = _survival_probabilities(blockage)

    def worker(block, size):
        gen = rngmod.substream(seed, rngmod.COVERAGE_TRIALS, block)
        if sampler is None:
            z = gen.random((size, gains.n_paths)) < survive[None, :]
        else:
            z = sampler(gen, size)
        return gains.big_g * (z.astype(float) @ gains.a)

    parts = rngmod.run_blocks(worker, trials, workers)
    return np.concatenate(parts)


def coverage_monte_carlo(gains: LinkGains, blockage: LinkBlockage, thresholds_db,
                         trials: int, seed: int,
                         blockage_source: str = "analytic-independent",
                         sampler=None, workers: int = 1):
    """MC coverage over a dB threshold grid.

    Returns (coverage, stderr) arrays aligned with `thresholds_db`.  With
    `blockage_source="geometric-correlated"` a `sampler` must be supplied
    (see rectangles.survival_sampler).  Exceedance counts are accumulated
    per block as integers, so results are identical for any worker count.
    """
    if blockage_source in ("analytic-independent", "independent"):
        sampler = None
    elif blockage_source in ("geometric-correlated", "correlated"):
        if sampler is None:
            raise ValueError("geometric-correlated source needs a sampler")
    else:
        raise ValueError(f"unknown blockage_source {blockage_source!r}")
    t_lin = db_to_linear(np.asarray(thresholds_db, dtype=float))
    survive = _survival_probabilities(blockage)

    def worker(block, size):
        gen = rngmod.substream(seed, rngmod.COVERAGE_TRIALS, block)
        if sampler is None:
            z = gen.random((size, gains.n_paths)) < survive[None, :]
        else:
            z = sampler(gen, size)
        gamma = gains.big_g * (z.astype(float) @ gains.a)
        return (gamma[:, None] > t_lin[None, :]).sum(axis=0, dtype=np.int64)

    counts = sum(rngmod.run_blocks(worker, trials, workers))
    cov = counts / float(trials)
    err = np.sqrt(cov * (1.0 - cov) / trials)
    return cov, err
