"""Link budget: pathloss, small-scale fading powers, per-path gains.

The received SNR is Gamma = G * sum_n a_n * z_n where G collects transmit
power, the M^2 transmit-array gain, the outdoor large-scale pathloss at the
wall center, and the noise floor; a_n = B_n * gb_n * |h_n|^2 * |g_n|^2 is
the per-path amplitude weight; and z_n is the 0/1 path survival indicator.
Indoor large-scale pathloss is neglected (short indoor distances); phases
never appear, as the sensors compensate them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import speed_of_light

from . import rng as rngmod
from .scenario import Scenario
from .scene import LinkGeometry


def db_to_linear(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def dbm_to_mw(dbm):
    return db_to_linear(dbm)


def freespace_intercept(carrier_freq_hz: float) -> float:
    """Free-space power gain at the 1 m reference distance."""
    return (speed_of_light / (4.0 * np.pi * carrier_freq_hz)) ** 2


def pathloss(distance, alpha: float, intercept_cl: float):
    """Large-scale linear power gain C_L * d^-alpha."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise ValueError("pathloss distance must be positive")
    return intercept_cl * d ** (-alpha)


@dataclass(frozen=True)
class LinkGains:
    big_g: float       # global gain G (linear SNR per unit path weight)
    a: np.ndarray      # (N,) per-path amplitude weights
    h2: np.ndarray     # (N,) outdoor fading powers |h|^2 (diagnostic)
    g2: np.ndarray     # (N,) indoor fading powers |g|^2 (diagnostic)

    @property
    def n_paths(self) -> int:
        return self.a.shape[0]


def draw_fading_powers(scenario: Scenario, seed: int | None = None,
                       deterministic: bool = False):
    """One fading-power draw per path, held fixed for the whole scenario.

    Powers are unit-mean Gamma with shape `nakagami_m` (the power of a
    Nakagami(m, 1) amplitude).  `deterministic=True` sets everything to 1.
    """
    n = scenario.n_sensors
    if deterministic:
        return np.ones(n), np.ones(n)
    m = scenario.nakagami_m
    gen = rngmod.substream(scenario.rng_seed if seed is None else seed, rngmod.FADING)
    h2 = gen.gamma(shape=m, scale=1.0 / m, size=n)
    g2 = gen.gamma(shape=m, scale=1.0 / m, size=n)
    return h2, g2


def assemble_gains(scenario: Scenario, geometry: LinkGeometry,
                   h2: np.ndarray, g2: np.ndarray) -> LinkGains:
    """Build the SNR weights from scenario, geometry, and fading draws."""
    n = geometry.n_paths
    if not (len(h2) == len(g2) == n):
        raise ValueError("fading vectors must match the number of paths")
    cl = scenario.pathloss_intercept
    if cl is None:
        cl = freespace_intercept(scenario.carrier_freq_hz)
    loss = pathloss(scenario.bs_distance_R, scenario.alpha, cl)
    big_g = (dbm_to_mw(scenario.tx_power_dbm) / dbm_to_mw(scenario.noise_power_dbm)
             * scenario.m_antennas ** 2 * loss)
    a = scenario.attenuation_B * geometry.gb * np.asarray(h2) * np.asarray(g2)
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return LinkGains(big_g=float(big_g), a=a,
                     h2=np.asarray(h2, dtype=float), g2=np.asarray(g2, dtype=float))


def snr_realization(gains: LinkGains, z) -> float:
    """SNR for one survival vector z (booleans or 0/1 ints)."""
    z = np.asarray(z)
    if z.shape[-1] != gains.n_paths:
        raise ValueError("survival vector length must match the number of paths")
    return gains.big_g * (np.asarray(z, dtype=float) @ gains.a)
