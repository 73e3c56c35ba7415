"""Closed-form per-link LoS / blockage probabilities.

All static-blocker formulas are void probabilities of a Poisson process of
random rectangles: a link of 2D length r is clear of blockers with
probability exp(-eta * (kappa * r + upsilon)), where
kappa = (2 lambda / pi) (E{L} + E{W}) and upsilon = lambda E{L} E{W}, and
eta is the probability that a crossing blocker is tall enough to matter.

Dynamic (mobile) blockers form an alternating blocked/unblocked renewal
process; the stationary LoS probability is mu / (beta + mu) with arrival
rate beta proportional to density, speed, link length, and the
blocker-to-link height ratio.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .scenario import IndoorBlockageParams, OutdoorBlockageParams, Scenario
from .scene import LinkGeometry, sensor_heights_above_floor


@dataclass(frozen=True)
class LinkBlockage:
    """Per-link blockage probabilities with the indoor component breakdown.

    All fields are blockage (not LoS) probabilities.  `p_e2e` combines the
    outdoor and indoor sides: p = p_out + p_in - p_out * p_in.
    """
    p_out: np.ndarray
    p_in: np.ndarray
    p_e2e: np.ndarray
    p_self: np.ndarray
    p_st_in: np.ndarray
    p_dy_in: np.ndarray

    @property
    def n_paths(self) -> int:
        return self.p_e2e.shape[0]


def static_crossing_coeffs(density: float, mean_len: float, mean_wid: float):
    """(kappa, upsilon) of the rectangle-process crossing intensity."""
    kappa = 2.0 * density / np.pi * (mean_len + mean_wid)
    upsilon = density * mean_len * mean_wid
    return kappa, upsilon


def _los_static(distance, density, mean_len, mean_wid, eta):
    kappa, upsilon = static_crossing_coeffs(density, mean_len, mean_wid)
    return np.exp(-eta * (kappa * np.asarray(distance, dtype=float) + upsilon))


def los_outdoor_static(distance_r1, params: OutdoorBlockageParams):
    """LoS probability of the outdoor BS->sensor link of 2D length r1."""
    return _los_static(distance_r1, params.lambda_st_out,
                       params.mean_len, params.mean_wid, params.eta1)


def los_indoor_static(distance_r2, params: IndoorBlockageParams):
    """LoS probability against indoor static blockers over 2D length r2."""
    return _los_static(distance_r2, params.lambda_st_in,
                       params.mean_len_in, params.mean_wid_in, params.eta2)


def los_indoor_self(params: IndoorBlockageParams) -> float:
    """Probability the user's own body leaves the link clear."""
    return params.self_open_fraction


def dynamic_arrival_rate(distance_r2, sensor_height, params: IndoorBlockageParams):
    """Blocker arrival rate (1/s) on a link to a sensor `sensor_height` m
    above the UE floor."""
    h = np.asarray(sensor_height, dtype=float)
    if np.any(h <= params.ue_height):
        raise GeometryError(
            "sensor height must exceed the UE antenna height for the dynamic "
            f"blockage model (got min {float(np.min(h)):.3f} m vs UE "
            f"{params.ue_height:.3f} m)")
    ratio = (params.blocker_height_H - params.ue_height) / (h - params.ue_height)
    return (2.0 / np.pi) * params.lambda_dy_in * params.mobility_speed_V \
        * ratio * np.asarray(distance_r2, dtype=float)


def los_indoor_dynamic(distance_r2, sensor_height, params: IndoorBlockageParams):
    """Stationary LoS probability against indoor mobile blockers."""
    if params.lambda_dy_in == 0:
        shape = np.broadcast(np.asarray(distance_r2, dtype=float),
                             np.asarray(sensor_height, dtype=float)).shape
        return np.ones(shape) if shape else 1.0
    beta = dynamic_arrival_rate(distance_r2, sensor_height, params)
    return params.unblock_rate_mu / (beta + params.unblock_rate_mu)


def combine_blockage(p_out, p_in):
    """End-to-end blockage of a two-segment path: blocked if either side is."""
    p_out = np.asarray(p_out, dtype=float)
    p_in = np.asarray(p_in, dtype=float)
    return p_out + p_in - p_out * p_in


def end_to_end_blockage(geometry: LinkGeometry, scenario: Scenario) -> LinkBlockage:
    """Marginal blockage probabilities of every BS->sensor->UE path."""
    ob, ib = scenario.outdoor_blockage, scenario.indoor_blockage
    n = geometry.n_paths

    los_out = los_outdoor_static(geometry.r1, ob)
    los_self = los_indoor_self(ib)
    los_st = los_indoor_static(geometry.r2, ib)
    heights = sensor_heights_above_floor(geometry, scenario)
    los_dy = los_indoor_dynamic(geometry.r2, heights, ib)

    p_out = 1.0 - los_out
    p_in = 1.0 - los_self * los_st * los_dy
    return LinkBlockage(
        p_out=p_out,
        p_in=p_in,
        p_e2e=combine_blockage(p_out, p_in),
        p_self=np.full(n, 1.0 - los_self),
        p_st_in=1.0 - los_st,
        p_dy_in=1.0 - los_dy,
    )


def uniform_blockage(n: int, p: float) -> LinkBlockage:
    """LinkBlockage with the same end-to-end blockage p on every path.

    The whole probability is attributed to the outdoor side; useful for
    studies where the per-link blockage is imposed directly.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"blockage probability must be in [0, 1], got {p}")
    z = np.zeros(n)
    return LinkBlockage(p_out=np.full(n, float(p)), p_in=z, p_e2e=np.full(n, float(p)),
                        p_self=z, p_st_in=z, p_dy_in=z)


def poisson_count_pmf(lambda_density: float, area: float, count) -> np.ndarray:
    """P[count blockers in a region of the given area]."""
    k = np.asarray(count)
    if np.any(k < 0):
        raise ValueError("count must be non-negative")
    lam = lambda_density * area
    if lam == 0:
        return np.where(k == 0, 1.0, 0.0)
    # log-space for large counts
    from scipy.special import gammaln
    return np.exp(k * np.log(lam) - lam - gammaln(k + 1.0))
