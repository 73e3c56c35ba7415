"""Counterpart models: direct through-wall penetration and a two-hop relay.

Both serve as comparison baselines for the sensor-wall link.  The
penetration model sends one beam straight through the window glass and pays
a fixed penetration loss; the relay model hops through a single outdoor
relay antenna that forwards the signal indoors with a configured gain.
Each has exactly one blockage Bernoulli per segment, i.e. no spatial
diversity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .blockage import (combine_blockage, los_indoor_dynamic, los_indoor_self,
                       los_indoor_static, los_outdoor_static)
from .channel import db_to_linear, dbm_to_mw, freespace_intercept, pathloss
from .errors import InvariantError
from .scenario import Scenario


@dataclass(frozen=True)
class BaselineConfig:
    mode: str = "penetration"             # penetration | relay
    penetration_loss_db: float = 3.6
    relay_outdoor_height: float | None = None  # m above ground; no silent default
    relay_gain_db: float | None = None         # indoor-hop EIRP relative to BS power


def _intercept(scenario: Scenario) -> float:
    if scenario.pathloss_intercept is not None:
        return scenario.pathloss_intercept
    return freespace_intercept(scenario.carrier_freq_hz)


def _indoor_blockage_single(scenario: Scenario, height_above_floor: float) -> float:
    ib = scenario.indoor_blockage
    los = (los_indoor_self(ib)
           * float(los_indoor_static(scenario.ue_offset, ib))
           * float(los_indoor_dynamic(scenario.ue_offset, height_above_floor, ib)))
    return 1.0 - los


def _mc_single_path(p_blocked: float, snr: float, thresholds_db, trials: int,
                    seed: int, purpose: int, workers: int = 1):
    """Coverage of one deterministic-SNR path with one blockage Bernoulli."""
    t_lin = db_to_linear(np.asarray(thresholds_db, dtype=float))
    exceeds = (snr > t_lin)

    def worker(block, size):
        gen = rngmod.substream(seed, rngmod.BASELINE_TRIALS, purpose, block)
        clear = gen.random(size) >= p_blocked
        return int(clear.sum(dtype=np.int64))

    clear_total = sum(rngmod.run_blocks(worker, trials, workers))
    cov = np.where(exceeds, clear_total / float(trials), 0.0)
    err = np.sqrt(cov * (1.0 - cov) / trials)
    return cov, err


def coverage_penetration(scenario: Scenario, thresholds_db, trials: int,
                         seed: int | None = None,
                         config: BaselineConfig | None = None,
                         deterministic_fading: bool = False, workers: int = 1):
    """Through-glass baseline coverage over a dB threshold grid."""
    if config is None:
        config = BaselineConfig(mode="penetration")
    if config.penetration_loss_db < 0:
        raise InvariantError("penetration_loss_db must be non-negative")
    if seed is None:
        seed = scenario.rng_seed

    bs = np.array([0.0, -scenario.bs_distance_R, scenario.bs_height])
    ue = np.array([0.0, scenario.ue_offset, scenario.ue_position_height()])
    d3 = float(np.linalg.norm(ue - bs))
    gen = rngmod.substream(seed, rngmod.FADING, 1)
    h2 = 1.0 if deterministic_fading else float(
        gen.gamma(scenario.nakagami_m, 1.0 / scenario.nakagami_m))
    snr = (dbm_to_mw(scenario.tx_power_dbm) / dbm_to_mw(scenario.noise_power_dbm)
           * scenario.m_antennas ** 2
           * pathloss(d3, scenario.alpha, _intercept(scenario))
           * db_to_linear(-config.penetration_loss_db) * h2)

    # Wall-plane crossing height of the straight BS->UE ray sets the link
    # height used by the dynamic-blockage model.
    t = scenario.bs_distance_R / (scenario.bs_distance_R + scenario.ue_offset)
    crossing = scenario.bs_height + t * (scenario.ue_position_height() - scenario.bs_height)
    p_out = 1.0 - float(los_outdoor_static(scenario.bs_distance_R,
                                           scenario.outdoor_blockage))
    p_in = _indoor_blockage_single(scenario, crossing - scenario.ue_floor_height)
    p = float(combine_blockage(p_out, p_in))
    return _mc_single_path(p, float(snr), thresholds_db, trials, seed, 1, workers)


def relay_hop_snrs(scenario: Scenario, config: BaselineConfig):
    """(outdoor, indoor) hop SNRs of the relay model, fading excluded."""
    if config.relay_outdoor_height is None or config.relay_gain_db is None:
        raise InvariantError("relay baseline requires explicit "
                             "relay_outdoor_height and relay_gain_db")
    budget = (dbm_to_mw(scenario.tx_power_dbm) / dbm_to_mw(scenario.noise_power_dbm))
    snr1 = budget * scenario.m_antennas ** 2 * pathloss(
        scenario.bs_distance_R, scenario.alpha, _intercept(scenario))
    snr2 = budget * db_to_linear(config.relay_gain_db)
    return float(snr1), float(snr2)


def coverage_relay(scenario: Scenario, config: BaselineConfig, thresholds_db,
                   trials: int, seed: int | None = None,
                   deterministic_fading: bool = False, workers: int = 1):
    """Two-hop relay baseline coverage over a dB threshold grid.

    End-to-end SNR is the minimum hop SNR; the link is in outage when
    either hop's single path is blocked.
    """
    if seed is None:
        seed = scenario.rng_seed
    snr1, snr2 = relay_hop_snrs(scenario, config)
    gen = rngmod.substream(seed, rngmod.FADING, 2)
    if deterministic_fading:
        h2 = g2 = 1.0
    else:
        h2 = float(gen.gamma(scenario.nakagami_m, 1.0 / scenario.nakagami_m))
        g2 = float(gen.gamma(scenario.nakagami_m, 1.0 / scenario.nakagami_m))
    snr = min(snr1 * h2, snr2 * g2)

    p_out = 1.0 - float(los_outdoor_static(scenario.bs_distance_R,
                                           scenario.outdoor_blockage))
    p_in = _indoor_blockage_single(
        scenario, config.relay_outdoor_height - scenario.ue_floor_height)
    t_lin = db_to_linear(np.asarray(thresholds_db, dtype=float))
    exceeds = (snr > t_lin)

    def worker(block, size):
        gen = rngmod.substream(seed, rngmod.BASELINE_TRIALS, 2, block)
        u = gen.random((size, 2))
        clear = (u[:, 0] >= p_out) & (u[:, 1] >= p_in)
        return int(clear.sum(dtype=np.int64))

    clear_total = sum(rngmod.run_blocks(worker, trials, workers))
    cov = np.where(exceeds, clear_total / float(trials), 0.0)
    err = np.sqrt(cov * (1.0 - cov) / trials)
    return cov, err


def relay_outage_probability(scenario: Scenario, config: BaselineConfig) -> float:
    """Closed-form blockage outage of the relay link (no diversity)."""
    p_out = 1.0 - float(los_outdoor_static(scenario.bs_distance_R,
                                           scenario.outdoor_blockage))
    p_in = _indoor_blockage_single(
        scenario, config.relay_outdoor_height - scenario.ue_floor_height)
    return float(combine_blockage(p_out, p_in))
