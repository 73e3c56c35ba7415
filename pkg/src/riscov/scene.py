"""Deployment geometry: BS, sensor wall, indoor UE, per-link distances.

Coordinate convention: the wall lies in the x-z plane (y = 0), centered at
x = 0 with vertical center at `wall_center_height`.  The BS sits outdoors at
(0, -bs_distance_R, bs_height); the UE indoors at
(0, +ue_offset, ue_floor_height + ue_height_above_floor).

Link distances r1 (BS -> sensor) and r2 (sensor -> UE) are 2D, i.e. measured
in the horizontal ground plane; heights only affect the beam-gain taper and
the dynamic-blockage rate downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError
from .scenario import Scenario, validate

# Lowest admissible beam gain on the wall; the taper maps the wall boundary
# to exactly this value and the beam axis to 1.
GB_FLOOR = 0.5 + 1e-6


@dataclass(frozen=True)
class LinkGeometry:
    sensor_positions: np.ndarray  # (N, 3) meters
    r1: np.ndarray                # (N,) 2D BS->sensor distance
    r2: np.ndarray                # (N,) 2D sensor->UE distance
    gb: np.ndarray                # (N,) beam-gain factors in (0.5, 1]
    bs_position: np.ndarray       # (3,)
    ue_position: np.ndarray       # (3,)

    @property
    def n_paths(self) -> int:
        return self.r1.shape[0]


def beam_gain(dphi, dtheta, edge_angle: float, floor: float = GB_FLOOR):
    """Raised-cosine transmit-beam taper.

    `dphi`/`dtheta` are the azimuth/elevation offsets (radians) of a
    direction from the beam axis; `edge_angle` is the offset magnitude at
    the wall boundary.  Returns 1 on the axis, decreasing to `floor` at the
    boundary.  Offsets beyond the boundary are clipped to the floor.
    """
    psi = np.hypot(dphi, dtheta)
    t = np.clip(psi / edge_angle, 0.0, 1.0) if edge_angle > 0 else np.zeros_like(psi)
    return floor + (1.0 - floor) * 0.5 * (1.0 + np.cos(math.pi * t))


def _angles_from(origin, points):
    """(azimuth, elevation) of each point as seen from origin."""
    d = np.atleast_2d(points) - origin
    az = np.arctan2(d[:, 0], d[:, 1])
    el = np.arctan2(d[:, 2], np.hypot(d[:, 0], d[:, 1]))
    return az, el


def build_geometry(scenario: Scenario, gain_mode: str = "taper") -> LinkGeometry:
    """Place the sqrt(N) x sqrt(N) sensor grid and derive per-link quantities.

    Sensors sit at the centers of a uniform grid tiling the wall rectangle.
    `gain_mode` selects the beam-gain model: "taper" (default raised cosine)
    or "flat" (all gains 1, for isolation tests).
    """
    bad = validate(scenario)
    if bad:
        raise InvariantError("; ".join(bad))
    if gain_mode not in ("taper", "flat"):
        raise ValueError(f"unknown gain_mode {gain_mode!r}")

    n = scenario.n_sensors
    side = math.isqrt(n)
    pitch_x = scenario.wall_width / side
    pitch_z = scenario.wall_height / side
    xs = -scenario.wall_width / 2 + pitch_x * (np.arange(side) + 0.5)
    zs = (scenario.wall_center_height - scenario.wall_height / 2
          + pitch_z * (np.arange(side) + 0.5))
    gx, gz = np.meshgrid(xs, zs, indexing="xy")
    positions = np.column_stack([gx.ravel(), np.zeros(n), gz.ravel()])

    bs = np.array([0.0, -scenario.bs_distance_R, scenario.bs_height])
    ue = np.array([0.0, scenario.ue_offset, scenario.ue_position_height()])

    r1 = np.hypot(positions[:, 0] - bs[0], positions[:, 1] - bs[1])
    r2 = np.hypot(positions[:, 0] - ue[0], positions[:, 1] - ue[1])

    if gain_mode == "flat":
        gb = np.ones(n)
    else:
        center = np.array([0.0, 0.0, scenario.wall_center_height])
        az_c, el_c = _angles_from(bs, center[None, :])
        az_s, el_s = _angles_from(bs, positions)
        hw, hh = scenario.wall_width / 2, scenario.wall_height / 2
        corners = np.array([[sx * hw, 0.0, scenario.wall_center_height + sz * hh]
                            for sx in (-1, 1) for sz in (-1, 1)])
        az_k, el_k = _angles_from(bs, corners)
        edge = float(np.max(np.hypot(az_k - az_c, el_k - el_c)))
        gb = beam_gain(az_s - az_c, el_s - el_c, edge)
        # The grid may not contain a sensor exactly on the beam axis (even
        # sqrt(N)); rescale so the sensor nearest the wall center gets the
        # peak gain of 1.
        gb = gb / gb.max()

    for arr in (positions, r1, r2, gb, bs, ue):
        arr.flags.writeable = False
    return LinkGeometry(sensor_positions=positions, r1=r1, r2=r2, gb=gb,
                        bs_position=bs, ue_position=ue)


def sensor_heights_above_floor(geometry: LinkGeometry, scenario: Scenario) -> np.ndarray:
    """Sensor heights in the UE's local frame (m above the UE floor)."""
    return geometry.sensor_positions[:, 2] - scenario.ue_floor_height
