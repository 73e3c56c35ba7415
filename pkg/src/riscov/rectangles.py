"""Monte Carlo Boolean model of random rectangular blockers.

Blockers are a Poisson process of rectangles in the ground plane: uniform
centers in a simulation window, uniform orientation in [0, pi), and
length/width drawn exponentially with the configured means (or fixed).  A
path is blocked by a rectangle when the rectangle footprint intersects the
path's 2D ground segment AND an independent per-(rectangle, path) coin with
probability eta declares the blocker tall enough.  Because rectangles are
shared between paths, blockage is correlated across the sensor array, which
is the effect this module quantifies.

All estimators accumulate integer counts per fixed-size trial block with a
block-keyed RNG stream, so results are identical for any worker count.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .blockage import end_to_end_blockage, los_indoor_dynamic, los_indoor_self
from .errors import GeometryError, InvariantError
from .scenario import Scenario
from .scene import LinkGeometry, build_geometry, sensor_heights_above_floor

WINDOW_PAD_MEAN_LENGTHS = 3.0


@dataclass(frozen=True)
class RectangleProcess:
    density: float               # rectangles per m^2
    mean_len: float
    mean_wid: float
    height_factor_eta: float     # P[crossing blocker is tall enough]
    region: tuple                # (xmin, ymin, xmax, ymax)
    size_distribution: str = "exponential"  # or "fixed"

    def area(self) -> float:
        x0, y0, x1, y1 = self.region
        return max(x1 - x0, 0.0) * max(y1 - y0, 0.0)


@dataclass(frozen=True)
class BlockageSample:
    blocked: np.ndarray  # (N,) bool, one realization over all paths


@dataclass(frozen=True)
class JointBlockageStats:
    marginal_los: np.ndarray          # (N,)
    marginal_stderr: np.ndarray
    pairwise_joint_los: np.ndarray    # (N, N)
    joint_stderr: np.ndarray
    correlation_rho: np.ndarray       # (N, N), NaN where undefined
    rho_defined: np.ndarray           # (N, N) bool
    blocked_count: np.ndarray         # (N+1,) integer histogram of #blocked
    blocked_count_pmf: np.ndarray
    blocked_count_stderr: np.ndarray
    separation_angle: np.ndarray      # (N, N) radians at the shared endpoint
    trial_count: int


def path_segments(geometry: LinkGeometry, segment_selector: str) -> np.ndarray:
    """Ground-plane segments, one per path: (N, 2, 2) as [start, end]."""
    foot = geometry.sensor_positions[:, :2].copy()
    if segment_selector == "outdoor":
        origin = geometry.bs_position[:2]
    elif segment_selector == "indoor":
        origin = geometry.ue_position[:2]
    else:
        raise ValueError(f"segment_selector must be outdoor|indoor, "
                         f"got {segment_selector!r}")
    n = foot.shape[0]
    segs = np.empty((n, 2, 2))
    segs[:, 0, :] = origin[None, :]
    segs[:, 1, :] = foot
    return segs


def window_for(segments: np.ndarray, mean_len: float) -> tuple:
    """Axis-aligned window: segment bounding box padded by 3 mean lengths."""
    pts = segments.reshape(-1, 2)
    pad = WINDOW_PAD_MEAN_LENGTHS * mean_len
    return (float(pts[:, 0].min() - pad), float(pts[:, 1].min() - pad),
            float(pts[:, 0].max() + pad), float(pts[:, 1].max() + pad))


def outdoor_process(scenario: Scenario, geometry: LinkGeometry,
                    size_distribution: str = "exponential") -> RectangleProcess:
    ob = scenario.outdoor_blockage
    region = window_for(path_segments(geometry, "outdoor"), ob.mean_len)
    return RectangleProcess(density=ob.lambda_st_out, mean_len=ob.mean_len,
                            mean_wid=ob.mean_wid, height_factor_eta=ob.eta1,
                            region=region, size_distribution=size_distribution)


def indoor_process(scenario: Scenario, geometry: LinkGeometry,
                   size_distribution: str = "exponential") -> RectangleProcess:
    ib = scenario.indoor_blockage
    region = window_for(path_segments(geometry, "indoor"), ib.mean_len_in)
    return RectangleProcess(density=ib.lambda_st_in, mean_len=ib.mean_len_in,
                            mean_wid=ib.mean_wid_in, height_factor_eta=ib.eta2,
                            region=region, size_distribution=size_distribution)


def _check_window(process: RectangleProcess, segments: np.ndarray):
    x0, y0, x1, y1 = process.region
    pts = segments.reshape(-1, 2)
    if (np.any(pts[:, 0] < x0) or np.any(pts[:, 0] > x1)
            or np.any(pts[:, 1] < y0) or np.any(pts[:, 1] > y1)):
        raise GeometryError("simulation window does not enclose every path segment")
    if process.density > 0 and process.area() <= 0:
        raise InvariantError("simulation window must have positive area")


def segment_rectangle_hits(segments: np.ndarray, centers: np.ndarray,
                           angles: np.ndarray, lengths: np.ndarray,
                           widths: np.ndarray) -> np.ndarray:
    """(K, P) bool: does rectangle k intersect ground segment p?

    Each segment is transformed into the rectangle's frame (center at the
    origin, length axis along x) and clipped against the axis-aligned box
    via the slab (Liang-Barsky) test.
    """
    p0 = segments[None, :, 0, :] - centers[:, None, :]   # (K, P, 2)
    p1 = segments[None, :, 1, :] - centers[:, None, :]
    cos = np.cos(angles)[:, None]
    sin = np.sin(angles)[:, None]
    x0 = cos * p0[:, :, 0] + sin * p0[:, :, 1]
    y0 = -sin * p0[:, :, 0] + cos * p0[:, :, 1]
    x1 = cos * p1[:, :, 0] + sin * p1[:, :, 1]
    y1 = -sin * p1[:, :, 0] + cos * p1[:, :, 1]

    tmin = np.zeros_like(x0)
    tmax = np.ones_like(x0)
    valid = np.ones(x0.shape, dtype=bool)
    for start, end, half in ((x0, x1, (lengths / 2.0)[:, None]),
                             (y0, y1, (widths / 2.0)[:, None])):
        d = end - start
        parallel = d == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (-half - start) / d
            t2 = (half - start) / d
        lo = np.where(parallel, -np.inf, np.minimum(t1, t2))
        hi = np.where(parallel, np.inf, np.maximum(t1, t2))
        valid &= np.where(parallel, np.abs(start) <= half, True)
        tmin = np.maximum(tmin, lo)
        tmax = np.minimum(tmax, hi)
    return valid & (tmin <= tmax)


_HIT_CHUNK = 8192  # rectangles per intersection batch, keeps temporaries small


def sample_blocked_matrix(process: RectangleProcess, segments: np.ndarray,
                          size: int, gen: np.random.Generator) -> np.ndarray:
    """(size, P) bool: blocked indicator per trial and path.

    Draw order per call is fixed (counts, centers, angles, lengths, widths,
    height coins); callers must hand each block its own generator.
    """
    n_paths = segments.shape[0]
    lam = process.density * process.area()
    counts = gen.poisson(lam, size) if lam > 0 else np.zeros(size, dtype=np.int64)
    total = int(counts.sum())
    if total == 0:
        return np.zeros((size, n_paths), dtype=bool)
    x0, y0, x1, y1 = process.region
    u = gen.uniform(size=(total, 2))
    centers = np.column_stack([x0 + u[:, 0] * (x1 - x0), y0 + u[:, 1] * (y1 - y0)])
    angles = gen.uniform(0.0, np.pi, total)
    if process.size_distribution == "fixed":
        lengths = np.full(total, process.mean_len)
        widths = np.full(total, process.mean_wid)
    elif process.size_distribution == "exponential":
        lengths = gen.exponential(process.mean_len, total)
        widths = gen.exponential(process.mean_wid, total)
    else:
        raise ValueError(
            f"unknown size_distribution {process.size_distribution!r}")
    tall = gen.random((total, n_paths)) < process.height_factor_eta

    # Sensors stacked in one wall column share the same ground segment, so
    # run the intersection test on distinct segments only.
    unique, inverse = np.unique(segments.reshape(n_paths, 4), axis=0,
                                return_inverse=True)
    unique = unique.reshape(-1, 2, 2)
    pair_blocked = np.empty((total, n_paths), dtype=np.uint8)
    for start in range(0, total, _HIT_CHUNK):
        end = min(start + _HIT_CHUNK, total)
        hits = segment_rectangle_hits(unique, centers[start:end],
                                      angles[start:end], lengths[start:end],
                                      widths[start:end])
        pair_blocked[start:end] = hits[:, inverse] & tall[start:end]

    offsets = np.zeros(size, dtype=np.int64)
    np.cumsum(counts[:-1], out=offsets[1:])
    agg = np.bitwise_or.reduceat(pair_blocked, np.minimum(offsets, total - 1), axis=0)
    agg[counts == 0] = 0
    return agg.astype(bool)


def sample_blockage_realization(process: RectangleProcess, geometry: LinkGeometry,
                                segment_selector: str,
                                gen: np.random.Generator) -> BlockageSample:
    """One correlated blocked/clear realization over all N paths."""
    segments = path_segments(geometry, segment_selector)
    _check_window(process, segments)
    blocked = sample_blocked_matrix(process, segments, 1, gen)[0]
    return BlockageSample(blocked=blocked)


def _separation_angles(segments: np.ndarray) -> np.ndarray:
    v = segments[:, 1, :] - segments[:, 0, :]
    norm = np.linalg.norm(v, axis=1)
    unit = v / np.where(norm[:, None] > 0, norm[:, None], 1.0)
    cosang = np.clip(unit @ unit.T, -1.0, 1.0)
    return np.arccos(cosang)


def estimate_joint_stats(process: RectangleProcess, geometry: LinkGeometry,
                         segment_selector: str, trials: int, seed: int,
                         workers: int = 1) -> JointBlockageStats:
    """Empirical marginal / pairwise LoS statistics and the blocked-count PMF."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    segments = path_segments(geometry, segment_selector)
    _check_window(process, segments)
    n = segments.shape[0]

    def worker(block, size):
        gen = rngmod.substream(seed, rngmod.JOINT_STATS, block)
        blocked = sample_blocked_matrix(process, segments, size, gen)
        clear = (~blocked).astype(np.int64)
        los_count = clear.sum(axis=0)
        joint_count = clear.T @ clear
        hist = np.bincount(blocked.sum(axis=1), minlength=n + 1)
        return los_count, joint_count, hist

    parts = rngmod.run_blocks(worker, trials, workers)
    los_count = sum(p[0] for p in parts)
    joint_count = sum(p[1] for p in parts)
    hist = sum(p[2] for p in parts)

    t = float(trials)
    marginal = los_count / t
    joint = joint_count / t
    var = marginal * (1.0 - marginal)
    denom = np.sqrt(np.outer(var, var))
    defined = denom > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(defined,
                       (joint - np.outer(marginal, marginal)) / np.where(defined, denom, 1.0),
                       np.nan)
    np.fill_diagonal(rho, 1.0)
    pmf = hist / t
    return JointBlockageStats(
        marginal_los=marginal,
        marginal_stderr=np.sqrt(marginal * (1.0 - marginal) / t),
        pairwise_joint_los=joint,
        joint_stderr=np.sqrt(joint * (1.0 - joint) / t),
        correlation_rho=rho,
        rho_defined=defined | np.eye(n, dtype=bool),
        blocked_count=hist,
        blocked_count_pmf=pmf,
        blocked_count_stderr=np.sqrt(pmf * (1.0 - pmf) / t),
        separation_angle=_separation_angles(segments),
        trial_count=trials,
    )


def survival_sampler(scenario: Scenario, geometry: LinkGeometry,
                     size_distribution: str = "exponential"):
    """Correlated path-survival sampler for the coverage Monte Carlo.

    Outdoor and indoor static blockers come from shared-rectangle
    realizations; dynamic and self blockage stay independent per path with
    their closed-form marginals.  Returns ``sampler(gen, size) -> (size, N)``.
    """
    out_proc = outdoor_process(scenario, geometry, size_distribution)
    in_proc = indoor_process(scenario, geometry, size_distribution)
    out_segs = path_segments(geometry, "outdoor")
    in_segs = path_segments(geometry, "indoor")
    _check_window(out_proc, out_segs)
    _check_window(in_proc, in_segs)
    ib = scenario.indoor_blockage
    heights = sensor_heights_above_floor(geometry, scenario)
    los_dy = np.broadcast_to(
        np.asarray(los_indoor_dynamic(geometry.r2, heights, ib), dtype=float),
        (geometry.n_paths,))
    los_self = los_indoor_self(ib)

    def sampler(gen: np.random.Generator, size: int) -> np.ndarray:
        out_blocked = sample_blocked_matrix(out_proc, out_segs, size, gen)
        in_blocked = sample_blocked_matrix(in_proc, in_segs, size, gen)
        dyn_blocked = gen.random((size, geometry.n_paths)) >= los_dy[None, :]
        self_blocked = gen.random((size, geometry.n_paths)) >= los_self
        return ~(out_blocked | in_blocked | dyn_blocked | self_blocked)

    return sampler


def end_to_end_blockage_curve(scenario: Scenario, distance_grid, trials: int,
                              mode: str, seed: int | None = None,
                              workers: int = 1,
                              size_distribution: str = "exponential"):
    """Mean per-path end-to-end blockage versus outdoor distance.

    `mode="independent"` evaluates the closed-form marginals (no sampling
    noise); `mode="correlated"` runs the shared-rectangle Monte Carlo.  Rows
    also carry the all-paths-simultaneously-blocked probability, where path
    correlation actually shows, as a diagnostic.
    """
    grid = np.asarray(distance_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise InvariantError("distance grid must be non-empty and ascending")
    if mode not in ("independent", "correlated"):
        raise ValueError(f"mode must be independent|correlated, got {mode!r}")
    if seed is None:
        seed = scenario.rng_seed

    rows = []
    for index, distance in enumerate(grid):
        sc = dataclasses.replace(scenario, bs_distance_R=float(distance))
        geometry = build_geometry(sc)
        n = geometry.n_paths
        if mode == "independent":
            blk = end_to_end_blockage(geometry, sc)
            mean_p = float(np.mean(blk.p_e2e))
            joint_all = float(np.prod(blk.p_e2e))
            stderr = 0.0
        else:
            sampler = survival_sampler(sc, geometry, size_distribution)

            def worker(block, size, _sampler=sampler, _index=index):
                gen = rngmod.substream(seed, rngmod.BLOCKAGE_CURVE, _index, block)
                z = _sampler(gen, size)
                blocked_per_trial = (~z).sum(axis=1).astype(np.int64)
                return (int(blocked_per_trial.sum()),
                        int((blocked_per_trial ** 2).sum()),
                        int((blocked_per_trial == z.shape[1]).sum()))

            parts = rngmod.run_blocks(worker, trials, workers)
            sum_k = sum(p[0] for p in parts)
            sum_k2 = sum(p[1] for p in parts)
            all_blocked = sum(p[2] for p in parts)
            mean_p = sum_k / (trials * n)
            var_f = max(sum_k2 / trials - (sum_k / trials) ** 2, 0.0) / n ** 2
            stderr = math.sqrt(var_f / trials)
            joint_all = all_blocked / trials
        rows.append({"distance": float(distance), "mode": mode,
                     "mean_blockage": mean_p, "stderr": stderr,
                     "joint_all_blocked": joint_all,
                     "trials": trials if mode == "correlated" else 0})
    return rows
