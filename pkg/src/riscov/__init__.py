"""Coverage analysis of a sensor-wall assisted outdoor-to-indoor mmWave link."""

from .baselines import BaselineConfig, coverage_penetration, coverage_relay
from .blockage import (LinkBlockage, combine_blockage, end_to_end_blockage,
                       los_indoor_dynamic, los_indoor_self, los_indoor_static,
                       los_outdoor_static, poisson_count_pmf, uniform_blockage)
from .channel import (LinkGains, assemble_gains, db_to_linear, draw_fading_powers,
                      freespace_intercept, linear_to_db, pathloss, snr_realization)
from .coverage import (CoverageCurve, GaussianMoments, coverage_approx2,
                       coverage_chernoff, coverage_gaussian, coverage_monte_carlo,
                       moments, pmf_dft, pmf_dft_all, pmf_enumeration, q_function,
                       snr_samples)
from .rectangles import (BlockageSample, JointBlockageStats, RectangleProcess,
                         end_to_end_blockage_curve, estimate_joint_stats,
                         sample_blockage_realization, survival_sampler)
from .scenario import (IndoorBlockageParams, OutdoorBlockageParams, Scenario,
                       load_scenario, scenario_from_text, scenario_to_text,
                       validate)
from .scene import LinkGeometry, beam_gain, build_geometry

__version__ = "0.1.0"
