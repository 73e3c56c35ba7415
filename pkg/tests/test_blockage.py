import dataclasses
import math

import numpy as np
import pytest

from riscov.blockage import (combine_blockage, end_to_end_blockage,
                             los_indoor_dynamic, los_indoor_self,
                             los_indoor_static, los_outdoor_static,
                             poisson_count_pmf, static_crossing_coeffs,
                             uniform_blockage)
from riscov.errors import GeometryError
from riscov.scenario import IndoorBlockageParams, OutdoorBlockageParams, Scenario
from riscov.scene import build_geometry

OUTDOOR = OutdoorBlockageParams(lambda_st_out=25e-6, mean_len=10.0,
                                mean_wid=10.0, eta1=0.5)
INDOOR = IndoorBlockageParams()


def test_crossing_coefficients():
    kappa, upsilon = static_crossing_coeffs(25e-6, 10.0, 10.0)
    # hand evaluation: (2*25e-6/pi)*20 and 25e-6*100
    assert kappa == pytest.approx(2 * 25e-6 / math.pi * 20.0, rel=1e-14)
    assert upsilon == pytest.approx(2.5e-3, rel=1e-14)


def test_outdoor_static_spot_value():
    # independent arithmetic: exp(-0.5*(kappa*60 + upsilon))
    expect = math.exp(-0.5 * ((2 * 25e-6 / math.pi * 20.0) * 60.0 + 2.5e-3))
    got = float(los_outdoor_static(60.0, OUTDOOR))
    assert got == pytest.approx(expect, rel=1e-14)
    assert got == pytest.approx(0.9892588064723786, abs=1e-12)


def test_outdoor_static_zero_density_and_limits():
    empty = OutdoorBlockageParams(lambda_st_out=0.0)
    assert float(los_outdoor_static(123.0, empty)) == 1.0
    grid = np.linspace(1.0, 500.0, 40)
    vals = los_outdoor_static(grid, OUTDOOR)
    assert np.all(np.diff(vals) < 0)
    assert float(los_outdoor_static(1e9, OUTDOOR)) < 1e-12


def test_indoor_static_spot_value():
    expect = math.exp(-0.25 * ((2 * 0.1 / math.pi) * 1.0 * 10.0 + 0.1 * 0.25))
    got = float(los_indoor_static(10.0, INDOOR))
    assert got == pytest.approx(expect, rel=1e-14)
    assert got == pytest.approx(0.8475504248987429, abs=1e-12)
    assert float(los_indoor_static(20.0, INDOOR)) < got
    none = dataclasses.replace(INDOOR, lambda_st_in=0.0)
    assert float(los_indoor_static(10.0, none)) == 1.0


def test_self_blockage_pass_through():
    assert los_indoor_self(dataclasses.replace(INDOOR, self_open_fraction=1.0)) == 1.0
    assert los_indoor_self(dataclasses.replace(INDOOR, self_open_fraction=0.0)) == 0.0
    assert los_indoor_self(dataclasses.replace(INDOOR, self_open_fraction=0.75)) == 0.75


def test_dynamic_spot_value():
    # beta = (2/pi)*0.1*0.5*(0.7/1.2)*10, LoS = 1/(1+beta)
    beta = 2 / math.pi * 0.1 * 0.5 * ((2.0 - 1.3) / (2.5 - 1.3)) * 10.0
    got = float(los_indoor_dynamic(10.0, 2.5, INDOOR))
    assert got == pytest.approx(1.0 / (beta + 1.0), rel=1e-14)
    assert got == pytest.approx(0.8433973358447372, abs=1e-12)


def test_dynamic_limits_and_errors():
    off = dataclasses.replace(INDOOR, lambda_dy_in=0.0)
    assert float(los_indoor_dynamic(10.0, 2.5, off)) == 1.0
    fast = dataclasses.replace(INDOOR, unblock_rate_mu=1e12)
    assert float(los_indoor_dynamic(10.0, 2.5, fast)) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(GeometryError):
        los_indoor_dynamic(10.0, 1.3, INDOOR)
    with pytest.raises(GeometryError):
        los_indoor_dynamic(10.0, 0.9, INDOOR)


def test_dynamic_monotonicity():
    r = np.linspace(1.0, 30.0, 20)
    vals = los_indoor_dynamic(r, 2.5, INDOOR)
    assert np.all(np.diff(vals) < 0)
    denser = dataclasses.replace(INDOOR, lambda_dy_in=0.5)
    assert float(los_indoor_dynamic(10.0, 2.5, denser)) < float(
        los_indoor_dynamic(10.0, 2.5, INDOOR))


def test_combine_blockage_arithmetic():
    assert float(combine_blockage(0.2, 0.3)) == pytest.approx(0.44, abs=1e-15)
    assert float(combine_blockage(1.0, 0.123)) == 1.0
    assert float(combine_blockage(0.0, 0.0)) == 0.0


def test_end_to_end_zero_densities_gives_zero_blockage():
    sc = dataclasses.replace(
        Scenario(),
        outdoor_blockage=OutdoorBlockageParams(lambda_st_out=0.0),
        indoor_blockage=IndoorBlockageParams(lambda_st_in=0.0, lambda_dy_in=0.0,
                                             self_open_fraction=1.0))
    geo = build_geometry(sc)
    blk = end_to_end_blockage(geo, sc)
    np.testing.assert_array_equal(blk.p_e2e, np.zeros(sc.n_sensors))


def test_end_to_end_fields_consistent():
    sc = Scenario()
    blk = end_to_end_blockage(build_geometry(sc), sc)
    for arr in (blk.p_out, blk.p_in, blk.p_e2e, blk.p_self, blk.p_st_in, blk.p_dy_in):
        assert np.all((arr >= 0) & (arr <= 1))
    np.testing.assert_allclose(blk.p_e2e, combine_blockage(blk.p_out, blk.p_in),
                               rtol=1e-14)
    # blockage dominance
    assert np.all(blk.p_e2e >= np.maximum(blk.p_out, blk.p_in) - 1e-15)
    # indoor breakdown recombines
    recombined = 1.0 - (1.0 - blk.p_self) * (1.0 - blk.p_st_in) * (1.0 - blk.p_dy_in)
    np.testing.assert_allclose(blk.p_in, recombined, rtol=1e-12)


def test_zeroing_any_density_never_increases_blockage():
    sc = Scenario()
    base = end_to_end_blockage(build_geometry(sc), sc).p_e2e
    for variant in (
        dataclasses.replace(sc, outdoor_blockage=dataclasses.replace(
            sc.outdoor_blockage, lambda_st_out=0.0)),
        dataclasses.replace(sc, indoor_blockage=dataclasses.replace(
            sc.indoor_blockage, lambda_st_in=0.0)),
        dataclasses.replace(sc, indoor_blockage=dataclasses.replace(
            sc.indoor_blockage, lambda_dy_in=0.0)),
    ):
        reduced = end_to_end_blockage(build_geometry(variant), variant).p_e2e
        assert np.all(reduced <= base + 1e-15)


def test_uniform_blockage_helper():
    blk = uniform_blockage(5, 0.3)
    np.testing.assert_allclose(blk.p_e2e, 0.3)
    with pytest.raises(ValueError):
        uniform_blockage(5, 1.5)


def test_poisson_count_pmf():
    assert float(poisson_count_pmf(0.0, 100.0, 0)) == 1.0
    assert float(poisson_count_pmf(0.0, 100.0, 3)) == 0.0
    assert float(poisson_count_pmf(0.02, 100.0, 0)) == pytest.approx(
        math.exp(-2.0), rel=1e-12)
    # normalization: truncate where the tail is negligible
    counts = np.arange(0, 60)
    total = float(np.sum(poisson_count_pmf(0.02, 100.0, counts)))
    assert total == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        poisson_count_pmf(0.02, 100.0, -1)
