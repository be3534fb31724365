import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import coagkit as ck
from coagkit.errors import DomainError, GridError


def test_moment_exponential_fine_grid():
    grid = ck.SizeGrid.geometric(1e-4, 1e3, bins=2048)
    dist = ck.init_distribution(grid, "exponential", mean=1.0)
    assert dist.moment(1.0) == pytest.approx(1.0, abs=1e-7)
    assert dist.moment(2.0) == pytest.approx(2.0, rel=1e-4)


def test_moment_monodisperse():
    grid = ck.SizeGrid.discrete(100)
    dist = ck.init_distribution(grid, "monodisperse", size=1)
    assert dist.moment(0.0) == 1.0
    assert dist.moment(1.0) == 1.0
    d2 = ck.init_distribution(ck.SizeGrid.discrete(10), "monodisperse", size=2)
    assert d2.density[1] == 1.0 and d2.moment(1.0) == 2.0


def test_moment_range_guard():
    grid = ck.SizeGrid.discrete(4)
    dist = ck.init_distribution(grid, "monodisperse", size=1)
    with pytest.raises(DomainError):
        dist.moment(3.5)


def test_init_exponential_sectional_m1():
    # >= 512 geometric bins over [1e-3, 1e3]: M1 within 1e-6 of the mean
    grid = ck.SizeGrid.geometric(1e-3, 1e3, bins=512)
    dist = ck.init_distribution(grid, "exponential", mean=1.0)
    assert abs(dist.moment(1.0) - 1.0) <= 1e-6


def test_init_monodisperse_off_grid_errors():
    grid = ck.SizeGrid.geometric(1.0, 100.0, bins=16)
    with pytest.raises(GridError):
        ck.init_distribution(grid, "monodisperse", size=3.14159)


def test_init_tabulated_and_negative_guard():
    grid = ck.SizeGrid.discrete(4)
    d = ck.init_distribution(grid, "tabulated", density=[1.0, 0.5, 0.0, 0.0])
    assert d.moment(0.0) == 1.5
    with pytest.raises(DomainError):
        ck.init_distribution(grid, "tabulated", density=[1.0, -0.5, 0.0, 0.0])


def test_regrid_identity_bit_identical():
    grid = ck.SizeGrid.geometric(0.1, 10, bins=32)
    rng = np.random.default_rng(0)
    d = ck.SizeDistribution(grid, rng.random(32))
    out, info = ck.regrid(d, grid)
    assert np.array_equal(out.density, d.density)
    assert info == {"underflow_mass": 0.0, "overflow_mass": 0.0}


def test_regrid_two_point_example():
    d = ck.init_distribution(ck.SizeGrid.discrete(8), "monodisperse", size=3)
    target = ck.SizeGrid.sectional(edges=[1.5, 3.0, 5.0], pivots=[2.0, 4.0])
    out, _ = ck.regrid(d, target)
    np.testing.assert_allclose(out.number, [0.5, 0.5])
    assert out.moment(0.0) == pytest.approx(1.0)
    assert out.moment(1.0) == pytest.approx(3.0)


def test_regrid_round_trip_interior_support():
    rng = np.random.default_rng(3)
    coarse = ck.SizeGrid.geometric(0.1, 100, bins=48)
    fine = ck.SizeGrid.geometric(0.1, 100, bins=192)
    density = rng.random(48)
    density[:2] = density[-2:] = 0.0
    d0 = ck.SizeDistribution(coarse, density)
    d1, _ = ck.regrid(d0, fine)
    d2, _ = ck.regrid(d1, coarse)
    assert abs(d2.moment(0.0) - d0.moment(0.0)) <= 1e-12 * d0.moment(0.0)
    assert abs(d2.moment(1.0) - d0.moment(1.0)) <= 1e-12 * d0.moment(1.0)


def test_regrid_mass_accounting():
    rng = np.random.default_rng(4)
    src = ck.SizeGrid.geometric(0.01, 1e3, bins=64)
    d = ck.SizeDistribution(src, rng.random(64))
    target = ck.SizeGrid.geometric(1.0, 10.0, bins=8)
    out, info = ck.regrid(d, target)
    total = out.moment(1.0) + info["underflow_mass"] + info["overflow_mass"]
    assert total == pytest.approx(d.moment(1.0), rel=1e-12)


def test_regrid_degenerate_target():
    d = ck.init_distribution(ck.SizeGrid.discrete(4), "monodisperse", size=1)
    with pytest.raises(GridError):
        ck.SizeGrid.sectional(edges=[2.0, 1.0])


def test_moment_linearity_and_monotonicity():
    grid = ck.SizeGrid.geometric(0.1, 10, bins=24)
    rng = np.random.default_rng(8)
    a, b = rng.random(24), rng.random(24)
    da, db = ck.SizeDistribution(grid, a), ck.SizeDistribution(grid, b)
    dsum = ck.SizeDistribution(grid, a + 2 * b)
    for mu in (0.0, 0.5, 1.0, 2.0):
        assert dsum.moment(mu) == pytest.approx(da.moment(mu) + 2 * db.moment(mu))
    bigger = ck.SizeDistribution(grid, a + 0.1)
    assert bigger.moment(1.0) > da.moment(1.0)


@given(seed=st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_moment_holder_interpolation(seed):
    # M_mu2 <= M_mu1^theta * M_mu3^(1-theta) for mu1 < mu2 < mu3
    rng = np.random.default_rng(seed)
    grid = ck.SizeGrid.geometric(0.01, 100, bins=40)
    d = ck.SizeDistribution(grid, rng.random(40))
    mus = np.sort(rng.uniform(-0.5, 2.5, 3))
    m1, m2, m3 = (d.moment(mu) for mu in mus)
    theta = (mus[2] - mus[1]) / (mus[2] - mus[0])
    assert m2 <= m1**theta * m3 ** (1 - theta) * (1 + 1e-9)


def test_moment_series_validation():
    with pytest.raises(DomainError):
        ck.MomentSeries(np.array([0.0, 0.0, 1.0]), {0.0: np.zeros(3)})
    with pytest.raises(DomainError):
        ck.MomentSeries(np.array([0.0, 1.0]), {0.0: np.zeros(2)},
                        np.array([1.0, 0.0]))


def test_snapshot_serialization_round_trip():
    grid = ck.SizeGrid.geometric(0.5, 8.0, bins=6)
    d = ck.SizeDistribution(grid, np.linspace(0.1, 0.6, 6), 1.5)
    obj = d.to_json_obj()
    back = ck.SizeDistribution.from_json_obj(obj)
    assert back.grid == d.grid and back.time == d.time
    np.testing.assert_array_equal(back.density, d.density)
    csv = d.to_csv()
    assert csv.splitlines()[0] == "pivot,width,density"
    assert len(csv.splitlines()) == 7
