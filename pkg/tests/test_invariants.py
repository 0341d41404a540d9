"""Quadrature invariants and star-set plumbing, mostly on synthetic grids."""

import io
import math

import pytest

from k3heights import (
    HeightValue,
    invariance_report,
    radius_jump_profile,
    star_set,
    star_volume,
    total_height,
    wehler_lattice,
    write_star_csv,
)
from k3heights.errors import InputError
from k3heights.invariants import StarSample

TWO_PI = 2.0 * math.pi


def const_height(value, err=0.0, converged=True):
    def fn(theta, alpha):
        return HeightValue(value, err, 1, converged)

    return fn


def sample(theta, radius, converged=True):
    h = 1.0 / radius if radius not in (0.0, math.inf) else 0.0
    return StarSample(theta, (1.0, 0.0, 0.0), HeightValue(h, 0.0, 1, converged), radius)


def test_star_set_minimum_grid(surface, point):
    with pytest.raises(InputError):
        star_set(surface, point, n_samples=8, height_fn=const_height(1.0))


def test_star_samples_are_mass_normalized(surface, point):
    lat = wehler_lattice()
    samples = star_set(surface, point, 16, height_fn=const_height(2.0))
    assert len(samples) == 16
    root12 = math.sqrt(12.0)
    for s in samples:
        assert lat.pair_float((1.0, 1.0, 1.0), s.alpha) == pytest.approx(
            root12, abs=1e-9
        )
        assert s.radius == 0.5


@pytest.mark.parametrize("n", [16, 17])
def test_total_height_constant_grid(surface, point, n):
    res = total_height(surface, point, n, height_fn=const_height(1.0))
    assert res.value == pytest.approx(TWO_PI, abs=1e-12)
    assert res.error < 1e-12
    assert res.n_samples == n and res.n_nonconverged == 0 and not res.flagged


def test_total_height_degree_one_homogeneity(surface, point):
    res = total_height(surface, point, 16, height_fn=const_height(3.0))
    assert res.value == pytest.approx(TWO_PI / 3.0, abs=1e-12)


def test_quadrature_exact_on_trig_polynomial(surface, point):
    def fn(theta, alpha):
        return HeightValue(1.0 / (2.0 + math.cos(theta)), 0.0, 1, True)

    tot = total_height(surface, point, 32, height_fn=fn)
    vol = star_volume(surface, point, 32, height_fn=fn)
    assert tot.value == pytest.approx(4.0 * math.pi, abs=1e-12)
    assert vol.value == pytest.approx(4.0 * math.pi, abs=1e-12)
    assert tot.error < 1e-12 and vol.error < 1e-12


def test_star_volume_odd_grid_panels(surface, point):
    vol = star_volume(surface, point, 17, height_fn=const_height(1.0))
    assert vol.value == pytest.approx(TWO_PI, abs=1e-12)


def test_height_errors_propagate(surface, point):
    res = total_height(surface, point, 16, height_fn=const_height(2.0, err=1e-4))
    # d(1/h) = dh / h^2 summed with the trapezoid weights
    assert res.error == pytest.approx(1e-4 / 4.0 * TWO_PI, rel=1e-12)


def test_nonconverged_census_flags(surface, point):
    def fn(theta, alpha):
        return HeightValue(1.0, 0.0, 1, theta > 1.0)

    res = total_height(surface, point, 16, height_fn=fn)
    assert res.n_nonconverged == 3
    assert res.flagged


def test_vanishing_height_gives_infinite_total(surface, point):
    def fn(theta, alpha):
        return HeightValue(0.0 if theta == 0.0 else 1.0, 0.0, 1, True)

    res = total_height(surface, point, 16, height_fn=fn)
    assert res.value == math.inf and res.error == math.inf and res.flagged
    vol = star_volume(surface, point, 16, height_fn=fn)
    assert vol.value == math.inf


def test_invariance_exact_for_injected_constant(surface, point):
    rep = invariance_report(surface, point, 1, n_samples=16,
                            height_fn=const_height(1.0))
    assert len(rep.rows) == 4
    assert rep.rows[0].word == ()
    assert rep.max_relative_deviation == 0.0
    data = rep.to_json()
    assert len(data["rows"]) == 4
    with pytest.raises(InputError):
        invariance_report(surface, point, 5, n_samples=16,
                          height_fn=const_height(1.0))


def test_radius_jump_profile_rules():
    samples = [
        sample(0.0, 1.0),
        sample(1.0, 2.0),
        sample(2.0, 10.0, converged=False),
        sample(3.0, 1.5),
    ]
    mx, med = radius_jump_profile(samples)
    # only the (0,1) and wraparound (3,0) pairs are converged-and-finite
    assert mx == pytest.approx(1.0)
    assert med == pytest.approx(0.75)
    mx, med = radius_jump_profile([sample(0.0, 1.0, converged=False)] * 4)
    assert math.isnan(mx) and math.isnan(med)
    samples = [sample(0.0, 1.0), sample(1.0, math.inf), sample(2.0, 1.0)]
    mx, med = radius_jump_profile(samples)
    # pairs touching the infinite radius are excluded
    assert mx == pytest.approx(0.0)


def test_write_star_csv_format(tmp_path):
    samples = [
        StarSample(0.0, (0.5, 0.25, -0.125), HeightValue(2.0, 1e-05, 3, True), 0.5),
        StarSample(0.5, (1.0, 0.0, 0.0), HeightValue(0.0, math.inf, 0, False),
                   math.inf),
    ]
    buf = io.StringIO()
    write_star_csv(samples, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "theta,alpha0,alpha1,alpha2,height,err,converged,radius"
    assert lines[1] == "0,0.5,0.25,-0.125,2,1.0000000000000001e-05,true,0.5"
    assert lines[2] == "0.5,1,0,0,0,inf,false,inf"
    # path output is byte-identical to the stream output
    out = tmp_path / "star.csv"
    write_star_csv(samples, out)
    assert out.read_bytes().decode("ascii") == buf.getvalue()
    write_star_csv(samples, str(out))
    assert out.read_bytes().decode("ascii") == buf.getvalue()


def test_workers_do_not_change_results(surface, point):
    one = star_set(surface, point, 16, tol=1e-2, max_letters=30, workers=1)
    two = star_set(surface, point, 16, tol=1e-2, max_letters=30, workers=2)
    assert [s.height.value for s in one] == [s.height.value for s in two]
    assert [s.radius for s in one] == [s.radius for s in two]
