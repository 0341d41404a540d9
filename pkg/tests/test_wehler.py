"""Surface model: canonicalization, involutions, orbits, point search."""

import math

import pytest

from k3heights import (
    ProjPoint,
    SurfacePoint,
    WehlerSurface,
    basis_height,
    origin_point,
    random_surface,
)
from k3heights.errors import DegenerateFiber, InputError
from k3heights.wehler import guard_bits_default

# same 13-term form as the kernel tests; the constructor negates it
# globally because the first flat coefficient (-4 on x0^2 y0^2 z0^2,
# flat index 0 is (a,b,c)=(0,0,0)) is negative
D = {
    (2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1, (1, 1, 0): 1, (0, 1, 1): -1,
    (1, 0, 1): 2, (2, 1, 0): -1, (1, 2, 0): 1, (0, 2, 1): 1, (1, 1, 1): 1,
    (0, 1, 0): -2, (1, 0, 0): 3, (0, 0, 0): -4,
}


def nested(d, scale=1):
    return [
        [[scale * d.get((a, b, c), 0) for c in range(3)] for b in range(3)]
        for a in range(3)
    ]


@pytest.fixture(scope="module")
def S():
    return WehlerSurface(nested(D))


P = SurfacePoint(ProjPoint(1, 2), ProjPoint(1, 1), ProjPoint(1, 1))


def test_projpoint_normalization():
    assert (ProjPoint(4, 6).a, ProjPoint(4, 6).b) == (2, 3)
    assert (ProjPoint(4, -6).a, ProjPoint(4, -6).b) == (-2, 3)
    assert (ProjPoint(-5, 0).a, ProjPoint(-5, 0).b) == (1, 0)
    with pytest.raises(ValueError):
        ProjPoint(0, 0)
    assert ProjPoint(3, -7).weil_height == pytest.approx(math.log(7.0))


def test_point_json_round_trip():
    q = SurfacePoint(ProjPoint(-3, 5), ProjPoint(1, 0), ProjPoint(0, 1))
    assert SurfacePoint.from_json(q.to_json()) == q
    with pytest.raises(InputError):
        SurfacePoint.from_json({"x": ["1", "2"], "y": ["1", "1"]})
    with pytest.raises(InputError):
        ProjPoint.from_json(["1", "2", "3"])


def test_sign_and_content_canonicalization(S):
    assert S.coeff(0, 0, 0) == 4
    assert S.coeff(2, 0, 0) == -1
    # global sign and integer content do not change the surface
    assert WehlerSurface(nested(D, -1)).hash_hex == S.hash_hex
    assert WehlerSurface(nested(D, 3)).hash_hex == S.hash_hex
    with pytest.raises(InputError):
        WehlerSurface(nested({}))


def test_surface_json_round_trip(S):
    assert WehlerSurface.from_json(S.to_json()).hash_hex == S.hash_hex
    with pytest.raises(InputError):
        WehlerSurface.from_json({})


def test_contains(S):
    assert S.contains(P)
    off = SurfacePoint(ProjPoint(1, 1), ProjPoint(1, 1), ProjPoint(1, 1))
    assert not S.contains(off)
    with pytest.raises(InputError):
        S.require_contains(off)


def test_fiber_coefficients_one_based(S):
    # wrapper values are the kernel's, negated by the canonicalization
    assert S.fiber_coefficients(1, P) == (0, -8, 4)
    assert S.fiber_coefficients(2, P) == (-10, 9, 1)
    assert S.fiber_coefficients(3, P) == (-4, -6, 10)
    with pytest.raises(InputError):
        S.fiber_coefficients(0, P)


def test_involutions_explicit(S):
    s3 = S.involution(3, P)
    assert s3 == SurfacePoint(ProjPoint(1, 2), ProjPoint(1, 1), ProjPoint(-5, 2))
    s1 = S.involution(1, P)
    assert s1 == SurfacePoint(ProjPoint(1, 0), ProjPoint(1, 1), ProjPoint(1, 1))
    s2 = S.involution(2, P)
    assert s2 == SurfacePoint(ProjPoint(1, 2), ProjPoint(-1, 10), ProjPoint(1, 1))
    for i, q in ((1, s1), (2, s2), (3, s3)):
        assert S.involution(i, q) == P


def test_degenerate_fiber_raises(S):
    # the z-fiber over ([1:0], [1:0]) vanishes identically on this surface
    q = SurfacePoint(ProjPoint(1, 0), ProjPoint(1, 0), ProjPoint(1, 1))
    assert S.contains(q)
    assert S.fiber_coefficients(3, q) == (0, 0, 0)
    with pytest.raises(DegenerateFiber):
        S.involution(3, q)


def test_apply_word_is_left_to_right(S):
    assert S.apply_word((3, 2), P) == S.involution(2, S.involution(3, P))
    assert S.apply_word((), P) == P


def test_orbit_detects_period(surface, old_point):
    q = surface.involution(2, old_point)
    res = surface.orbit((1, 3), q)
    assert res.reason == "periodic"
    assert res.period == (0, 1)
    assert not res.truncated
    assert res.points[0] == q
    data = res.to_json()
    assert data["period"] == [0, 1] and data["reason"] == "periodic"


def test_orbit_guard_truncation(surface, point):
    res = surface.orbit((1, 2, 3) * 8, point, guard_bits=64)
    assert res.truncated and res.reason == "guard"
    assert len(res.points) < 25
    with pytest.raises(InputError):
        surface.apply_word((1, 2, 3) * 8, point)


def test_orbit_completed(surface, point):
    res = surface.orbit((1, 2, 3), point)
    assert res.reason == "completed" and not res.truncated
    assert len(res.points) == 4
    assert res.points[-1] == surface.apply_word((1, 2, 3), point)


def test_random_surface_frozen(surface):
    assert surface.hash_hex == (
        "3e450e347f5b9218b30c4b0b3f9edd5d6e42f7691eeb9c59c1b5707c199af2e3"
    )
    assert random_surface(1).hash_hex == surface.hash_hex
    assert random_surface(2).hash_hex != surface.hash_hex
    nonzero = sum(
        1
        for a in range(3)
        for b in range(3)
        for c in range(3)
        if surface.coeff(a, b, c) != 0
    )
    assert nonzero == 16


def test_origin_pinned(surface):
    p0 = origin_point()
    assert surface.contains(p0)
    for i in (1, 2, 3):
        assert surface.involution(i, p0) == p0


def test_find_points(surface, point):
    pts = surface.find_points(4)
    assert len(pts) == 72
    assert point in pts
    assert all(surface.contains(p) for p in pts)
    assert len(surface.find_points(4, limit=10)) == 10


def test_find_fixed_points(surface):
    counts = []
    for i in (1, 2, 3):
        fixed = surface.find_fixed_points(i, 6)
        counts.append(len(fixed))
        for p in fixed:
            assert surface.involution(i, p) == p
    assert counts == [6, 1, 2]


def test_basis_height_values(point):
    assert basis_height(point) == math.log(2.0)
    assert basis_height(origin_point()) == 0.0
    assert basis_height(point, cls=(1, 1, 2)) == pytest.approx(2.0 * math.log(2.0))


def test_guard_bits_env(monkeypatch):
    assert guard_bits_default() == 200_000
    monkeypatch.setenv("K3H_GUARD_BITS", "12345")
    assert guard_bits_default() == 12345
    monkeypatch.setenv("K3H_GUARD_BITS", "zero")
    with pytest.raises(InputError):
        guard_bits_default()
