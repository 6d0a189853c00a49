import math

import pytest

from mmac_capacity import (DomainError, RatePair, SolverOptions,
                           assemble_region, boundary_ab, boundary_bc,
                           c1_primary_capacity, c2_unit_modulus, c_sum_max,
                           corner_b_secondary_rate, corner_points, dof_slope,
                           validate_region)
from mmac_capacity.region import _upper_concave_hull

FAST = SolverOptions(seed=2, n_starts=3, max_points=4, maxiter=120)


def test_corner_points_unit(cfg_5db):
    corners = corner_points(cfg_5db, "unit")
    csum = c_sum_max(cfg_5db)
    assert corners["A"].r1 == pytest.approx(csum) and corners["A"].r2 == 0.0
    assert corners["C"].r1 == 0.0
    assert corners["C"].r2 == pytest.approx(c2_unit_modulus(cfg_5db), abs=1e-9)
    r2b = corner_b_secondary_rate(cfg_5db)
    assert corners["B"].r2 == pytest.approx(r2b)
    assert corners["B"].r1 + corners["B"].r2 == pytest.approx(csum, abs=1e-9)


def test_boundary_ab_endpoints_and_sum(cfg_0db):
    csum = c_sum_max(cfg_0db)
    pts = boundary_ab(cfg_0db, "unit", alphas=[math.pi, math.pi / 2])
    assert len(pts) == 4
    for p in pts:
        assert p.r1 + p.r2 == pytest.approx(csum, abs=1e-3)
    # scheme I at full opening reproduces the full-primary corner
    full = [p for p in pts if "I, n=1" in p.provenance][0]
    assert full.r2 == pytest.approx(0.0, abs=1e-3)
    # scheme II at full opening reproduces the max-R2 sum-rate corner
    other = [p for p in pts if "II, n=1" in p.provenance][0]
    assert other.r2 == pytest.approx(corner_b_secondary_rate(cfg_0db), abs=1e-3)


def test_boundary_ab_filters_bad_alpha(cfg_0db):
    with pytest.warns(UserWarning):
        pts = boundary_ab(cfg_0db, "unit", alphas=[math.pi, 1.0])
    assert len(pts) == 2  # only the valid angle survives, two schemes


def test_boundary_bc_grid_validation(cfg_0db):
    with pytest.raises(DomainError):
        boundary_bc(cfg_0db, "unit", [0.7], FAST)
    with pytest.raises(DomainError):
        boundary_bc(cfg_0db, "unit", [0.0], FAST)


def test_upper_concave_hull_simple():
    # corners plus one interior point: kept iff above the corner chord
    corners = [RatePair(2.0, 0.0, "corner A"), RatePair(0.0, 1.5, "corner C")]
    kept, dropped = _upper_concave_hull(corners + [RatePair(1.0, 1.0, "mid")])
    assert any(p.provenance == "mid" for p in kept)
    assert not dropped
    kept2, dropped2 = _upper_concave_hull(corners + [RatePair(1.0, 0.5, "low")])
    assert all(p.provenance != "low" for p in kept2)
    assert any(p.provenance == "low" for p in dropped2)


@pytest.fixture(scope="module")
def small_region(cfg_m5db):
    ab = boundary_ab(cfg_m5db, "unit", alphas=[math.pi, math.pi / 2, math.pi / 4])
    bc = boundary_bc(cfg_m5db, "unit", [0.15, 0.3], FAST)
    return assemble_region(ab, bc, cfg_m5db, "unit")


def test_region_contains_corners(small_region, cfg_m5db):
    csum = c_sum_max(cfg_m5db)
    r1 = small_region.r1_values()
    r2 = small_region.r2_values()
    assert r1[0] == pytest.approx(csum, abs=1e-9) and r2[0] == 0.0
    assert r1[-1] == 0.0
    assert r2[-1] == pytest.approx(c2_unit_modulus(cfg_m5db), abs=1e-9)


def test_region_validates(small_region):
    validate_region(small_region)


def test_region_caps_hold(small_region, cfg_m5db):
    csum = c_sum_max(cfg_m5db)
    c1 = c1_primary_capacity(cfg_m5db)
    for p in small_region.points:
        assert p.r1 <= c1 + 1e-6
        assert p.r1 + p.r2 <= csum + 1e-6


def test_hull_idempotence(small_region, cfg_m5db):
    again = assemble_region(list(small_region.points), [], cfg_m5db, "unit")
    a = [(round(p.r1, 12), round(p.r2, 12)) for p in small_region.points]
    b = [(round(p.r1, 12), round(p.r2, 12)) for p in again.points]
    assert a == b


def test_secondary_rate_interpolation(small_region):
    r1 = small_region.r1_values()
    mid = 0.5 * (r1[0] + r1[-1])
    val = small_region.secondary_rate_at([mid])[0]
    assert val > 0
    assert small_region.secondary_rate_at([r1[0]])[0] == pytest.approx(0.0, abs=1e-12)


def test_assemble_rejects_capacity_violations(cfg_m5db):
    csum = c_sum_max(cfg_m5db)
    bogus = RatePair(csum, 1.0, "impossible")
    with pytest.raises(DomainError):
        assemble_region([bogus], [], cfg_m5db, "unit")


def test_dof_slope_validation(cfg_5db):
    with pytest.raises(DomainError):
        dof_slope("unit", cfg_5db, [10.0, 20.0])
    with pytest.raises(DomainError):
        dof_slope("unit", cfg_5db, [5.0, 10.0, 15.0])
    with pytest.raises(DomainError):
        dof_slope("ring", cfg_5db, [15.0, 20.0, 25.0])
