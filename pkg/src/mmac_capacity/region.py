"""Assembly of the full rate-region boundary.

The maximum-sum-rate segment comes from the joint phase schemes, the
remaining segment from weighted-rate optimization of discrete amplitude
laws, and the closure from two-point time sharing (straight segments of the
upper concave envelope).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .channel import ChannelConfig, c_sum_max, c1_primary_capacity
from .distributions import BoundaryWeights
from .errors import DomainError
from .mass_optimization import (BoundaryPointResult, SolverOptions,
                                optimize_boundary_point,
                                optimize_secondary_disk)
from .mutual_information import (PhaseScheme, RatePair, c2_unit_modulus,
                                 corner_b_secondary_rate, scheme_rate_pair)
from .numerics import DEFAULT_SPEC, QuadratureSpec

HULL_TOL = 1e-9


@dataclass(frozen=True)
class RegionBoundary:
    """Upper-right frontier of achievable (R1, R2) pairs, ordered by
    decreasing primary rate, anchored at (C_sum, 0) and (0, C2)."""

    constraint: str
    points: Tuple[RatePair, ...]
    cfg: ChannelConfig
    tolerances: dict = field(default_factory=dict)
    dropped: Tuple[RatePair, ...] = ()
    metadata: dict = field(default_factory=dict)

    def r1_values(self) -> np.ndarray:
        return np.array([p.r1 for p in self.points])

    def r2_values(self) -> np.ndarray:
        return np.array([p.r2 for p in self.points])

    def secondary_rate_at(self, r1) -> np.ndarray:
        """Piecewise-linear frontier height at the given primary rates
        (0 outside the achievable primary range)."""
        r1 = np.atleast_1d(np.asarray(r1, dtype=float))
        xs = self.r1_values()[::-1]  # increasing
        ys = self.r2_values()[::-1]
        return np.interp(r1, xs, ys, left=ys[0], right=0.0)


def corner_points(cfg: ChannelConfig, constraint: str,
                  spec: QuadratureSpec = DEFAULT_SPEC,
                  c2_bits: Optional[float] = None) -> dict:
    """The three corners: full-primary (A), max secondary at max sum rate (B),
    full-secondary (C).  c2_bits overrides the secondary capacity (used to
    avoid re-optimizing the disk case)."""
    csum = c_sum_max(cfg)
    r2b = corner_b_secondary_rate(cfg, spec)
    if c2_bits is None:
        if constraint == "unit":
            c2_bits = c2_unit_modulus(cfg, spec)
        elif constraint == "disk":
            _, c2_bits = optimize_secondary_disk(cfg, spec)
        else:
            raise DomainError("constraint must be 'unit' or 'disk'")
    return {
        "A": RatePair(csum, 0.0, provenance="corner A"),
        "B": RatePair(csum - r2b, r2b, provenance="corner B"),
        "C": RatePair(0.0, c2_bits, provenance="corner C"),
    }


def boundary_ab(cfg: ChannelConfig, constraint: str,
                alphas: Optional[Sequence[float]] = None,
                spec: QuadratureSpec = DEFAULT_SPEC) -> list:
    """Maximum-sum-rate rate pairs from both phase schemes (primary decoded
    first) over the admissible opening half-angles.

    Constant-modulus operation is forced at the maximum sum rate, so the
    segment is shared by both constraints; `constraint` only labels output.
    Inadmissible angles (pi/alpha not a positive integer) are skipped with a
    warning.
    """
    if alphas is None:
        alphas = [math.pi / n for n in range(1, 9)]
    points = []
    for alpha in alphas:
        try:
            schemes = [PhaseScheme.from_alpha("I", alpha),
                       PhaseScheme.from_alpha("II", alpha)]
        except Exception as exc:  # invalid alpha: filtered, not fatal
            warnings.warn(f"skipping alpha={alpha!r}: {exc}")
            continue
        for scheme in schemes:
            points.append(scheme_rate_pair(scheme, "x1", cfg, spec))
    return points


def _solve_one(args):
    mu1, constraint, cfg, solver_opts, spec = args
    return optimize_boundary_point(BoundaryWeights(mu1), constraint, cfg,
                                   solver_opts, spec)


def boundary_bc(cfg: ChannelConfig, constraint: str,
                mu1_grid: Sequence[float],
                solver_opts: SolverOptions = SolverOptions(),
                spec: QuadratureSpec = DEFAULT_SPEC,
                jobs: int = 1) -> list:
    """Weighted-rate boundary points, one per mu1; non-certified points are
    flagged in their result and still emitted."""
    grid = [float(m) for m in mu1_grid]
    if any(not (0.0 < m < 0.5) for m in grid):
        raise DomainError("mu1 grid must lie inside (0, 0.5)")
    tasks = [(m, constraint, cfg, solver_opts, spec) for m in grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_solve_one, tasks))
    else:
        results = [_solve_one(t) for t in tasks]
    return results


def _upper_concave_hull(points: Sequence[RatePair]) -> Tuple[list, list]:
    """Upper concave envelope over primary rate; returns (kept, dropped).

    Straight segments between kept points are exactly the two-point
    time-sharing closure.
    """
    pts = sorted(points, key=lambda p: (p.r1, -p.r2))
    # collapse duplicate r1 (keep best r2)
    uniq = []
    for p in pts:
        if uniq and abs(p.r1 - uniq[-1].r1) < 1e-12:
            if p.r2 > uniq[-1].r2:
                uniq[-1] = p
        else:
            uniq.append(p)
    hull = []
    for p in uniq:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = (hull[-2].r1, hull[-2].r2), (hull[-1].r1, hull[-1].r2)
            cross = (x2 - x1) * (p.r2 - y1) - (p.r1 - x1) * (y2 - y1)
            if cross >= -HULL_TOL:  # middle point on/below chord: drop it
                hull.pop()
            else:
                break
        hull.append(p)
    kept_keys = {id(p) for p in hull}
    dropped = [p for p in uniq if id(p) not in kept_keys]
    return hull, dropped


def assemble_region(ab_points: Sequence[RatePair],
                    bc_points: Sequence,
                    cfg: ChannelConfig, constraint: str,
                    spec: QuadratureSpec = DEFAULT_SPEC,
                    c2_bits: Optional[float] = None,
                    metadata: Optional[dict] = None) -> RegionBoundary:
    """Convexify scheme points, optimized points and the three corners into
    the region frontier.

    bc_points may hold RatePair or BoundaryPointResult entries.  Dominated
    points are dropped from the frontier but retained for diagnostics.
    """
    corners = corner_points(cfg, constraint, spec, c2_bits=c2_bits)
    csum = c_sum_max(cfg)
    cand = [corners["A"], corners["B"], corners["C"]]
    cand.extend(ab_points)
    for item in bc_points:
        pair = item.rate_pair if isinstance(item, BoundaryPointResult) else item
        cand.append(pair)
    sane = []
    for p in cand:
        if p.r1 < -1e-9 or p.r2 < -1e-9 or p.r1 + p.r2 > csum + 1e-6:
            raise DomainError(f"rate pair {p} violates the sum-rate cap")
        sane.append(RatePair(max(p.r1, 0.0), max(p.r2, 0.0), p.provenance))
    hull, dropped = _upper_concave_hull(sane)
    hull_sorted = tuple(sorted(hull, key=lambda p: -p.r1))
    tolerances = {"hull_tol": HULL_TOL, "sum_rate_slack": 1e-6}
    meta = dict(metadata or {})
    meta.setdefault("n_candidates", len(sane))
    return RegionBoundary(constraint=constraint, points=hull_sorted, cfg=cfg,
                          tolerances=tolerances, dropped=tuple(dropped),
                          metadata=meta)


def validate_region(boundary: RegionBoundary) -> None:
    """Raise DomainError unless the frontier is a concave, nonincreasing
    upper-right chain whose points respect the single-user and sum-rate caps."""
    cfg = boundary.cfg
    csum = c_sum_max(cfg)
    c1 = c1_primary_capacity(cfg)
    pts = boundary.points
    if len(pts) < 2:
        raise DomainError("boundary needs at least the two axis corners")
    for p in pts:
        if p.r1 > c1 + 1e-6 or p.r1 + p.r2 > csum + 1e-6:
            raise DomainError(f"boundary point {p} violates a capacity cap")
        if p.r1 < -1e-9 or p.r2 < -1e-9:
            raise DomainError(f"boundary point {p} has a negative rate")
    r1 = boundary.r1_values()
    r2 = boundary.r2_values()
    if np.any(np.diff(r1) > 1e-12) or np.any(np.diff(r2) < -1e-12):
        raise DomainError("frontier must decrease in r1 and increase in r2")
    for i in range(1, len(pts) - 1):
        x0, y0 = r1[i - 1], r2[i - 1]
        x1, y1 = r1[i], r2[i]
        x2, y2 = r1[i + 1], r2[i + 1]
        if abs(x2 - x0) < 1e-15:
            continue
        chord = y0 + (y2 - y0) * (x1 - x0) / (x2 - x0)
        if y1 < chord - 1e-6:
            raise DomainError("frontier is not concave")


def dof_slope(constraint: str, cfg_base: ChannelConfig,
              snr_db_list: Sequence[float],
              spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Least-squares slope of the secondary capacity (bits) against log2 of
    the transmit power over the given SNR points."""
    snrs = [float(s) for s in snr_db_list]
    if len(snrs) < 3 or any(b <= a for a, b in zip(snrs, snrs[1:])):
        raise DomainError("need at least 3 strictly increasing SNR points")
    if max(snrs) < 25.0:
        raise DomainError("top SNR point must be at least 25 dB")
    rates = []
    log2_p = []
    for snr_db in snrs:
        cfg = ChannelConfig(element_gains=cfg_base.element_gains,
                            noise_power=cfg_base.noise_power,
                            power_budget=cfg_base.noise_power * 10.0 ** (snr_db / 10.0))
        if constraint == "unit":
            rates.append(c2_unit_modulus(cfg, spec))
        elif constraint == "disk":
            rates.append(optimize_secondary_disk(cfg, spec)[1])
        else:
            raise DomainError("constraint must be 'unit' or 'disk'")
        log2_p.append(math.log2(cfg.power_budget))
    x = np.asarray(log2_p)
    y = np.asarray(rates)
    design = np.vstack([x, np.ones_like(x)]).T
    slope, _ = np.linalg.lstsq(design, y, rcond=None)[0]
    return float(slope)
