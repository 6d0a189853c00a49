"""Optimization of discrete amplitude laws for weighted-rate boundary points,
plus numerical verification of the first-order optimality conditions.

The weighted objective mu1*I(X1;Y) + mu2*I(X2;Y|X1) is maximized over the
number, locations and probabilities of amplitude mass points (and, under the
unit-disk constraint, of secondary reflection circles).  The inner problem
for fixed support size is solved by projected ascent on an unconstrained
parameterization (softmax probabilities, box-clipped sorted locations,
exact projection onto the power ball) with central-difference gradients and
deterministic multi-starts; the support is then escalated until the
objective stalls and the optimality conditions certify, or a cap is hit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .channel import ChannelConfig, LN2
from .distributions import (AveragePower, BoundaryWeights,
                            MassPointDistribution, UnitDisk)
from .errors import DomainError
from .mutual_information import RatePair, rates_discrete_amplitude
from .numerics import DEFAULT_SPEC, QuadratureSpec, log_bessel_i0, radial_nodes


@dataclass(frozen=True)
class SolverOptions:
    seed: int = 0
    n_starts: int = 8
    max_points: int = 16          # amplitude support cap
    max_circles: int = 8          # secondary circle cap (disk constraint)
    gain_tol: float = 1e-4        # nats; escalation stop threshold
    kkt_tol: float = 1e-3         # nats; optimality-condition gate
    futility_rounds: int = 2      # consecutive stalled rounds before giving up
    maxiter: int = 300
    merge_tol: float = 1e-3       # relative to sqrt(P) (amplitudes) or 1 (radii)
    prune_tol: float = 1e-9       # drop support points below this probability
    amplitude_cap_factor: float = 4.0  # numeric box bound, in units of sqrt(P)

    def __post_init__(self):
        if self.n_starts < 1 or self.max_points < 1 or self.max_circles < 1:
            raise DomainError("n_starts, max_points, max_circles must be >= 1")


@dataclass(frozen=True)
class KktReport:
    """Residuals of the weighted-rate optimality conditions on a candidate
    amplitude law.  Reported, never asserted; callers pick thresholds.

    The inequality says the marginal cross-entropy functional must not
    exceed t0 - (mu2/mu1 - 1) H(Y|A=a) + (lambda/mu1) a^2 anywhere on the
    grid; equality must hold on the support.  max_inequality_violation is
    the worst positive excess on the grid, max_equality_residual the worst
    absolute mismatch at the support points.
    """

    lagrange_multiplier: float
    t0: float
    max_inequality_violation: float
    max_equality_residual: float
    grid_max: float
    grid_n: int
    grid_description: str

    def as_dict(self) -> dict:
        return {
            "lagrange_multiplier": self.lagrange_multiplier,
            "t0": self.t0,
            "max_inequality_violation": self.max_inequality_violation,
            "max_equality_residual": self.max_equality_residual,
            "grid_max": self.grid_max,
            "grid_n": self.grid_n,
            "grid_description": self.grid_description,
        }


@dataclass(frozen=True)
class BoundaryPointResult:
    weights: BoundaryWeights
    constraint: str                      # "unit" | "disk"
    dist_a: MassPointDistribution
    dist_x2: Optional[MassPointDistribution]
    rate_pair: RatePair
    kkt: KktReport
    objective_nats: float
    converged: bool
    status: str                          # converged | objective_stalled | support_cap
    escalation: Tuple[Tuple[int, int, float], ...] = field(default=())


class _GridRates:
    """Vectorized weighted-rate evaluator on a fixed composite radial grid.

    The grid spans [0, htilde*a_cap + truncation], with panels sized to the
    noise width, so a single kernel matrix evaluation prices the whole
    objective; accuracy is cross-checked against the adaptive path in tests.
    """

    def __init__(self, cfg: ChannelConfig, spec: QuadratureSpec, a_cap: float,
                 points_per_sigma: Optional[int] = None):
        self.cfg = cfg
        self.sigma2 = cfg.noise_power
        self.h = cfg.composite_gain
        sigma = math.sqrt(self.sigma2)
        rmax = self.h * a_cap + spec.radial_truncation_sigmas * sigma
        pps = points_per_sigma or spec.radial_points_per_sigma
        self.r, self.w = radial_nodes(rmax, sigma, pps)
        self.a_cap = a_cap

    def _ln_kernel_unit(self, amplitudes: np.ndarray) -> np.ndarray:
        s = self.h * amplitudes[:, None]
        x = 2.0 * self.r[None, :] * s / self.sigma2
        return -(self.r[None, :] ** 2 + s**2) / self.sigma2 + log_bessel_i0(x)

    def _ln_kernel_disk(self, amplitudes, radii, q) -> np.ndarray:
        s = self.h * amplitudes[:, None, None] * radii[None, :, None]
        x = 2.0 * self.r[None, None, :] * s / self.sigma2
        ln_comp = (-(self.r[None, None, :] ** 2 + s**2) / self.sigma2
                   + log_bessel_i0(x)
                   + np.log(np.maximum(q, 1e-300))[None, :, None])
        mx = ln_comp.max(axis=1)
        return mx + np.log(np.sum(np.exp(ln_comp - mx[:, None, :]), axis=1))

    def ln_kernel(self, amplitudes, radii=None, q=None) -> np.ndarray:
        amplitudes = np.atleast_1d(np.asarray(amplitudes, dtype=float))
        if radii is None:
            return self._ln_kernel_unit(amplitudes)
        return self._ln_kernel_disk(amplitudes, np.asarray(radii, dtype=float),
                                    np.asarray(q, dtype=float))

    def rates_nats(self, a, p, radii=None, q=None) -> Tuple[float, float]:
        lnk = self.ln_kernel(a, radii, q)
        f = (2.0 * self.r[None, :] / self.sigma2) * np.exp(lnk)
        w_comp = -np.sum(self.w[None, :] * f * lnk, axis=1)
        mx = lnk.max(axis=0)
        ln_mix = mx + np.log(np.sum(
            np.maximum(p, 1e-300)[:, None] * np.exp(lnk - mx), axis=0))
        f_mix = np.sum(p[:, None] * f, axis=0)
        w_mix = -float(np.sum(self.w * f_mix * ln_mix))
        avg = float(np.dot(p, w_comp))
        return max(w_mix - avg, 0.0), max(avg - 1.0, 0.0)

    def omega_hcond(self, a_eval, a_sup, p_sup, radii=None, q=None):
        """Marginal cross-entropy and conditional entropy (nats, incl. the
        ln(pi sigma^2) constant) at each evaluation amplitude."""
        lnk_sup = self.ln_kernel(a_sup, radii, q)
        mx = lnk_sup.max(axis=0)
        ln_mix = mx + np.log(np.sum(
            np.maximum(p_sup, 1e-300)[:, None] * np.exp(lnk_sup - mx), axis=0))
        lnk_e = self.ln_kernel(a_eval, radii, q)
        f_e = (2.0 * self.r[None, :] / self.sigma2) * np.exp(lnk_e)
        const = math.log(math.pi * self.sigma2)
        omega = -np.sum(self.w[None, :] * f_e * ln_mix[None, :], axis=1) + const
        hcond = -np.sum(self.w[None, :] * f_e * lnk_e, axis=1) + const
        return omega, hcond


# ---------------------------------------------------------------------------
# public objective (adaptive-quadrature path)

def weighted_objective(dist_a: MassPointDistribution, weights: BoundaryWeights,
                       cfg: ChannelConfig, spec: QuadratureSpec = DEFAULT_SPEC,
                       dist_x2: Optional[MassPointDistribution] = None) -> float:
    """mu1*I(X1;Y) + mu2*I(X2;Y|X1) in nats for explicit distributions."""
    pair = rates_discrete_amplitude(dist_a, cfg, spec, dist_x2=dist_x2)
    return (weights.mu1 * pair.r1 + weights.mu2 * pair.r2) * LN2


# ---------------------------------------------------------------------------
# fixed-support solver

def _unpack(theta, m, l, power, a_cap):
    z = theta[:m]
    a = np.sort(np.clip(theta[m:2 * m], 0.0, a_cap))
    p = np.exp(z - z.max())
    p /= p.sum()
    second = float(np.sum(p * a * a))
    if second > power:
        a = a * math.sqrt(power / second)
    if l:
        wv = theta[2 * m:2 * m + l]
        radii = np.sort(np.clip(theta[2 * m + l:], 0.0, 1.0))
        q = np.exp(wv - wv.max())
        q /= q.sum()
        return a, p, radii, q
    return a, p, None, None


def _fd_gradient(fun, theta, steps):
    g = np.empty_like(theta)
    for i in range(theta.size):
        h = steps[i]
        up = theta.copy(); up[i] += h
        dn = theta.copy(); dn[i] -= h
        g[i] = (fun(up) - fun(dn)) / (2.0 * h)
    return g


def _starts(m, l, power, rng, n_random, warm):
    out = []
    if warm is not None and warm.size == 2 * m + 2 * l:
        out.append(warm)
    # structured start: rescaled Rayleigh quantiles, uniform probabilities
    qs = (np.arange(m) + 0.5) / m
    a0 = np.sqrt(-power * np.log1p(-qs))
    a0 *= math.sqrt(power / float(np.mean(a0**2)))
    base = [np.zeros(m), a0]
    if l:
        base += [np.zeros(l), (np.arange(l) + 1.0) / l]
    out.append(np.concatenate(base))
    while len(out) < n_random + 1 + (warm is not None):
        pieces = [rng.normal(0.0, 0.7, m),
                  np.sort(rng.uniform(0.15, 1.6, m)) * math.sqrt(power)]
        if l:
            pieces += [rng.normal(0.0, 0.7, l), np.sort(rng.uniform(0.2, 1.0, l))]
        out.append(np.concatenate(pieces))
    return out


def optimize_fixed_support(m: int, weights: BoundaryWeights, cfg: ChannelConfig,
                           solver_opts: SolverOptions = SolverOptions(),
                           spec: QuadratureSpec = DEFAULT_SPEC,
                           l: Optional[int] = None,
                           warm_start: Optional[np.ndarray] = None,
                           grid: Optional[_GridRates] = None):
    """Locally optimal amplitude law (and circle law for the disk case) with
    exactly m amplitude points and l circles.

    Returns (dist_a, dist_x2_or_None, objective_nats, raw_theta); raw_theta
    re-seeds the next escalation step.  Deterministic given the seed.
    """
    if m < 1 or (l is not None and l < 1):
        raise DomainError("support sizes must be >= 1")
    power = cfg.power_budget
    a_cap = solver_opts.amplitude_cap_factor * math.sqrt(power)
    if grid is None:
        grid = _GridRates(cfg, spec, a_cap)
    ll = l or 0
    mu1, mu2 = weights.mu1, weights.mu2

    def neg(theta):
        a, p, radii, q = _unpack(theta, m, ll, power, a_cap)
        i1, i2 = grid.rates_nats(a, p, radii, q)
        return -(mu1 * i1 + mu2 * i2)

    loc_step = 1e-4 * math.sqrt(power)
    steps = np.concatenate([
        np.full(m, 1e-4), np.full(m, loc_step),
        np.full(ll, 1e-4), np.full(ll, 1e-4)])
    bounds = ([(None, None)] * m + [(0.0, a_cap)] * m
              + [(None, None)] * ll + [(0.0, 1.0)] * ll)

    rng = np.random.default_rng(
        np.random.SeedSequence([solver_opts.seed, m, ll]))
    best = None
    for theta0 in _starts(m, ll, power, rng, solver_opts.n_starts - 1, warm_start):
        res = minimize(neg, theta0, jac=lambda t: _fd_gradient(neg, t, steps),
                       method="L-BFGS-B", bounds=bounds,
                       options=dict(maxiter=solver_opts.maxiter,
                                    ftol=1e-13, gtol=1e-10))
        if best is None or res.fun < best.fun - 1e-15:
            best = res
    a, p, radii, q = _unpack(best.x, m, ll, power, a_cap)
    a, p = _merge_points(a, p, solver_opts.merge_tol * math.sqrt(power),
                         solver_opts.prune_tol)
    dist_a = MassPointDistribution.from_arrays(a, p, AveragePower(power))
    dist_x2 = None
    if ll:
        radii, q = _merge_points(radii, q, solver_opts.merge_tol,
                                 solver_opts.prune_tol)
        dist_x2 = MassPointDistribution.from_arrays(radii, q, UnitDisk())
    return dist_a, dist_x2, -float(best.fun), best.x


def _merge_points(locs, probs, tol, prune_tol):
    """Merge near-duplicate support points (probability-weighted location) and drop
    negligible-mass strays; merging never increases the second moment."""
    order = np.argsort(locs)
    locs, probs = np.asarray(locs)[order], np.asarray(probs)[order]
    out_l, out_p = [float(locs[0])], [float(probs[0])]
    for loc, pr in zip(locs[1:], probs[1:]):
        if loc - out_l[-1] < tol:
            tot = out_p[-1] + pr
            if tot > 0:
                out_l[-1] = (out_l[-1] * out_p[-1] + loc * pr) / tot
            out_p[-1] = tot
        else:
            out_l.append(float(loc))
            out_p.append(float(pr))
    l_arr, p_arr = np.array(out_l), np.array(out_p)
    keep = p_arr > prune_tol
    if not np.any(keep):
        keep = p_arr == p_arr.max()
    l_arr, p_arr = l_arr[keep], p_arr[keep]
    return l_arr, p_arr / p_arr.sum()


# ---------------------------------------------------------------------------
# optimality-condition verification

def _fit_lambda(a_sup, g_sup, p_sup, power, grid_a, g_grid):
    """Least-squares multiplier from the support equalities; when the fit is
    degenerate (all support at the power radius) fall back to the value
    minimizing the worst grid violation (convex piecewise-linear in lambda)."""
    g_bar = float(np.dot(p_sup, g_sup))
    x = a_sup**2 - power
    denom = float(np.dot(x, x))
    if denom > 1e-12 * power**2:
        lam = float(np.dot(x, g_sup - g_bar) / denom)
        return max(lam, 0.0)

    def worst(lam):
        t0 = g_bar - lam * power
        return float(np.max(g_grid - t0 - lam * grid_a**2))

    res = minimize_scalar(worst, bounds=(0.0, 100.0), method="bounded",
                          options=dict(xatol=1e-10))
    return max(float(res.x), 0.0)


def verify_kkt(dist_a: MassPointDistribution, weights: BoundaryWeights,
               cfg: ChannelConfig, spec: QuadratureSpec = DEFAULT_SPEC,
               grid_max: Optional[float] = None, grid_n: int = 400,
               dist_x2: Optional[MassPointDistribution] = None) -> KktReport:
    """Evaluate the first-order optimality conditions of the weighted-rate
    problem on a candidate amplitude law.

    The multiplier is fitted by least squares on the support equalities, the
    constant from its definition, and the inequality is scanned on a uniform
    amplitude grid.  Violations are reported, never clamped or asserted.
    """
    if len(dist_a.points) < 1:
        raise DomainError("need at least one support point")
    power = cfg.power_budget
    if grid_max is None:
        grid_max = 3.0 * math.sqrt(power)
    if grid_n < 2:
        raise DomainError("grid_n must be >= 2")
    a_sup = dist_a.locations
    p_sup = dist_a.probabilities
    radii = q = None
    if dist_x2 is not None:
        radii, q = dist_x2.locations, dist_x2.probabilities

    cap = max(grid_max, float(a_sup.max())) * 1.02
    grid = _GridRates(cfg, spec, cap, points_per_sigma=12)
    ratio = weights.mu2 / weights.mu1 - 1.0

    om_s, h_s = grid.omega_hcond(a_sup, a_sup, p_sup, radii, q)
    g_sup = om_s + ratio * h_s
    grid_a = np.linspace(0.0, grid_max, grid_n)
    om_g, h_g = grid.omega_hcond(grid_a, a_sup, p_sup, radii, q)
    g_grid = om_g + ratio * h_g

    lam_over_mu1 = _fit_lambda(a_sup, g_sup, p_sup, power, grid_a, g_grid)
    g_bar = float(np.dot(p_sup, g_sup))
    t0 = g_bar - lam_over_mu1 * power
    eq_res = g_sup - (t0 + lam_over_mu1 * a_sup**2)
    viol = g_grid - (t0 + lam_over_mu1 * grid_a**2)
    return KktReport(
        lagrange_multiplier=lam_over_mu1 * weights.mu1,
        t0=t0,
        max_inequality_violation=float(np.max(viol)),
        max_equality_residual=float(np.max(np.abs(eq_res))),
        grid_max=float(grid_max),
        grid_n=int(grid_n),
        grid_description=f"uniform[0, {grid_max:.6g}], {grid_n} points",
    )


# ---------------------------------------------------------------------------
# support escalation

def _warm_extend(theta, m, l):
    """Grow a solution vector by one amplitude point (small mass past the
    current largest location)."""
    z, a = theta[:m], theta[m:2 * m]
    rest = theta[2 * m:]
    z_new = np.concatenate([z, [np.log(0.05) + z.max()]])
    a_new = np.concatenate([a, [a.max() * 1.2 + 0.1]])
    return np.concatenate([z_new, a_new, rest])


def optimize_boundary_point(weights: BoundaryWeights, constraint: str,
                            cfg: ChannelConfig,
                            solver_opts: SolverOptions = SolverOptions(),
                            spec: QuadratureSpec = DEFAULT_SPEC) -> BoundaryPointResult:
    """Solve for one weighted-rate boundary point, growing the support until
    the objective stalls and the optimality conditions certify.

    Escalation stops with status 'converged' when the objective gain drops
    below gain_tol and the optimality-condition violation below kkt_tol;
    'objective_stalled' when gains stay below gain_tol for futility_rounds
    consecutive sizes without certification; 'support_cap' at the cap.  The
    best iterate is returned in every case.
    """
    if constraint not in ("unit", "disk"):
        raise DomainError("constraint must be 'unit' or 'disk'")
    disk = constraint == "disk"
    a_cap = solver_opts.amplitude_cap_factor * math.sqrt(cfg.power_budget)
    grid = _GridRates(cfg, spec, a_cap)

    best = None
    prev_obj = -math.inf
    warm = None
    l = 1 if disk else None
    stalled = 0
    history = []
    status = "support_cap"
    converged = False

    for m in range(1, solver_opts.max_points + 1):
        dist_a, dist_x2, obj, theta = optimize_fixed_support(
            m, weights, cfg, solver_opts, spec, l=l, warm_start=warm, grid=grid)
        if disk:
            # grow the circle count while it still pays
            while (l or 0) < solver_opts.max_circles:
                d2_a, d2_x2, obj2, theta2 = optimize_fixed_support(
                    m, weights, cfg, solver_opts, spec, l=l + 1,
                    warm_start=None, grid=grid)
                if obj2 > obj + solver_opts.gain_tol:
                    dist_a, dist_x2, obj, theta = d2_a, d2_x2, obj2, theta2
                    l += 1
                else:
                    break
        history.append((m, l or 0, obj))
        gain = obj - prev_obj
        prev_obj = max(prev_obj, obj)
        if best is None or obj > best[2] + 1e-12:
            best = (dist_a, dist_x2, obj)
        kkt = verify_kkt(best[0], weights, cfg, spec, dist_x2=best[1])
        if m >= 2 and gain < solver_opts.gain_tol:
            if kkt.max_inequality_violation < solver_opts.kkt_tol:
                status, converged = "converged", True
                break
            stalled += 1
            if stalled >= solver_opts.futility_rounds:
                status = "objective_stalled"
                break
        else:
            stalled = 0
        warm = _warm_extend(theta, m, l or 0)

    dist_a, dist_x2, obj = best
    kkt = verify_kkt(dist_a, weights, cfg, spec, dist_x2=dist_x2)
    pair = rates_discrete_amplitude(
        dist_a, cfg, spec, dist_x2=dist_x2,
        provenance=f"mu({weights.mu1:g})")
    return BoundaryPointResult(
        weights=weights, constraint=constraint, dist_a=dist_a, dist_x2=dist_x2,
        rate_pair=pair, kkt=kkt, objective_nats=obj, converged=converged,
        status=status, escalation=tuple(history))


# ---------------------------------------------------------------------------
# secondary capacity under the disk constraint

def optimize_secondary_disk(cfg: ChannelConfig,
                            spec: QuadratureSpec = DEFAULT_SPEC,
                            ring_count: Optional[int] = None,
                            maxiter: int = 500):
    """Maximum secondary rate (bits) under |X2| <= 1 at full primary
    amplitude, together with the achieving circle law.

    Uses a dense fixed radius grid (the ring count scales with sqrt(snr),
    matching the growth of the optimal circle number) and maximizes the
    mutual information over the ring weights only, which is a concave
    problem solved with an analytic gradient.
    """
    snr = cfg.receive_snr
    s_full = math.sqrt(cfg.power_budget) * cfg.composite_gain
    sigma2 = cfg.noise_power
    sigma = math.sqrt(sigma2)
    if ring_count is None:
        ring_count = min(max(int(math.ceil(math.sqrt(snr) / 2.0)) + 4, 8), 160)
    radii = np.linspace(0.0, 1.0, ring_count + 1)[1:]
    r, w = radial_nodes(s_full + spec.radial_truncation_sigmas * sigma, sigma,
                        spec.radial_points_per_sigma)
    s = s_full * radii[:, None]
    x = 2.0 * r[None, :] * s / sigma2
    lnk = -(r[None, :] ** 2 + s**2) / sigma2 + log_bessel_i0(x)
    f = (2.0 * r[None, :] / sigma2) * np.exp(lnk)

    def neg_and_grad(z):
        z = z - z.max()
        q = np.exp(z)
        q /= q.sum()
        mx = lnk.max(axis=0)
        ln_mix = mx + np.log(np.maximum(
            np.sum(q[:, None] * np.exp(lnk - mx), axis=0), 1e-300))
        f_mix = np.sum(q[:, None] * f, axis=0)
        mi = -float(np.sum(w * f_mix * ln_mix)) - 1.0
        d_mi = -np.sum(w[None, :] * f * ln_mix[None, :], axis=1) - 1.0
        grad = q * (d_mi - float(np.dot(q, d_mi)))
        return -mi, -grad

    z0 = np.log(np.maximum(radii, 1e-6))  # uniform-disk weighting
    res = minimize(neg_and_grad, z0, jac=True, method="L-BFGS-B",
                   options=dict(maxiter=maxiter, ftol=1e-14, gtol=1e-12))
    z = res.x - res.x.max()
    q = np.exp(z)
    q /= q.sum()
    keep = q > 1e-10
    radii_k, q_k = radii[keep], q[keep] / q[keep].sum()
    dist = MassPointDistribution.from_arrays(radii_k, q_k, UnitDisk())
    return dist, -float(res.fun) / LN2
