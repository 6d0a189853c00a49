"""Mutual-information and entropy kernels of the multiplicative channel.

Given the primary amplitude, the received amplitude follows a Rice law
    f(r | s) = (2r/sigma^2) exp(-(r^2+s^2)/sigma^2) I0(2 r s / sigma^2)
with noncentrality s = htilde * a * |x2|, and the received phase is uniform
and independent of the amplitude.  Output entropies therefore reduce to 1-D
radial integrals, except for the joint phase schemes on the maximum-sum-rate
boundary segment, where the conditional phase is structured and the full
(r, psi) grid is kept.

All functions return nats unless the name or docstring says bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import erfcx

from .channel import ChannelConfig, LN2
from .distributions import MassPointDistribution, UnitDisk
from .errors import ConfigError, DomainError, SchemeError
from .numerics import (DEFAULT_SPEC, QuadratureSpec, integrate_radial,
                       log_bessel_i0, radial_nodes, rayleigh_expectation)

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# radial densities

@dataclass(frozen=True)
class ConditionalRadialDensity:
    """Radial law of |Y| given an effective received amplitude (Rice family)."""

    noncentrality: float
    noise_power: float

    def __post_init__(self):
        if self.noncentrality < 0:
            raise DomainError("noncentrality must be nonnegative")
        if self.noise_power <= 0:
            raise DomainError("noise_power must be positive")

    def log_kernel(self, r):
        """ln kappa(r) = -(r^2+s^2)/sigma^2 + ln I0(2 r s/sigma^2); the radial
        density is (2r/sigma^2) * exp(log_kernel)."""
        r = np.asarray(r, dtype=float)
        s, s2 = self.noncentrality, self.noise_power
        return -(r**2 + s**2) / s2 + log_bessel_i0(2.0 * r * s / s2)

    def pdf(self, r):
        r = np.asarray(r, dtype=float)
        return 2.0 * r / self.noise_power * np.exp(self.log_kernel(r))


@dataclass(frozen=True)
class MixtureRadialDensity:
    """Finite mixture of conditional radial laws (shared noise power)."""

    components: tuple  # ((weight, ConditionalRadialDensity), ...)

    def __post_init__(self):
        if not self.components:
            raise DomainError("mixture needs at least one component")
        w = [c[0] for c in self.components]
        if any(x < 0 or x > 1 for x in w):
            raise DomainError("weights must lie in [0, 1]")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise DomainError("weights must sum to 1")
        s2 = {c[1].noise_power for c in self.components}
        if len(s2) != 1:
            raise DomainError("components must share the noise power")

    @property
    def noise_power(self) -> float:
        return self.components[0][1].noise_power

    def log_kernel(self, r):
        r = np.asarray(r, dtype=float)
        logs = np.stack([math.log(max(w, 1e-300)) + c.log_kernel(r)
                         for w, c in self.components])
        mx = logs.max(axis=0)
        return mx + np.log(np.sum(np.exp(logs - mx), axis=0))

    def pdf(self, r):
        r = np.asarray(r, dtype=float)
        return 2.0 * r / self.noise_power * np.exp(self.log_kernel(r))


def _disk_mixture(dist_x2: MassPointDistribution, amplitude: float,
                  cfg: ChannelConfig) -> MixtureRadialDensity:
    h = cfg.composite_gain
    comps = tuple(
        (p, ConditionalRadialDensity(h * amplitude * r, cfg.noise_power))
        for r, p in dist_x2.points)
    return MixtureRadialDensity(components=comps)


# ---------------------------------------------------------------------------
# 1-D rate integrals (uniform secondary phase)

def mi_phase_uniform(noncentrality: float, noise_power: float,
                     spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """I(X2;Y | X1) in nats for a unit-modulus uniform-phase secondary signal,
    at effective received amplitude s = |h x1|.

    Equals -int f(r) ln kappa(r) dr - 1 with the Rice radial law above.
    """
    if noncentrality < 0:
        raise DomainError("noncentrality must be nonnegative")
    if noncentrality == 0.0:
        return 0.0
    dens = ConditionalRadialDensity(noncentrality, noise_power)

    def integrand(r):
        lnk = dens.log_kernel(r)
        return -dens.pdf(r) * lnk

    sigma = math.sqrt(noise_power)
    val = integrate_radial(integrand, center=noncentrality, scale=sigma, spec=spec)
    return max(val - 1.0, 0.0)


def mi_phase_uniform_asymptotic(snr: float, regime: str) -> float:
    """Asymptotic secondary rate in nats: 0.5*ln(4*pi*snr/e) at high snr,
    snr itself at low snr.  The caller picks the regime; no silent switching."""
    if snr < 0:
        raise DomainError("snr must be nonnegative")
    if regime == "high":
        if snr <= math.e / (4.0 * math.pi):
            raise DomainError("high-snr form is negative at this snr")
        return 0.5 * math.log(4.0 * math.pi * snr / math.e)
    if regime == "low":
        return snr
    raise ConfigError(f"unknown regime {regime!r}; use 'high' or 'low'")


def c2_unit_modulus(cfg: ChannelConfig, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Maximum secondary rate in bits under |X2| = 1: the primary transmits a
    constant-amplitude tone at full power and the surface carries the phase."""
    s = math.sqrt(cfg.power_budget) * cfg.composite_gain
    return mi_phase_uniform(s, cfg.noise_power, spec) / LN2


def mi_disk_conditional(dist_x2: MassPointDistribution, amplitude: float,
                        cfg: ChannelConfig,
                        spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """I(X2;Y | X1 = amplitude) in nats for a concentric-circle secondary
    input (discrete |X2| within the unit disk, uniform independent phase)."""
    if not isinstance(dist_x2.constraint, UnitDisk):
        raise DomainError("dist_x2 must carry the unit-disk constraint")
    if amplitude < 0:
        raise DomainError("amplitude must be nonnegative")
    if amplitude == 0.0:
        return 0.0
    mix = _disk_mixture(dist_x2, amplitude, cfg)
    rings = [cfg.composite_gain * amplitude * r for r, _ in dist_x2.points]

    def integrand(r):
        lnk = mix.log_kernel(r)
        return -mix.pdf(r) * lnk

    sigma = math.sqrt(cfg.noise_power)
    val = integrate_radial(integrand, center=max(rings), scale=sigma, spec=spec,
                           breakpoints=rings)
    return max(val - 1.0, 0.0)


def mi_upper_bound_disk(snr: float) -> float:
    """Upper bound in bits on the secondary rate at receive snr = s^2/sigma^2:
    the smaller of the average-power capacity log2(1+snr) and the
    McKellips-type peak-power bound log2(1 + sqrt(pi*snr) + snr/e)."""
    if snr < 0:
        raise DomainError("snr must be nonnegative")
    avg_power = math.log1p(snr) / LN2
    mckellips = math.log1p(math.sqrt(math.pi * snr) + snr / math.e) / LN2
    return min(avg_power, mckellips)


def h_y_given_amplitude(amplitude: float, cfg: ChannelConfig,
                        spec: QuadratureSpec = DEFAULT_SPEC,
                        dist_x2: Optional[MassPointDistribution] = None) -> float:
    """Conditional output entropy H(Y | A = amplitude) in nats:
    -int f(r|a) ln kappa(r) dr + ln(pi*sigma^2).

    With dist_x2 given, the kernel is the concentric-circle mixture instead
    of the single unit ring.
    """
    if amplitude < 0:
        raise DomainError("amplitude must be nonnegative")
    s2 = cfg.noise_power
    if dist_x2 is None:
        dens = ConditionalRadialDensity(cfg.composite_gain * amplitude, s2)
        rings = [dens.noncentrality]
    else:
        dens = _disk_mixture(dist_x2, amplitude, cfg)
        rings = [cfg.composite_gain * amplitude * r for r, _ in dist_x2.points]

    def integrand(r):
        lnk = dens.log_kernel(r)
        return -dens.pdf(r) * lnk

    sigma = math.sqrt(s2)
    val = integrate_radial(integrand, center=max(rings), scale=sigma, spec=spec,
                           breakpoints=rings)
    return val + math.log(math.pi * s2)


def marginal_entropy(amplitude: float, dist_a: MassPointDistribution,
                     cfg: ChannelConfig, spec: QuadratureSpec = DEFAULT_SPEC,
                     dist_x2: Optional[MassPointDistribution] = None) -> float:
    """Cross-entropy (nats) of the output law at a given amplitude against the
    output mixture induced by dist_a:
        -int f(r | amplitude) ln f_mix(r)/(...) dr + ln(pi*sigma^2).

    Averaging over dist_a recovers H(Y); by the Gibbs inequality it dominates
    h_y_given_amplitude pointwise.
    """
    if amplitude < 0:
        raise DomainError("amplitude must be nonnegative")
    s2 = cfg.noise_power
    h = cfg.composite_gain
    if dist_x2 is None:
        cond = ConditionalRadialDensity(h * amplitude, s2)
        comps = tuple((p, ConditionalRadialDensity(h * a, s2))
                      for a, p in dist_a.points)
        mix = MixtureRadialDensity(components=comps)
        rings = [h * amplitude] + [h * a for a, _ in dist_a.points]
    else:
        cond = _disk_mixture(dist_x2, amplitude, cfg)
        radii = dist_x2.locations
        comps = []
        for a, p in dist_a.points:
            for r, q in dist_x2.points:
                comps.append((p * q, ConditionalRadialDensity(h * a * r, s2)))
        mix = MixtureRadialDensity(components=tuple(comps))
        rings = ([h * amplitude * r for r in radii]
                 + [h * a * r for a, _ in dist_a.points for r in radii])

    def integrand(r):
        return -cond.pdf(r) * mix.log_kernel(r)

    sigma = math.sqrt(s2)
    val = integrate_radial(integrand, center=max(rings), scale=sigma, spec=spec,
                           breakpoints=rings)
    return val + math.log(math.pi * s2)


# ---------------------------------------------------------------------------
# rate pairs for discrete amplitude laws

@dataclass(frozen=True)
class RatePair:
    """A (primary, secondary) rate point in bits with a provenance label."""

    r1: float
    r2: float
    provenance: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.r1) and math.isfinite(self.r2)):
            raise DomainError("rates must be finite")


def rates_discrete_amplitude(dist_a: MassPointDistribution, cfg: ChannelConfig,
                             spec: QuadratureSpec = DEFAULT_SPEC,
                             dist_x2: Optional[MassPointDistribution] = None,
                             provenance: str = "") -> RatePair:
    """Rates (bits) of a discrete primary amplitude law with a uniform-phase
    secondary signal (unit modulus, or concentric circles when dist_x2 given).

    I(X1;Y) is the mixture-vs-components radial entropy gap; I(X2;Y|X1) is
    the probability-weighted conditional rate.
    """
    power = cfg.power_budget
    if dist_a.second_moment > power + 1e-9 * power:
        raise DomainError("amplitude law violates the average power budget")
    s2 = cfg.noise_power
    h = cfg.composite_gain
    sigma = math.sqrt(s2)

    if dist_x2 is None:
        conds = [ConditionalRadialDensity(h * a, s2) for a, _ in dist_a.points]
        ring_of = lambda c: [c.noncentrality]
    else:
        if not isinstance(dist_x2.constraint, UnitDisk):
            raise DomainError("dist_x2 must carry the unit-disk constraint")
        conds = [_disk_mixture(dist_x2, a, cfg) for a, _ in dist_a.points]
        radii = [r for r, _ in dist_x2.points]
        ring_of = lambda c: [cc[1].noncentrality for cc in c.components]

    probs = dist_a.probabilities

    # per-component cross terms W_m = -int f_m ln kappa_m
    w_comp = []
    for c in conds:
        rings = ring_of(c)
        w_comp.append(integrate_radial(
            lambda r, c=c: -c.pdf(r) * c.log_kernel(r),
            center=max(rings), scale=sigma, spec=spec, breakpoints=rings))
    w_comp = np.asarray(w_comp)

    mix_comps = []
    for p, c in zip(probs, conds):
        if dist_x2 is None:
            mix_comps.append((p, c))
        else:
            mix_comps.extend((p * w, cc) for w, cc in c.components)
    mix = MixtureRadialDensity(components=tuple(mix_comps))
    all_rings = [cc[1].noncentrality for cc in mix.components]

    w_mix = integrate_radial(
        lambda r: -mix.pdf(r) * mix.log_kernel(r),
        center=max(all_rings), scale=sigma, spec=spec, breakpoints=all_rings)

    i1 = max(w_mix - float(np.dot(probs, w_comp)), 0.0)
    i2 = max(float(np.dot(probs, w_comp)) - 1.0, 0.0)
    return RatePair(r1=i1 / LN2, r2=i2 / LN2, provenance=provenance)


# ---------------------------------------------------------------------------
# joint phase schemes on the maximum-sum-rate segment

@dataclass(frozen=True)
class PhaseScheme:
    """Joint phase design with opening half-angle alpha = pi/n.

    Scheme I: the primary phase is uniform on [-alpha, alpha) and the
    secondary phase is a uniform comb on {2 k alpha}.  Scheme II swaps the
    roles.  Either way the product phase is uniform, the primary amplitude is
    Rayleigh with E[A^2] = P, and the product X1*X2 is complex Gaussian, so
    every such pair achieves the maximum sum rate.
    """

    kind: str  # "I" or "II"
    n: int

    def __post_init__(self):
        if self.kind not in ("I", "II"):
            raise SchemeError(f"scheme kind must be 'I' or 'II', got {self.kind!r}")
        if not isinstance(self.n, int) or self.n < 1:
            raise SchemeError("pi/alpha must be a positive integer")

    @property
    def alpha(self) -> float:
        return math.pi / self.n

    @classmethod
    def from_alpha(cls, kind: str, alpha: float, tol: float = 1e-9) -> "PhaseScheme":
        if alpha <= 0 or alpha > math.pi + tol:
            raise SchemeError(f"alpha must lie in (0, pi], got {alpha}")
        n = round(math.pi / alpha)
        if n < 1 or abs(math.pi / alpha - n) > tol:
            raise SchemeError(f"pi/alpha must be a positive integer, got {math.pi/alpha}")
        return cls(kind=kind, n=n)


def _ray_log_density(r, delta, mean_square: float, noise_power: float):
    """ln u(r, delta): density (Cartesian, at polar offset delta from the ray
    axis) of S*exp(j*0) + Z with S Rayleigh, E[S^2] = mean_square.

    Closed form via the scaled complementary error function; stable for the
    whole range because the net exponent -r^2/sigma^2 + c^2 is never positive.
    """
    r = np.asarray(r, dtype=float)
    delta = np.asarray(delta, dtype=float)
    lam, s2 = mean_square, noise_power
    beta = 1.0 / lam + 1.0 / s2
    c = r * np.cos(delta) / (s2 * math.sqrt(beta))
    base = math.log(2.0 / (lam * math.pi * s2)) - math.log(2.0 * beta) - r**2 / s2

    ln_b = np.empty(np.broadcast(r, delta).shape)
    c = np.broadcast_to(c, ln_b.shape)
    neg = c <= 0.0
    big = c > 18.0
    mid = ~neg & ~big
    if np.any(neg):
        cn = -c[neg]
        ln_b[neg] = np.log(np.maximum(1.0 - math.sqrt(math.pi) * cn * erfcx(cn),
                                      1e-300))
    if np.any(mid):
        cm = c[mid]
        b = 1.0 + math.sqrt(math.pi) * cm * (2.0 * np.exp(cm**2) - erfcx(cm))
        ln_b[mid] = np.log(b)
    if np.any(big):
        cb = c[big]
        # 1 + sqrt(pi) c (2 e^{c^2} - erfcx(c)) ~ 2 sqrt(pi) c e^{c^2} to < 1e-300
        ln_b[big] = math.log(2.0 * math.sqrt(math.pi)) + np.log(cb) + cb**2
    return base + ln_b


def _point_log_density(r, delta, amplitude: float, noise_power: float):
    """ln of the Cartesian Gaussian density centered on the ring point
    (amplitude, 0), evaluated at polar offset delta."""
    r = np.asarray(r, dtype=float)
    return (-math.log(math.pi * noise_power)
            - (r**2 + amplitude**2 - 2.0 * r * amplitude * np.cos(delta))
            / noise_power)


def _angular_count(feature_radius: float, sigma: float, n: int,
                   spec: QuadratureSpec, pow2: bool) -> int:
    """Angular node count resolving width sigma/feature_radius bumps."""
    need = int(math.ceil(40.0 * max(feature_radius, sigma) / sigma))
    need = min(max(need, spec.angular_nodes), spec.max_angular_nodes)
    if pow2:
        return 1 << (need - 1).bit_length()
    # comb shifts must land on grid nodes
    return n * int(math.ceil(need / n))


def _grid_entropy(u, r_nodes, r_weights, n_psi: int) -> float:
    """J = int int r u ln u dpsi dr over the polar grid (u is Cartesian)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        plnp = np.where(u > 0.0, u * np.log(np.where(u > 0.0, u, 1.0)), 0.0)
    return float(np.sum((r_nodes * r_weights)[:, None] * plnp)
                 * (TWO_PI / n_psi))


def _comb(u0, n: int) -> np.ndarray:
    """(alpha/pi) * sum of u0 rotated by 2*k*alpha; grid size divisible by n."""
    n_psi = u0.shape[1]
    shift = n_psi // n
    acc = u0.copy()
    for k in range(1, n):
        acc += np.roll(u0, k * shift, axis=1)
    return acc / n


def _box_smear(u0, alpha: float) -> np.ndarray:
    """Circular convolution with the box 1/(2 alpha) on [-alpha, alpha],
    applied through its exact Fourier multiplier sin(k alpha)/(k alpha)."""
    n_psi = u0.shape[1]
    k = np.arange(n_psi // 2 + 1, dtype=float)
    mult = np.ones_like(k)
    nz = k > 0
    mult[nz] = np.sin(k[nz] * alpha) / (k[nz] * alpha)
    spectrum = np.fft.rfft(u0, axis=1)
    out = np.fft.irfft(spectrum * mult[None, :], n=n_psi, axis=1)
    return np.maximum(out, 0.0)


def _scheme_conditional_entropy(scheme: PhaseScheme, decode_first: str,
                                cfg: ChannelConfig, spec: QuadratureSpec) -> float:
    """H(Y | X_i) in nats, i being the signal decoded first."""
    lam = cfg.power_budget * cfg.composite_gain**2
    s2 = cfg.noise_power
    sigma = math.sqrt(s2)
    n, alpha = scheme.n, scheme.alpha
    trunc = spec.radial_truncation_sigmas * sigma

    if decode_first == "x1":
        # condition on the primary amplitude (its phase only rotates the
        # pattern and cannot change the entropy); average over the Rayleigh law
        comb_case = scheme.kind == "I"

        def entropy_at(s: float) -> float:
            r_nodes, r_weights = radial_nodes(s + trunc, sigma,
                                              spec.radial_points_per_sigma)
            n_psi = _angular_count(s, sigma, n, spec, pow2=not comb_case)
            psi = -math.pi + TWO_PI * np.arange(n_psi) / n_psi
            u0 = np.exp(_point_log_density(r_nodes[:, None], psi[None, :], s, s2))
            u = _comb(u0, n) if comb_case else _box_smear(u0, alpha)
            return _grid_entropy(u, r_nodes, r_weights, n_psi)

        return -rayleigh_expectation(entropy_at, lam, sigma, spec)

    if decode_first == "x2":
        # condition on the secondary phase (value irrelevant by rotation);
        # the primary amplitude is integrated out in closed form (ray kernel)
        comb_case = scheme.kind == "II"
        spread = math.sqrt(lam + s2)
        r_nodes, r_weights = radial_nodes(6.5 * spread + trunc, sigma,
                                          spec.radial_points_per_sigma)
        n_psi = _angular_count(2.5 * spread, sigma, n, spec, pow2=not comb_case)
        psi = -math.pi + TWO_PI * np.arange(n_psi) / n_psi
        u0 = np.exp(_ray_log_density(r_nodes[:, None], psi[None, :], lam, s2))
        u = _comb(u0, n) if comb_case else _box_smear(u0, alpha)
        return -_grid_entropy(u, r_nodes, r_weights, n_psi)

    raise ConfigError(f"decode_first must be 'x1' or 'x2', got {decode_first!r}")


def scheme_rate_pair(scheme: PhaseScheme, decode_first: str, cfg: ChannelConfig,
                     spec: QuadratureSpec = DEFAULT_SPEC) -> RatePair:
    """Rate pair (bits) of a joint phase scheme under the given decoding order.

    The output entropy is exactly ln(pi e (P htilde^2 + sigma^2)) because the
    product signal is complex Gaussian; the conditional entropy given the
    first-decoded signal is computed on a polar grid.  The pair sums to the
    maximum sum rate by construction.
    """
    lam = cfg.power_budget * cfg.composite_gain**2
    s2 = cfg.noise_power
    h_cond = _scheme_conditional_entropy(scheme, decode_first, cfg, spec)
    i_first = math.log(math.pi * math.e * (lam + s2)) - h_cond
    i_second = h_cond - math.log(math.pi * math.e * s2)
    i_first = max(i_first, 0.0)
    i_second = max(i_second, 0.0)
    label = f"scheme({scheme.kind}, n={scheme.n}, decode_first={decode_first})"
    if decode_first == "x1":
        return RatePair(r1=i_first / LN2, r2=i_second / LN2, provenance=label)
    return RatePair(r1=i_second / LN2, r2=i_first / LN2, provenance=label)


def corner_b_secondary_rate(cfg: ChannelConfig,
                            spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Secondary rate (bits) at the maximum-sum-rate corner with the largest
    R2: Rayleigh primary amplitude, fully uniform secondary phase."""
    lam = cfg.power_budget * cfg.composite_gain**2
    sigma = math.sqrt(cfg.noise_power)
    val = rayleigh_expectation(
        lambda s: mi_phase_uniform(s, cfg.noise_power, spec), lam, sigma, spec)
    return val / LN2
