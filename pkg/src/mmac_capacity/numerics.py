"""Log-domain-safe special functions and the quadrature engines.

Everything downstream integrates densities of the Rice family
    f(r) = (2r/sigma^2) * exp(-(r^2+s^2)/sigma^2) * I0(2 r s / sigma^2)
over [0, inf) or smooth periodic integrands over [-pi, pi).  The radial
integrator is adaptive Gauss-Kronrod on a truncated interval split at the
integrand's mode; the angular integrator is the composite trapezoid rule,
which is spectrally accurate for periodic integrands.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import i0e

from .errors import ConfigError, NumericError, QuadratureError


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization knobs shared by all mutual-information kernels."""

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    radial_truncation_sigmas: float = 10.0
    max_subdivisions: int = 60
    angular_nodes: int = 256
    # knobs for the 2-D conditional-entropy grids and expectations
    radial_points_per_sigma: int = 8
    max_angular_nodes: int = 8192
    expectation_panel_nodes: int = 12

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.radial_truncation_sigmas <= 0:
            raise ConfigError("radial_truncation_sigmas must be positive")
        if self.max_subdivisions < 1:
            raise ConfigError("max_subdivisions must be >= 1")
        if self.angular_nodes < 8 or self.expectation_panel_nodes < 8:
            raise ConfigError("node counts must be >= 8")


DEFAULT_SPEC = QuadratureSpec()


def log_bessel_i0(x):
    """ln I0(x) without overflow, valid for x up to at least 1e6.

    Uses the exponentially scaled Bessel function: ln I0(x) = x + ln i0e(x).
    I0 is even, so negative inputs are folded to |x|.  Accepts scalars or
    arrays.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise NumericError("log_bessel_i0 received NaN")
    ax = np.abs(arr)
    out = ax + np.log(i0e(ax))
    if np.ndim(x) == 0:
        return float(out)
    return out


# 7-point Gauss / 15-point Kronrod pair on [-1, 1]
_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])
_G_IDX = np.arange(1, 15, 2)  # Gauss nodes sit at the odd Kronrod positions


def _panel(f, a, b):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    fx = np.asarray(f(mid + half * _XK), dtype=float)
    if fx.shape != _XK.shape:
        raise NumericError("radial integrand must be vectorized over nodes")
    ik = half * float(np.dot(_WK, fx))
    ig = half * float(np.dot(_WG, fx[_G_IDX]))
    err = abs(ik - ig)
    if not math.isfinite(ik):
        raise NumericError("radial integrand produced non-finite values")
    return ik, err


def integrate_radial(f: Callable, center: float, scale: float,
                     spec: QuadratureSpec = DEFAULT_SPEC,
                     breakpoints: Sequence[float] = ()) -> float:
    """Integrate f over [0, center + radial_truncation_sigmas*scale].

    f must accept an ndarray of radii.  `center` is the location of the
    integrand's mode (the ring radius for Rice-type densities) and `scale`
    the noise-level sigma that sets the decay rate; the Gaussian tail beyond
    the truncation point is far below the tolerance.  Extra `breakpoints`
    seed the initial panels (used for multi-ring mixtures).  Raises
    QuadratureError carrying the best estimate when the subdivision budget
    is exhausted before reaching tolerance.
    """
    if center < 0 or scale <= 0:
        raise ConfigError("center must be >= 0 and scale > 0")
    upper = center + spec.radial_truncation_sigmas * scale
    cuts = {0.0, upper, min(max(center, 0.0), upper)}
    for b in breakpoints:
        if 0.0 < b < upper:
            cuts.add(float(b))
    edges = sorted(cuts)

    heap = []
    total, total_err = 0.0, 0.0
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        val, err = _panel(f, a, b)
        total += val
        total_err += err
        heapq.heappush(heap, (-err, i, a, b, val))

    splits = 0
    counter = len(heap)
    while total_err > max(spec.rel_tol * abs(total), spec.abs_tol):
        if splits >= spec.max_subdivisions or not heap:
            raise QuadratureError(
                f"radial quadrature stalled at error {total_err:.3e} "
                f"after {splits} subdivisions", total, total_err)
        neg_err, _, a, b, val = heapq.heappop(heap)
        total -= val
        total_err += neg_err  # neg_err = -err, removes this panel's error
        mid = 0.5 * (a + b)
        for lo, hi in ((a, mid), (mid, b)):
            v, e = _panel(f, lo, hi)
            total += v
            total_err += e
            counter += 1
            heapq.heappush(heap, (-e, counter, lo, hi, v))
        splits += 1
    return total


def integrate_angular(f: Callable, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Integrate a periodic integrand over [-pi, pi) with the composite
    trapezoid rule (spectrally accurate for smooth periodic f)."""
    n = spec.angular_nodes
    psi = -np.pi + 2.0 * np.pi * np.arange(n) / n
    vals = np.asarray(f(psi), dtype=float)
    if vals.shape != psi.shape:
        raise NumericError("angular integrand must be vectorized over nodes")
    return float(vals.sum() * (2.0 * np.pi / n))


def radial_nodes(rmax: float, sigma: float, points_per_sigma: int = 8,
                 panel_nodes: int = 8):
    """Composite Gauss-Legendre nodes/weights on [0, rmax].

    Panel width tracks sigma so width-sigma features (Rice rings) are
    resolved with `points_per_sigma` nodes each.
    """
    if rmax <= 0 or sigma <= 0:
        raise ConfigError("rmax and sigma must be positive")
    xs, ws = leggauss(panel_nodes)
    npan = max(8, int(math.ceil(rmax / sigma * points_per_sigma / panel_nodes)))
    edges = np.linspace(0.0, rmax, npan + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xs).ravel()
    weights = (half[:, None] * np.broadcast_to(ws, (npan, panel_nodes))).ravel()
    return nodes, weights


def rayleigh_expectation(fn: Callable[[float], float], mean_square: float,
                         sigma: float, spec: QuadratureSpec = DEFAULT_SPEC,
                         knee_sigmas: float = 14.0, tail_factor: float = 6.5) -> float:
    """E[fn(S)] for S Rayleigh with E[S^2] = mean_square.

    Composite Gauss-Legendre panels in amplitude space: width-sigma panels
    where fn still bends (the first `knee_sigmas` noise widths, where ring
    overlap effects live), then geometrically growing panels out to
    tail_factor*sqrt(mean_square).  Plain Gauss-Laguerre converges poorly
    here because fn saturates or grows logarithmically.
    """
    if mean_square <= 0:
        raise ConfigError("mean_square must be positive")
    s_hi = tail_factor * math.sqrt(mean_square)
    knee = knee_sigmas * sigma
    edges = list(np.arange(0.0, min(knee, s_hi), sigma))
    x = edges[-1] if edges else 0.0
    while x < s_hi:
        x = min(max(x * 1.35, x + sigma), s_hi)
        edges.append(x)
    if len(edges) < 2:
        edges = [0.0, s_hi]
    xs, ws = leggauss(spec.expectation_panel_nodes)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        for xk, wk in zip(xs, ws):
            s = mid + half * xk
            weight = (2.0 * s / mean_square) * math.exp(-s * s / mean_square)
            total += half * wk * weight * fn(s)
    return total
