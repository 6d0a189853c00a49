"""Physical configuration and the closed-form rate quantities.

The channel is Y = h X1 X2 + Z with Z complex Gaussian of power sigma^2.
Co-phasing the reflecting elements gives the composite magnitude
htilde = sum_k rho |v_k g_k|; every rate computed in this package depends
on the configuration only through htilde, the noise power and the transmit
power budget.  Public rates are reported in bits; internals use nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ConfigError

LN2 = math.log(2.0)


def composite_gain(element_gains: Sequence[float]) -> float:
    """Co-phased composite channel magnitude: the sum of per-element gains.

    Co-phasing aligns every reflected path, so the achievable magnitude is
    simply the sum of the individual magnitudes.
    """
    gains = list(element_gains)
    if not gains:
        raise ConfigError("composite_gain needs at least one element gain")
    if any(g < 0 or not math.isfinite(g) for g in gains):
        raise ConfigError("element gains must be finite and nonnegative")
    return float(math.fsum(gains))


@dataclass(frozen=True)
class ChannelConfig:
    """Immutable system configuration.

    element_gains holds rho*|v_k g_k| per reflecting element (identical in
    the default scenario but heterogeneous values are accepted).
    """

    element_gains: tuple
    noise_power: float
    power_budget: float
    composite_gain: float = field(init=False)

    def __post_init__(self):
        gain = composite_gain(self.element_gains)
        if self.noise_power <= 0 or not math.isfinite(self.noise_power):
            raise ConfigError("noise_power must be strictly positive")
        if self.power_budget <= 0 or not math.isfinite(self.power_budget):
            raise ConfigError("power_budget must be strictly positive")
        object.__setattr__(self, "element_gains", tuple(float(g) for g in self.element_gains))
        object.__setattr__(self, "composite_gain", gain)

    @property
    def element_count(self) -> int:
        return len(self.element_gains)

    @property
    def snr_db(self) -> float:
        """Transmit SNR 10*log10(P/sigma^2)."""
        return 10.0 * math.log10(self.power_budget / self.noise_power)

    @property
    def receive_snr(self) -> float:
        """P*htilde^2/sigma^2, the SNR seen at full transmit amplitude."""
        return self.power_budget * self.composite_gain**2 / self.noise_power

    @classmethod
    def uniform(cls, element_count: int, element_gain_sq: float,
                noise_power: float, power_budget: float) -> "ChannelConfig":
        """Identical per-element power gains, the usual simulation scenario."""
        if element_count < 1:
            raise ConfigError("element_count must be >= 1")
        if element_gain_sq < 0:
            raise ConfigError("element_gain_sq must be nonnegative")
        g = math.sqrt(element_gain_sq)
        return cls(element_gains=(g,) * element_count,
                   noise_power=noise_power, power_budget=power_budget)

    @classmethod
    def default_scenario(cls, snr_db: float, element_count: int = 64,
                         element_gain_sq: float = 0.003) -> "ChannelConfig":
        """64 elements with per-element power gain 0.003, unit noise power,
        transmit power set from the SNR in dB."""
        return cls.uniform(element_count, element_gain_sq,
                           noise_power=1.0, power_budget=10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class SnrPoint:
    """A transmit-SNR point in both dB and linear form."""

    snr_db: float
    snr_linear: float

    def __post_init__(self):
        if self.snr_linear <= 0:
            raise ConfigError("snr_linear must be positive")
        expected = 10.0 ** (self.snr_db / 10.0)
        if abs(self.snr_linear - expected) > 1e-12 * max(1.0, expected):
            raise ConfigError("snr_db and snr_linear disagree")

    @classmethod
    def from_db(cls, snr_db: float) -> "SnrPoint":
        return cls(snr_db=float(snr_db), snr_linear=10.0 ** (snr_db / 10.0))

    @classmethod
    def from_linear(cls, snr_linear: float) -> "SnrPoint":
        if snr_linear <= 0:
            raise ConfigError("snr_linear must be positive")
        return cls(snr_db=10.0 * math.log10(snr_linear), snr_linear=float(snr_linear))


def c1_primary_capacity(cfg: ChannelConfig) -> float:
    """Maximum primary rate in bits: log2(1 + P*htilde^2/sigma^2).

    Achieved by a Gaussian primary input while the surface only beamforms.
    """
    return math.log1p(cfg.receive_snr) / LN2


def c_sum_max(cfg: ChannelConfig) -> float:
    """Maximum sum rate in bits.

    The product X1*X2 can be made complex Gaussian with power P, so the sum
    rate equals the primary capacity: log2(1 + P*htilde^2/sigma^2).
    """
    return math.log1p(cfg.receive_snr) / LN2
