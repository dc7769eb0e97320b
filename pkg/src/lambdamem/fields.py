"""Memory/control parameter vectors and the Gaussian pulse envelopes.

Units are normalized: times in 1/gamma, detunings in gamma, lengths in L.
"""
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidArgumentError

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


def _finite(name, value):
    if not math.isfinite(value):
        raise InvalidArgumentError(f"{name} must be finite, got {value}")


@dataclass(frozen=True)
class MemoryParams:
    """Optical depth, signal FWHM duration, two-photon detuning, spin decay."""

    d: float
    tau_sig: float
    delta: float = 0.0
    gamma_b: float = 0.0

    def __post_init__(self):
        for name in ("d", "tau_sig", "delta", "gamma_b"):
            _finite(name, getattr(self, name))
        # d == 0 is allowed and means free propagation
        if self.d < 0:
            raise InvalidArgumentError(f"optical depth must be >= 0, got {self.d}")
        if self.tau_sig <= 0:
            raise InvalidArgumentError(f"signal duration must be > 0, got {self.tau_sig}")
        if self.gamma_b < 0:
            raise InvalidArgumentError(f"gamma_b must be >= 0, got {self.gamma_b}")

    @property
    def sigma(self):
        return self.tau_sig * FWHM_TO_SIGMA

    @property
    def gamma_bar(self):
        """Complex polarization decay 1 - i*delta."""
        return complex(1.0, -self.delta)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ControlParams:
    """Gaussian control pulse: area (rad), delay and FWHM duration (1/gamma).

    A positive delay means the control peaks after the signal. ``theta == 0``
    is accepted as the no-control limit.
    """

    theta: float
    delay: float
    tau_ctrl: float

    def __post_init__(self):
        for name in ("theta", "delay", "tau_ctrl"):
            _finite(name, getattr(self, name))
        if self.theta < 0:
            raise InvalidArgumentError(f"pulse area must be >= 0, got {self.theta}")
        if self.tau_ctrl <= 0:
            raise InvalidArgumentError(f"control duration must be > 0, got {self.tau_ctrl}")

    @property
    def sigma(self):
        return self.tau_ctrl * FWHM_TO_SIGMA

    @property
    def peak_rabi(self):
        return self.theta / (2.0 * math.sqrt(math.pi) * self.sigma)

    def to_dict(self):
        return asdict(self)


def signal_envelope(tau, tau_sig):
    """Input signal amplitude exp(-tau^2 / 4 sigma^2), unit peak at tau = 0."""
    if not tau_sig > 0:
        raise InvalidArgumentError(f"signal duration must be > 0, got {tau_sig}")
    sigma = tau_sig * FWHM_TO_SIGMA
    return np.exp(-np.square(tau) / (4.0 * sigma * sigma))


def control_envelope(tau, g):
    """Real Rabi frequency of the Gaussian control; integrates to ``g.theta``."""
    if not isinstance(g, ControlParams):
        raise InvalidArgumentError("control_envelope needs a ControlParams")
    s = g.sigma
    return g.peak_rabi * np.exp(-np.square((np.asarray(tau) - g.delay) / (2.0 * s)))


def signal_bandwidth(tau_sig):
    """Spectral intensity FWHM (units of gamma) of a transform-limited pulse."""
    if not tau_sig > 0:
        raise InvalidArgumentError(f"signal duration must be > 0, got {tau_sig}")
    return 2.0 * np.pi * 2.0 * np.log(2.0) / (np.pi * tau_sig)
