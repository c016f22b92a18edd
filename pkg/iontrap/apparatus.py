#!/usr/bin/env python3
"""
Measurement chain and addressing optics.

Quantum-jump readout: the bright (S) state scatters on the cycling transition,
the dark (D) state only shows background unless it decays during the window.
Addressing: a Gaussian beam steered by an electro-optic deflector.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats

from iontrap.core import DomainError, make_rng

log = logging.getLogger(__name__)

# Threshold scan reaches this many standard deviations above the bright mean
THRESHOLD_SCAN_SIGMAS = 10
# Imaging resolution quoted for the addressing optics
IMAGING_RESOLUTION = 2e-6
# Neighbour excitation quoted for 5 um separation, kept next to the model value
REPORTED_CROSSTALK = 0.01


@dataclass(frozen=True)
class DetectionConfig(object):
    """
    Photon-counting readout.

    Rates in 1/s, window and d_lifetime in s; d_lifetime=inf disables decay.
    """
    collection_fraction: float = 1e-2
    quantum_efficiency: float = 0.10
    scattering_rate_bright: float = 3e7
    background_rate: float = 1000.0
    window: float = 2e-3
    d_lifetime: float = 1.0

    def __post_init__(self):
        for key in ('collection_fraction', 'quantum_efficiency'):
            value = getattr(self, key)
            if not 0 < value <= 1:
                raise DomainError('{} must lie in (0, 1], got {!r}.'.format(key, value))
        for key in ('scattering_rate_bright', 'background_rate'):
            if not getattr(self, key) >= 0:
                raise DomainError('{} must be >= 0, got {!r}.'.format(key, getattr(self, key)))
        if not self.window > 0:
            raise DomainError('Detection window must be > 0, got {!r}.'.format(self.window))
        if not self.d_lifetime > 0:
            raise DomainError('D lifetime must be > 0, got {!r}.'.format(self.d_lifetime))

    @property
    def signal_mean(self):
        """Mean fluorescence counts of the bright state in one window."""
        return (self.scattering_rate_bright * self.collection_fraction
                * self.quantum_efficiency * self.window)

    @property
    def background_mean(self):
        return self.background_rate * self.window

    @property
    def bright_mean(self):
        return self.signal_mean + self.background_mean

    @property
    def decay_probability(self):
        """Probability that D decays before the window ends."""
        return -math.expm1(-self.window / self.d_lifetime)

    @property
    def scan_limit(self):
        spread = THRESHOLD_SCAN_SIGMAS * math.sqrt(self.bright_mean)
        return int(math.ceil(self.bright_mean + spread))


@dataclass(frozen=True, eq=False)
class CountDistributions(object):
    counts: np.ndarray
    bright: np.ndarray
    dark: np.ndarray


def _decayed_pmf(counts, background, signal):
    # Decay at a uniform fraction u of the window: counts ~ Poisson(background + signal u)
    if signal == 0:
        return stats.poisson.pmf(counts, background)
    return (stats.poisson.cdf(counts, background)
            - stats.poisson.cdf(counts, background + signal)) / signal


def count_distributions(cfg, k_max=None):
    """
    Exact count probabilities of both qubit states for k = 0..k_max.

    The dark state mixes background-only counts with the uniform-decay model
    weighted by the decay probability.
    """
    if k_max is None:
        k_max = cfg.scan_limit + 10
    counts = np.arange(k_max + 1)
    bright = stats.poisson.pmf(counts, cfg.bright_mean)
    p_decay = cfg.decay_probability
    dark = ((1 - p_decay) * stats.poisson.pmf(counts, cfg.background_mean)
            + p_decay * _decayed_pmf(counts, cfg.background_mean, cfg.signal_mean))
    return CountDistributions(counts=counts, bright=bright, dark=dark)


def detection_error(cfg, threshold):
    """
    Misclassification probabilities (eps_bright, eps_dark) at an integer threshold.

    Counts above threshold read as bright.
    """
    if isinstance(threshold, bool) or int(threshold) != threshold or threshold < 0:
        raise DomainError('Threshold must be an integer >= 0, got {!r}.'.format(threshold))
    threshold = int(threshold)
    eps_bright = float(stats.poisson.cdf(threshold, cfg.bright_mean))
    counts = np.arange(threshold + 1)
    p_decay = cfg.decay_probability
    dark_below = ((1 - p_decay) * stats.poisson.cdf(threshold, cfg.background_mean)
                  + p_decay * float(np.sum(_decayed_pmf(counts, cfg.background_mean,
                                                         cfg.signal_mean))))
    eps_dark = float(min(max(1.0 - dark_below, 0.0), 1.0))
    return eps_bright, eps_dark


def optimal_threshold(cfg):
    """
    Threshold minimizing eps_bright + eps_dark.

    Exhaustive scan over 0..bright_mean + 10 sqrt(bright_mean); ties go to the
    lowest threshold.

    :return: (threshold, eps_bright, eps_dark)
    """
    best = None
    for threshold in range(cfg.scan_limit + 1):
        eps_bright, eps_dark = detection_error(cfg, threshold)
        if best is None or eps_bright + eps_dark < best[1] + best[2]:
            best = (threshold, eps_bright, eps_dark)
    return best


@dataclass(frozen=True)
class DetectionSummary(object):
    threshold: int
    eps_bright: float
    eps_dark: float
    optimal_threshold: int
    optimal_eps_bright: float
    optimal_eps_dark: float
    threshold_outside_scan: bool

    @property
    def total_error(self):
        return self.eps_bright + self.eps_dark

    @property
    def optimal_total_error(self):
        return self.optimal_eps_bright + self.optimal_eps_dark


def detection_summary(cfg, threshold):
    """Errors at a user threshold next to the error-minimizing one."""
    eps_bright, eps_dark = detection_error(cfg, threshold)
    best, best_bright, best_dark = optimal_threshold(cfg)
    outside = threshold > cfg.scan_limit
    if outside:
        log.warning('Threshold %d lies beyond the scanned range 0..%d', threshold,
                    cfg.scan_limit)
    return DetectionSummary(threshold=int(threshold), eps_bright=eps_bright, eps_dark=eps_dark,
                            optimal_threshold=best, optimal_eps_bright=best_bright,
                            optimal_eps_dark=best_dark, threshold_outside_scan=outside)


def simulate_detection(cfg, threshold, shots, seed):
    """
    Monte Carlo of the readout with a seeded PCG64 stream.

    Draw order is fixed: bright counts, decay flags, decay fractions, dark counts.

    :return: (eps_bright, eps_dark) as observed frequencies
    """
    if shots < 1:
        raise DomainError('Need at least one shot, got {!r}.'.format(shots))
    rng = make_rng(seed)
    bright = rng.poisson(cfg.bright_mean, shots)
    decayed = rng.random(shots) < cfg.decay_probability
    fraction = rng.random(shots)
    dark = rng.poisson(cfg.background_mean + decayed * cfg.signal_mean * fraction)
    return float(np.mean(bright <= threshold)), float(np.mean(dark > threshold))


@dataclass(frozen=True)
class BeamProfile(object):
    """Gaussian Rabi-frequency profile of the addressing beam, 1/e half-width in m."""
    width_1e: float = 3.7e-6
    center: float = 0.0

    def __post_init__(self):
        if not self.width_1e > 0:
            raise DomainError('Beam width must be > 0, got {!r}.'.format(self.width_1e))

    def relative_rabi(self, position):
        return np.exp(-((np.asarray(position, dtype=float) - self.center) / self.width_1e)**2)


def crosstalk_probability(beam, distance, pulse_area=math.pi):
    """Excitation of a ground-state neighbour at distance m from the beam centre."""
    if distance < 0:
        raise DomainError('Distance must be >= 0, got {!r}.'.format(distance))
    return math.sin(pulse_area / 2 * float(beam.relative_rabi(beam.center + distance)))**2


@dataclass(frozen=True)
class Deflector(object):
    """Electro-optic deflector: displacement at the ions and beam angle per volt."""
    displacement_per_volt: float = 23e-6 / 1e3
    angle_per_volt: float = 5e-3 / 1e3
    max_voltage: float = 3e3

    @property
    def effective_focal_length(self):
        return self.displacement_per_volt / self.angle_per_volt


DEFLECTOR = Deflector()


def deflector_displacement(voltage, deflector=DEFLECTOR):
    """Beam displacement at the ions (m) for a deflector voltage (V)."""
    if abs(voltage) > deflector.max_voltage:
        raise DomainError('Deflector voltage {!r} V outside +-{:g} V.'.format(
            voltage, deflector.max_voltage))
    return deflector.displacement_per_volt * voltage


def deflector_voltage(displacement, deflector=DEFLECTOR):
    """Voltage that moves the beam by displacement (m)."""
    voltage = displacement / deflector.displacement_per_volt
    if abs(voltage) > deflector.max_voltage:
        raise DomainError('Displacement {!r} m needs {:.4g} V, outside +-{:g} V.'.format(
            displacement, voltage, deflector.max_voltage))
    return voltage


def effective_focal_length(deflector=DEFLECTOR):
    return deflector.effective_focal_length


ADDRESSABILITY_COLUMNS = ['left_ion', 'right_ion', 'spacing_m', 'resolvable', 'crosstalk_pi',
                          'crosstalk_reported', 'hop_voltage_v']


def addressability_report(chain, beam, resolution=IMAGING_RESOLUTION, deflector=DEFLECTOR):
    """
    Per adjacent pair of a string: spacing, resolvability and pi-pulse crosstalk.

    :param chain: chain.ChainGeometry
    :param beam: BeamProfile of the addressing laser
    :return: pandas.DataFrame, empty for a single ion
    """
    rows = []
    for left, spacing in enumerate(chain.spacings):
        rows.append({
            'left_ion': left,
            'right_ion': left + 1,
            'spacing_m': float(spacing),
            'resolvable': bool(spacing > resolution),
            'crosstalk_pi': crosstalk_probability(beam, spacing),
            'crosstalk_reported': REPORTED_CROSSTALK,
            'hop_voltage_v': deflector_voltage(spacing, deflector),
        })
    return pd.DataFrame(rows, columns=ADDRESSABILITY_COLUMNS)
