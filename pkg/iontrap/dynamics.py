#!/usr/bin/env python3
"""
Coherent qubit-motion dynamics on the carrier and motional sidebands in the Lamb-Dicke ladder.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from iontrap.core import DomainError, FockDistribution, thermal_distribution

log = logging.getLogger(__name__)

CARRIER = 'carrier'
RED = 'red'
BLUE = 'blue'
SIDEBAND_KINDS = (CARRIER, RED, BLUE)

# Contrast time giving 50% contrast after 1 ms
DEFAULT_CONTRAST_TIME = 1.44e-3
DEFAULT_HEATING_RATE = 1 / 0.19
DEFAULT_D_LIFETIME = 1.0


@dataclass(frozen=True)
class Sideband(object):
    """Target transition: carrier, or red/blue sideband of order >= 1."""
    kind: str
    order: int = 1

    def __post_init__(self):
        if self.kind not in SIDEBAND_KINDS:
            raise DomainError('Unknown transition {!r}, must be one of {}.'.format(
                self.kind, SIDEBAND_KINDS))
        if self.kind == CARRIER:
            object.__setattr__(self, 'order', 0)
        elif isinstance(self.order, bool) or int(self.order) != self.order or self.order < 1:
            raise DomainError('Sideband order must be an integer >= 1, got {!r}.'.format(
                self.order))

    @property
    def phonon_change(self):
        """Change of phonon number when the qubit goes S -> D."""
        return {CARRIER: 0, RED: -self.order, BLUE: self.order}[self.kind]

    @classmethod
    def parse(cls, text):
        """'carrier', 'red', 'blue2', ... -> Sideband."""
        text = text.strip().lower()
        if text == CARRIER:
            return cls(CARRIER)
        for kind in (RED, BLUE):
            if text.startswith(kind):
                suffix = text[len(kind):]
                return cls(kind, int(suffix) if suffix else 1)
        raise DomainError('Cannot parse transition {!r}.'.format(text))

    def __str__(self):
        if self.kind == CARRIER:
            return CARRIER
        return self.kind if self.order == 1 else '{}{}'.format(self.kind, self.order)


@dataclass(frozen=True)
class Pulse(object):
    """Square laser pulse on the qubit transition (rabi in rad/s, duration in s)."""
    transition: Sideband
    rabi: float
    duration: float
    phase: float = 0.0
    addressed_ion: int = 0

    def __post_init__(self):
        if self.duration < 0:
            raise DomainError('Pulse duration must be >= 0, got {!r}.'.format(self.duration))
        if self.rabi < 0:
            raise DomainError('Rabi frequency must be >= 0, got {!r}.'.format(self.rabi))


@dataclass(frozen=True)
class DecoherenceModel(object):
    """
    Exponential loss of contrast toward P_D = 1/2.

    Zero for any field disables that source.
    """
    contrast_time: float = DEFAULT_CONTRAST_TIME
    heating_rate: float = DEFAULT_HEATING_RATE
    d_lifetime: float = DEFAULT_D_LIFETIME

    def __post_init__(self):
        for key in ('contrast_time', 'heating_rate', 'd_lifetime'):
            if not getattr(self, key) >= 0:
                raise DomainError('{} must be >= 0, got {!r}.'.format(key, getattr(self, key)))

    @classmethod
    def coherent(cls):
        return cls(contrast_time=0.0, heating_rate=0.0, d_lifetime=0.0)

    @classmethod
    def from_contrast(cls, contrast, at_time, **kwargs):
        """Contrast time that leaves the given contrast after at_time."""
        if not 0 < contrast < 1:
            raise DomainError('Contrast must lie in (0, 1), got {!r}.'.format(contrast))
        return cls(contrast_time=-at_time / math.log(contrast), **kwargs)

    def envelope(self, times):
        times = np.asarray(times, dtype=float)
        if self.contrast_time == 0:
            return np.ones_like(times)
        return np.exp(-times / self.contrast_time)

    def coherence_time(self, contrast=0.5):
        """Time after which the envelope has dropped to contrast."""
        if self.contrast_time == 0:
            return math.inf
        return -self.contrast_time * math.log(contrast)


@dataclass(frozen=True, eq=False)
class ProductState(object):
    """Diagonal qubit-motion state: motion distribution times P(D) = excited."""
    motion: FockDistribution
    excited: float = 0.0

    def __post_init__(self):
        if not 0 <= self.excited <= 1:
            raise DomainError('Excited population must lie in [0, 1], got {!r}.'.format(
                self.excited))


def _as_change(sideband):
    if isinstance(sideband, Sideband):
        return sideband.phonon_change
    return int(sideband)


def rabi_frequency(n, sideband, eta, rabi):
    """
    Rabi frequency of |S,n> <-> |D,n+s>.

    Parameters
    ----------
    n : int or array of int
        Initial phonon number(s), >= 0
    sideband : Sideband or int
        Transition, or the phonon change s directly
    eta : float
        Lamb-Dicke factor, 0 <= eta < 1
    rabi : float
        Bare (carrier) Rabi frequency in rad/s

    Returns
    -------
    float or numpy.ndarray
        rabi * exp(-eta^2/2) * eta^|s| * sqrt(n_<!/n_>!) * L_{n_<}^{|s|}(eta^2),
        zero where n + s < 0
    """
    if not 0 <= eta < 1:
        raise DomainError('Lamb-Dicke factor must lie in [0, 1), got {!r}.'.format(eta))
    change = _as_change(sideband)
    numbers = np.asarray(n)
    if np.any(numbers < 0):
        raise DomainError('Phonon number must be >= 0.')
    lower = np.minimum(numbers, numbers + change)
    upper = np.maximum(numbers, numbers + change)
    valid = lower >= 0
    lower = np.where(valid, lower, 0)
    upper = np.where(valid, upper, 0)
    order = abs(change)
    factorial_ratio = np.exp(0.5 * (special.gammaln(lower + 1) - special.gammaln(upper + 1)))
    laguerre = special.eval_genlaguerre(lower, order, eta**2)
    result = rabi * math.exp(-eta**2 / 2) * eta**order * factorial_ratio * laguerre
    result = np.where(valid, result, 0.0)
    if result.ndim == 0:
        return float(result)
    return result


def pi_time(n, sideband, eta, rabi):
    """Duration of a pi pulse on |S,n> <-> |D,n+s>."""
    frequency = abs(rabi_frequency(n, sideband, eta, rabi))
    if frequency == 0:
        raise DomainError('Transition from n={} on {} is not driven.'.format(n, sideband))
    return math.pi / frequency


def simulate_flops(initial, pulse, decoherence, times, eta):
    """
    D-state probability while the pulse acts for each time in times.

    P_D(t) = sum_n p_n sin^2(W_n t / 2) env(t) + (1 - env(t)) / 2 for population
    starting in S; population starting in D flops back through |S, n-s>.

    :param initial: ProductState
    :param pulse: Pulse giving transition and Rabi frequency; its duration is ignored
    :param decoherence: DecoherenceModel providing the envelope
    :param times: evaluation times in s
    :param eta: Lamb-Dicke factor of the driven mode
    :return: numpy.ndarray of P_D, same length as times
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise DomainError('Evaluation times must be >= 0.')
    change = pulse.transition.phonon_change
    populations = initial.motion.populations
    numbers = initial.motion.numbers
    from_ground = rabi_frequency(numbers, change, eta, pulse.rabi)
    from_excited = rabi_frequency(np.maximum(numbers - change, 0), change, eta, pulse.rabi)
    from_excited = np.where(numbers - change >= 0, from_excited, 0.0)

    phase_ground = np.outer(times, from_ground) / 2
    phase_excited = np.outer(times, from_excited) / 2
    coherent = ((1 - initial.excited) * np.sin(phase_ground)**2 @ populations
                + initial.excited * (1 - np.sin(phase_excited)**2) @ populations)
    envelope = decoherence.envelope(times)
    return np.clip(coherent * envelope + (1 - envelope) / 2, 0.0, 1.0)


def sideband_excitation(motion, pulse, eta, detunings):
    """
    D-state probability after a square pulse detuned from its transition.

    Starts from S; each Fock component flops at its generalized Rabi frequency.

    :param detunings: detunings from the transition in rad/s
    """
    detunings = np.asarray(detunings, dtype=float)
    frequencies = rabi_frequency(motion.numbers, pulse.transition, eta, pulse.rabi)
    squared = frequencies[None, :]**2
    generalized = np.sqrt(squared + detunings[:, None]**2)
    with np.errstate(invalid='ignore', divide='ignore'):
        weight = np.where(generalized > 0, squared / generalized**2, 0.0)
    excitation = weight * np.sin(generalized * pulse.duration / 2)**2
    return excitation @ motion.populations


@dataclass(frozen=True)
class Thermometry(object):
    ratio: float
    nbar: float
    ground_state_population: float


def sideband_ratio_to_nbar(p_red, p_blue):
    """
    Mean occupation from red and blue sideband excitation of a thermal state.

    R = P_red / P_blue, nbar = R / (1 - R), p0 = 1 - R.
    """
    if not (0 <= p_red <= 1 and 0 < p_blue <= 1):
        raise DomainError('Excitations must satisfy 0 <= P_red and 0 < P_blue <= 1, got '
                          '{!r}, {!r}.'.format(p_red, p_blue))
    ratio = p_red / p_blue
    if ratio >= 1:
        raise DomainError('Sideband ratio {!r} >= 1 does not describe a thermal state.'.format(
            ratio))
    return Thermometry(ratio=ratio, nbar=ratio / (1 - ratio), ground_state_population=1 - ratio)


def sideband_thermometry(motion, eta, rabi, duration):
    """Probe red and blue sidebands with equal pulses and infer nbar."""
    red = Pulse(Sideband(RED), rabi, duration)
    blue = Pulse(Sideband(BLUE), rabi, duration)
    state = ProductState(motion)
    coherent = DecoherenceModel.coherent()
    p_red = simulate_flops(state, red, coherent, [duration], eta)[0]
    p_blue = simulate_flops(state, blue, coherent, [duration], eta)[0]
    return sideband_ratio_to_nbar(p_red, p_blue)


@dataclass(frozen=True, eq=False)
class FockPreparation(object):
    state: ProductState
    duration: float
    population_one: float
    fidelity: float


def prepare_fock_one(eta, rabi, decoherence, duration=None, n_max=None):
    """
    Prepare |S, n=1> from the ground state.

    A blue-sideband pulse (a pi pulse unless duration is given) moves |S,0> to
    |D,1>; an ideal instantaneous repump returns D to S keeping the phonon.
    fidelity is the coherent part exp(-t/tau_c) sin^2(W t/2), population_one the
    n=1 population including the incoherent half of the envelope model.
    """
    if n_max is not None and n_max < 1:
        raise DomainError('Preparing n=1 needs n_max >= 1, got {!r}.'.format(n_max))
    blue = Sideband(BLUE)
    if duration is None:
        duration = pi_time(0, blue, eta, rabi)
    ground = ProductState(thermal_distribution(0.0, n_max))
    pulse = Pulse(blue, rabi, duration)
    population_one = float(simulate_flops(ground, pulse, decoherence, [duration], eta)[0])
    coherent = math.sin(rabi_frequency(0, blue, eta, rabi) * duration / 2)**2
    fidelity = coherent * float(decoherence.envelope([duration])[0])

    populations = np.zeros(ground.motion.populations.size)
    populations[0] = 1 - population_one
    populations[1] = population_one
    motion = FockDistribution.from_populations(populations)
    return FockPreparation(state=ProductState(motion), duration=duration,
                           population_one=population_one, fidelity=fidelity)


def ramsey_contrast(delay, laser_fwhm):
    """Ramsey fringe contrast exp(-pi FWHM T) of a Lorentzian laser line (FWHM in Hz)."""
    if delay < 0:
        raise DomainError('Ramsey delay must be >= 0, got {!r}.'.format(delay))
    if laser_fwhm < 0:
        raise DomainError('Laser linewidth must be >= 0, got {!r}.'.format(laser_fwhm))
    return math.exp(-math.pi * laser_fwhm * delay)


def ramsey_time(laser_fwhm, contrast=1 / math.e):
    """Delay at which the Ramsey contrast has dropped to contrast."""
    if not laser_fwhm > 0:
        return math.inf
    return -math.log(contrast) / (math.pi * laser_fwhm)


def fit_flop_frequency(times, excitation):
    """
    Fit offset + amplitude sin^2(W t / 2) to a flop curve; returns W in rad/s.

    The start value comes from the peak of a zero-padded FFT.
    """
    times = np.asarray(times, dtype=float)
    excitation = np.asarray(excitation, dtype=float)
    step = times[1] - times[0]
    padded = 16 * times.size
    spectrum = np.abs(np.fft.rfft(excitation - excitation.mean(), n=padded))
    frequencies = np.fft.rfftfreq(padded, d=step)
    guess = 2 * math.pi * frequencies[1 + int(np.argmax(spectrum[1:]))]

    def model(t, offset, amplitude, frequency):
        return offset + amplitude * np.sin(frequency * t / 2)**2

    start = (excitation.min(), excitation.max() - excitation.min(), guess)
    parameters, _ = optimize.curve_fit(model, times, excitation, p0=start,
                                       xtol=1e-12, ftol=1e-12, maxfev=10000)
    return abs(parameters[2])
