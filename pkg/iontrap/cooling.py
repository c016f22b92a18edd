#!/usr/bin/env python3
"""
Doppler limits, resolved-sideband and EIT cooling of single motional modes, and anomalous heating.

All rates in this module are in 1/s; angular frequencies in rad/s unless the
name says Hz.
"""
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from iontrap.core import (DomainError, FockDistribution, NORM_TOLERANCE, TAIL_TOLERANCE, TWO_PI,
                          TruncationError, default_n_max, thermal_distribution, thermal_tail)

log = logging.getLogger(__name__)

# Recoil geometry factor of dipole emission
DIPOLE_RECOIL = 2 / 5
DEFAULT_STEPS = 601
# Largest Fock ladder integrated with a dense propagator
MAX_N_MAX = 4000


@dataclass(frozen=True)
class SidebandCoolingParams(object):
    """
    Narrow-line cooling of one mode.

    eta, rabi (rad/s) on the qubit transition, quench-broadened gamma_eff
    (rad/s), laser detuning (rad/s), trap_frequency (rad/s), recoil geometry.
    """
    eta: float
    rabi: float
    gamma_eff: float
    detuning: float
    trap_frequency: float
    recoil: float = DIPOLE_RECOIL

    def __post_init__(self):
        if not 0 <= self.eta < 1:
            raise DomainError('Lamb-Dicke factor must lie in [0, 1), got {!r}.'.format(self.eta))
        for key in ('rabi', 'gamma_eff', 'trap_frequency', 'recoil'):
            if not getattr(self, key) >= 0:
                raise DomainError('{} must be >= 0, got {!r}.'.format(key, getattr(self, key)))
        if not self.gamma_eff > 0:
            raise DomainError('Effective linewidth must be > 0.')

    def scattering(self, detuning):
        """Lorentzian excitation rate W(x) = (rabi^2/2) G / ((G/2)^2 + x^2)."""
        return (self.rabi**2 / 2) * self.gamma_eff / ((self.gamma_eff / 2)**2 + detuning**2)


@dataclass(frozen=True)
class CoolingRates(object):
    a_minus: float
    a_plus: float

    @property
    def net(self):
        return self.a_minus - self.a_plus


def doppler_limit(gamma, trap_frequency):
    """
    Doppler-cooling limit nbar = gamma / (2 nu) - 1/2 at optimal detuning, >= 0.

    Both arguments in rad/s.
    """
    if not (gamma > 0 and trap_frequency > 0):
        raise DomainError('Linewidth and trap frequency must be > 0.')
    return max(0.0, gamma / (2 * trap_frequency) - 0.5)


def quench_linewidth(rabi_quench, gamma_quench):
    """Effective D5/2 linewidth rabi_q^2 / gamma_P3/2 from adiabatic elimination."""
    if not gamma_quench > 0:
        raise DomainError('Quench level linewidth must be > 0, got {!r}.'.format(gamma_quench))
    return rabi_quench**2 / gamma_quench


def sideband_cooling_rates(params):
    """
    Cooling (A-) and heating (A+) rate coefficients of the phonon ladder.

    A- = eta^2 W(D + nu) + recoil eta^2 W(D)
    A+ = eta^2 W(D - nu) + recoil eta^2 W(D)
    """
    eta2 = params.eta**2
    diffusion = params.recoil * eta2 * params.scattering(params.detuning)
    a_minus = eta2 * params.scattering(params.detuning + params.trap_frequency) + diffusion
    a_plus = eta2 * params.scattering(params.detuning - params.trap_frequency) + diffusion
    return CoolingRates(a_minus=a_minus, a_plus=a_plus)


def rabi_for_cooling_rate(params, a_minus):
    """Rabi frequency that gives params the cooling coefficient a_minus."""
    unit = sideband_cooling_rates(replace(params, rabi=1.0)).a_minus
    if not unit > 0:
        raise DomainError('No cooling coefficient reachable for these parameters.')
    return math.sqrt(a_minus / unit)


def steady_state_nbar(a_minus, a_plus, heating_rate=0.0):
    """(A+ + R) / (A- - A+ - R); infinite when heating wins."""
    net = a_minus - a_plus - heating_rate
    if net <= 0:
        return math.inf
    return (a_plus + heating_rate) / net


def cooling_generator(a_minus, birth, n_max):
    """
    Birth-death generator M with dp/dt = M p on Fock states 0..n_max.

    Births out of n_max are dropped so that columns sum to zero.
    """
    numbers = np.arange(n_max + 1, dtype=float)
    generator = np.diag(-a_minus * numbers - birth * (numbers + 1))
    generator[n_max, n_max] = -a_minus * n_max
    generator += np.diag(a_minus * numbers[1:], k=1)
    generator += np.diag(birth * numbers[1:], k=-1)
    return generator


@dataclass(frozen=True, eq=False)
class CoolingTrajectory(object):
    """Mean occupation and ground-state population along a cooling run."""
    times: np.ndarray
    nbar: np.ndarray
    ground_state_population: np.ndarray
    populations: np.ndarray
    steady_state_nbar: float
    has_steady_state: bool
    truncated: bool = False

    @property
    def final(self):
        return FockDistribution.from_populations(self.populations[-1])

    def time_to_reach(self, ground_state_population):
        """First time at which p0 reaches the target, None if never."""
        reached = np.nonzero(self.ground_state_population >= ground_state_population)[0]
        if reached.size == 0:
            return None
        return float(self.times[reached[0]])


def sideband_cooling_simulate(params, initial, heating_rate, t_end, steps=DEFAULT_STEPS,
                              n_max=None):
    """
    Integrate the birth-death ladder of sideband cooling with anomalous heating.

    dp_n/dt = A-[(n+1)p_{n+1} - n p_n] + (A+ + R)[n p_{n-1} - (n+1)p_n]
    propagated exactly with the matrix exponential of one time step.

    Parameters
    ----------
    params : SidebandCoolingParams
        Cooling laser and mode
    initial : FockDistribution
        Starting motional state
    heating_rate : float
        Anomalous heating R in phonons/s
    t_end : float
        Simulated time in s
    steps : int
        Number of output times including 0 and t_end
    n_max : int, optional
        Fock truncation, at least the initial one

    Returns
    -------
    CoolingTrajectory
        truncated is set (with a warning) when more than 1e-9 of the
        population ever sat in the top Fock state

    Raises
    ------
    TruncationError
        If n_max cuts off more than 1e-9 of the steady state, or the ladder
        would need more than MAX_N_MAX + 1 states
    """
    if heating_rate < 0:
        raise DomainError('Heating rate must be >= 0, got {!r}.'.format(heating_rate))
    if not t_end > 0 or steps < 2:
        raise DomainError('Need t_end > 0 and at least two steps.')
    rates = sideband_cooling_rates(params)
    nbar_ss = steady_state_nbar(rates.a_minus, rates.a_plus, heating_rate)
    has_steady_state = math.isfinite(nbar_ss)
    if not has_steady_state:
        log.warning('Heating (A+ + R = %.4g/s) outweighs cooling (A- = %.4g/s); '
                    'no steady state exists', rates.a_plus + heating_rate, rates.a_minus)

    if n_max is None:
        largest = initial.nbar if not has_steady_state else max(initial.nbar, nbar_ss)
        n_max = default_n_max(largest)
    n_max = max(n_max, initial.n_max)
    if n_max > MAX_N_MAX:
        raise TruncationError('Fock ladder of {} states exceeds the limit of {}.'.format(
            n_max + 1, MAX_N_MAX + 1))
    if has_steady_state and thermal_tail(nbar_ss, n_max) > TAIL_TOLERANCE:
        raise TruncationError('Steady-state thermal tail {:.3g} above n_max={} exceeds {:g}.'
                              .format(thermal_tail(nbar_ss, n_max), n_max, TAIL_TOLERANCE))
    generator = cooling_generator(rates.a_minus, rates.a_plus + heating_rate, n_max)
    times = np.linspace(0.0, t_end, steps)
    propagator = linalg.expm(generator * (times[1] - times[0]))

    populations = np.empty((steps, n_max + 1))
    populations[0] = initial.padded(n_max).populations
    for k in range(1, steps):
        populations[k] = propagator @ populations[k - 1]
    numbers = np.arange(n_max + 1)
    truncated = bool(populations[:, -1].max() > TAIL_TOLERANCE)
    if truncated:
        log.warning('Population %.3g reached the top Fock state n_max=%d; '
                    'mean occupation is biased low', populations[:, -1].max(), n_max)
    return CoolingTrajectory(times=times, nbar=populations @ numbers,
                             ground_state_population=populations[:, 0].copy(),
                             populations=populations, steady_state_nbar=nbar_ss,
                             has_steady_state=has_steady_state, truncated=truncated)


def cool_modes(params, modes, initial_nbars, heating_rate, t_end, steps=DEFAULT_STEPS):
    """
    Cool each normal mode on its own red sideband.

    params supplies the laser (rabi, gamma_eff, recoil); detuning and trap
    frequency are set to -nu_m and nu_m, eta to the mode's factor. Modes are
    independent: phonons scattered into the others are ignored.

    :param modes: core.MotionalMode per mode
    :return: list of CoolingTrajectory, one per mode
    """
    trajectories = []
    for mode, nbar in zip(modes, initial_nbars):
        omega = mode.angular_frequency
        mode_params = replace(params, eta=mode.lamb_dicke, detuning=-omega, trap_frequency=omega)
        log.debug('cooling %s at %.4g Hz', mode.label, mode.frequency)
        trajectories.append(sideband_cooling_simulate(
            mode_params, thermal_distribution(nbar), heating_rate, t_end, steps))
    return trajectories


def heating_evolution(nbar_initial, rate, duration):
    """Mean occupation after duration s of heating at rate phonons/s (linear)."""
    if rate < 0:
        raise DomainError('Heating rate must be >= 0, got {!r}.'.format(rate))
    if duration < 0:
        raise DomainError('Duration must be >= 0, got {!r}.'.format(duration))
    return nbar_initial + rate * duration


@dataclass(frozen=True)
class EITCoolingResult(object):
    """Steady state of EIT cooling of one mode; scattering rates in photons/s."""
    mode_frequency: float
    eta: float
    scattering_red: float
    scattering_blue: float
    scattering_carrier: float
    a_minus: float
    a_plus: float
    heating_rate: float
    nbar: float
    cooling: bool

    @property
    def ground_state_population(self):
        if not math.isfinite(self.nbar):
            return 0.0
        return 1 / (self.nbar + 1)

    @property
    def cooling_rate(self):
        return self.a_minus - self.a_plus


def eit_cooling_steady_state(manifold, mode_frequency, eta, heating_rate=0.0,
                             recoil=DIPOLE_RECOIL):
    """
    Steady-state occupation of one mode under EIT cooling.

    The probe sits on the carrier (dark resonance); the red sideband samples the
    absorption profile S at two-photon detuning +nu, the blue one at -nu:
    nbar = (S(-nu) + a S(0) + R/eta^2) / (S(+nu) - S(-nu) - R/eta^2).

    :param manifold: liouville.DressedManifold fixing both beams
    :param mode_frequency: mode frequency in Hz
    :param eta: Lamb-Dicke factor of the probe-dressing wave-vector difference
    :param heating_rate: anomalous heating in phonons/s
    :return: EITCoolingResult
    """
    if not mode_frequency > 0:
        raise DomainError('Mode frequency must be > 0, got {!r}.'.format(mode_frequency))
    if heating_rate < 0:
        raise DomainError('Heating rate must be >= 0, got {!r}.'.format(heating_rate))
    omega = TWO_PI * mode_frequency
    carrier = manifold.delta_sigma
    red = manifold.scattering_rate(carrier + omega)
    blue = manifold.scattering_rate(carrier - omega)
    centre = manifold.scattering_rate(carrier)

    eta2 = eta**2
    a_minus = eta2 * (red + recoil * centre)
    a_plus = eta2 * (blue + recoil * centre)
    nbar = steady_state_nbar(a_minus, a_plus, heating_rate)
    cooling = red > blue and math.isfinite(nbar)
    if not cooling:
        log.warning('EIT profile heats the %.4g Hz mode (S(+nu)=%.4g, S(-nu)=%.4g)',
                    mode_frequency, red, blue)
    return EITCoolingResult(mode_frequency=mode_frequency, eta=eta, scattering_red=red,
                            scattering_blue=blue, scattering_carrier=centre,
                            a_minus=a_minus, a_plus=a_plus, heating_rate=heating_rate,
                            nbar=nbar, cooling=cooling)


def eit_heating_for_nbar(manifold, mode_frequency, eta, nbar, recoil=DIPOLE_RECOIL):
    """
    Anomalous heating rate that holds one EIT-cooled mode at a measured nbar.

    Inverts nbar = (A+ + R) / (A- - A+ - R) for R. Heating that reaches the
    ions but is not part of the dressed-level model (trap noise, residual
    light of other beams) enters only through this rate.

    :param nbar: measured steady-state occupation, above the laser limit
    :return: R in phonons/s
    """
    if not (nbar > 0 and math.isfinite(nbar)):
        raise DomainError('Reference occupation must be finite and > 0, got {!r}.'.format(nbar))
    result = eit_cooling_steady_state(manifold, mode_frequency, eta, 0.0, recoil)
    if not result.cooling:
        raise DomainError('The {:.4g} Hz mode is not cooled; no heating rate reproduces '
                          'nbar={!r}.'.format(mode_frequency, nbar))
    rate = (nbar * result.cooling_rate - result.a_plus) / (1 + nbar)
    if rate < -NORM_TOLERANCE * result.a_plus:
        raise DomainError('nbar={!r} lies below the laser limit {:.4g} of the {:.4g} Hz mode.'
                          .format(nbar, result.nbar, mode_frequency))
    rate = max(rate, 0.0)
    log.debug('Heating %.4g phonons/s holds the %.4g Hz mode at nbar=%g', rate, mode_frequency,
              nbar)
    return rate


def eit_cool_modes(manifold, mode_frequencies, etas, heating_rate=0.0, recoil=DIPOLE_RECOIL):
    """Several modes cooled simultaneously against the same absorption profile."""
    return [eit_cooling_steady_state(manifold, frequency, eta, heating_rate, recoil)
            for frequency, eta in zip(mode_frequencies, etas)]
