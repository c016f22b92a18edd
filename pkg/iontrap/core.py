#!/usr/bin/env python3
"""
Physical constants, species data, Fock-space distributions and the RNG contract.

Every other module of iontrap imports its constants from here, so CODATA values
live in exactly one place.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

# CODATA 2018
HBAR = 1.054571817e-34  # J s
ELEMENTARY_CHARGE = 1.602176634e-19  # C
EPSILON_0 = 8.8541878128e-12  # F/m
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
BOHR_MAGNETON = 9.2740100783e-24  # J/T
GAUSS = 1e-4  # T

TWO_PI = 2 * math.pi

# Normalization tolerance shared by all distribution operations
NORM_TOLERANCE = 1e-12
# Largest thermal tail dropped by truncation
TAIL_TOLERANCE = 1e-9
# Smallest default Fock truncation
MIN_N_MAX = 60

SEED_MAX = 2**64 - 1


class IonTrapError(Exception):
    """Base class of all iontrap errors."""


class DomainError(IonTrapError, ValueError):
    """A physical input lies outside the domain of an operation."""


class TruncationError(DomainError):
    """A Fock-space truncation drops more than the tolerated tail."""


class AmbiguityError(DomainError):
    """A steady state is not unique (decoupled level sets)."""


class ConfigError(IonTrapError):
    """Scenario configuration could not be parsed or validated."""


class SchemaMismatchError(ConfigError):
    """Two runs cannot be compared because their outputs differ in layout."""


@dataclass(frozen=True)
class SpeciesConstants(object):
    """
    Atomic data of a trapped ion species.

    Rates are angular (rad/s), wavelengths in m, lifetimes in s, mass in kg.
    """
    name: str
    mass: float
    charge: float
    lambda_qubit: float
    lambda_dipole: float
    gamma_p: float
    tau_d: float
    branching_sp_dp: float
    lande_s: float
    lande_p: float
    gamma_p32: float

    def __post_init__(self):
        for key in ('mass', 'charge', 'lambda_qubit', 'lambda_dipole', 'gamma_p', 'tau_d',
                    'branching_sp_dp', 'lande_s', 'lande_p', 'gamma_p32'):
            value = getattr(self, key)
            if not value > 0:
                raise DomainError('{} of {} must be strictly positive, got {!r}.'.format(
                    key, self.name, value))
        if not self.branching_sp_dp > 1:
            raise DomainError('Branching ratio must exceed 1, got {!r}.'.format(
                self.branching_sp_dp))


CALCIUM_40 = SpeciesConstants(
    name='40Ca+',
    mass=39.962590863 * ATOMIC_MASS_UNIT,
    charge=ELEMENTARY_CHARGE,
    lambda_qubit=729.147e-9,
    lambda_dipole=396.959e-9,
    gamma_p=TWO_PI * 20e6,
    tau_d=1.0,
    branching_sp_dp=16.0,
    lande_s=2.002,
    lande_p=2 / 3,
    gamma_p32=TWO_PI * 23e6,
)

SPECIES = {'ca40': CALCIUM_40}


def _frozen(values):
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class FockDistribution(object):
    """
    Populations of harmonic-oscillator number states 0..n_max of one mode.

    Use :func:`FockDistribution.from_populations` to normalize raw numbers; the
    plain constructor only validates.
    """
    populations: np.ndarray

    def __post_init__(self):
        populations = _frozen(self.populations)
        object.__setattr__(self, 'populations', populations)
        if populations.ndim != 1 or populations.size == 0:
            raise DomainError('Fock populations must be a non-empty 1d sequence.')
        if not np.all(np.isfinite(populations)):
            raise DomainError('Fock populations must be finite.')
        if populations.min() < -NORM_TOLERANCE or populations.max() > 1 + NORM_TOLERANCE:
            raise DomainError('Fock populations must lie in [0, 1].')
        total = populations.sum()
        if abs(total - 1) > NORM_TOLERANCE:
            raise DomainError('Fock populations sum to {!r}, not 1.'.format(total))

    @classmethod
    def from_populations(cls, values):
        """Clip round-off negatives and renormalize to unit sum."""
        array = np.clip(np.asarray(values, dtype=float), 0.0, None)
        total = array.sum()
        if not total > 0:
            raise DomainError('Cannot normalize an all-zero Fock distribution.')
        return cls(array / total)

    @classmethod
    def fock(cls, n, n_max=None):
        """Number state |n>."""
        if n < 0:
            raise DomainError('Fock state index must be >= 0, got {!r}.'.format(n))
        n_max = max(n, MIN_N_MAX) if n_max is None else n_max
        if n > n_max:
            raise TruncationError('Fock state {} lies above n_max={}.'.format(n, n_max))
        populations = np.zeros(n_max + 1)
        populations[n] = 1.0
        return cls(populations)

    @property
    def n_max(self):
        return self.populations.size - 1

    @property
    def numbers(self):
        return np.arange(self.populations.size)

    @property
    def nbar(self):
        return float(np.dot(self.numbers, self.populations))

    @property
    def ground_state_population(self):
        return float(self.populations[0])

    def padded(self, n_max):
        """Same distribution on a larger truncation."""
        if n_max < self.n_max:
            raise TruncationError('Cannot shrink a distribution from {} to {}.'.format(
                self.n_max, n_max))
        populations = np.zeros(n_max + 1)
        populations[:self.populations.size] = self.populations
        return FockDistribution(populations)


@dataclass(frozen=True)
class MotionalMode(object):
    """One harmonic motional mode: frequency in Hz and its Lamb-Dicke factor."""
    frequency: float
    lamb_dicke: float
    label: str = field(default='mode')

    def __post_init__(self):
        if not self.frequency > 0:
            raise DomainError('Mode frequency must be > 0, got {!r}.'.format(self.frequency))
        if not 0 < self.lamb_dicke < 1:
            raise DomainError('Lamb-Dicke factor must lie in (0, 1), got {!r}.'.format(
                self.lamb_dicke))

    @property
    def angular_frequency(self):
        return TWO_PI * self.frequency


def thermal_tail(nbar, n_max):
    """Probability mass of a thermal state above n_max."""
    if nbar == 0:
        return 0.0
    return (nbar / (nbar + 1)) ** (n_max + 1)


def default_n_max(nbar):
    """
    Fock truncation used when none is given.

    max(60, 10*nbar), raised until the dropped thermal tail is below 1e-9.
    """
    n_max = max(MIN_N_MAX, int(math.ceil(10 * nbar)))
    if nbar > 0:
        required = math.log(TAIL_TOLERANCE) / math.log(nbar / (nbar + 1)) - 1
        n_max = max(n_max, int(math.ceil(required)))
    return n_max


def thermal_distribution(nbar, n_max=None):
    """
    Thermal (geometric) Fock distribution with mean occupation nbar.

    Parameters
    ----------
    nbar : float
        Mean phonon number, >= 0
    n_max : int, optional
        Highest number state kept; see :func:`default_n_max`

    Returns
    -------
    FockDistribution
        p_n proportional to nbar^n / (nbar+1)^(n+1), renormalized after truncation
    """
    if not (nbar >= 0 and math.isfinite(nbar)):
        raise DomainError('Mean occupation must be finite and >= 0, got {!r}.'.format(nbar))
    if n_max is None:
        n_max = default_n_max(nbar)
    if n_max < 0:
        raise DomainError('n_max must be >= 0, got {!r}.'.format(n_max))
    tail = thermal_tail(nbar, n_max)
    if tail > TAIL_TOLERANCE:
        raise TruncationError('Thermal tail {:.3g} above n_max={} exceeds {:g} for nbar={!r}.'
                              .format(tail, n_max, TAIL_TOLERANCE, nbar))
    numbers = np.arange(n_max + 1)
    if nbar == 0:
        populations = (numbers == 0).astype(float)
    else:
        ratio = nbar / (nbar + 1)
        populations = np.power(ratio, numbers) / (nbar + 1)
    return FockDistribution.from_populations(populations)


def lamb_dicke_parameter(species, wavelength, projection_angle, frequency):
    """
    Lamb-Dicke factor of a beam along one motional mode.

    :param species: SpeciesConstants of the ion
    :param wavelength: laser (or effective wave-vector) wavelength in m
    :param projection_angle: angle between wave vector and mode axis in rad
    :param frequency: mode frequency in Hz
    :return: eta = k cos(angle) sqrt(hbar / (2 m omega))
    """
    if not frequency > 0:
        raise DomainError('Mode frequency must be > 0, got {!r}.'.format(frequency))
    if not wavelength > 0:
        raise DomainError('Wavelength must be > 0, got {!r}.'.format(wavelength))
    projection = math.cos(projection_angle)
    if abs(projection) < 1e-15:
        return 0.0
    k = TWO_PI / wavelength
    return k * projection * math.sqrt(HBAR / (2 * species.mass * TWO_PI * frequency))


def validate_seed(seed):
    """Return seed as int if it fits an unsigned 64-bit integer."""
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed <= SEED_MAX:
        raise DomainError('Seed must be an unsigned 64-bit integer, got {!r}.'.format(seed))
    return int(seed)


def make_rng(seed):
    """
    Generator for all randomized operations.

    PCG64 seeded explicitly: identical seed and call sequence give
    bit-identical draws.
    """
    return np.random.Generator(np.random.PCG64(validate_seed(seed)))
