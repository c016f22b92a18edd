#!/usr/bin/env python3
"""
Equilibrium positions, axial normal modes and spacing constraints of a linear ion string.

Positions are handled in the dimensionless units u = z / l of the Coulomb
problem, U(u) = sum u_i^2 / 2 + sum_{i<j} 1 / |u_i - u_j|, and converted to metres
with the length scale l of :func:`length_scale`.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from iontrap.core import DomainError, EPSILON_0, TWO_PI, lamb_dicke_parameter

log = logging.getLogger(__name__)

MAX_IONS = 20
GRADIENT_TOLERANCE = 1e-10
MAX_NEWTON_ITERATIONS = 100
# Bisection bracket for the COM frequency in Hz
FREQUENCY_BRACKET = (1e3, 100e6)


@dataclass(frozen=True, eq=False)
class ChainGeometry(object):
    """Equilibrium of n_ions ions in a harmonic axial well of frequency com_frequency (Hz)."""
    n_ions: int
    com_frequency: float
    length_scale: float
    positions: np.ndarray
    dimensionless_positions: np.ndarray

    @property
    def spacings(self):
        return np.diff(self.positions)


@dataclass(frozen=True, eq=False)
class ModeSpectrum(object):
    """
    Axial normal modes, ascending in frequency (Hz).

    eigenvectors[:, m] holds the participation of every ion in mode m.
    """
    frequencies: np.ndarray
    eigenvectors: np.ndarray

    def participation(self, mode, ion):
        return float(self.eigenvectors[ion, mode])


def _check_n_ions(n_ions):
    if isinstance(n_ions, bool) or int(n_ions) != n_ions or not 1 <= n_ions <= MAX_IONS:
        raise DomainError('Number of ions must be an integer in [1, {}], got {!r}.'.format(
            MAX_IONS, n_ions))
    return int(n_ions)


def potential_energy(u):
    """Dimensionless trap plus Coulomb energy of the string."""
    u = np.asarray(u, dtype=float)
    distances = np.abs(u[:, None] - u[None, :])
    upper = np.triu_indices(u.size, k=1)
    return 0.5 * np.dot(u, u) + np.sum(1.0 / distances[upper])


def potential_gradient(u):
    u = np.asarray(u, dtype=float)
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    return u - np.sum(np.sign(diff) / diff**2, axis=1)


def potential_hessian(u):
    u = np.asarray(u, dtype=float)
    diff = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(diff, np.inf)
    coupling = 2.0 / diff**3
    hessian = -coupling
    np.fill_diagonal(hessian, 1.0 + coupling.sum(axis=1))
    return hessian


def _initial_guess(n_ions):
    # Equal spacing with the empirical N^-0.56 width scaling of the exact solution
    if n_ions == 1:
        return np.zeros(1)
    spacing = 2.0 / n_ions**0.56
    return (np.arange(n_ions) - (n_ions - 1) / 2) * spacing


def equilibrium_positions(n_ions):
    """
    Dimensionless equilibrium positions of a linear string.

    Damped Newton iteration on the gradient of U, with backtracking that keeps
    the ions ordered and the energy decreasing.

    Parameters
    ----------
    n_ions : int
        Number of ions, 1..20

    Returns
    -------
    numpy.ndarray
        Sorted positions, symmetric about 0, gradient norm < 1e-10
    """
    n_ions = _check_n_ions(n_ions)
    u = _initial_guess(n_ions)
    for iteration in range(MAX_NEWTON_ITERATIONS):
        gradient = potential_gradient(u)
        if np.linalg.norm(gradient) < GRADIENT_TOLERANCE * 1e-2:
            break
        step = np.linalg.solve(potential_hessian(u), gradient)
        energy = potential_energy(u)
        damping = 1.0
        while damping > 1e-12:
            trial = u - damping * step
            if np.all(np.diff(trial) > 0) and potential_energy(trial) <= energy + 1e-14:
                break
            damping /= 2
        else:
            break
        u = trial
    # Mirror symmetry is exact for the true equilibrium
    u = 0.5 * (u - u[::-1])
    residual = np.linalg.norm(potential_gradient(u))
    if residual > GRADIENT_TOLERANCE:
        raise DomainError('Equilibrium of {} ions did not converge (|grad U| = {:.3g}).'.format(
            n_ions, residual))
    log.debug('%d ions converged after %d Newton steps', n_ions, iteration)
    return u


def length_scale(species, com_frequency):
    """
    Coulomb length scale l = (q^2 / (4 pi eps0 m omega^2))^(1/3) in m.

    :param species: SpeciesConstants of the ion
    :param com_frequency: axial COM frequency in Hz
    """
    if not com_frequency > 0:
        raise DomainError('COM frequency must be > 0, got {!r}.'.format(com_frequency))
    omega = TWO_PI * com_frequency
    return (species.charge**2 / (4 * math.pi * EPSILON_0 * species.mass * omega**2))**(1 / 3)


def chain_geometry(n_ions, com_frequency, species):
    """Build the ChainGeometry of n_ions ions at the given COM frequency (Hz)."""
    u = equilibrium_positions(n_ions)
    scale = length_scale(species, com_frequency)
    positions = u * scale
    u.setflags(write=False)
    positions.setflags(write=False)
    return ChainGeometry(n_ions=int(n_ions), com_frequency=float(com_frequency),
                         length_scale=scale, positions=positions, dimensionless_positions=u)


def min_spacing(n_ions, com_frequency, species):
    """
    Smallest distance between adjacent ions in m.

    A single ion has no neighbour; its minimum spacing is infinite.
    """
    u = equilibrium_positions(n_ions)
    scale = length_scale(species, com_frequency)
    if u.size < 2:
        return math.inf
    return float(scale * np.min(np.diff(u)))


def max_com_frequency(n_ions, d_min, species):
    """
    Highest COM frequency (Hz) at which no two ions are closer than d_min (m).

    Bisection on min_spacing over [1 kHz, 100 MHz] to 1e-12 relative.
    """
    n_ions = _check_n_ions(n_ions)
    if not d_min > 0:
        raise DomainError('Minimum spacing must be > 0, got {!r}.'.format(d_min))
    gap = float(np.min(np.diff(equilibrium_positions(n_ions)))) if n_ions > 1 else math.inf
    if math.isinf(gap):
        raise DomainError('A single ion has no spacing constraint to satisfy.')

    def excess(frequency):
        return gap * length_scale(species, frequency) - d_min

    low, high = FREQUENCY_BRACKET
    if excess(low) < 0 or excess(high) > 0:
        raise DomainError('Spacing {!r} m for {} ions is unreachable for COM frequencies in '
                          '[{:g}, {:g}] Hz.'.format(d_min, n_ions, low, high))
    return optimize.bisect(excess, low, high, xtol=1e-12, rtol=1e-13, maxiter=500)


def axial_modes(geometry):
    """
    Axial normal modes of a string at equilibrium.

    The dimensionless Hessian of U has eigenvalues (nu_m / nu_com)^2; eigenvectors
    are sign-fixed so that their first non-negligible component is positive.
    """
    u = np.asarray(geometry.dimensionless_positions)
    residual = np.linalg.norm(potential_gradient(u))
    if residual > GRADIENT_TOLERANCE:
        raise DomainError('Geometry is not at equilibrium (|grad U| = {:.3g}).'.format(residual))
    eigenvalues, eigenvectors = np.linalg.eigh(potential_hessian(u))
    if eigenvalues.min() <= 0:
        raise DomainError('Hessian at equilibrium is not positive definite.')
    for m in range(eigenvectors.shape[1]):
        column = eigenvectors[:, m]
        leading = column[np.argmax(np.abs(column) > 1e-8)]
        if leading < 0:
            eigenvectors[:, m] = -column
    frequencies = geometry.com_frequency * np.sqrt(eigenvalues)
    frequencies.setflags(write=False)
    eigenvectors.setflags(write=False)
    return ModeSpectrum(frequencies=frequencies, eigenvectors=eigenvectors)


def mode_lamb_dicke(species, spectrum, mode, ion, wavelength, projection_angle=0.0):
    """
    Lamb-Dicke factor of one ion in one normal mode.

    The single-ion factor at the mode frequency times the ion's participation.
    """
    eta = lamb_dicke_parameter(species, wavelength, projection_angle,
                               spectrum.frequencies[mode])
    return abs(eta * spectrum.participation(mode, ion))
