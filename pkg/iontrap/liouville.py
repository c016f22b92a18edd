#!/usr/bin/env python3
"""
Few-level Lindblad steady states and the EIT absorption profile of the dressed S1/2-P1/2 manifold.

Density matrices are vectorized row-major (numpy ``ravel``), so that
vec(A rho B) = kron(A, B.T) vec(rho).
"""
import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from iontrap.core import (AmbiguityError, BOHR_MAGNETON, DomainError, GAUSS, HBAR,
                          CALCIUM_40)

log = logging.getLogger(__name__)

MIN_LEVELS = 2
MAX_LEVELS = 8
# Singular values of the norm-scaled Liouvillian below this count as null space
NULL_TOLERANCE = 1e-11
RESIDUAL_TOLERANCE = 1e-10
TRACE_TOLERANCE = 1e-10
POSITIVITY_TOLERANCE = 1e-9
# Probe is weak while rabi_pi <= rabi_sigma * WEAK_PROBE_RATIO
WEAK_PROBE_RATIO = 0.1

# Level indices of the dressed manifold
S_MINUS, S_PLUS, P_MINUS, P_PLUS = 0, 1, 2, 3
LEVEL_LABELS = ('S-1/2', 'S+1/2', 'P-1/2', 'P+1/2')


@dataclass(frozen=True)
class LevelSystem(object):
    """
    Few-level atom in a rotating frame.

    energies are the rotating-frame diagonal (rad/s). Every coupling
    (i, j, rabi, detuning) drives i -> j with detuning = -(energies[j] - energies[i]).
    decays are (from, to, rate) and dephasings (level, rate) damp the coherences
    of that level at rate.
    """
    n_levels: int
    energies: tuple
    couplings: tuple
    decays: tuple
    dephasings: tuple = field(default=())

    def __post_init__(self):
        if not MIN_LEVELS <= self.n_levels <= MAX_LEVELS:
            raise DomainError('Level systems need {} to {} levels, got {!r}.'.format(
                MIN_LEVELS, MAX_LEVELS, self.n_levels))
        object.__setattr__(self, 'energies', tuple(float(e) for e in self.energies))
        object.__setattr__(self, 'couplings', tuple(tuple(c) for c in self.couplings))
        object.__setattr__(self, 'decays', tuple(tuple(d) for d in self.decays))
        object.__setattr__(self, 'dephasings', tuple(tuple(d) for d in self.dephasings))
        if len(self.energies) != self.n_levels:
            raise DomainError('Expected {} energies, got {}.'.format(
                self.n_levels, len(self.energies)))
        scale = max([1.0] + [abs(e) for e in self.energies])
        pairs = set()
        for i, j, rabi, detuning in self.couplings:
            self._check_levels('coupling', i, j)
            pair = frozenset((i, j))
            if pair in pairs:
                raise DomainError('Levels {} and {} are coupled twice.'.format(i, j))
            pairs.add(pair)
            if not (math.isfinite(rabi) and math.isfinite(detuning)):
                raise DomainError('Coupling {}-{} must be finite.'.format(i, j))
            expected = self.energies[i] - detuning
            if abs(self.energies[j] - expected) > 1e-9 * scale:
                raise DomainError('Coupling {}-{} with detuning {!r} is inconsistent with the '
                                  'rotating-frame energies.'.format(i, j, detuning))
        for source, target, rate in self.decays:
            self._check_levels('decay', source, target)
            if not rate >= 0:
                raise DomainError('Decay rate {}->{} must be >= 0, got {!r}.'.format(
                    source, target, rate))
        for level, rate in self.dephasings:
            self._check_levels('dephasing', level)
            if not rate >= 0:
                raise DomainError('Dephasing rate of level {} must be >= 0, got {!r}.'.format(
                    level, rate))

    def _check_levels(self, kind, *levels):
        for level in levels:
            if not (isinstance(level, (int, np.integer)) and 0 <= level < self.n_levels):
                raise DomainError('Malformed {}: level {!r} not in 0..{}.'.format(
                    kind, level, self.n_levels - 1))
        if len(levels) == 2 and levels[0] == levels[1]:
            raise DomainError('Malformed {}: level {} connected to itself.'.format(
                kind, levels[0]))

    @classmethod
    def in_rotating_frame(cls, n_levels, couplings, decays, dephasings=()):
        """
        Derive the rotating-frame energies from the coupling detunings.

        Each connected set of levels is referenced to its lowest-index level at 0.
        """
        energies = [None] * n_levels
        neighbours = [[] for _ in range(n_levels)]
        for i, j, rabi, detuning in couplings:
            if not (0 <= i < n_levels and 0 <= j < n_levels):
                raise DomainError('Malformed coupling {}-{}.'.format(i, j))
            neighbours[i].append((j, -detuning))
            neighbours[j].append((i, detuning))
        for root in range(n_levels):
            if energies[root] is not None:
                continue
            energies[root] = 0.0
            queue = deque([root])
            while queue:
                level = queue.popleft()
                for other, offset in neighbours[level]:
                    if energies[other] is None:
                        energies[other] = energies[level] + offset
                        queue.append(other)
        return cls(n_levels=n_levels, energies=tuple(energies), couplings=tuple(couplings),
                   decays=tuple(decays), dephasings=tuple(dephasings))

    def hamiltonian(self):
        hamiltonian = np.diag(np.array(self.energies, dtype=complex))
        for i, j, rabi, detuning in self.couplings:
            hamiltonian[i, j] += rabi / 2
            hamiltonian[j, i] += rabi / 2
        return hamiltonian

    def jump_operators(self):
        operators = []
        for source, target, rate in self.decays:
            jump = np.zeros((self.n_levels, self.n_levels), dtype=complex)
            jump[target, source] = math.sqrt(rate)
            operators.append(jump)
        for level, rate in self.dephasings:
            jump = np.zeros((self.n_levels, self.n_levels), dtype=complex)
            jump[level, level] = math.sqrt(2 * rate)
            operators.append(jump)
        return operators


@dataclass(frozen=True, eq=False)
class Liouvillian(object):
    """Superoperator matrix (n^2 x n^2) of a LevelSystem."""
    matrix: np.ndarray
    system: LevelSystem


@dataclass(frozen=True, eq=False)
class SteadyState(object):
    density_matrix: np.ndarray
    scattering_rate: float

    @property
    def populations(self):
        return np.real(np.diag(self.density_matrix))


def build_liouvillian(system):
    """
    Lindblad superoperator L with d vec(rho)/dt = L vec(rho).

    Parameters
    ----------
    system : LevelSystem
        Validated level system

    Returns
    -------
    Liouvillian
        Matrix together with the system it was built from
    """
    n = system.n_levels
    identity = np.eye(n)
    hamiltonian = system.hamiltonian()
    matrix = -1j * (np.kron(hamiltonian, identity) - np.kron(identity, hamiltonian.T))
    for jump in system.jump_operators():
        rate = jump.conj().T @ jump
        matrix += (np.kron(jump, jump.conj())
                   - 0.5 * np.kron(rate, identity)
                   - 0.5 * np.kron(identity, rate.T))
    return Liouvillian(matrix=matrix, system=system)


def _scattering_rate(system, density_matrix):
    return float(sum(rate * density_matrix[source, source].real
                     for source, target, rate in system.decays))


def steady_state(liouvillian):
    """
    Unique trace-one null vector of L.

    The null space is taken from a singular-value decomposition of L scaled to
    unit spectral norm; a second vanishing singular value means decoupled level
    sets and raises AmbiguityError.
    """
    matrix = liouvillian.matrix
    n = liouvillian.system.n_levels
    norm = np.linalg.norm(matrix, 2)
    if norm == 0:
        raise AmbiguityError('Every state of an uncoupled, undamped system is stationary.')
    scaled = matrix / norm
    _, singular_values, vh = np.linalg.svd(scaled)
    if singular_values[-2] < NULL_TOLERANCE:
        raise AmbiguityError('Steady state is degenerate ({} null singular values).'.format(
            int(np.sum(singular_values < NULL_TOLERANCE))))
    density_matrix = vh[-1].conj().reshape(n, n)
    density_matrix = density_matrix / np.trace(density_matrix)
    density_matrix = 0.5 * (density_matrix + density_matrix.conj().T)
    density_matrix = density_matrix / np.trace(density_matrix).real

    residual = np.linalg.norm(scaled @ density_matrix.ravel())
    if residual > RESIDUAL_TOLERANCE:
        raise DomainError('Steady-state residual {:.3g} exceeds {:g}.'.format(
            residual, RESIDUAL_TOLERANCE))
    lowest = np.linalg.eigvalsh(density_matrix).min()
    if lowest < -POSITIVITY_TOLERANCE:
        raise DomainError('Steady state is not positive (eigenvalue {:.3g}).'.format(lowest))
    return SteadyState(density_matrix=density_matrix,
                       scattering_rate=_scattering_rate(liouvillian.system, density_matrix))


def time_evolve(liouvillian, initial, times, rtol=1e-10, atol=1e-12):
    """
    Integrate the master equation from density matrix initial.

    :return: array of density matrices, one per entry of times
    """
    n = liouvillian.system.n_levels
    matrix = liouvillian.matrix
    times = np.asarray(times, dtype=float)

    def rhs(t, y):
        return matrix @ y

    solution = solve_ivp(rhs, (0.0, float(times[-1])), np.asarray(initial, dtype=complex).ravel(),
                         method='DOP853', t_eval=times, rtol=rtol, atol=atol)
    if not solution.success:
        raise DomainError('Master-equation integration failed: {}'.format(solution.message))
    return solution.y.T.reshape(-1, n, n)


def ac_stark_shift(delta_sigma, rabi_sigma):
    """Light shift (rad/s) of the dressed ground level: (sqrt(D^2 + W^2) - D) / 2."""
    if not delta_sigma > 0:
        raise DomainError('Dressing beam must be blue detuned (> 0), got {!r}.'.format(
            delta_sigma))
    return 0.5 * (math.hypot(delta_sigma, rabi_sigma) - delta_sigma)


def rabi_for_stark_shift(delta_sigma, stark_shift):
    """Dressing Rabi frequency that produces the given light shift."""
    if not delta_sigma > 0:
        raise DomainError('Dressing beam must be blue detuned (> 0), got {!r}.'.format(
            delta_sigma))
    if stark_shift < 0:
        raise DomainError('Light shift must be >= 0, got {!r}.'.format(stark_shift))
    return 2 * math.sqrt(stark_shift * (stark_shift + delta_sigma))


@dataclass(frozen=True)
class DressedManifold(object):
    """
    S1/2-P1/2 manifold dressed by a sigma+ beam and probed by a pi beam.

    delta_sigma is the detuning from S(-1/2)->P(+1/2), the probe detuning from
    S(+1/2)->P(+1/2), so the dark resonance sits where they are equal. With
    levels=3 the P(-1/2) level is dropped (three-level reduction).
    """
    delta_sigma: float
    rabi_sigma: float
    rabi_pi: float
    gamma: float = CALCIUM_40.gamma_p
    b_field_gauss: float = 4.0
    lande_s: float = CALCIUM_40.lande_s
    lande_p: float = CALCIUM_40.lande_p
    levels: int = 4
    dephasing: float = 0.0

    def __post_init__(self):
        if self.levels not in (3, 4):
            raise DomainError('Dressed manifold has 3 or 4 levels, got {!r}.'.format(self.levels))
        if not self.gamma > 0:
            raise DomainError('Linewidth must be > 0, got {!r}.'.format(self.gamma))
        if self.rabi_sigma < 0 or self.rabi_pi < 0 or self.dephasing < 0:
            raise DomainError('Rabi frequencies and dephasing must be >= 0.')

    @property
    def stark_shift(self):
        return ac_stark_shift(self.delta_sigma, self.rabi_sigma)

    @property
    def weak_probe(self):
        return self.rabi_pi <= WEAK_PROBE_RATIO * self.rabi_sigma

    def zeeman_shifts(self):
        """Bare shifts (rad/s) of S-1/2, S+1/2, P-1/2, P+1/2 in the field."""
        larmor = BOHR_MAGNETON * self.b_field_gauss * GAUSS / HBAR
        return (-0.5 * self.lande_s * larmor, 0.5 * self.lande_s * larmor,
                -0.5 * self.lande_p * larmor, 0.5 * self.lande_p * larmor)

    def system(self, delta_pi):
        """LevelSystem at probe detuning delta_pi (rad/s)."""
        gamma = self.gamma
        if self.levels == 3:
            s_minus, s_plus, p_plus = 0, 1, 2
            couplings = [(s_minus, p_plus, self.rabi_sigma, self.delta_sigma),
                         (s_plus, p_plus, self.rabi_pi, delta_pi)]
            decays = [(p_plus, s_plus, gamma / 3), (p_plus, s_minus, 2 * gamma / 3)]
            dephasings = [(s_plus, self.dephasing)] if self.dephasing else []
            return LevelSystem.in_rotating_frame(3, couplings, decays, dephasings)
        z = self.zeeman_shifts()
        # The pi beam is one laser: its detuning from the S-1/2 -> P-1/2 line
        delta_pi_lower = (delta_pi + (z[P_PLUS] - z[S_PLUS])) - (z[P_MINUS] - z[S_MINUS])
        couplings = [(S_MINUS, P_PLUS, self.rabi_sigma, self.delta_sigma),
                     (S_PLUS, P_PLUS, self.rabi_pi, delta_pi),
                     (S_MINUS, P_MINUS, self.rabi_pi, delta_pi_lower)]
        decays = [(P_PLUS, S_PLUS, gamma / 3), (P_PLUS, S_MINUS, 2 * gamma / 3),
                  (P_MINUS, S_MINUS, gamma / 3), (P_MINUS, S_PLUS, 2 * gamma / 3)]
        dephasings = [(S_PLUS, self.dephasing)] if self.dephasing else []
        return LevelSystem.in_rotating_frame(4, couplings, decays, dephasings)

    def scattering_rate(self, delta_pi):
        return steady_state(build_liouvillian(self.system(delta_pi))).scattering_rate


@dataclass(frozen=True, eq=False)
class ProbeSpectrum(object):
    """Scattering rate (photons/s) versus probe detuning (rad/s)."""
    detunings: np.ndarray
    scattering_rates: np.ndarray
    strong_probe: bool = False

    def bright_resonance(self):
        """Probe detuning of the scattering maximum."""
        return float(self.detunings[int(np.argmax(self.scattering_rates))])

    def dark_resonance(self):
        return float(self.detunings[int(np.argmin(self.scattering_rates))])


def probe_spectrum(manifold, detunings):
    """
    Absorption (Fano) profile of the weak pi probe.

    Every detuning is an independent steady-state solve; the output keeps the
    input order. A probe stronger than a tenth of the dressing Rabi frequency
    is flagged, the spectrum is still returned.

    :param manifold: DressedManifold with the dressing beam fixed
    :param detunings: probe detunings in rad/s
    :return: ProbeSpectrum
    """
    detunings = np.asarray(detunings, dtype=float)
    rates = np.array([manifold.scattering_rate(delta_pi) for delta_pi in detunings])
    strong = not manifold.weak_probe
    if strong:
        log.warning('Probe Rabi frequency %.4g rad/s exceeds %.2g of the dressing beam; '
                    'the profile is not perturbative', manifold.rabi_pi, WEAK_PROBE_RATIO)
    return ProbeSpectrum(detunings=detunings, scattering_rates=rates, strong_probe=strong)
