#!/usr/bin/env python3

import sys
import math

import unittest

import numpy as np

sys.path.insert(0, '..')
from iontrap import liouville
from iontrap.core import AmbiguityError, DomainError
from iontrap.liouville import DressedManifold, LevelSystem

TWO_PI = 2 * math.pi
DELTA_SIGMA = TWO_PI * 60e6


def two_level(rabi, detuning, gamma):
    return LevelSystem.in_rotating_frame(2, [(0, 1, rabi, detuning)], [(1, 0, gamma)])


def excited_population(rabi, detuning, gamma):
    return (rabi**2 / 4) / (detuning**2 + gamma**2 / 4 + rabi**2 / 2)


class TestLevelSystem(unittest.TestCase):
    def test_rotating_frame(self):
        system = two_level(1.0, 0.3, 1.0)
        self.assertEqual(system.energies, (0.0, -0.3))
        hamiltonian = system.hamiltonian()
        self.assertEqual(hamiltonian[0, 1], 0.5)
        np.testing.assert_array_equal(hamiltonian, hamiltonian.conj().T)

    def test_validation(self):
        with self.assertRaises(DomainError):
            LevelSystem(1, (0.0,), (), ())
        with self.assertRaises(DomainError):
            LevelSystem(9, (0.0,) * 9, (), ())
        with self.assertRaises(DomainError):
            LevelSystem(2, (0.0, 5.0), [(0, 1, 1.0, 0.0)], [])
        with self.assertRaises(DomainError):
            LevelSystem(2, (0.0, 0.0), [(0, 1, 1.0, 0.0), (1, 0, 1.0, 0.0)], [])
        with self.assertRaises(DomainError):
            LevelSystem(2, (0.0, 0.0), [], [(1, 0, -1.0)])
        with self.assertRaises(DomainError):
            LevelSystem(2, (0.0, 0.0), [], [(1, 2, 1.0)])
        with self.assertRaises(DomainError):
            LevelSystem(2, (0.0, 0.0), [(0, 0, 1.0, 0.0)], [])


class TestSteadyState(unittest.TestCase):
    def test_two_level_analytic(self):
        for rabi, detuning in ((1.0, 0.0), (2.0, 0.5), (0.3, -1.5)):
            state = liouville.steady_state(liouville.build_liouvillian(
                two_level(rabi, detuning, 1.0)))
            expected = excited_population(rabi, detuning, 1.0)
            self.assertAlmostEqual(state.populations[1], expected, places=10)
            self.assertAlmostEqual(state.scattering_rate, expected, places=10)

    def test_density_matrix(self):
        state = liouville.steady_state(liouville.build_liouvillian(two_level(1.3, 0.2, 1.0)))
        rho = state.density_matrix
        self.assertAlmostEqual(np.trace(rho).real, 1.0, places=12)
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-14)
        self.assertGreaterEqual(np.linalg.eigvalsh(rho).min(), -1e-9)

    def test_against_time_integration(self):
        rng = np.random.default_rng(3)
        for _ in range(3):
            rabi = rng.uniform(1.0, 2.0)
            detuning = rng.uniform(-0.5, 0.5)
            liouvillian = liouville.build_liouvillian(two_level(rabi, detuning, 1.0))
            initial = np.diag([1.0, 0.0]).astype(complex)
            evolved = liouville.time_evolve(liouvillian, initial, [0.0, 50.0, 100.0])
            np.testing.assert_allclose(evolved[-1],
                                       liouville.steady_state(liouvillian).density_matrix,
                                       atol=1e-7)
            self.assertAlmostEqual(np.trace(evolved[1]).real, 1.0, places=9)

    def test_lambda_against_time_integration(self):
        system = LevelSystem.in_rotating_frame(3, [(0, 2, 1.0, 1.0), (1, 2, 1.0, -1.0)],
                                               [(2, 0, 0.5), (2, 1, 0.5)])
        liouvillian = liouville.build_liouvillian(system)
        initial = np.diag([1.0, 0.0, 0.0]).astype(complex)
        evolved = liouville.time_evolve(liouvillian, initial, [0.0, 400.0])
        state = liouville.steady_state(liouvillian)
        np.testing.assert_allclose(np.diag(evolved[-1]).real, state.populations, atol=1e-6)

    def test_uncoupled_level_is_ambiguous(self):
        system = LevelSystem.in_rotating_frame(3, [(0, 1, 1.0, 0.0)], [(1, 0, 1.0)])
        with self.assertRaises(AmbiguityError):
            liouville.steady_state(liouville.build_liouvillian(system))
        empty = LevelSystem(2, (0.0, 0.0), (), ())
        with self.assertRaises(AmbiguityError):
            liouville.steady_state(liouville.build_liouvillian(empty))

    def test_dephasing_operator(self):
        system = LevelSystem.in_rotating_frame(2, [(0, 1, 1.0, 0.0)], [(1, 0, 1.0)],
                                               [(0, 0.25)])
        jumps = system.jump_operators()
        self.assertEqual(len(jumps), 2)
        self.assertAlmostEqual(jumps[1][0, 0].real, math.sqrt(0.5))


class TestLiouvillian(unittest.TestCase):
    def systems(self):
        rabi_sigma = liouville.rabi_for_stark_shift(DELTA_SIGMA, TWO_PI * 2.5e6)
        yield two_level(1.3, 0.4, 1.0)
        yield LevelSystem.in_rotating_frame(3, [(0, 2, 1.0, 1.0), (1, 2, 0.7, -0.5)],
                                            [(2, 0, 0.5), (2, 1, 0.5)], [(1, 0.1)])
        for levels in (3, 4):
            manifold = DressedManifold(DELTA_SIGMA, rabi_sigma, TWO_PI * 0.5e6, levels=levels,
                                       dephasing=TWO_PI * 1e3)
            yield manifold.system(DELTA_SIGMA + TWO_PI * 1e6)

    def test_trace_preserving(self):
        rng = np.random.default_rng(5)
        for system in self.systems():
            matrix = liouville.build_liouvillian(system).matrix
            n = system.n_levels
            trace_row = np.eye(n).ravel()
            scale = np.linalg.norm(matrix, 2)
            np.testing.assert_allclose(trace_row @ matrix, 0.0, atol=1e-12 * scale)
            rho = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            derivative = (matrix @ rho.ravel()).reshape(n, n)
            self.assertAlmostEqual(abs(np.trace(derivative)) / scale, 0.0, places=12)

    def test_undriven_ground_state_is_stationary(self):
        system = LevelSystem.in_rotating_frame(2, [(0, 1, 0.0, 0.3)], [(1, 0, 1.0)])
        matrix = liouville.build_liouvillian(system).matrix
        ground = np.diag([1.0, 0.0]).astype(complex)
        np.testing.assert_array_equal(matrix @ ground.ravel(), 0.0)
        state = liouville.steady_state(liouville.build_liouvillian(system))
        np.testing.assert_allclose(state.populations, [1.0, 0.0], atol=1e-12)
        self.assertAlmostEqual(state.scattering_rate, 0.0, places=12)

    def test_saturation(self):
        for rabi in (1e2, 1e3, 1e4):
            state = liouville.steady_state(liouville.build_liouvillian(two_level(rabi, 0.0, 1.0)))
            self.assertAlmostEqual(state.populations[1], excited_population(rabi, 0.0, 1.0),
                                   places=9)
        self.assertAlmostEqual(state.populations[1], 0.5, places=7)
        self.assertAlmostEqual(state.scattering_rate, 0.5, places=7)

    def test_detuning_sign_symmetry(self):
        forward = LevelSystem.in_rotating_frame(3, [(0, 2, 1.2, 0.8), (1, 2, 0.6, -0.3)],
                                                [(2, 0, 0.5), (2, 1, 0.5)])
        mirrored = LevelSystem.in_rotating_frame(3, [(0, 2, 1.2, -0.8), (1, 2, 0.6, 0.3)],
                                                 [(2, 0, 0.5), (2, 1, 0.5)])
        a = liouville.steady_state(liouville.build_liouvillian(forward))
        b = liouville.steady_state(liouville.build_liouvillian(mirrored))
        np.testing.assert_allclose(b.populations, a.populations, atol=1e-12)
        np.testing.assert_allclose(np.abs(b.density_matrix), np.abs(a.density_matrix),
                                   atol=1e-12)
        self.assertAlmostEqual(b.scattering_rate, a.scattering_rate, places=12)

        rabi_sigma = liouville.rabi_for_stark_shift(DELTA_SIGMA, TWO_PI * 2.5e6)
        offsets = TWO_PI * np.array([-1e6, 0.3e6, 1.61e6, 2.5e6, 3.34e6])
        for levels in (3, 4):
            plain = DressedManifold(DELTA_SIGMA, rabi_sigma, TWO_PI * 0.5e6, levels=levels)
            flipped = DressedManifold(-DELTA_SIGMA, rabi_sigma, TWO_PI * 0.5e6, levels=levels,
                                      b_field_gauss=-plain.b_field_gauss)
            for offset in offsets:
                rate = plain.scattering_rate(DELTA_SIGMA + offset)
                self.assertAlmostEqual(flipped.scattering_rate(-DELTA_SIGMA - offset) / rate,
                                       1.0, delta=1e-4)

    def test_random_points_against_time_integration(self):
        rng = np.random.default_rng(11)
        for k in range(10):
            if k % 2 == 0:
                system = two_level(rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0), 1.0)
            else:
                system = LevelSystem.in_rotating_frame(
                    3, [(0, 2, rng.uniform(1.0, 2.0), rng.uniform(0.5, 1.5)),
                        (1, 2, rng.uniform(1.0, 2.0), -rng.uniform(0.5, 1.5))],
                    [(2, 0, 0.5), (2, 1, 0.5)])
            liouvillian = liouville.build_liouvillian(system)
            n = system.n_levels
            initial = np.zeros((n, n), dtype=complex)
            initial[0, 0] = 1.0
            evolved = liouville.time_evolve(liouvillian, initial, [0.0, 400.0])
            state = liouville.steady_state(liouvillian)
            np.testing.assert_allclose(np.diag(evolved[-1]).real, state.populations, atol=1e-6)


class TestStarkShift(unittest.TestCase):
    def test_round_trip(self):
        rabi = liouville.rabi_for_stark_shift(DELTA_SIGMA, TWO_PI * 2.5e6)
        self.assertAlmostEqual(rabi / (TWO_PI * 25e6), 1.0, places=12)
        for shift in (0.1e6, 1.61e6, 3.34e6, 10e6):
            rabi = liouville.rabi_for_stark_shift(DELTA_SIGMA, TWO_PI * shift)
            self.assertAlmostEqual(liouville.ac_stark_shift(DELTA_SIGMA, rabi) / (TWO_PI * shift),
                                   1.0, places=10)

    def test_invalid(self):
        with self.assertRaises(DomainError):
            liouville.ac_stark_shift(-DELTA_SIGMA, 1.0)
        with self.assertRaises(DomainError):
            liouville.rabi_for_stark_shift(0.0, 1.0)


class TestDressedManifold(unittest.TestCase):
    def manifold(self, levels=3, rabi_pi=TWO_PI * 0.5e6, shift=2.5e6, **kwargs):
        rabi_sigma = liouville.rabi_for_stark_shift(DELTA_SIGMA, TWO_PI * shift)
        return DressedManifold(DELTA_SIGMA, rabi_sigma, rabi_pi, levels=levels, **kwargs)

    def test_dark_resonance(self):
        manifold = self.manifold()
        offsets = TWO_PI * np.linspace(-2e6, 6e6, 81)
        spectrum = liouville.probe_spectrum(manifold, DELTA_SIGMA + offsets)
        self.assertFalse(spectrum.strong_probe)
        peak = spectrum.scattering_rates.max()
        self.assertLess(manifold.scattering_rate(DELTA_SIGMA), 1e-8 * peak)
        self.assertAlmostEqual(spectrum.dark_resonance(), DELTA_SIGMA, delta=1e-6)

    def test_bright_resonance(self):
        manifold = self.manifold()
        step = TWO_PI * 20e3
        offsets = TWO_PI * 2.5e6 + step * np.arange(-50, 51)
        spectrum = liouville.probe_spectrum(manifold, DELTA_SIGMA + offsets)
        expected = (math.hypot(DELTA_SIGMA, manifold.rabi_sigma) - DELTA_SIGMA) / 2
        self.assertAlmostEqual(expected, manifold.stark_shift)
        self.assertAlmostEqual(spectrum.bright_resonance() - DELTA_SIGMA, expected, delta=step)

    def test_weak_probe_scaling(self):
        offsets = DELTA_SIGMA + TWO_PI * np.array([-1e6, 1e6, 2.5e6, 4e6])
        weak = liouville.probe_spectrum(self.manifold(rabi_pi=TWO_PI * 0.1e6), offsets)
        double = liouville.probe_spectrum(self.manifold(rabi_pi=TWO_PI * 0.2e6), offsets)
        np.testing.assert_allclose(double.scattering_rates / weak.scattering_rates, 4.0,
                                   rtol=0.01)

    def test_dephasing_fills_dark_resonance(self):
        manifold = self.manifold(dephasing=TWO_PI * 10e3)
        self.assertGreater(manifold.scattering_rate(DELTA_SIGMA), 0.0)
        self.assertEqual(len(manifold.system(DELTA_SIGMA).dephasings), 1)

    def test_four_levels(self):
        manifold = self.manifold(levels=4)
        system = manifold.system(DELTA_SIGMA)
        self.assertEqual(system.n_levels, 4)
        self.assertEqual(len(system.couplings), 3)
        state = liouville.steady_state(liouville.build_liouvillian(system))
        self.assertAlmostEqual(state.populations.sum(), 1.0, places=12)
        self.assertGreater(state.scattering_rate, 0.0)
        shifts = manifold.zeeman_shifts()
        self.assertAlmostEqual(shifts[0], -shifts[1])
        self.assertGreater(shifts[1], shifts[3])

    def test_branching(self):
        system = self.manifold(levels=4).system(DELTA_SIGMA)
        gamma = DressedManifold.gamma
        total = {}
        for source, target, rate in system.decays:
            total[source] = total.get(source, 0.0) + rate
        self.assertEqual(set(total), {liouville.P_MINUS, liouville.P_PLUS})
        for rate in total.values():
            self.assertAlmostEqual(rate / gamma, 1.0, places=12)

    def test_strong_probe_flag(self):
        manifold = self.manifold(rabi_pi=TWO_PI * 20e6)
        self.assertFalse(manifold.weak_probe)
        with self.assertLogs('iontrap.liouville', level='WARNING'):
            spectrum = liouville.probe_spectrum(manifold, [DELTA_SIGMA])
        self.assertTrue(spectrum.strong_probe)

    def test_invalid(self):
        with self.assertRaises(DomainError):
            self.manifold(levels=5)
        with self.assertRaises(DomainError):
            self.manifold(rabi_pi=-1.0)


if __name__ == '__main__':
    unittest.main()
