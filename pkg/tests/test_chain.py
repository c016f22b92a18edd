#!/usr/bin/env python3

import sys
import math
import time

import unittest

import numpy as np
from scipy import optimize

sys.path.insert(0, '..')
from iontrap import chain
from iontrap.core import CALCIUM_40, DomainError, lamb_dicke_parameter


class TestEquilibrium(unittest.TestCase):
    def test_two_ions_analytic(self):
        u = chain.equilibrium_positions(2)
        expected = 0.25**(1 / 3)
        np.testing.assert_allclose(u, [-expected, expected], rtol=0, atol=1e-10)

    def test_three_ions_analytic(self):
        u = chain.equilibrium_positions(3)
        expected = 1.25**(1 / 3)
        np.testing.assert_allclose(u, [-expected, 0.0, expected], rtol=0, atol=1e-10)

    def test_against_direct_minimization(self):
        for n_ions in range(2, 9):
            start = np.linspace(-1.0, 1.0, n_ions) * n_ions**0.6
            result = optimize.minimize(chain.potential_energy, start,
                                       jac=chain.potential_gradient,
                                       hess=chain.potential_hessian, method='trust-exact',
                                       options={'gtol': 1e-12})
            np.testing.assert_allclose(chain.equilibrium_positions(n_ions),
                                       np.sort(result.x), rtol=0, atol=1e-8)

    def test_properties(self):
        for n_ions in (1, 4, 9, 20):
            u = chain.equilibrium_positions(n_ions)
            self.assertEqual(u.size, n_ions)
            self.assertTrue(np.all(np.diff(u) > 0))
            np.testing.assert_allclose(u, -u[::-1], atol=1e-14)
            self.assertLess(np.linalg.norm(chain.potential_gradient(u)), 1e-10)
        # Interior spacing is the smallest
        spacings = np.diff(chain.equilibrium_positions(6))
        self.assertEqual(int(np.argmin(spacings)), 2)

    def test_invalid_counts(self):
        for n_ions in (0, 21, 2.5, -3):
            with self.assertRaises(DomainError):
                chain.equilibrium_positions(n_ions)


class TestGeometry(unittest.TestCase):
    def test_length_scale(self):
        self.assertAlmostEqual(chain.length_scale(CALCIUM_40, 1e6), 4.45e-6, delta=0.02e-6)
        self.assertAlmostEqual(chain.length_scale(CALCIUM_40, 700e3), 5.64e-6, delta=0.02e-6)
        with self.assertRaises(DomainError):
            chain.length_scale(CALCIUM_40, 0.0)

    def test_geometry(self):
        geometry = chain.chain_geometry(2, 700e3, CALCIUM_40)
        self.assertEqual(geometry.n_ions, 2)
        self.assertAlmostEqual(geometry.spacings[0], 7.1e-6, delta=0.05e-6)
        np.testing.assert_allclose(geometry.positions,
                                   geometry.dimensionless_positions * geometry.length_scale)

    def test_positions_scale_with_frequency(self):
        for n_ions in (2, 3, 5):
            low = chain.chain_geometry(n_ions, 700e3, CALCIUM_40)
            high = chain.chain_geometry(n_ions, 8 * 700e3, CALCIUM_40)
            np.testing.assert_allclose(high.positions, low.positions / 4, rtol=1e-10,
                                       atol=1e-18)
            np.testing.assert_allclose(high.dimensionless_positions,
                                       low.dimensionless_positions)

    def test_four_ion_spacing(self):
        self.assertGreater(chain.min_spacing(4, 700e3, CALCIUM_40), 5e-6)
        self.assertAlmostEqual(chain.min_spacing(4, 700e3, CALCIUM_40), 5.13e-6, delta=0.02e-6)
        self.assertEqual(chain.min_spacing(1, 700e3, CALCIUM_40), math.inf)

    def test_max_com_frequency(self):
        start = time.perf_counter()
        frequency = chain.max_com_frequency(4, 5e-6, CALCIUM_40)
        self.assertLess(time.perf_counter() - start, 1.0)
        self.assertAlmostEqual(frequency / 700e3, 1.0, delta=0.05)
        spacing = chain.min_spacing(4, frequency, CALCIUM_40)
        self.assertAlmostEqual(spacing / 5e-6, 1.0, delta=1e-9)
        # More ions need a weaker trap
        self.assertLess(chain.max_com_frequency(6, 5e-6, CALCIUM_40), frequency)

    def test_max_com_frequency_invalid(self):
        with self.assertRaises(DomainError):
            chain.max_com_frequency(1, 5e-6, CALCIUM_40)
        with self.assertRaises(DomainError):
            chain.max_com_frequency(4, -5e-6, CALCIUM_40)
        with self.assertRaises(DomainError):
            chain.max_com_frequency(4, 1.0, CALCIUM_40)


class TestModes(unittest.TestCase):
    def test_two_ions(self):
        spectrum = chain.axial_modes(chain.chain_geometry(2, 1e6, CALCIUM_40))
        self.assertAlmostEqual(spectrum.frequencies[0], 1e6, delta=1e-3)
        self.assertAlmostEqual(spectrum.frequencies[1] / spectrum.frequencies[0], math.sqrt(3),
                               places=9)
        np.testing.assert_allclose(spectrum.eigenvectors[:, 0], [2**-0.5, 2**-0.5], atol=1e-12)

    def test_three_ions(self):
        spectrum = chain.axial_modes(chain.chain_geometry(3, 1e6, CALCIUM_40))
        ratios = spectrum.frequencies / spectrum.frequencies[0]
        np.testing.assert_allclose(ratios, [1.0, math.sqrt(3), math.sqrt(29 / 5)], rtol=1e-8)
        # Breathing mode leaves the centre ion at rest
        self.assertAlmostEqual(spectrum.participation(1, 1), 0.0, places=10)

    def test_against_eigh(self):
        geometry = chain.chain_geometry(5, 1e6, CALCIUM_40)
        spectrum = chain.axial_modes(geometry)
        eigenvalues = np.linalg.eigvalsh(chain.potential_hessian(geometry.dimensionless_positions))
        np.testing.assert_allclose(spectrum.frequencies, 1e6 * np.sqrt(eigenvalues), rtol=1e-12)
        np.testing.assert_allclose(spectrum.eigenvectors.T @ spectrum.eigenvectors, np.eye(5),
                                   atol=1e-12)
        for mode in range(5):
            column = spectrum.eigenvectors[:, mode]
            self.assertGreater(column[np.argmax(np.abs(column) > 1e-8)], 0)

    def test_mode_lamb_dicke(self):
        single = chain.axial_modes(chain.chain_geometry(1, 1e6, CALCIUM_40))
        self.assertAlmostEqual(
            chain.mode_lamb_dicke(CALCIUM_40, single, 0, 0, 729e-9),
            lamb_dicke_parameter(CALCIUM_40, 729e-9, 0.0, 1e6), places=14)
        pair = chain.axial_modes(chain.chain_geometry(2, 1e6, CALCIUM_40))
        com = chain.mode_lamb_dicke(CALCIUM_40, pair, 0, 1, 729e-9)
        self.assertAlmostEqual(com, lamb_dicke_parameter(CALCIUM_40, 729e-9, 0.0, 1e6) / 2**0.5,
                               places=12)


if __name__ == '__main__':
    unittest.main()
