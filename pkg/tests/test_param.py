#!/usr/bin/env python3

import sys
import os

import unittest

import numpy as np

sys.path.insert(0, '..')
from iontrap import param, scenarios
from iontrap.core import ConfigError
from iontrap.param import Parameter


class TestParameter(unittest.TestCase):
    def test_types(self):
        self.assertEqual(Parameter('trap.axial_freq_hz', 'FLOAT').parse(' 700e3 '), 700e3)
        self.assertEqual(Parameter('chain.n_ions', 'int').parse('4'), 4)
        self.assertEqual(Parameter('chain.n_ions', 'INT').parse('4.0'), 4)
        self.assertEqual(Parameter('run.label', 'TEXT').parse(' cold '), 'cold')
        choice = Parameter('species.name', 'CHOICE', 'ca40', choices=['ca40'])
        self.assertEqual(choice.parse('CA40'), 'ca40')
        self.assertEqual(choice.default, 'ca40')

    def test_lists_and_ranges(self):
        scan = Parameter('sideband.detuning_hz', 'FLOATS')
        np.testing.assert_array_equal(scan.parse('1, 2.5,3'), [1.0, 2.5, 3.0])
        values = scan.parse('-150e3:150e3:301')
        self.assertEqual(values.size, 301)
        self.assertEqual(values[0], -150e3)
        self.assertEqual(values[-1], 150e3)
        self.assertEqual(values[150], 0.0)
        np.testing.assert_array_equal(scan.parse('2:2:1'), [2.0])
        with self.assertRaises(ValueError):
            values[0] = 1.0

    def test_invalid_values(self):
        with self.assertRaises(ConfigError):
            Parameter('trap.axial_freq_hz', 'FLOAT').parse('fast')
        with self.assertRaises(ConfigError):
            Parameter('trap.axial_freq_hz', 'FLOAT').parse('nan')
        with self.assertRaises(ConfigError):
            Parameter('trap.axial_freq_hz', 'FLOAT').parse('1:2:3')
        with self.assertRaises(ConfigError):
            Parameter('chain.n_ions', 'INT').parse('2.5')
        with self.assertRaises(ConfigError):
            Parameter('species.name', 'CHOICE', choices=['ca40']).parse('be9')
        scan = Parameter('sideband.detuning_hz', 'FLOATS')
        for text in ('1:2:2.5', '1:2:1', '1:2:0', '', ' , '):
            with self.assertRaises(ConfigError):
                scan.parse(text)

    def test_format_round_trip(self):
        value = Parameter('trap.axial_freq_hz', 'FLOAT')
        for number in (0.1, 1 / 3, 4.51e6, -2.0e-7):
            self.assertEqual(value.parse(value.format(number)), number)
        scan = Parameter('sideband.detuning_hz', 'FLOATS')
        values = scan.parse('0:1:7')
        np.testing.assert_array_equal(scan.parse(scan.format(values)), values)
        self.assertEqual(str(value), 'trap.axial_freq_hz (float, required)')

    def test_malformed_declaration(self):
        with self.assertRaises(NameError):
            Parameter('trap.axial_freq_hz', 'COMPLEX')
        with self.assertRaises(NameError):
            Parameter('axial_freq_hz', 'FLOAT')
        with self.assertRaises(NameError):
            Parameter('species.name', 'CHOICE')


class TestConfig(unittest.TestCase):
    def setUp(self):
        self.curr_dir = os.path.dirname(os.path.realpath(__file__))

    def test_read(self):
        raw = param.read_config(os.path.join(self.curr_dir, 'testfiles', 'minimal.cfg'))
        self.assertEqual(raw, {'trap.axial_freq_hz': '700e3', 'chain.n_ions': '2',
                               'flops.contrast_time_s': '1.44e-3'})

    def test_malformed(self):
        with self.assertRaises(ConfigError):
            param.read_config(os.path.join(self.curr_dir, 'testfiles', 'malformed.cfg'))

    def test_missing_file(self):
        with self.assertRaises(OSError):
            param.read_config(os.path.join(self.curr_dir, 'testfiles', 'absent.cfg'))

    def test_resolve(self):
        entry = scenarios.get_scenario('chain-geometry')
        raw = param.read_config(os.path.join(self.curr_dir, 'testfiles', 'minimal.cfg'))
        values, filled = param.resolve(entry.parameters, raw, scenarios.known_keys())
        self.assertEqual(values['chain.n_ions'], 2)
        self.assertEqual(values['trap.axial_freq_hz'], 700e3)
        self.assertEqual(values['run.seed'], 0)
        self.assertIn('chain.min_spacing_m', filled)
        self.assertNotIn('chain.n_ions', filled)
        self.assertNotIn('flops.contrast_time_s', values)

    def test_resolve_missing_required(self):
        entry = scenarios.get_scenario('chain-geometry')
        raw = param.read_config(os.path.join(self.curr_dir, 'testfiles', 'no_frequency.cfg'))
        with self.assertRaisesRegex(ConfigError, 'trap.axial_freq_hz'):
            param.resolve(entry.parameters, raw, scenarios.known_keys())

    def test_resolve_unknown(self):
        entry = scenarios.get_scenario('timescales')
        raw = {'trap.axial_freq_hz': '1e6', 'trap.axial_freq_khz': '1e3'}
        with self.assertRaisesRegex(ConfigError, 'axial_freq_khz'):
            param.resolve(entry.parameters, raw, scenarios.known_keys())

    def test_known_keys(self):
        keys = scenarios.known_keys()
        for key in ('run.seed', 'species.name', 'eit.levels', 'detection.shots'):
            self.assertIn(key, keys)
        with self.assertRaises(ConfigError):
            scenarios.get_scenario('warp-drive')


if __name__ == '__main__':
    unittest.main()
