#!/usr/bin/env python3
"""
Named experiments: the parameters each one declares and the tables it produces.

A runner takes the resolved values and the seed and returns an ordered mapping
of output name to DataFrame; every DataFrame becomes one CSV file.
"""
import collections
import logging
import math
from dataclasses import replace

import numpy as np
import pandas as pd

from iontrap import apparatus, chain, cooling, dynamics, liouville
from iontrap.core import (ConfigError, DomainError, FockDistribution, MotionalMode, SPECIES,
                          TWO_PI, lamb_dicke_parameter, thermal_distribution)
from iontrap.param import Parameter

log = logging.getLogger(__name__)

# Parameters shared by several scenarios
SEED = Parameter('run.seed', 'INT', 0, help='seed of all random draws')
SPECIES_NAME = Parameter('species.name', 'CHOICE', 'ca40', choices=SPECIES)
N_IONS = Parameter('chain.n_ions', 'INT', help='ions in the string')
AXIAL_FREQ = Parameter('trap.axial_freq_hz', 'FLOAT', help='axial COM frequency')
CONTRAST_TIME = Parameter('flops.contrast_time_s', 'FLOAT', dynamics.DEFAULT_CONTRAST_TIME)
HEATING_RATE = Parameter('flops.heating_rate_per_s', 'FLOAT', dynamics.DEFAULT_HEATING_RATE)
D_LIFETIME = Parameter('flops.d_lifetime_s', 'FLOAT', dynamics.DEFAULT_D_LIFETIME)

EIT_PARAMETERS = (
    Parameter('eit.delta_sigma_hz', 'FLOAT', 60e6, help='dressing beam detuning'),
    Parameter('eit.stark_shift_hz', 'FLOAT', 2.5e6, help='light shift setting the dressing Rabi'),
    Parameter('eit.rabi_pi_hz', 'FLOAT', 1e6, help='probe Rabi frequency'),
    Parameter('eit.b_field_gauss', 'FLOAT', 4.0),
    Parameter('eit.levels', 'INT', 4, help='4 for the full manifold, 3 for the reduction'),
    Parameter('eit.dephasing_per_s', 'FLOAT', 0.0, help='ground-state dephasing'),
)


class Scenario(object):
    def __init__(self, name, description, parameters, runner):
        self.name = name
        self.description = description
        self.parameters = (SEED, SPECIES_NAME) + tuple(parameters)
        self.runner = runner

    def run(self, values, seed):
        outputs = self.runner(values, seed)
        for name, frame in outputs.items():
            log.debug('%s: output %s has %d rows', self.name, name, len(frame))
        return outputs

    def __str__(self):
        return '{:<22}{}'.format(self.name, self.description)


SCENARIOS = collections.OrderedDict()


def scenario(name, description, *parameters):
    """Register the decorated runner in SCENARIOS."""
    def register(runner):
        SCENARIOS[name] = Scenario(name, description, parameters, runner)
        return runner
    return register


def get_scenario(name):
    try:
        return SCENARIOS[name]
    except KeyError:
        raise ConfigError('Invalid scenario ({!r}), must be one of {}.'.format(
            name, ', '.join(SCENARIOS)))


def known_keys():
    return {param.key for entry in SCENARIOS.values() for param in entry.parameters}


def _species(values):
    return SPECIES[values['species.name']]


def _manifold(values, species):
    delta_sigma = TWO_PI * values['eit.delta_sigma_hz']
    rabi_sigma = liouville.rabi_for_stark_shift(delta_sigma, TWO_PI * values['eit.stark_shift_hz'])
    return liouville.DressedManifold(
        delta_sigma=delta_sigma, rabi_sigma=rabi_sigma, rabi_pi=TWO_PI * values['eit.rabi_pi_hz'],
        gamma=species.gamma_p, b_field_gauss=values['eit.b_field_gauss'],
        lande_s=species.lande_s, lande_p=species.lande_p, levels=values['eit.levels'],
        dephasing=values['eit.dephasing_per_s'])


@scenario('chain-geometry', 'equilibrium positions, axial modes and the spacing limit',
          N_IONS, AXIAL_FREQ,
          Parameter('chain.min_spacing_m', 'FLOAT', 5e-6),
          Parameter('chain.table_max_ions', 'INT', 10),
          Parameter('chain.projection_angle_rad', 'FLOAT', 0.0))
def chain_geometry(values, seed):
    species = _species(values)
    geometry = chain.chain_geometry(values['chain.n_ions'], values['trap.axial_freq_hz'], species)
    positions = pd.DataFrame({'ion': np.arange(geometry.n_ions),
                              'position_m': geometry.positions,
                              'position_dimensionless': geometry.dimensionless_positions})

    spectrum = chain.axial_modes(geometry)
    modes = collections.OrderedDict()
    modes['mode'] = np.arange(geometry.n_ions)
    modes['frequency_hz'] = spectrum.frequencies
    modes['ratio_to_com'] = spectrum.frequencies / spectrum.frequencies[0]
    for ion in range(geometry.n_ions):
        modes['participation_ion{}'.format(ion)] = spectrum.eigenvectors[ion, :]
    for ion in range(geometry.n_ions):
        modes['lamb_dicke_ion{}'.format(ion)] = [
            chain.mode_lamb_dicke(species, spectrum, mode, ion, species.lambda_qubit,
                                  values['chain.projection_angle_rad'])
            for mode in range(geometry.n_ions)]

    d_min = values['chain.min_spacing_m']
    table = []
    for n_ions in range(2, values['chain.table_max_ions'] + 1):
        table.append({
            'n_ions': n_ions,
            'max_com_frequency_hz': chain.max_com_frequency(n_ions, d_min, species),
            'min_spacing_m': chain.min_spacing(n_ions, values['trap.axial_freq_hz'], species),
        })
    limits = pd.DataFrame(table, columns=['n_ions', 'max_com_frequency_hz', 'min_spacing_m'])
    return collections.OrderedDict([('positions', positions), ('modes', pd.DataFrame(modes)),
                                    ('spacing_limit', limits)])


@scenario('sideband-scan', 'red and blue sideband spectra of Doppler-cooled and cooled states',
          Parameter('sideband.lamb_dicke', 'FLOAT', 0.046),
          Parameter('sideband.rabi_hz', 'FLOAT', 500e3, help='carrier Rabi frequency'),
          Parameter('sideband.pulse_s', 'FLOAT', 20e-6),
          Parameter('sideband.detuning_hz', 'FLOATS', '-150e3:150e3:301',
                    help='detuning from each sideband'),
          Parameter('sideband.doppler_nbar', 'FLOAT', 2.0),
          Parameter('sideband.cooled_nbar', 'FLOAT', 1e-3))
def sideband_scan(values, seed):
    eta = values['sideband.lamb_dicke']
    rabi = TWO_PI * values['sideband.rabi_hz']
    duration = values['sideband.pulse_s']
    detunings = values['sideband.detuning_hz']
    spectra = collections.OrderedDict([('detuning_hz', detunings)])
    estimates = []
    for regime in ('doppler', 'cooled'):
        nbar = values['sideband.{}_nbar'.format(regime)]
        motion = thermal_distribution(nbar)
        for kind in (dynamics.RED, dynamics.BLUE):
            pulse = dynamics.Pulse(dynamics.Sideband(kind), rabi, duration)
            spectra['p_excite_{}_regime_{}'.format(kind, regime)] = dynamics.sideband_excitation(
                motion, pulse, eta, TWO_PI * detunings)
        result = dynamics.sideband_thermometry(motion, eta, rabi, duration)
        estimates.append({'regime': regime, 'nbar': nbar, 'ratio': result.ratio,
                          'nbar_recovered': result.nbar,
                          'ground_state_population_recovered': result.ground_state_population})
    return collections.OrderedDict([('spectrum', pd.DataFrame(spectra)),
                                    ('thermometry', pd.DataFrame(estimates))])


def _transition(values, key):
    try:
        return dynamics.Sideband.parse(values[key])
    except (DomainError, ValueError) as e:
        raise ConfigError('Invalid transition for {}: {}'.format(key, e))


@scenario('rabi-flops', 'blue-sideband flops of |n=0> and |n=1> and Fock state preparation',
          Parameter('flops.lamb_dicke', 'FLOAT', 0.046),
          Parameter('flops.rabi_hz', 'FLOAT', 500e3),
          Parameter('flops.times_s', 'FLOATS', '0:400e-6:801'),
          Parameter('flops.thermal_nbar', 'FLOAT', 2.0),
          Parameter('flops.thermal_transition', 'TEXT', 'carrier',
                    help='carrier, red, blue, red2, ... driven on the thermal state'),
          CONTRAST_TIME, HEATING_RATE, D_LIFETIME)
def rabi_flops(values, seed):
    eta = values['flops.lamb_dicke']
    rabi = TWO_PI * values['flops.rabi_hz']
    times = values['flops.times_s']
    decoherence = dynamics.DecoherenceModel(values['flops.contrast_time_s'],
                                            values['flops.heating_rate_per_s'],
                                            values['flops.d_lifetime_s'])
    blue = dynamics.Pulse(dynamics.Sideband(dynamics.BLUE), rabi, 0.0)
    thermal_pulse = dynamics.Pulse(_transition(values, 'flops.thermal_transition'), rabi, 0.0)
    coherent = dynamics.DecoherenceModel.coherent()

    flops = collections.OrderedDict([('time_s', times)])
    fits = []
    for n in (0, 1):
        state = dynamics.ProductState(FockDistribution.fock(n))
        flops['p_d_blue_fock{}'.format(n)] = dynamics.simulate_flops(
            state, blue, decoherence, times, eta)
        # The fit model has no envelope; fit the coherent curve
        fitted = dynamics.fit_flop_frequency(
            times, dynamics.simulate_flops(state, blue, coherent, times, eta))
        fits.append({'fock_state': n, 'fitted_rabi_rad_s': fitted,
                     'closed_form_rad_s': dynamics.rabi_frequency(n, blue.transition, eta, rabi)})
    thermal = dynamics.ProductState(thermal_distribution(values['flops.thermal_nbar']))
    flops['p_d_{}_thermal'.format(thermal_pulse.transition)] = dynamics.simulate_flops(
        thermal, thermal_pulse, decoherence, times, eta)

    fits = pd.DataFrame(fits)
    fits['ratio_to_fock0'] = fits['fitted_rabi_rad_s'] / fits['fitted_rabi_rad_s'][0]
    preparation = dynamics.prepare_fock_one(eta, rabi, decoherence)
    fock_one = pd.DataFrame([{'duration_s': preparation.duration,
                              'population_one': preparation.population_one,
                              'fidelity': preparation.fidelity}])
    return collections.OrderedDict([('flops', pd.DataFrame(flops)), ('fits', fits),
                                    ('fock_one', fock_one)])


@scenario('cooling-sim', 'resolved-sideband cooling of every axial mode with anomalous heating',
          Parameter('cooling.n_ions', 'INT', 1),
          Parameter('cooling.mode_freq_hz', 'FLOAT', 4.51e6, help='COM frequency'),
          Parameter('cooling.projection_angle_rad', 'FLOAT', 0.0),
          Parameter('cooling.gamma_eff_hz', 'FLOAT', 50e3),
          Parameter('cooling.quench_rabi_hz', 'FLOAT', 0.0,
                    help='if > 0 the linewidth follows from the quench laser instead'),
          Parameter('cooling.a_minus_per_s', 'FLOAT', 1e4, help='COM cooling coefficient'),
          Parameter('cooling.detuning_offset_hz', 'FLOAT', 0.0,
                    help='laser detuning from the red sideband'),
          Parameter('cooling.initial_nbar', 'FLOAT', 2.0),
          Parameter('cooling.heating_rate_per_s', 'FLOAT', dynamics.DEFAULT_HEATING_RATE),
          Parameter('cooling.t_end_s', 'FLOAT', 6e-3),
          Parameter('cooling.steps', 'INT', cooling.DEFAULT_STEPS),
          Parameter('cooling.target_p0', 'FLOAT', 0.999))
def cooling_sim(values, seed):
    species = _species(values)
    com = values['cooling.mode_freq_hz']
    angle = values['cooling.projection_angle_rad']
    n_ions = values['cooling.n_ions']
    if n_ions == 1:
        frequencies = np.array([com])
        etas = [lamb_dicke_parameter(species, species.lambda_qubit, angle, com)]
    else:
        spectrum = chain.axial_modes(chain.chain_geometry(n_ions, com, species))
        frequencies = spectrum.frequencies
        etas = [chain.mode_lamb_dicke(species, spectrum, mode, 0, species.lambda_qubit, angle)
                for mode in range(n_ions)]

    gamma_eff = TWO_PI * values['cooling.gamma_eff_hz']
    if values['cooling.quench_rabi_hz'] > 0:
        gamma_eff = cooling.quench_linewidth(TWO_PI * values['cooling.quench_rabi_hz'],
                                             species.gamma_p32)
    omega = TWO_PI * com
    template = cooling.SidebandCoolingParams(
        eta=etas[0], rabi=1.0, gamma_eff=gamma_eff,
        detuning=-omega + TWO_PI * values['cooling.detuning_offset_hz'], trap_frequency=omega)
    params = replace(template, rabi=cooling.rabi_for_cooling_rate(
        template, values['cooling.a_minus_per_s']))
    heating = values['cooling.heating_rate_per_s']
    trajectories = cooling.cool_modes(
        params, [MotionalMode(frequency, eta, 'mode{}'.format(mode))
                 for mode, (frequency, eta) in enumerate(zip(frequencies, etas))],
        [values['cooling.initial_nbar']] * n_ions, heating, values['cooling.t_end_s'],
        values['cooling.steps'])

    series = collections.OrderedDict([('time_s', trajectories[0].times)])
    summary = []
    for mode, (frequency, eta, trajectory) in enumerate(zip(frequencies, etas, trajectories)):
        series['nbar_mode{}'.format(mode)] = trajectory.nbar
        series['p0_mode{}'.format(mode)] = trajectory.ground_state_population
        rates = cooling.sideband_cooling_rates(replace(
            params, eta=eta, detuning=-TWO_PI * frequency, trap_frequency=TWO_PI * frequency))
        reached = trajectory.time_to_reach(values['cooling.target_p0'])
        summary.append({
            'mode': mode,
            'frequency_hz': frequency,
            'lamb_dicke': eta,
            'rabi_rad_s': params.rabi,
            'gamma_eff_rad_s': gamma_eff,
            'a_minus_per_s': rates.a_minus,
            'a_plus_per_s': rates.a_plus,
            'doppler_limit_nbar': cooling.doppler_limit(species.gamma_p, TWO_PI * frequency),
            'steady_state_nbar': trajectory.steady_state_nbar,
            'final_nbar': trajectory.nbar[-1],
            'truncated': trajectory.truncated,
            'final_p0': trajectory.ground_state_population[-1],
            'time_to_target_s': math.nan if reached is None else reached,
        })
    return collections.OrderedDict([('trajectory', pd.DataFrame(series)),
                                    ('summary', pd.DataFrame(summary))])


@scenario('eit-spectrum', 'absorption profile of the probe in the dressed S1/2-P1/2 manifold',
          *(EIT_PARAMETERS + (Parameter('eit.two_photon_detuning_hz', 'FLOATS',
                                        '-5e6:10e6:751'),)))
def eit_spectrum(values, seed):
    species = _species(values)
    manifold = _manifold(values, species)
    offsets = values['eit.two_photon_detuning_hz']
    spectrum = liouville.probe_spectrum(manifold, manifold.delta_sigma + TWO_PI * offsets)
    profile = pd.DataFrame({'two_photon_detuning_hz': offsets,
                            'scattering_rate_per_s': spectrum.scattering_rates})
    summary = pd.DataFrame([{
        'stark_shift_hz': manifold.stark_shift / TWO_PI,
        'rabi_sigma_hz': manifold.rabi_sigma / TWO_PI,
        'bright_resonance_hz': (spectrum.bright_resonance() - manifold.delta_sigma) / TWO_PI,
        'dark_resonance_hz': (spectrum.dark_resonance() - manifold.delta_sigma) / TWO_PI,
        'peak_rate_per_s': spectrum.scattering_rates.max(),
        'minimum_rate_per_s': spectrum.scattering_rates.min(),
        'strong_probe': spectrum.strong_probe,
    }])
    return collections.OrderedDict([('spectrum', profile), ('summary', summary)])


@scenario('eit-cooling', 'steady-state occupation of several modes under EIT cooling',
          *(EIT_PARAMETERS + (
              Parameter('eit.mode_freqs_hz', 'FLOATS', '1.61e6, 3.34e6'),
              Parameter('eit.wavelength_m', 'FLOAT', 396.959e-9,
                        help='wavelength of the wave-vector difference'),
              Parameter('eit.projection_angle_rad', 'FLOAT', 0.0),
              Parameter('eit.heating_rate_per_s', 'FLOAT', 0.0),
              Parameter('eit.reference_nbar', 'FLOAT', 0.0,
                        help='if > 0 the heating rate is fitted so the first mode reaches it'))))
def eit_cooling(values, seed):
    species = _species(values)
    manifold = _manifold(values, species)
    frequencies = values['eit.mode_freqs_hz']
    etas = [lamb_dicke_parameter(species, values['eit.wavelength_m'],
                                 values['eit.projection_angle_rad'], frequency)
            for frequency in frequencies]
    heating = values['eit.heating_rate_per_s']
    if values['eit.reference_nbar'] > 0:
        heating = cooling.eit_heating_for_nbar(manifold, frequencies[0], etas[0],
                                               values['eit.reference_nbar'])
        log.info('eit-cooling: heating rate %.4g phonons/s fitted to nbar=%g', heating,
                 values['eit.reference_nbar'])
    results = cooling.eit_cool_modes(manifold, frequencies, etas, heating)
    rows = []
    for result in results:
        rows.append({
            'mode_freq_hz': result.mode_frequency,
            'lamb_dicke': result.eta,
            'scattering_red_per_s': result.scattering_red,
            'scattering_blue_per_s': result.scattering_blue,
            'scattering_carrier_per_s': result.scattering_carrier,
            'a_minus_per_s': result.a_minus,
            'a_plus_per_s': result.a_plus,
            'heating_rate_per_s': result.heating_rate,
            'nbar': result.nbar,
            'ground_state_population': result.ground_state_population,
            'doppler_limit_nbar': cooling.doppler_limit(species.gamma_p,
                                                        TWO_PI * result.mode_frequency),
            'cooling': result.cooling,
        })
    return collections.OrderedDict([('modes', pd.DataFrame(rows))])


@scenario('detection-histogram', 'photon-count statistics and errors of quantum-jump readout',
          Parameter('detection.collection_fraction', 'FLOAT', 1e-2),
          Parameter('detection.quantum_efficiency', 'FLOAT', 0.10),
          Parameter('detection.scattering_rate_per_s', 'FLOAT', 3e7),
          Parameter('detection.background_rate_per_s', 'FLOAT', 1000.0),
          Parameter('detection.window_s', 'FLOAT', 2e-3),
          Parameter('detection.d_lifetime_s', 'FLOAT', 1.0),
          Parameter('detection.threshold_counts', 'INT', 10),
          Parameter('detection.shots', 'INT', 1000000))
def detection_histogram(values, seed):
    cfg = apparatus.DetectionConfig(
        collection_fraction=values['detection.collection_fraction'],
        quantum_efficiency=values['detection.quantum_efficiency'],
        scattering_rate_bright=values['detection.scattering_rate_per_s'],
        background_rate=values['detection.background_rate_per_s'],
        window=values['detection.window_s'],
        d_lifetime=values['detection.d_lifetime_s'])
    distributions = apparatus.count_distributions(cfg)
    histogram = pd.DataFrame({'counts': distributions.counts, 'p_bright': distributions.bright,
                              'p_dark': distributions.dark})

    errors = []
    for threshold in range(cfg.scan_limit + 1):
        eps_bright, eps_dark = apparatus.detection_error(cfg, threshold)
        errors.append({'threshold': threshold, 'eps_bright': eps_bright, 'eps_dark': eps_dark,
                       'total': eps_bright + eps_dark})

    threshold = values['detection.threshold_counts']
    summary = apparatus.detection_summary(cfg, threshold)
    mc_bright, mc_dark = apparatus.simulate_detection(cfg, threshold, values['detection.shots'],
                                                      seed)
    rows = [
        {'kind': 'fixed', 'threshold': threshold, 'eps_bright': summary.eps_bright,
         'eps_dark': summary.eps_dark},
        {'kind': 'optimal', 'threshold': summary.optimal_threshold,
         'eps_bright': summary.optimal_eps_bright, 'eps_dark': summary.optimal_eps_dark},
        {'kind': 'monte_carlo', 'threshold': threshold, 'eps_bright': mc_bright,
         'eps_dark': mc_dark},
    ]
    table = pd.DataFrame(rows, columns=['kind', 'threshold', 'eps_bright', 'eps_dark'])
    table['total'] = table['eps_bright'] + table['eps_dark']
    return collections.OrderedDict([('histogram', histogram), ('errors', pd.DataFrame(errors)),
                                    ('summary', table)])


@scenario('addressability', 'neighbour crosstalk of the addressing beam and deflector settings',
          N_IONS, AXIAL_FREQ,
          Parameter('beam.width_1e_m', 'FLOAT', 3.7e-6),
          Parameter('beam.resolution_m', 'FLOAT', apparatus.IMAGING_RESOLUTION),
          Parameter('beam.distances_m', 'FLOATS', '0:10e-6:101'),
          Parameter('deflector.max_voltage_v', 'FLOAT', 3e3),
          Parameter('deflector.voltages_v', 'FLOATS', '-1000:1000:9'))
def addressability(values, seed):
    species = _species(values)
    geometry = chain.chain_geometry(values['chain.n_ions'], values['trap.axial_freq_hz'], species)
    beam = apparatus.BeamProfile(width_1e=values['beam.width_1e_m'])
    deflector = replace(apparatus.DEFLECTOR, max_voltage=values['deflector.max_voltage_v'])
    pairs = apparatus.addressability_report(geometry, beam, values['beam.resolution_m'],
                                            deflector)
    distances = values['beam.distances_m']
    crosstalk = pd.DataFrame({
        'distance_m': distances,
        'crosstalk_pi': [apparatus.crosstalk_probability(beam, d) for d in distances]})
    voltages = values['deflector.voltages_v']
    calibration = pd.DataFrame({
        'voltage_v': voltages,
        'displacement_m': [apparatus.deflector_displacement(v, deflector) for v in voltages]})
    calibration['effective_focal_length_m'] = apparatus.effective_focal_length(deflector)
    return collections.OrderedDict([('pairs', pairs), ('crosstalk', crosstalk),
                                    ('deflector', calibration)])


@scenario('timescales', 'characteristic times of the setup, fastest first',
          AXIAL_FREQ, CONTRAST_TIME,
          Parameter('timescales.pi_pulse_s', 'FLOAT', 20e-6, help='sideband pi pulse'),
          Parameter('timescales.cnot_s', 'FLOAT', 200e-6),
          Parameter('timescales.heating_rate_per_s', 'FLOAT', dynamics.DEFAULT_HEATING_RATE),
          Parameter('laser.coherence_s', 'FLOAT', 15e-3),
          Parameter('laser.fwhm_hz', 'FLOAT', 76.0))
def timescales(values, seed):
    species = _species(values)
    heating = values['timescales.heating_rate_per_s']
    decoherence = dynamics.DecoherenceModel(contrast_time=values['flops.contrast_time_s'])
    entries = [
        ('trap_period', 1 / values['trap.axial_freq_hz'], math.nan),
        ('sideband_pi_pulse', values['timescales.pi_pulse_s'], math.nan),
        ('cnot_gate', values['timescales.cnot_s'], math.nan),
        ('qubit_coherence', decoherence.coherence_time(0.5), math.nan),
        ('laser_coherence', values['laser.coherence_s'],
         dynamics.ramsey_time(values['laser.fwhm_hz'])),
        ('motional_heating', 1 / heating if heating > 0 else math.inf, math.nan),
        ('d_lifetime', species.tau_d, math.nan),
    ]
    table = pd.DataFrame(entries, columns=['quantity', 'time_s', 'ramsey_time_s'])
    table['phonons_gained'] = [cooling.heating_evolution(0.0, heating, t) for t in table['time_s']]
    if not np.all(np.diff(table['time_s']) > 0):
        log.warning('Timescales are not strictly increasing with these parameters')
    return collections.OrderedDict([('timescales', table)])
