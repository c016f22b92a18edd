#!/usr/bin/env python3
"""
Typed scenario parameters and the INI configuration they are read from.

Keys are addressed as ``section.key`` and carry their unit in the name, e.g.
``trap.axial_freq_hz``. Scan keys take a comma separated list or the range
``start:stop:steps`` (inclusive, evenly spaced).
"""
import configparser
import logging
import math
import re

import numpy as np

from iontrap.core import ConfigError

log = logging.getLogger(__name__)

REQUIRED = object()
RANGE = re.compile(r'^\s*(?P<start>[^:]+):(?P<stop>[^:]+):(?P<steps>[^:]+)\s*$')


class Parameter(object):
    type_list = ['FLOAT', 'INT', 'TEXT', 'CHOICE', 'FLOATS']

    def __init__(self, key, ptype, default=REQUIRED, choices=None, help=''):
        self.ptype = ptype.upper()
        if self.ptype not in self.type_list:
            raise NameError('Type not supported: ' + ptype)
        if key.count('.') != 1:
            raise NameError('Parameter keys have the form section.key, got {!r}'.format(key))
        self.key = key
        self.section, self.name = key.split('.')
        self.choices = tuple(choices) if choices else None
        if self.ptype == 'CHOICE' and not self.choices:
            raise NameError('Choice parameter {} needs choices'.format(key))
        self.help = help
        self.default = default if default is REQUIRED else self.parse(default)

    @property
    def required(self):
        return self.default is REQUIRED

    def parse(self, text):
        """Convert a configuration value to this parameter's type."""
        if not isinstance(text, str):
            text = self.format(text)
        text = text.strip()
        try:
            if self.ptype == 'FLOAT':
                return self._float(text)
            if self.ptype == 'INT':
                value = float(text)
                if not value.is_integer():
                    raise ValueError(text)
                return int(value)
            if self.ptype == 'TEXT':
                return text
            if self.ptype == 'CHOICE':
                if text.lower() not in self.choices:
                    raise ConfigError('Invalid value ({!r}) for {}, must be one of {}.'.format(
                        text, self.key, ', '.join(self.choices)))
                return text.lower()
            return self._floats(text)
        except ValueError:
            raise ConfigError('Invalid {} value ({!r}) for {}.'.format(
                self.ptype.lower(), text, self.key))

    def _float(self, text):
        if RANGE.match(text):
            raise ConfigError('{} takes a single number, not the range {!r}.'.format(
                self.key, text))
        value = float(text)
        if math.isnan(value):
            raise ValueError(text)
        return value

    def _floats(self, text):
        match = RANGE.match(text)
        if match:
            start = self._float(match.group('start'))
            stop = self._float(match.group('stop'))
            steps = float(match.group('steps'))
            if not steps.is_integer() or steps < 1 or (steps == 1 and start != stop):
                raise ConfigError('Invalid range {!r} for {}: steps must be an integer >= 2 '
                                  '(or 1 with start == stop).'.format(text, self.key))
            values = np.linspace(start, stop, int(steps))
        else:
            values = np.array([self._float(item) for item in text.split(',') if item.strip()])
        if values.size == 0:
            raise ConfigError('{} needs at least one value.'.format(self.key))
        values.setflags(write=False)
        return values

    def format(self, value):
        """Text form used in run manifests; parse(format(v)) == v."""
        if self.ptype == 'FLOAT':
            return repr(float(value))
        if self.ptype == 'FLOATS':
            return ', '.join(repr(float(v)) for v in np.atleast_1d(value))
        return str(value)

    def __str__(self):
        """Return string representation."""
        default = 'required' if self.required else self.format(self.default)
        return '{} ({}, {})'.format(self.key, self.ptype.lower(), default)


def read_config(path):
    """
    Read an INI file into a flat {'section.key': text} mapping.

    Parse errors become ConfigError; a missing or unreadable file raises OSError.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#', ';'))
    with open(path) as f:
        text = f.read()
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as e:
        raise ConfigError('Cannot parse {}: {}'.format(path, e))
    raw = {}
    for section in parser.sections():
        for name, value in parser.items(section):
            raw['{}.{}'.format(section.lower(), name.lower())] = value
    log.debug('read %d keys from %s', len(raw), path)
    return raw


def resolve(parameters, raw, known_keys):
    """
    Typed values for parameters from raw config text.

    Parameters
    ----------
    parameters : [Parameter]
        Parameters the scenario declares
    raw : dict
        Output of :func:`read_config`
    known_keys : set
        Keys declared by any scenario; everything else is rejected

    Returns
    -------
    (dict, [str])
        Values by key, and the keys whose defaults were filled in
    """
    unknown = sorted(set(raw) - set(known_keys))
    if unknown:
        raise ConfigError('Unknown configuration key(s): {}.'.format(', '.join(unknown)))
    values = {}
    filled = []
    for param in parameters:
        if param.key in raw:
            values[param.key] = param.parse(raw[param.key])
        elif param.required:
            raise ConfigError('Missing required parameter {}.'.format(param.key))
        else:
            values[param.key] = param.default
            filled.append(param.key)
    return values, filled
