"""Simulation config: JSON document with sections, validated by Django forms.

Every omitted key is filled from ``DEFAULTS``/``SCENARIO_DEFAULTS``; unknown keys
are errors. ``emit_config`` writes a config that parses back to an equal one.
"""
import copy
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

from django import forms
from django.conf import settings
from django.core.exceptions import ValidationError

from .atmosphere import (
    BUCK_TEMPERATURE_RANGE,
    DEFAULT_LINES_FILE,
    AbsorptionModel,
    Atmosphere,
    load_absorption_table,
    load_line_set,
)
from .channel import SpectrumPlan
from .exceptions import ConfigError
from .link import BeamConfig, RadioHardware
from .mobility import CLASS_NAMES, AlignmentTiming, MobilityClass, mobility_class
from .utils import expand_grid

logger = logging.getLogger(__name__)

SCENARIOS = ('pathloss', 'windows', 'rate', 'backhaul', 'kiosk-c', 'kiosk-d', 'abs')
ABSORPTION_SOURCES = ('builtin-lines', 'lines', 'table')


def _degrees(start, stop):
    return [float(v) for v in range(start, stop + 1)]


DEFAULTS = {
    'atmosphere': {
        'temperature_k': 293.15,
        'pressure_kpa': 101.325,
        'relative_humidity': 50.0,
    },
    'hardware': {
        'tx_power_dbm': 10.0,
        'noise_figure_db': 10.0,
        'system_temperature_k': 290.0,
        'tx_beamwidth_deg': 10.0,
        'rx_beamwidth_deg': 10.0,
    },
    'absorption': {
        'source': 'builtin-lines',
        'path': '',
    },
    'channel': {
        'f_low_ghz': 100.0,
        'f_high_ghz': 1000.0,
        'grid_step_ghz': 0.1,
        'loss_threshold_db': 120.0,
        'subchannel_width_ghz': 0.1,
    },
    'mobility': {
        'realign_latency_s': 0.01,
        'duration_s': 10.0,
        'timestep_s': 0.001,
        's1_oscillation_hz': [0.5, 2.0],
        's2_oscillation_hz': [0.2, 1.0],
        's3_oscillation_hz': [0.05, 0.5],
    },
}

SCENARIO_DEFAULTS = {
    'pathloss': {
        'distances_m': [1.0, 10.0, 100.0],
    },
    'windows': {
        'distance_m': 100.0,
    },
    'rate': {
        'distances_m': [1.0, 5.0, 10.0],
        'relative_humidities': [20.0, 50.0, 100.0],
        'bandwidth_ghz': 10.0,
        'center_step_ghz': 10.0,
    },
    'backhaul': {
        'total_distance_m': 500.0,
        'required_rate_gbps': 100.0,
        'required_bandwidth_ghz': 10.0,
        'd_max_search_m': 1000.0,
        'beamwidths_deg': [],
    },
    'kiosk-c': {
        'mobility_class': 'S1',
        'deltas_deg': _degrees(1, 30),
        'distance_m': 2.0,
        'bandwidth_ghz': 20.0,
        'n_seeds': 20,
        'demand_gbps': 10.0,
        'trace': False,
    },
    'kiosk-d': {
        'users': 30,
        'r_min_m': 0.5,
        'r_max_m': 5.0,
        'sector_half_angle_deg': 60.0,
        'mobility_class': 'S1',
        'deltas_deg': _degrees(1, 60),
        'demand_gbps': 10.0,
        'bandwidth_ghz': 20.0,
    },
    'abs': {
        'users': 50,
        'disk_radius_m': 100.0,
        'mobility_class': 'S2',
        'heights_m': [float(h) for h in range(10, 201, 10)],
        'deltas_deg': _degrees(1, 60),
        'bandwidth_ghz': 10.0,
        'carrier_ghz': 325.0,
        'demand_gbps': 10.0,
        'matched_ue_beam': True,
        'n_drones': 2,
        'corridor_m': 1000.0,
    },
}


# --- Form fields -------------------------------------------------------------

class GridField(forms.Field):
    """List of numbers, or an inclusive ``{start, stop, step}`` range"""

    def __init__(self, *, allow_empty=False, min_value=None, exclusive_min=False, **kwargs):
        self.allow_empty = allow_empty
        self.min_value = min_value
        self.exclusive_min = exclusive_min
        super().__init__(**kwargs)

    def to_python(self, value):
        if value is None:
            return []
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            value = [value]
        if isinstance(value, dict):
            if set(value) != {'start', 'stop', 'step'}:
                raise ValidationError('range grid needs exactly start, stop and step')
        elif not isinstance(value, (list, tuple)):
            raise ValidationError('expected a list of numbers or a {start, stop, step} range')
        try:
            grid = expand_grid(value)
        except (TypeError, ValueError) as e:
            raise ValidationError(f'malformed grid: {e}')
        if not all(math.isfinite(v) for v in grid):
            raise ValidationError('grid values must be finite numbers')
        return grid

    def validate(self, value):
        if not value and not self.allow_empty:
            raise ValidationError('grid must not be empty')
        if self.min_value is None:
            return
        if self.exclusive_min and any(v <= self.min_value for v in value):
            raise ValidationError(f'grid values must be > {self.min_value}')
        if any(v < self.min_value for v in value):
            raise ValidationError(f'grid values must be >= {self.min_value}')


class RangeField(forms.Field):
    """``[min, max]`` pair with 0 <= min <= max"""

    def to_python(self, value):
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ValidationError('expected a [min, max] pair')
        try:
            low, high = float(value[0]), float(value[1])
        except (TypeError, ValueError):
            raise ValidationError('range bounds must be numbers')
        if not 0 <= low <= high:
            raise ValidationError('range must satisfy 0 <= min <= max')
        return [low, high]


class PositiveFloatField(forms.FloatField):
    """FloatField with an exclusive lower bound of zero"""

    def validate(self, value):
        super().validate(value)
        if value is not None and not value > 0:
            raise ValidationError('Ensure this value is greater than 0.', code='min_value')


def _positive(**kwargs):
    return PositiveFloatField(**kwargs)


class AtmosphereForm(forms.Form):
    temperature_k = forms.FloatField(
        min_value=BUCK_TEMPERATURE_RANGE[0], max_value=BUCK_TEMPERATURE_RANGE[1]
    )
    pressure_kpa = _positive()
    relative_humidity = forms.FloatField(min_value=0.0, max_value=100.0)


class HardwareForm(forms.Form):
    tx_power_dbm = forms.FloatField()
    noise_figure_db = forms.FloatField(min_value=0.0)
    system_temperature_k = _positive()
    tx_beamwidth_deg = _positive(max_value=360.0)
    rx_beamwidth_deg = _positive(max_value=360.0)


class AbsorptionForm(forms.Form):
    source = forms.ChoiceField(choices=[(s, s) for s in ABSORPTION_SOURCES])
    path = forms.CharField(required=False, empty_value='')

    def clean(self):
        cleaned = super().clean()
        source, path = cleaned.get('source'), cleaned.get('path', '')
        if source in ('lines', 'table'):
            if not path:
                raise ValidationError({'path': f'absorption source {source!r} needs a path'})
            if not Path(path).is_file():
                raise ValidationError({'path': f'file not found: {path}'})
        return cleaned


class ChannelForm(forms.Form):
    f_low_ghz = _positive()
    f_high_ghz = _positive()
    grid_step_ghz = _positive()
    loss_threshold_db = forms.FloatField()
    subchannel_width_ghz = _positive()

    def clean(self):
        cleaned = super().clean()
        if cleaned.get('f_low_ghz') is not None and cleaned.get('f_high_ghz') is not None:
            if cleaned['f_low_ghz'] >= cleaned['f_high_ghz']:
                raise ValidationError({'f_high_ghz': 'f_high_ghz must be greater than f_low_ghz'})
        return cleaned


class MobilityForm(forms.Form):
    realign_latency_s = forms.FloatField(min_value=0.0)
    duration_s = _positive()
    timestep_s = _positive()
    s1_oscillation_hz = RangeField()
    s2_oscillation_hz = RangeField()
    s3_oscillation_hz = RangeField()

    def clean(self):
        cleaned = super().clean()
        duration, timestep = cleaned.get('duration_s'), cleaned.get('timestep_s')
        if duration is not None and timestep is not None and timestep > duration / 100:
            raise ValidationError({'timestep_s': 'timestep must be <= duration/100'})
        return cleaned


class _MobilityClassField(forms.ChoiceField):
    def __init__(self, **kwargs):
        super().__init__(choices=[(c, c) for c in CLASS_NAMES], **kwargs)


class PathlossForm(forms.Form):
    distances_m = GridField(min_value=0.0, exclusive_min=True)


class WindowsForm(forms.Form):
    distance_m = _positive()


class RateForm(forms.Form):
    distances_m = GridField(min_value=0.0, exclusive_min=True)
    relative_humidities = GridField(min_value=0.0)
    bandwidth_ghz = _positive()
    center_step_ghz = _positive()


class BackhaulForm(forms.Form):
    total_distance_m = _positive()
    required_rate_gbps = _positive()
    required_bandwidth_ghz = _positive()
    d_max_search_m = forms.FloatField(min_value=1.0)
    beamwidths_deg = GridField(allow_empty=True, required=False, min_value=0.0, exclusive_min=True)


class KioskCForm(forms.Form):
    mobility_class = _MobilityClassField()
    deltas_deg = GridField(min_value=0.0, exclusive_min=True)
    distance_m = _positive()
    bandwidth_ghz = _positive()
    n_seeds = forms.IntegerField(min_value=1)
    demand_gbps = _positive()
    trace = forms.BooleanField(required=False)


class KioskDForm(forms.Form):
    users = forms.IntegerField(min_value=1)
    r_min_m = _positive()
    r_max_m = _positive()
    sector_half_angle_deg = forms.FloatField(min_value=0.0, max_value=180.0)
    mobility_class = _MobilityClassField()
    deltas_deg = GridField(min_value=0.0, exclusive_min=True)
    demand_gbps = _positive()
    bandwidth_ghz = _positive()


class AbsForm(forms.Form):
    users = forms.IntegerField(min_value=1)
    disk_radius_m = _positive()
    mobility_class = _MobilityClassField()
    heights_m = GridField(min_value=0.0, exclusive_min=True)
    deltas_deg = GridField(min_value=0.0, exclusive_min=True)
    bandwidth_ghz = _positive()
    carrier_ghz = _positive()
    demand_gbps = _positive()
    matched_ue_beam = forms.BooleanField(required=False)
    n_drones = forms.IntegerField(min_value=2)
    corridor_m = _positive()


SECTION_FORMS = {
    'atmosphere': AtmosphereForm,
    'hardware': HardwareForm,
    'absorption': AbsorptionForm,
    'channel': ChannelForm,
    'mobility': MobilityForm,
}

SCENARIO_FORMS = {
    'pathloss': PathlossForm,
    'windows': WindowsForm,
    'rate': RateForm,
    'backhaul': BackhaulForm,
    'kiosk-c': KioskCForm,
    'kiosk-d': KioskDForm,
    'abs': AbsForm,
}


# --- SimConfig ---------------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    atmosphere: Dict[str, Any]
    hardware: Dict[str, Any]
    absorption: Dict[str, Any]
    channel: Dict[str, Any]
    mobility: Dict[str, Any]
    scenario: str
    params: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    output: str = 'out'

    def to_dict(self) -> Dict[str, Any]:
        return {
            'atmosphere': dict(self.atmosphere),
            'hardware': dict(self.hardware),
            'absorption': dict(self.absorption),
            'channel': dict(self.channel),
            'mobility': copy.deepcopy(self.mobility),
            'scenario': {'name': self.scenario, **copy.deepcopy(self.params)},
            'seed': self.seed,
            'output': self.output,
        }

    def build_atmosphere(self, relative_humidity: Optional[float] = None) -> Atmosphere:
        return Atmosphere(
            temperature=self.atmosphere['temperature_k'],
            pressure=self.atmosphere['pressure_kpa'],
            relative_humidity=(
                self.atmosphere['relative_humidity'] if relative_humidity is None else relative_humidity
            ),
        )

    def build_hardware(self) -> RadioHardware:
        return RadioHardware(
            tx_power=self.hardware['tx_power_dbm'],
            noise_figure=self.hardware['noise_figure_db'],
            system_temperature=self.hardware['system_temperature_k'],
            tx_beam=BeamConfig.from_degrees(self.hardware['tx_beamwidth_deg']),
            rx_beam=BeamConfig.from_degrees(self.hardware['rx_beamwidth_deg']),
        )

    def build_model(self) -> AbsorptionModel:
        source, path = self.absorption['source'], self.absorption['path']
        if source == 'lines':
            return load_line_set(path)
        if source == 'table':
            return load_absorption_table(path)
        return load_line_set(getattr(settings, 'SIMULATOR_LINES_FILE', DEFAULT_LINES_FILE))

    def build_spectrum(self) -> SpectrumPlan:
        return SpectrumPlan(
            f_low=self.channel['f_low_ghz'] * 1e9,
            f_high=self.channel['f_high_ghz'] * 1e9,
            grid_step=self.channel['grid_step_ghz'] * 1e9,
            loss_threshold_db=self.channel['loss_threshold_db'],
        )

    @property
    def subchannel_width(self) -> float:
        return self.channel['subchannel_width_ghz'] * 1e9

    def build_timing(self) -> AlignmentTiming:
        return AlignmentTiming(
            realign_latency=self.mobility['realign_latency_s'],
            duration=self.mobility['duration_s'],
            timestep=self.mobility['timestep_s'],
        )

    def build_mobility_class(self, name: str) -> MobilityClass:
        ranges = {
            'S1': tuple(self.mobility['s1_oscillation_hz']),
            'S2': tuple(self.mobility['s2_oscillation_hz']),
            'S3': tuple(self.mobility['s3_oscillation_hz']),
        }
        return mobility_class(name, ranges)


def _validate_section(name: str, form_class, raw: Any, defaults: Dict[str, Any], prefix: str) -> Dict[str, Any]:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError('expected an object', field=prefix or name)
    unknown = sorted(set(raw) - set(defaults))
    if unknown:
        raise ConfigError('unknown key', field=f'{prefix}.{unknown[0]}')
    data = copy.deepcopy(defaults)
    data.update(raw)
    form = form_class(data=data)
    if not form.is_valid():
        key, errors = next(iter(form.errors.items()))
        where = prefix if key == '__all__' else f'{prefix}.{key}'
        raise ConfigError(str(errors[0]), field=where)
    # chỉ giữ đúng các key đã khai báo, theo thứ tự mặc định
    return {key: form.cleaned_data[key] for key in defaults}


def parse_override(item: str):
    """``section.key=value`` with value parsed as JSON, else kept as a string"""
    if '=' not in item:
        raise ConfigError(f'override {item!r} must look like KEY=VALUE', field='--set')
    key, _, text = item.partition('=')
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    return key.strip(), value


def _apply_overrides(raw: Dict[str, Any], overrides: Iterable[str]):
    for item in overrides:
        key, value = parse_override(item)
        if key in ('seed', 'output'):
            raw[key] = value
            continue
        section, dot, name = key.partition('.')
        if not dot or not name:
            raise ConfigError('override key must be section.key, seed or output', field=key)
        if section not in SECTION_FORMS and section != 'scenario':
            raise ConfigError('unknown section', field=section)
        block = raw.setdefault(section, {})
        if not isinstance(block, dict):
            raise ConfigError('expected an object', field=section)
        block[name] = value


def parse_config(text: str, overrides: Iterable[str] = (), scenario: Optional[str] = None) -> SimConfig:
    """Parse and validate a config document.

    ``scenario`` (the subcommand) wins over the file's scenario name; file
    scenario parameters are only kept when the names agree.
    """
    if text is None or not text.strip():
        raw = {}
    else:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f'line {e.lineno} column {e.colno}: {e.msg}', field='json')
    if not isinstance(raw, dict):
        raise ConfigError('config must be a JSON object', field='json')

    raw = copy.deepcopy(raw)
    if scenario is not None:
        file_block = raw.get('scenario')
        if isinstance(file_block, dict) and file_block.get('name') not in (None, scenario):
            logger.info(f"Config scenario {file_block.get('name')!r} replaced by {scenario!r}")
            raw['scenario'] = {}
        block = raw.setdefault('scenario', {})
        if isinstance(block, dict):
            block['name'] = scenario
    _apply_overrides(raw, overrides)

    allowed = set(SECTION_FORMS) | {'scenario', 'seed', 'output'}
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError('unknown key', field=unknown[0])

    sections = {
        name: _validate_section(name, form_class, raw.get(name), DEFAULTS[name], name)
        for name, form_class in SECTION_FORMS.items()
    }

    block = raw.get('scenario')
    if not block or not isinstance(block, dict) or not block.get('name'):
        raise ConfigError('missing scenario (expected an object with a name)', field='scenario')
    block = dict(block)
    name = block.pop('name')
    if name not in SCENARIO_FORMS:
        raise ConfigError(f'unknown scenario {name!r}, expected one of {", ".join(SCENARIOS)}', field='scenario.name')
    params = _validate_section(name, SCENARIO_FORMS[name], block, SCENARIO_DEFAULTS[name], 'scenario')

    seed = raw.get('seed', 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        if isinstance(seed, float) and seed.is_integer():
            seed = int(seed)
        else:
            raise ConfigError(f'expected an integer, got {seed!r}', field='seed')
    if not 0 <= seed < 2 ** 64:
        raise ConfigError('seed must be an unsigned 64-bit integer', field='seed')

    output = raw.get('output', getattr(settings, 'SIMULATOR_OUTPUT_DIR', 'out'))
    if not isinstance(output, str) or not output:
        raise ConfigError('expected a non-empty path', field='output')

    return SimConfig(scenario=name, params=params, seed=seed, output=output, **sections)


def emit_config(config: SimConfig) -> str:
    return json.dumps(config.to_dict(), sort_keys=True, indent=2) + '\n'
