"""Atmosphere state and molecular absorption coefficient k(f).

Relative humidity is turned into water-vapor density (Buck saturation pressure,
ideal gas), and the density scales either a Lorentzian line set or a tabulated
absorption spectrum measured at a reference density.
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .exceptions import DomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

WATER_VAPOR_GAS_CONSTANT = 461.5  # J/(kg·K)
BUCK_TEMPERATURE_RANGE = (200.0, 330.0)  # K
THZ_BAND = (0.1e12, 3.0e12)  # Hz
FREQUENCY_TOLERANCE = 1e-3  # Hz

DEFAULT_LINES_FILE = Path(__file__).resolve().parent / 'data' / 'h2o_lines.csv'
DEFAULT_CONTINUUM_FLOOR = 2e-4  # Np/m at the reference density
DEFAULT_REFERENCE_VAPOR_DENSITY = 7.5  # g/m³

LINE_SET_COLUMNS = ['center_hz', 'strength', 'half_width_hz']
TABLE_COLUMNS = ['frequency_hz', 'k_np_per_m']


@dataclass(frozen=True)
class Atmosphere:
    """Ambient conditions: kelvin, kilopascal, percent"""

    temperature: float = 293.15
    pressure: float = 101.325
    relative_humidity: float = 50.0

    def __post_init__(self):
        if not self.temperature > 0:
            raise DomainError(f'temperature must be > 0 K, got {self.temperature}')
        if not self.pressure > 0:
            raise DomainError(f'pressure must be > 0 kPa, got {self.pressure}')
        if not 0.0 <= self.relative_humidity <= 100.0:
            raise DomainError(f'relative humidity must be in [0, 100] %, got {self.relative_humidity}')


@dataclass(frozen=True)
class SpectralLine:
    center_frequency: float
    line_strength: float
    half_width: float

    def __post_init__(self):
        if not self.center_frequency > 0:
            raise DomainError(f'line center must be > 0 Hz, got {self.center_frequency}')
        if not self.line_strength >= 0:
            raise DomainError(f'line strength must be >= 0, got {self.line_strength}')
        if not self.half_width > 0:
            raise DomainError(f'line half-width must be > 0 Hz, got {self.half_width}')


@dataclass(frozen=True)
class AbsorptionModel:
    """Line set plus continuum, or a tabulated spectrum when ``table`` is set.

    Both are expressed at ``reference_vapor_density`` (g/m³) and scaled linearly
    with the actual vapor density.
    """

    lines: Tuple[SpectralLine, ...] = ()
    continuum_floor: float = 0.0
    reference_vapor_density: float = DEFAULT_REFERENCE_VAPOR_DENSITY
    table: Optional[Tuple[Tuple[float, float], ...]] = None

    def __post_init__(self):
        object.__setattr__(self, 'lines', tuple(self.lines))
        if not self.reference_vapor_density > 0:
            raise DomainError(
                f'reference vapor density must be > 0 g/m³, got {self.reference_vapor_density}'
            )
        if not self.continuum_floor >= 0:
            raise DomainError(f'continuum floor must be >= 0, got {self.continuum_floor}')
        if self.table is not None:
            table = tuple((float(f), float(k)) for f, k in self.table)
            if len(table) < 2:
                raise DomainError('absorption table needs at least two rows')
            frequencies = np.array([f for f, _ in table])
            if np.any(np.diff(frequencies) <= 0):
                raise DomainError('absorption table frequencies must be strictly increasing')
            if not all(math.isfinite(f) for f, _ in table):
                raise DomainError('absorption table frequencies must be finite')
            if not all(k >= 0 and math.isfinite(k) for _, k in table):
                raise DomainError('absorption table values must be finite and >= 0')
            object.__setattr__(self, 'table', table)

    @property
    def is_tabulated(self) -> bool:
        return self.table is not None

    @classmethod
    def builtin(cls) -> 'AbsorptionModel':
        """Dominant H2O lines between 0.1 and 3 THz shipped with the package"""
        return load_line_set(DEFAULT_LINES_FILE)


def saturation_vapor_pressure(temperature: float) -> float:
    """Buck saturation vapor pressure over water, in kPa"""
    low, high = BUCK_TEMPERATURE_RANGE
    if not low <= temperature <= high:
        raise DomainError(
            f'temperature {temperature} K outside the valid interval [{low:g} K, {high:g} K]'
        )
    t = temperature - 273.15
    return 0.61121 * math.exp((18.678 - t / 234.5) * (t / (257.14 + t)))


def water_vapor_density(atm: Atmosphere) -> float:
    """Water-vapor density in g/m³"""
    if atm.relative_humidity == 0:
        return 0.0
    partial_pressure_pa = atm.relative_humidity / 100.0 * saturation_vapor_pressure(atm.temperature) * 1000.0
    return partial_pressure_pa / (WATER_VAPOR_GAS_CONSTANT * atm.temperature) * 1000.0


def _lorentz_sum(lines: Sequence[SpectralLine], frequency: np.ndarray) -> np.ndarray:
    total = np.zeros_like(frequency)
    for line in lines:
        gamma = line.half_width
        total += line.line_strength / math.pi * gamma / ((frequency - line.center_frequency) ** 2 + gamma ** 2)
    return total


def absorption_coefficient(model: AbsorptionModel, frequency: ArrayLike, atm: Atmosphere) -> ArrayLike:
    """Molecular absorption coefficient k(f) in nepers per meter.

    ``frequency`` may be a scalar or an array; the result has the same shape.
    """
    f = np.asarray(frequency, dtype=float)
    low, high = THZ_BAND
    if f.size and (f.min() < low - FREQUENCY_TOLERANCE or f.max() > high + FREQUENCY_TOLERANCE):
        raise DomainError(f'frequency must be within [{low / 1e12:g}, {high / 1e12:g}] THz')

    scale = water_vapor_density(atm) / model.reference_vapor_density

    if model.is_tabulated:
        table_f = np.array([row[0] for row in model.table])
        table_k = np.array([row[1] for row in model.table])
        if f.size and (f.min() < table_f[0] - FREQUENCY_TOLERANCE or f.max() > table_f[-1] + FREQUENCY_TOLERANCE):
            raise DomainError(
                f'frequency outside absorption table span '
                f'[{table_f[0] / 1e9:g}, {table_f[-1] / 1e9:g}] GHz; extrapolation refused'
            )
        k = scale * np.interp(f, table_f, table_k)
    else:
        k = scale * (model.continuum_floor + _lorentz_sum(model.lines, f))

    k = np.maximum(k, 0.0)
    if k.ndim == 0:
        return float(k)
    return k


def _read_csv(path: Union[str, Path], columns: Sequence[str]) -> pd.DataFrame:
    """Numeric CSV with exactly ``columns``; every malformed file is a DomainError"""
    try:
        df = pd.read_csv(path, skipinitialspace=True)
    except (OSError, UnicodeDecodeError, pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise DomainError(f'{path}: cannot read CSV: {e}')
    header = [str(c).strip() for c in df.columns]
    if header != list(columns):
        raise DomainError(f'{path}: expected header {",".join(columns)}, got {",".join(header)}')
    df.columns = header
    if df.empty:
        raise DomainError(f'{path}: no data rows')
    try:
        df = df.astype(float)
    except (TypeError, ValueError) as e:
        raise DomainError(f'{path}: non-numeric value: {e}')
    bad = ~np.isfinite(df.to_numpy())
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise DomainError(f'{path}: row {row + 1} has a missing or non-finite {header[col]}')
    return df


def load_line_set(
    path: Union[str, Path],
    continuum_floor: float = DEFAULT_CONTINUUM_FLOOR,
    reference_vapor_density: float = DEFAULT_REFERENCE_VAPOR_DENSITY,
) -> AbsorptionModel:
    """Load a line-set CSV (``center_hz,strength,half_width_hz``)"""
    df = _read_csv(path, LINE_SET_COLUMNS)
    lines = tuple(
        SpectralLine(float(row.center_hz), float(row.strength), float(row.half_width_hz))
        for row in df.itertuples(index=False)
    )
    logger.debug(f'Loaded {len(lines)} spectral lines from {path}')
    return AbsorptionModel(
        lines=lines,
        continuum_floor=continuum_floor,
        reference_vapor_density=reference_vapor_density,
    )


def load_absorption_table(
    path: Union[str, Path],
    reference_vapor_density: float = DEFAULT_REFERENCE_VAPOR_DENSITY,
) -> AbsorptionModel:
    """Load a tabulated spectrum CSV (``frequency_hz,k_np_per_m``), rows ascending"""
    df = _read_csv(path, TABLE_COLUMNS)
    table = tuple((float(row.frequency_hz), float(row.k_np_per_m)) for row in df.itertuples(index=False))
    logger.debug(f'Loaded absorption table with {len(table)} rows from {path}')
    return AbsorptionModel(table=table, reference_vapor_density=reference_vapor_density)
