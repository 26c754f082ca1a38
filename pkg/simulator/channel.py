"""Spreading/absorption path loss and transmission-window extraction."""
import logging
import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
import pandas as pd
from scipy import constants as ct

from .atmosphere import AbsorptionModel, ArrayLike, Atmosphere, absorption_coefficient
from .exceptions import DomainError, NoFeasibleBand

logger = logging.getLogger(__name__)

NEPER_TO_DB = 10.0 * math.log10(math.e)  # 4.342944819...
WIDTH_TOLERANCE = 1e-3  # Hz


@dataclass(frozen=True)
class PathLossBreakdown:
    spreading_db: float
    absorption_db: float
    total_db: float


@dataclass(frozen=True)
class TransmissionWindow:
    f_low: float
    f_high: float
    worst_loss_db: float

    def __post_init__(self):
        if not self.f_low < self.f_high:
            raise DomainError(f'window needs f_low < f_high, got [{self.f_low}, {self.f_high}]')

    @property
    def width(self) -> float:
        return self.f_high - self.f_low


@dataclass(frozen=True)
class Band:
    center: float
    bandwidth: float

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise DomainError(f'band bandwidth must be > 0 Hz, got {self.bandwidth}')

    @property
    def f_low(self) -> float:
        return self.center - self.bandwidth / 2

    @property
    def f_high(self) -> float:
        return self.center + self.bandwidth / 2


@dataclass(frozen=True)
class SpectrumPlan:
    """Frequency search range and window threshold used for adaptive band selection"""

    f_low: float = 100e9
    f_high: float = 1000e9
    grid_step: float = 100e6
    loss_threshold_db: float = 120.0


def spreading_loss_db(frequency: ArrayLike, distance: float) -> ArrayLike:
    """Free-space spreading loss 20·log10(4π·d·f/c)"""
    f = np.asarray(frequency, dtype=float)
    if np.any(f <= 0):
        raise DomainError('frequency must be > 0 Hz')
    if not distance > 0:
        raise DomainError(f'distance must be > 0 m, got {distance}')
    loss = 20.0 * np.log10(4.0 * math.pi * distance * f / ct.speed_of_light)
    if loss.ndim == 0:
        return float(loss)
    return loss


def absorption_loss_db(k: ArrayLike, distance: float) -> ArrayLike:
    """Molecular absorption loss 10·log10(e)·k·d"""
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 0):
        raise DomainError('absorption coefficient must be >= 0')
    if distance < 0:
        raise DomainError(f'distance must be >= 0 m, got {distance}')
    loss = NEPER_TO_DB * k_arr * distance
    if loss.ndim == 0:
        return float(loss)
    return loss


def total_path_loss_db(
    model: AbsorptionModel, atm: Atmosphere, frequency: float, distance: float
) -> PathLossBreakdown:
    spreading = spreading_loss_db(frequency, distance)
    absorption = absorption_loss_db(absorption_coefficient(model, frequency, atm), distance)
    return PathLossBreakdown(spreading, absorption, spreading + absorption)


def _total_loss_array(model: AbsorptionModel, atm: Atmosphere, frequencies: np.ndarray, distance: float) -> np.ndarray:
    return spreading_loss_db(frequencies, distance) + absorption_loss_db(
        absorption_coefficient(model, frequencies, atm), distance
    )


def frequency_grid(f_low: float, f_high: float, grid_step: float) -> np.ndarray:
    """Uniform grid from f_low in steps of grid_step, not exceeding f_high"""
    n = int(math.floor((f_high - f_low) / grid_step + 1e-9))
    stop = f_low + n * grid_step
    if abs(stop - f_high) <= 1e-6 * grid_step:
        stop = f_high
    return np.linspace(f_low, stop, n + 1)


def path_loss_curve(
    model: AbsorptionModel, atm: Atmosphere, frequencies: Sequence[float], distance: float
) -> pd.DataFrame:
    """Loss breakdown over a frequency grid, one row per frequency"""
    f = np.asarray(frequencies, dtype=float)
    spreading = spreading_loss_db(f, distance)
    absorption = absorption_loss_db(absorption_coefficient(model, f, atm), distance)
    return pd.DataFrame({
        'frequency_hz': f,
        'spreading_db': spreading,
        'absorption_db': absorption,
        'total_db': spreading + absorption,
    })


def find_windows(
    model: AbsorptionModel,
    atm: Atmosphere,
    distance: float,
    loss_threshold_db: float,
    f_low: float,
    f_high: float,
    grid_step: float,
) -> List[TransmissionWindow]:
    """Maximal runs of grid points whose total loss stays <= the threshold"""
    if not f_low < f_high:
        raise DomainError(f'f_low must be < f_high, got [{f_low}, {f_high}]')
    if not 0 < grid_step <= (f_high - f_low) / 10:
        raise DomainError(f'grid step must be in (0, {(f_high - f_low) / 10:g}] Hz, got {grid_step}')

    grid = frequency_grid(f_low, f_high, grid_step)
    losses = _total_loss_array(model, atm, grid, distance)
    mask = losses <= loss_threshold_db

    padded = np.concatenate(([0], mask.astype(np.int8), [0]))
    edges = np.flatnonzero(np.diff(padded))
    windows = []
    for start, stop in zip(edges[0::2], edges[1::2] - 1):
        # một điểm lưới đơn lẻ không tạo thành cửa sổ
        if stop > start:
            windows.append(TransmissionWindow(
                f_low=float(grid[start]),
                f_high=float(grid[stop]),
                worst_loss_db=float(losses[start:stop + 1].max()),
            ))
    logger.debug(
        f'{len(windows)} windows at d={distance:g} m, RH={atm.relative_humidity:g}%, '
        f'threshold {loss_threshold_db:g} dB'
    )
    return windows


def max_contiguous_bandwidth(windows: Sequence[TransmissionWindow]) -> float:
    return max((w.width for w in windows), default=0.0)


def select_band(windows: Sequence[TransmissionWindow], required_bandwidth: float) -> Band:
    """Lowest-frequency window wide enough, band placed at its low edge"""
    if not required_bandwidth > 0:
        raise DomainError(f'required bandwidth must be > 0 Hz, got {required_bandwidth}')
    for window in sorted(windows, key=lambda w: w.f_low):
        if window.width >= required_bandwidth - WIDTH_TOLERANCE:
            return Band(center=window.f_low + required_bandwidth / 2, bandwidth=required_bandwidth)
    raise NoFeasibleBand(required_bandwidth, max_contiguous_bandwidth(windows))


def adaptive_band(
    model: AbsorptionModel, atm: Atmosphere, distance: float, bandwidth: float, plan: SpectrumPlan
) -> Band:
    """Band chosen for the given humidity and distance"""
    windows = find_windows(
        model, atm, distance, plan.loss_threshold_db, plan.f_low, plan.f_high, plan.grid_step
    )
    return select_band(windows, bandwidth)
