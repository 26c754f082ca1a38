"""Beam gain, thermal noise, SNR and Shannon capacity over a band"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import constants as ct

from .atmosphere import AbsorptionModel, Atmosphere, absorption_coefficient
from .channel import WIDTH_TOLERANCE, Band, absorption_loss_db, spreading_loss_db
from .exceptions import DomainError

logger = logging.getLogger(__name__)

DEFAULT_SUBCHANNEL_WIDTH = 100e6  # Hz


@dataclass(frozen=True)
class BeamConfig:
    """Ideal cone beam: ``beamwidth`` is the full cone angle δ in radians"""

    beamwidth: float = math.radians(10.0)
    boresight: Tuple[float, float, float] = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if not 0 < self.beamwidth <= 2 * math.pi + 1e-12:
            raise DomainError(f'beamwidth must be in (0, 2π] rad, got {self.beamwidth}')
        norm = math.sqrt(sum(c * c for c in self.boresight))
        if abs(norm - 1.0) > 1e-9:
            raise DomainError(f'boresight must be a unit vector, norm is {norm}')

    @classmethod
    def from_degrees(cls, beamwidth_deg: float) -> 'BeamConfig':
        return cls(beamwidth=math.radians(beamwidth_deg))


@dataclass(frozen=True)
class RadioHardware:
    """Radio front end; ``tx_power`` is delivered into every subchannel"""

    tx_power: float = 10.0  # dBm
    noise_figure: float = 10.0  # dB
    system_temperature: float = 290.0  # K
    tx_beam: BeamConfig = field(default_factory=BeamConfig)
    rx_beam: BeamConfig = field(default_factory=BeamConfig)

    def __post_init__(self):
        if not self.system_temperature > 0:
            raise DomainError(f'system temperature must be > 0 K, got {self.system_temperature}')
        if self.noise_figure < 0:
            raise DomainError(f'noise figure must be >= 0 dB, got {self.noise_figure}')

    def with_beams(self, tx_beamwidth: Optional[float] = None, rx_beamwidth: Optional[float] = None) -> 'RadioHardware':
        tx_beam = self.tx_beam if tx_beamwidth is None else replace(self.tx_beam, beamwidth=tx_beamwidth)
        rx_beam = self.rx_beam if rx_beamwidth is None else replace(self.rx_beam, beamwidth=rx_beamwidth)
        return replace(self, tx_beam=tx_beam, rx_beam=rx_beam)


def gain_from_beamwidth(beamwidth: float) -> float:
    """Directivity of a uniform cone cap: 2 / (1 − cos(δ/2))"""
    if not 0 < beamwidth <= 2 * math.pi + 1e-12:
        raise DomainError(f'beamwidth must be in (0, 2π] rad, got {beamwidth}')
    c = math.cos(beamwidth / 2)
    if abs(c) < 1e-15:
        c = 0.0  # cos(π/2) rounding
    return 2.0 / (1.0 - c)


def gain_db(beamwidth: float) -> float:
    return 10.0 * math.log10(gain_from_beamwidth(beamwidth))


def thermal_noise_dbm(temperature: float, bandwidth, noise_figure: float):
    """kTB noise power in dBm plus the noise figure"""
    b = np.asarray(bandwidth, dtype=float)
    if np.any(b <= 0):
        raise DomainError('noise bandwidth must be > 0 Hz')
    noise = 10.0 * np.log10(ct.Boltzmann * temperature * b / 1e-3) + noise_figure
    if noise.ndim == 0:
        return float(noise)
    return noise


def link_snr_db(hw: RadioHardware, path_loss_db, bandwidth):
    return (
        hw.tx_power
        + gain_db(hw.tx_beam.beamwidth)
        + gain_db(hw.rx_beam.beamwidth)
        - path_loss_db
        - thermal_noise_dbm(hw.system_temperature, bandwidth, hw.noise_figure)
    )


def subchannels(band: Band, subchannel_width: float) -> Tuple[np.ndarray, np.ndarray]:
    """Subchannel centers and widths covering the band; the last one may be partial"""
    if not 0 < subchannel_width <= band.bandwidth + WIDTH_TOLERANCE:
        raise DomainError(
            f'subchannel width must be in (0, {band.bandwidth:g}] Hz, got {subchannel_width}'
        )
    n_full = int(math.floor(band.bandwidth / subchannel_width + 1e-9))
    widths = [subchannel_width] * n_full
    remainder = band.bandwidth - n_full * subchannel_width
    if remainder > WIDTH_TOLERANCE:
        widths.append(remainder)
    widths = np.array(widths)
    lows = band.f_low + np.concatenate(([0.0], np.cumsum(widths)[:-1]))
    return lows + widths / 2, widths


def subchannel_capacity(widths, snr_linear, axis: int = -1):
    """Σ wᵢ·log2(1 + snrᵢ) along ``axis``; a float for 1-D input, one sum per row otherwise"""
    total = np.sum(
        np.asarray(widths, dtype=float) * np.log2(1.0 + np.asarray(snr_linear, dtype=float)),
        axis=axis,
    )
    if np.ndim(total) == 0:
        return float(total)
    return total


def subchannel_snr_db(hw: RadioHardware, path_loss_db, widths):
    """SNR per subchannel with tx_power spread as a density over DEFAULT_SUBCHANNEL_WIDTH.

    A subchannel of width w radiates tx_power·w/w_ref, so the SNR depends only on
    the loss and capacity converges as the subchannel width shrinks.
    """
    w = np.asarray(widths, dtype=float)
    return link_snr_db(hw, path_loss_db, w) + 10.0 * np.log10(w / DEFAULT_SUBCHANNEL_WIDTH)


def capacity_over_distances(
    model: AbsorptionModel,
    atm: Atmosphere,
    hw: RadioHardware,
    band: Band,
    distances,
    subchannel_width: float = DEFAULT_SUBCHANNEL_WIDTH,
) -> np.ndarray:
    """Capacity of one band at several link distances"""
    d = np.atleast_1d(np.asarray(distances, dtype=float))
    if np.any(d <= 0):
        raise DomainError('distance must be > 0 m')
    centers, widths = subchannels(band, subchannel_width)
    k = np.asarray(absorption_coefficient(model, centers, atm))
    path_loss = (
        spreading_loss_db(centers, 1.0)[None, :]
        + 20.0 * np.log10(d)[:, None]
        + absorption_loss_db(k, 1.0)[None, :] * d[:, None]
    )
    snr_db = subchannel_snr_db(hw, path_loss, widths[None, :])
    return np.atleast_1d(subchannel_capacity(widths[None, :], 10.0 ** (snr_db / 10.0), axis=1))


def capacity_bps(
    model: AbsorptionModel,
    atm: Atmosphere,
    hw: RadioHardware,
    band: Band,
    distance: float,
    subchannel_width: float = DEFAULT_SUBCHANNEL_WIDTH,
) -> float:
    """Shannon capacity summed over subchannels, loss taken at each subchannel center"""
    if not distance > 0:
        raise DomainError(f'distance must be > 0 m, got {distance}')
    return float(capacity_over_distances(model, atm, hw, band, [distance], subchannel_width)[0])


def rate_density_gbps_per_ghz(capacity: float, bandwidth: float) -> float:
    if bandwidth == 0:
        raise DomainError('rate density needs a non-zero bandwidth')
    return (capacity / 1e9) / (bandwidth / 1e9)


def rate_density_curve(
    model: AbsorptionModel,
    atm: Atmosphere,
    hw: RadioHardware,
    distance: float,
    bandwidth: float,
    centers: Sequence[float],
    subchannel_width: float = DEFAULT_SUBCHANNEL_WIDTH,
) -> pd.DataFrame:
    """Rate density of a fixed-width band swept across ``centers``"""
    rows = []
    for center in centers:
        capacity = capacity_bps(model, atm, hw, Band(center, bandwidth), distance, subchannel_width)
        rows.append((float(center), rate_density_gbps_per_ghz(capacity, bandwidth)))
    return pd.DataFrame(rows, columns=['frequency_hz', 'rate_density_gbps_per_ghz'])
