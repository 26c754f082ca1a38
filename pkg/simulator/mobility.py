"""Small-scale orientation mobility and beam alignment.

A device oscillates independently on yaw, pitch and roll. Rotations are applied
intrinsically in yaw → pitch → roll order to the device boresight (x axis); the
link is up while the boresight offset stays inside half the UE beamwidth, and
every re-entry into the beam costs a realignment latency.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from .exceptions import DomainError
from .link import BeamConfig

logger = logging.getLogger(__name__)

NOMINAL_BORESIGHT = np.array([1.0, 0.0, 0.0])


@dataclass(frozen=True)
class MobilityClass:
    """Per-axis oscillation amplitude range (degrees) and frequency range (Hz)"""

    name: str
    amplitude_range: Tuple[float, float]
    oscillation_frequency_range: Tuple[float, float]

    def __post_init__(self):
        if self.name not in CLASS_NAMES:
            raise DomainError(f'unknown mobility class {self.name!r}, expected one of {", ".join(CLASS_NAMES)}')
        for label, (low, high) in (('amplitude', self.amplitude_range),
                                   ('oscillation frequency', self.oscillation_frequency_range)):
            if not 0 <= low <= high:
                raise DomainError(f'{self.name} {label} range must satisfy 0 <= min <= max, got [{low}, {high}]')
        object.__setattr__(self, 'amplitude_range', tuple(map(float, self.amplitude_range)))
        object.__setattr__(self, 'oscillation_frequency_range', tuple(map(float, self.oscillation_frequency_range)))


CLASS_NAMES = ('static', 'S1', 'S2', 'S3')

# S1: vận động mạnh, S2: đi bộ chậm, S3: ngồi hoặc đứng
DEFAULT_AMPLITUDES = {
    'static': (0.0, 0.0),
    'S1': (13.0, 15.0),
    'S2': (3.0, 5.0),
    'S3': (1.0, 3.0),
}
DEFAULT_OSCILLATION_HZ = {
    'static': (0.0, 0.0),
    'S1': (0.5, 2.0),
    'S2': (0.2, 1.0),
    'S3': (0.05, 0.5),
}


def mobility_class(name: str, oscillation_hz: Optional[Dict[str, Tuple[float, float]]] = None) -> MobilityClass:
    """Built-in class by name, optionally with overridden frequency ranges"""
    if name not in CLASS_NAMES:
        raise DomainError(f'unknown mobility class {name!r}, expected one of {", ".join(CLASS_NAMES)}')
    frequencies = dict(DEFAULT_OSCILLATION_HZ)
    frequencies.update(oscillation_hz or {})
    return MobilityClass(name, DEFAULT_AMPLITUDES[name], frequencies[name])


@dataclass(frozen=True)
class AxisOscillation:
    amplitude: float  # rad
    frequency: float  # Hz
    phase: float  # rad

    def angle(self, t: np.ndarray) -> np.ndarray:
        return self.amplitude * np.sin(2 * math.pi * self.frequency * t + self.phase)


@dataclass(frozen=True)
class OrientationTrajectory:
    yaw: AxisOscillation
    pitch: AxisOscillation
    roll: AxisOscillation
    seed: int

    def angles(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.yaw.angle(t), self.pitch.angle(t), self.roll.angle(t)


@dataclass(frozen=True)
class AlignmentStats:
    aligned_fraction: float
    outage_count: int
    mean_outage_duration: float

    def __post_init__(self):
        if not 0.0 <= self.aligned_fraction <= 1.0:
            raise DomainError(f'aligned fraction must be in [0, 1], got {self.aligned_fraction}')
        if self.outage_count < 0:
            raise DomainError(f'outage count must be >= 0, got {self.outage_count}')


@dataclass(frozen=True)
class AlignmentTiming:
    """Simulation clock for alignment runs, all in seconds"""

    realign_latency: float = 0.01
    duration: float = 10.0
    timestep: float = 0.001


def sample_trajectory(mobility: MobilityClass, seed: int) -> OrientationTrajectory:
    """Amplitudes, frequencies and phases drawn uniformly, fully determined by seed"""
    rng = np.random.default_rng(seed)
    amplitudes = np.deg2rad(rng.uniform(*mobility.amplitude_range, size=3))
    frequencies = rng.uniform(*mobility.oscillation_frequency_range, size=3)
    phases = rng.uniform(0.0, 2 * math.pi, size=3)
    axes = [AxisOscillation(float(a), float(f), float(p)) for a, f, p in zip(amplitudes, frequencies, phases)]
    return OrientationTrajectory(yaw=axes[0], pitch=axes[1], roll=axes[2], seed=seed)


def rotation_matrices(yaw, pitch, roll) -> np.ndarray:
    """Intrinsic z-y'-x'' rotation matrices, shape (..., 3, 3)"""
    a, b, g = (np.asarray(x, dtype=float) for x in (yaw, pitch, roll))
    ca, sa, cb, sb, cg, sg = np.cos(a), np.sin(a), np.cos(b), np.sin(b), np.cos(g), np.sin(g)
    return np.stack([
        np.stack([ca * cb, ca * sb * sg - sa * cg, ca * sb * cg + sa * sg], axis=-1),
        np.stack([sa * cb, sa * sb * sg + ca * cg, sa * sb * cg - ca * sg], axis=-1),
        np.stack([-sb, cb * sg, cb * cg], axis=-1),
    ], axis=-2)


def _offsets(yaw, pitch, roll) -> np.ndarray:
    pointing = rotation_matrices(yaw, pitch, roll) @ NOMINAL_BORESIGHT
    cross = np.cross(NOMINAL_BORESIGHT, pointing)
    return np.arctan2(np.linalg.norm(cross, axis=-1), pointing @ NOMINAL_BORESIGHT)


def boresight_offset(yaw: float, pitch: float, roll: float) -> float:
    """Angle between the rotated and the nominal boresight, in [0, π]"""
    return float(_offsets(yaw, pitch, roll))


def offset_series(traj: OrientationTrajectory, duration: float, timestep: float):
    """Sample times, per-axis angles and boresight offsets over the run"""
    n = int(round(duration / timestep))
    t = np.arange(n) * timestep
    yaw, pitch, roll = traj.angles(t)
    return t, yaw, pitch, roll, _offsets(yaw, pitch, roll)


def link_up_mask(offsets: np.ndarray, half_beamwidth: float, realign_latency: float, timestep: float) -> np.ndarray:
    """Samples where the link carries traffic.

    Inside the beam the link is up, except for the first ``realign_latency``
    after each misaligned → aligned transition. The device starts trained on
    the beam, so an initial in-beam run pays no latency.
    """
    inside = offsets <= half_beamwidth
    idx = np.arange(inside.size)
    latency_steps = int(math.ceil(realign_latency / timestep - 1e-9))
    previous = np.concatenate(([True], inside[:-1]))
    entries = inside & ~previous
    marks = np.where(entries, idx, -latency_steps - 1)
    last_entry = np.maximum.accumulate(marks) if marks.size else marks
    return inside & (idx - last_entry >= latency_steps)


def stats_from_mask(up: np.ndarray, timestep: float) -> AlignmentStats:
    n = up.size
    if n == 0:
        return AlignmentStats(1.0, 0, 0.0)
    down = ~up
    outage_count = int(down[0]) + int(np.count_nonzero(down[1:] & up[:-1]))
    down_time = float(np.count_nonzero(down)) * timestep
    return AlignmentStats(
        aligned_fraction=float(np.count_nonzero(up)) / n,
        outage_count=outage_count,
        mean_outage_duration=down_time / outage_count if outage_count else 0.0,
    )


def alignment_from_offsets(offsets: np.ndarray, beamwidth: float, realign_latency: float, timestep: float) -> AlignmentStats:
    """Alignment of a precomputed offset series against a beam of full width ``beamwidth``"""
    return stats_from_mask(link_up_mask(offsets, beamwidth / 2, realign_latency, timestep), timestep)


def check_timing(realign_latency: float, duration: float, timestep: float):
    if not timestep > 0 or timestep > duration / 100 + 1e-15:
        raise DomainError(f'timestep must be in (0, duration/100], got {timestep} for duration {duration}')
    if realign_latency < 0:
        raise DomainError(f'realign latency must be >= 0 s, got {realign_latency}')


def alignment_fraction(
    traj_ue: OrientationTrajectory,
    beam_ue: BeamConfig,
    realign_latency: float,
    duration: float,
    timestep: float,
) -> AlignmentStats:
    check_timing(realign_latency, duration, timestep)
    offsets = offset_series(traj_ue, duration, timestep)[-1]
    return alignment_from_offsets(offsets, beam_ue.beamwidth, realign_latency, timestep)


def trajectory_trace(
    traj_ue: OrientationTrajectory,
    beam_ue: BeamConfig,
    timing: AlignmentTiming = AlignmentTiming(),
) -> pd.DataFrame:
    """Per-sample debug trace of a trajectory against a beam"""
    check_timing(timing.realign_latency, timing.duration, timing.timestep)
    t, yaw, pitch, roll, offsets = offset_series(traj_ue, timing.duration, timing.timestep)
    up = link_up_mask(offsets, beam_ue.beamwidth / 2, timing.realign_latency, timing.timestep)
    return pd.DataFrame({
        't_s': t,
        'yaw_rad': yaw,
        'pitch_rad': pitch,
        'roll_rad': roll,
        'offset_rad': offsets,
        'aligned': up.astype(int),
    })


def effective_throughput(capacity: float, stats: AlignmentStats) -> float:
    return capacity * stats.aligned_fraction
