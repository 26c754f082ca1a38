"""Use-case planners: wireless backhaul, kiosk Link C/D and aerial base stations."""
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .atmosphere import AbsorptionModel, Atmosphere
from .channel import Band, SpectrumPlan, adaptive_band
from .exceptions import DomainError, LinkInfeasible, NoFeasibleBand
from .link import DEFAULT_SUBCHANNEL_WIDTH, RadioHardware, capacity_bps, capacity_over_distances
from .mobility import (
    AlignmentTiming,
    MobilityClass,
    alignment_from_offsets,
    check_timing,
    offset_series,
    sample_trajectory,
)
from .utils import derive_seed, gather_in_threads

logger = logging.getLogger(__name__)

HOP_RESOLUTION = 0.1  # m
MIN_HOP_DISTANCE = 1.0  # m


class MobilityType(Enum):
    """AP/UE relative mobility classes of outdoor THz use cases"""

    STATIC_STATIC = (1, 'S-S', 'long range', 'wireless backhaul, quasi-mobile, outdoor displays')
    STATIC_MOBILE = (2, 'S-M', 'medium range', 'kiosks, smart bus stops, ITS, nomadic use')
    MOBILE_STATIC = (3, 'M-S', 'small range', 'drone backhaul, aerial base station')
    MOBILE_MOBILE = (4, 'M-M', 'small range', 'MANET, D2D, aerial base station')

    def __init__(self, number, label, range_class, examples):
        self.number = number
        self.label = label
        self.range_class = range_class
        self.examples = examples


def classify(ap_mobile: bool, ue_mobile: bool) -> MobilityType:
    return {
        (False, False): MobilityType.STATIC_STATIC,
        (False, True): MobilityType.STATIC_MOBILE,
        (True, False): MobilityType.MOBILE_STATIC,
        (True, True): MobilityType.MOBILE_MOBILE,
    }[(bool(ap_mobile), bool(ue_mobile))]


@dataclass(frozen=True)
class BackhaulPlan:
    """Equal-length hops; ``hop_distance`` is the length actually used"""

    total_distance: float
    max_hop_distance: float
    hop_distance: float
    repeater_count: int
    per_hop_rate: float
    band: Band

    def __post_init__(self):
        if self.repeater_count < 0:
            raise DomainError(f'repeater count must be >= 0, got {self.repeater_count}')


@dataclass(frozen=True)
class UserField:
    """Ground positions relative to the AP (or its ground projection)"""

    positions: Tuple[Tuple[float, float], ...]
    mobility: Tuple[MobilityClass, ...]
    seeds: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'positions', tuple((float(x), float(y)) for x, y in self.positions))
        object.__setattr__(self, 'mobility', tuple(self.mobility))
        object.__setattr__(self, 'seeds', tuple(int(s) for s in self.seeds))
        if not len(self.positions) == len(self.mobility) == len(self.seeds):
            raise DomainError('user field needs one mobility class and one seed per position')
        if not all(math.isfinite(c) for p in self.positions for c in p):
            raise DomainError('user positions must be finite')

    def __len__(self):
        return len(self.positions)

    @property
    def ground_distances(self) -> np.ndarray:
        return np.array([math.hypot(x, y) for x, y in self.positions])

    def with_class(self, mobility: MobilityClass) -> 'UserField':
        return replace(self, mobility=(mobility,) * len(self))

    def with_user_class(self, index: int, mobility: MobilityClass) -> 'UserField':
        classes = list(self.mobility)
        classes[index] = mobility
        return replace(self, mobility=tuple(classes))


def kiosk_field(
    n_users: int,
    seed: int,
    mobility: MobilityClass,
    r_min: float = 0.5,
    r_max: float = 5.0,
    sector_half_angle: float = math.radians(60.0),
) -> UserField:
    """Users uniform by area in an annular sector in front of the kiosk"""
    if n_users < 1:
        raise DomainError(f'user count must be >= 1, got {n_users}')
    if not 0 < r_min < r_max:
        raise DomainError(f'need 0 < r_min < r_max, got [{r_min}, {r_max}]')
    rng = np.random.default_rng([seed, 1])
    r = np.sqrt(rng.uniform(r_min ** 2, r_max ** 2, size=n_users))
    theta = rng.uniform(-sector_half_angle, sector_half_angle, size=n_users)
    return UserField(
        positions=tuple(zip(r * np.cos(theta), r * np.sin(theta))),
        mobility=(mobility,) * n_users,
        seeds=tuple(derive_seed(seed, i) for i in range(n_users)),
    )


def disk_field(n_users: int, seed: int, mobility: MobilityClass, radius: float = 100.0) -> UserField:
    """Users uniform over a disk around the drone's ground projection"""
    if n_users < 1:
        raise DomainError(f'user count must be >= 1, got {n_users}')
    if not radius > 0:
        raise DomainError(f'disk radius must be > 0 m, got {radius}')
    rng = np.random.default_rng([seed, 2])
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, size=n_users))
    theta = rng.uniform(0.0, 2 * math.pi, size=n_users)
    return UserField(
        positions=tuple(zip(r * np.cos(theta), r * np.sin(theta))),
        mobility=(mobility,) * n_users,
        seeds=tuple(derive_seed(seed, i) for i in range(n_users)),
    )


@dataclass(frozen=True)
class CoverageResult:
    served_count: int
    per_user_rate: Tuple[float, ...]
    parameter: Tuple[float, ...]
    demand_rate: float

    @property
    def total_rate(self) -> float:
        return float(sum(self.per_user_rate))

    @classmethod
    def from_rates(cls, rates, parameter, demand_rate) -> 'CoverageResult':
        rates = tuple(float(r) for r in rates)
        return cls(
            served_count=sum(1 for r in rates if r >= demand_rate),
            per_user_rate=rates,
            parameter=tuple(float(p) for p in parameter),
            demand_rate=demand_rate,
        )


# --- Wireless backhaul -------------------------------------------------------

def _hop_capacity(model, atm, hw, required_bandwidth, distance, plan, subchannel_width):
    try:
        band = adaptive_band(model, atm, distance, required_bandwidth, plan)
    except NoFeasibleBand:
        return 0.0, None
    return capacity_bps(model, atm, hw, band, distance, subchannel_width), band


def max_hop_distance(
    model: AbsorptionModel,
    atm: Atmosphere,
    hw: RadioHardware,
    required_rate: float,
    required_bandwidth: float,
    d_max_search: float = 1000.0,
    plan: SpectrumPlan = SpectrumPlan(),
    subchannel_width: float = DEFAULT_SUBCHANNEL_WIDTH,
) -> float:
    """Longest single hop meeting ``required_rate``, bisected on a 0.1 m lattice"""
    if not required_rate > 0:
        raise DomainError(f'required rate must be > 0 bit/s, got {required_rate}')
    if not d_max_search >= MIN_HOP_DISTANCE:
        raise DomainError(f'search bound must be >= {MIN_HOP_DISTANCE:g} m, got {d_max_search}')

    def feasible(distance):
        capacity, _ = _hop_capacity(model, atm, hw, required_bandwidth, distance, plan, subchannel_width)
        return capacity >= required_rate

    if not feasible(MIN_HOP_DISTANCE):
        raise LinkInfeasible(
            f'{required_rate / 1e9:g} Gbps over {required_bandwidth / 1e9:g} GHz is infeasible even at '
            f'{MIN_HOP_DISTANCE:g} m'
        )
    if feasible(d_max_search):
        return float(d_max_search)

    lo = int(round(MIN_HOP_DISTANCE / HOP_RESOLUTION))
    hi = int(math.ceil(d_max_search / HOP_RESOLUTION - 1e-9))
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if feasible(mid * HOP_RESOLUTION):
            lo = mid
        else:
            hi = mid
    return round(lo * HOP_RESOLUTION, 1)


def repeaters_for(total_distance: float, max_hop: float) -> int:
    """Fewest repeaters so that equal hops of total/(n+1) fit within max_hop"""
    if not total_distance > 0 or not max_hop > 0:
        raise DomainError('total distance and max hop must be > 0 m')
    n = max(0, math.ceil(total_distance / max_hop) - 1)
    while total_distance / (n + 1) > max_hop:
        n += 1
    while n > 0 and total_distance / n <= max_hop:
        n -= 1
    return n


def plan_backhaul(
    total_distance: float,
    model: AbsorptionModel,
    atm: Atmosphere,
    hw: RadioHardware,
    required_rate: float,
    required_bandwidth: float,
    d_max_search: float = 1000.0,
    plan: SpectrumPlan = SpectrumPlan(),
    subchannel_width: float = DEFAULT_SUBCHANNEL_WIDTH,
) -> BackhaulPlan:
    if not total_distance > 0:
        raise DomainError(f'total distance must be > 0 m, got {total_distance}')
    max_hop = max_hop_distance(model, atm, hw, required_rate, required_bandwidth, d_max_search, plan, subchannel_width)
    repeaters = repeaters_for(total_distance, max_hop)
    hop = total_distance / (repeaters + 1)
    per_hop_rate, band = _hop_capacity(model, atm, hw, required_bandwidth, hop, plan, subchannel_width)
    if band is None:
        raise LinkInfeasible(f'no {required_bandwidth / 1e9:g} GHz band left at hop length {hop:g} m')
    logger.debug(f'Backhaul {total_distance:g} m: max hop {max_hop:g} m, {repeaters} repeaters')
    return BackhaulPlan(
        total_distance=float(total_distance),
        max_hop_distance=max_hop,
        hop_distance=hop,
        repeater_count=repeaters,
        per_hop_rate=per_hop_rate,
        band=band,
    )


def backhaul_beamwidth_sweep(
    total_distance: float,
    beamwidths: Sequence[float],
    model: AbsorptionModel,
    atm: Atmosphere,
    hw: RadioHardware,
    required_rate: float,
    required_bandwidth: float,
    d_max_search: float = 1000.0,
    plan: SpectrumPlan = SpectrumPlan(),
    subchannel_width: float = DEFAULT_SUBCHANNEL_WIDTH,
    workers: int = 1,
) -> pd.DataFrame:
    """Backhaul plan with both ends at each beamwidth; infeasible rows have feasible = 0"""

    def one(beamwidth):
        try:
            result = plan_backhaul(
                total_distance, model, atm, hw.with_beams(beamwidth, beamwidth),
                required_rate, required_bandwidth, d_max_search, plan, subchannel_width,
            )
        except LinkInfeasible:
            return (float(beamwidth), 0, 0.0, -1, 0.0)
        return (float(beamwidth), 1, result.max_hop_distance, result.repeater_count, result.per_hop_rate)

    rows = gather_in_threads(one, beamwidths, workers)
    return pd.DataFrame(
        rows, columns=['beamwidth_rad', 'feasible', 'max_hop_m', 'repeater_count', 'per_hop_rate_bps']
    )


# --- Kiosk Link C / Link D ---------------------------------------------------

def _check_grid(grid: Sequence[float], name: str):
    if len(grid) == 0:
        raise DomainError(f'{name} grid must not be empty')
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError(f'{name} grid must be strictly ascending')


def kiosk_link_c_sweep(
    mobility: MobilityClass,
    delta_grid: Sequence[float],
    model: AbsorptionModel,
    atm: Atmosphere,
    hw: RadioHardware,
    distance: float,
    demand_bandwidth: float,
    seeds: Sequence[int],
    demand_rate: float = 10e9,
    timing: AlignmentTiming = AlignmentTiming(),
    plan: SpectrumPlan = SpectrumPlan(),
    subchannel_width: float = DEFAULT_SUBCHANNEL_WIDTH,
    workers: int = 1,
) -> pd.DataFrame:
    """Mean effective throughput of a single kiosk user versus UE beamwidth"""
    _check_grid(delta_grid, 'delta')
    if len(seeds) == 0:
        raise DomainError('kiosk Link C needs at least one seed')
    check_timing(timing.realign_latency, timing.duration, timing.timestep)
    band = adaptive_band(model, atm, distance, demand_bandwidth, plan)

    def fractions_for(seed):
        offsets = offset_series(sample_trajectory(mobility, seed), timing.duration, timing.timestep)[-1]
        return [
            alignment_from_offsets(offsets, delta, timing.realign_latency, timing.timestep).aligned_fraction
            for delta in delta_grid
        ]

    mean_fraction = np.mean(gather_in_threads(fractions_for, seeds, workers), axis=0)

    rows = []
    for delta, fraction in zip(delta_grid, mean_fraction):
        capacity = capacity_bps(model, atm, hw.with_beams(rx_beamwidth=delta), band, distance, subchannel_width)
        throughput = capacity * float(fraction)
        rows.append((float(delta), throughput, int(throughput >= demand_rate)))
        logger.debug(f'Link C {mobility.name} δ={math.degrees(delta):.2f}°: {throughput / 1e9:.3f} Gbps')
    return pd.DataFrame(rows, columns=['delta_rad', 'mean_throughput_bps', 'served_count'])


@dataclass(frozen=True)
class _KioskUser:
    distance: float
    band: Optional[Band]
    offsets: np.ndarray


def _prepare_kiosk_users(users, model, atm, bandwidth, timing, plan, workers) -> List[_KioskUser]:
    if len(users) == 0:
        raise DomainError('user field must not be empty')
    check_timing(timing.realign_latency, timing.duration, timing.timestep)

    def prepare(index):
        distance = float(users.ground_distances[index])
        if not distance > 0:
            raise DomainError(f'user {index} sits on the access point')
        try:
            band = adaptive_band(model, atm, distance, bandwidth, plan)
        except NoFeasibleBand:
            band = None
        traj = sample_trajectory(users.mobility[index], users.seeds[index])
        return _KioskUser(distance, band, offset_series(traj, timing.duration, timing.timestep)[-1])

    return gather_in_threads(prepare, range(len(users)), workers)


def _kiosk_coverage(prepared, delta, model, atm, hw, demand_rate, timing, subchannel_width) -> CoverageResult:
    n = len(prepared)
    hw_delta = hw.with_beams(rx_beamwidth=delta)
    rates = []
    for user in prepared:
        if user.band is None:
            rates.append(0.0)
            continue
        capacity = capacity_bps(model, atm, hw_delta, user.band, user.distance, subchannel_width)
        stats = alignment_from_offsets(user.offsets, delta, timing.realign_latency, timing.timestep)
        rates.append(capacity / n * stats.aligned_fraction)
    return CoverageResult.from_rates(rates, (delta,), demand_rate)


def kiosk_link_d_coverage(
    users: UserField,
    delta: float,
    model: AbsorptionModel,
    atm: Atmosphere,
    hw: RadioHardware,
    demand_rate: float = 10e9,
    bandwidth: float = 20e9,
    timing: AlignmentTiming = AlignmentTiming(),
    plan: SpectrumPlan = SpectrumPlan(),
    subchannel_width: float = DEFAULT_SUBCHANNEL_WIDTH,
    workers: int = 1,
) -> CoverageResult:
    """Users served by equal time-sharing of the kiosk AP at UE beamwidth ``delta``"""
    prepared = _prepare_kiosk_users(users, model, atm, bandwidth, timing, plan, workers)
    return _kiosk_coverage(prepared, delta, model, atm, hw, demand_rate, timing, subchannel_width)


def kiosk_link_d_sweep(
    users: UserField,
    delta_grid: Sequence[float],
    model: AbsorptionModel,
    atm: Atmosphere,
    hw: RadioHardware,
    demand_rate: float = 10e9,
    bandwidth: float = 20e9,
    timing: AlignmentTiming = AlignmentTiming(),
    plan: SpectrumPlan = SpectrumPlan(),
    subchannel_width: float = DEFAULT_SUBCHANNEL_WIDTH,
    workers: int = 1,
) -> List[CoverageResult]:
    _check_grid(delta_grid, 'delta')
    prepared = _prepare_kiosk_users(users, model, atm, bandwidth, timing, plan, workers)
    return gather_in_threads(
        lambda delta: _kiosk_coverage(prepared, delta, model, atm, hw, demand_rate, timing, subchannel_width),
        delta_grid,
        workers,
    )


def best_coverage(results: Sequence[CoverageResult]) -> CoverageResult:
    """Most users served, then largest total rate, then smallest parameters"""
    return max(results, key=lambda r: (r.served_count, r.total_rate, tuple(-p for p in r.parameter)))


def kiosk_optimal_beamwidth(
    users: UserField,
    mobility: Optional[MobilityClass],
    delta_grid: Sequence[float],
    model: AbsorptionModel,
    atm: Atmosphere,
    hw: RadioHardware,
    demand_rate: float = 10e9,
    bandwidth: float = 20e9,
    timing: AlignmentTiming = AlignmentTiming(),
    plan: SpectrumPlan = SpectrumPlan(),
    subchannel_width: float = DEFAULT_SUBCHANNEL_WIDTH,
    workers: int = 1,
) -> Tuple[float, CoverageResult]:
    """``mobility`` replaces every user's class when given"""
    if mobility is not None:
        users = users.with_class(mobility)
    results = kiosk_link_d_sweep(
        users, delta_grid, model, atm, hw, demand_rate, bandwidth, timing, plan, subchannel_width, workers
    )
    best = best_coverage(results)
    return best.parameter[0], best


# --- Aerial base station -----------------------------------------------------

def _footprint_radius(height: float, delta: float) -> float:
    return height * math.tan(delta / 2)


def abs_sweep(
    users: UserField,
    height_grid: Sequence[float],
    delta_grid: Sequence[float],
    model: AbsorptionModel,
    atm: Atmosphere,
    hw: RadioHardware,
    bandwidth: float = 10e9,
    carrier: float = 325e9,
    demand_rate: float = 10e9,
    timing: AlignmentTiming = AlignmentTiming(),
    subchannel_width: float = DEFAULT_SUBCHANNEL_WIDTH,
    workers: int = 1,
    matched_ue_beam: bool = True,
) -> List[CoverageResult]:
    """Coverage of a drone at (0, 0, h) for every (h, δ), heights outermost.

    With ``matched_ue_beam`` each user steers a beam as wide as the drone's
    toward it, so δ sets both link gains and the users' alignment. Otherwise
    users keep ``hw.rx_beam``.
    """
    _check_grid(height_grid, 'height')
    _check_grid(delta_grid, 'delta')
    if len(users) == 0:
        raise DomainError('user field must not be empty')
    if height_grid[0] <= 0:
        raise DomainError('heights must be > 0 m')
    if not (0 < delta_grid[0] and delta_grid[-1] < math.pi):
        raise DomainError('drone beamwidths must be in (0, π) rad')
    check_timing(timing.realign_latency, timing.duration, timing.timestep)

    band = Band(carrier, bandwidth)
    ground = users.ground_distances

    def user_offsets(index):
        traj = sample_trajectory(users.mobility[index], users.seeds[index])
        return offset_series(traj, timing.duration, timing.timestep)[-1]

    offsets = gather_in_threads(user_offsets, range(len(users)), workers)
    ue_beams = {delta: delta if matched_ue_beam else hw.rx_beam.beamwidth for delta in delta_grid}
    fractions = {
        beam: np.array([
            alignment_from_offsets(o, beam, timing.realign_latency, timing.timestep).aligned_fraction
            for o in offsets
        ])
        for beam in set(ue_beams.values())
    }

    def for_height(height):
        slant = np.hypot(height, ground)
        results = []
        for delta in delta_grid:
            inside = ground <= _footprint_radius(height, delta)
            rates = np.zeros(len(users))
            if inside.any():
                link_hw = hw.with_beams(tx_beamwidth=delta, rx_beamwidth=ue_beams[delta])
                capacity = capacity_over_distances(model, atm, link_hw, band, slant[inside], subchannel_width)
                rates[inside] = capacity / np.count_nonzero(inside) * fractions[ue_beams[delta]][inside]
            result = CoverageResult.from_rates(rates, (height, delta), demand_rate)
            logger.debug(
                f'ABS h={height:g} m δ={math.degrees(delta):.1f}°: {result.served_count} served, '
                f'{result.total_rate / 1e9:.2f} Gbps'
            )
            results.append(result)
        return results

    per_height = gather_in_threads(for_height, height_grid, workers)
    return [result for row in per_height for result in row]


def abs_optimize(
    users: UserField,
    height_grid: Sequence[float],
    delta_grid: Sequence[float],
    model: AbsorptionModel,
    atm: Atmosphere,
    hw: RadioHardware,
    bandwidth: float = 10e9,
    carrier: float = 325e9,
    demand_rate: float = 10e9,
    timing: AlignmentTiming = AlignmentTiming(),
    subchannel_width: float = DEFAULT_SUBCHANNEL_WIDTH,
    workers: int = 1,
    matched_ue_beam: bool = True,
) -> Tuple[float, float, CoverageResult]:
    results = abs_sweep(
        users, height_grid, delta_grid, model, atm, hw, bandwidth, carrier, demand_rate,
        timing, subchannel_width, workers, matched_ue_beam,
    )
    best = best_coverage(results)
    height, delta = best.parameter
    return height, delta, best


def abs_spacing(n_drones: int, corridor_length: float, h: float, delta: float) -> float:
    """Widest inter-drone gap that keeps footprints tiled along the corridor"""
    if n_drones < 2:
        raise DomainError(f'spacing needs at least 2 drones, got {n_drones}')
    if not corridor_length > 0 or not h > 0:
        raise DomainError('corridor length and height must be > 0 m')
    if not 0 < delta < math.pi:
        raise DomainError(f'drone beamwidth must be in (0, π) rad, got {delta}')
    return min(corridor_length / (n_drones - 1), 2 * _footprint_radius(h, delta))


def abs_corridor(n_drones: int, corridor_length: float, h: float, delta: float) -> pd.DataFrame:
    """Drone positions centred on a straight corridor at ``abs_spacing``"""
    gap = abs_spacing(n_drones, corridor_length, h, delta)
    start = (corridor_length - gap * (n_drones - 1)) / 2
    return pd.DataFrame({
        'drone': np.arange(n_drones),
        'x_m': start + gap * np.arange(n_drones),
        'height_m': np.full(n_drones, float(h)),
        'footprint_radius_m': np.full(n_drones, _footprint_radius(h, delta)),
    })
