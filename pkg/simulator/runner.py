import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import pandas as pd
from django.conf import settings
from django.db import DatabaseError

from .channel import find_windows, frequency_grid, max_contiguous_bandwidth, path_loss_curve
from .config import SimConfig
from .exceptions import DomainError, SimulationError
from .exports import distance_tag, write_csv
from .link import BeamConfig, rate_density_curve
from .mobility import trajectory_trace, sample_trajectory
from .models import SimulationRun
from .scenarios import (
    MobilityType,
    abs_corridor,
    abs_sweep,
    backhaul_beamwidth_sweep,
    best_coverage,
    classify,
    disk_field,
    kiosk_field,
    kiosk_link_c_sweep,
    kiosk_link_d_sweep,
    plan_backhaul,
)
from .utils import derive_seed

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    scenario: str
    taxonomy: MobilityType
    summary: str
    files: List[Path] = field(default_factory=list)


class ScenarioRunner:
    """Runs the config's scenario and writes its CSVs into ``config.output``"""

    HANDLERS = {
        'pathloss': 'run_pathloss',
        'windows': 'run_windows',
        'rate': 'run_rate',
        'backhaul': 'run_backhaul',
        'kiosk-c': 'run_kiosk_c',
        'kiosk-d': 'run_kiosk_d',
        'abs': 'run_abs',
    }

    def __init__(self, config: SimConfig, workers: Optional[int] = None):
        self.config = config
        self.params = config.params
        self.workers = workers if workers is not None else getattr(settings, 'SIMULATOR_WORKERS', 1)
        self.output_dir = Path(config.output)
        self.model = config.build_model()
        self.atm = config.build_atmosphere()
        self.hw = config.build_hardware()
        self.plan = config.build_spectrum()
        self.timing = config.build_timing()
        self.files: List[Path] = []

    def run(self) -> RunResult:
        handler = self.HANDLERS.get(self.config.scenario)
        if not handler:
            raise SimulationError(f'Unknown scenario: {self.config.scenario}')
        self.files = []
        taxonomy, detail = getattr(self, handler)()
        summary = f'{self.config.scenario} [type {taxonomy.number} {taxonomy.label}]: {detail}'
        return RunResult(self.config.scenario, taxonomy, summary, list(self.files))

    def _write(self, df: pd.DataFrame, filename: str):
        self.files.append(write_csv(df, self.output_dir, filename))

    # --- channel scenarios ---

    def run_pathloss(self):
        grid = frequency_grid(self.plan.f_low, self.plan.f_high, self.plan.grid_step)
        for distance in self.params['distances_m']:
            curve = path_loss_curve(self.model, self.atm, grid, distance)
            self._write(curve, f'pathloss_d{distance_tag(distance)}m.csv')
        distances = ', '.join(f'{d:g}' for d in self.params['distances_m'])
        return classify(False, False), f'{len(grid)} frequencies at d = {distances} m'

    def run_windows(self):
        distance = self.params['distance_m']
        windows = find_windows(
            self.model, self.atm, distance, self.plan.loss_threshold_db,
            self.plan.f_low, self.plan.f_high, self.plan.grid_step,
        )
        df = pd.DataFrame(
            [(w.f_low, w.f_high, w.worst_loss_db) for w in windows],
            columns=['f_low_hz', 'f_high_hz', 'worst_loss_db'],
        )
        self._write(df, 'windows.csv')
        widest = max_contiguous_bandwidth(windows)
        return classify(False, False), (
            f'{len(windows)} windows at d={distance:g} m RH={self.atm.relative_humidity:g}%, '
            f'max contiguous bandwidth {widest / 1e9:.1f} GHz'
        )

    def run_rate(self):
        bandwidth = self.params['bandwidth_ghz'] * 1e9
        step = self.params['center_step_ghz'] * 1e9
        if bandwidth >= self.plan.f_high - self.plan.f_low:
            raise DomainError(f'rate bandwidth {bandwidth / 1e9:g} GHz does not fit the search range')
        centers = frequency_grid(self.plan.f_low + bandwidth / 2, self.plan.f_high - bandwidth / 2, step)
        peak = (0.0, 0.0, 0.0)
        for rh in self.params['relative_humidities']:
            atm = self.config.build_atmosphere(relative_humidity=rh)
            for distance in self.params['distances_m']:
                curve = rate_density_curve(
                    self.model, atm, self.hw, distance, bandwidth, centers, self.config.subchannel_width
                )
                self._write(curve, f'rate_rh{distance_tag(rh)}_d{distance_tag(distance)}m.csv')
                best = curve['rate_density_gbps_per_ghz'].max()
                if best > peak[0]:
                    peak = (float(best), rh, distance)
        return classify(False, False), (
            f'peak rate density {peak[0]:.2f} Gbps/GHz at RH={peak[1]:g}% d={peak[2]:g} m'
        )

    def run_backhaul(self):
        p = self.params
        args = dict(
            model=self.model,
            atm=self.atm,
            required_rate=p['required_rate_gbps'] * 1e9,
            required_bandwidth=p['required_bandwidth_ghz'] * 1e9,
            d_max_search=p['d_max_search_m'],
            plan=self.plan,
            subchannel_width=self.config.subchannel_width,
        )
        result = plan_backhaul(p['total_distance_m'], hw=self.hw, **args)
        self._write(pd.DataFrame([{
            'total_distance_m': result.total_distance,
            'max_hop_m': result.max_hop_distance,
            'hop_distance_m': result.hop_distance,
            'repeater_count': result.repeater_count,
            'per_hop_rate_bps': result.per_hop_rate,
            'band_center_hz': result.band.center,
            'bandwidth_hz': result.band.bandwidth,
        }]), 'backhaul.csv')
        if p['beamwidths_deg']:
            sweep = backhaul_beamwidth_sweep(
                p['total_distance_m'], [math.radians(b) for b in p['beamwidths_deg']],
                hw=self.hw, workers=self.workers, **args,
            )
            self._write(sweep, 'backhaul_beamwidth.csv')
        return classify(False, False), (
            f'{result.total_distance:g} m, max hop {result.max_hop_distance:g} m, '
            f'{result.repeater_count} repeaters'
        )

    # --- mobility scenarios ---

    def run_kiosk_c(self):
        p = self.params
        mobility = self.config.build_mobility_class(p['mobility_class'])
        deltas = [math.radians(d) for d in p['deltas_deg']]
        seeds = [derive_seed(self.config.seed, i) for i in range(p['n_seeds'])]
        curve = kiosk_link_c_sweep(
            mobility, deltas, self.model, self.atm, self.hw,
            distance=p['distance_m'],
            demand_bandwidth=p['bandwidth_ghz'] * 1e9,
            seeds=seeds,
            demand_rate=p['demand_gbps'] * 1e9,
            timing=self.timing,
            plan=self.plan,
            subchannel_width=self.config.subchannel_width,
            workers=self.workers,
        )
        self._write(curve, 'kiosk_c.csv')
        best = curve.loc[curve['mean_throughput_bps'].idxmax()]
        if p['trace']:
            trace = trajectory_trace(
                sample_trajectory(mobility, seeds[0]), BeamConfig(float(best['delta_rad'])), self.timing
            )
            self._write(trace, 'kiosk_c_trace.csv')
        return classify(False, mobility.name != 'static'), (
            f'{mobility.name} best δ {math.degrees(best["delta_rad"]):g}° '
            f'({best["mean_throughput_bps"] / 1e9:.2f} Gbps)'
        )

    def run_kiosk_d(self):
        p = self.params
        mobility = self.config.build_mobility_class(p['mobility_class'])
        users = kiosk_field(
            p['users'], self.config.seed, mobility,
            r_min=p['r_min_m'], r_max=p['r_max_m'],
            sector_half_angle=math.radians(p['sector_half_angle_deg']),
        )
        results = kiosk_link_d_sweep(
            users, [math.radians(d) for d in p['deltas_deg']], self.model, self.atm, self.hw,
            demand_rate=p['demand_gbps'] * 1e9,
            bandwidth=p['bandwidth_ghz'] * 1e9,
            timing=self.timing,
            plan=self.plan,
            subchannel_width=self.config.subchannel_width,
            workers=self.workers,
        )
        self._write(pd.DataFrame(
            [(r.parameter[0], r.total_rate / len(users), r.served_count) for r in results],
            columns=['delta_rad', 'mean_throughput_bps', 'served_count'],
        ), 'kiosk_d.csv')
        best = best_coverage(results)
        return classify(False, mobility.name != 'static'), (
            f'{mobility.name} optimal δ {math.degrees(best.parameter[0]):g}° serves '
            f'{best.served_count}/{len(users)} users'
        )

    def run_abs(self):
        p = self.params
        mobility = self.config.build_mobility_class(p['mobility_class'])
        users = disk_field(p['users'], self.config.seed, mobility, radius=p['disk_radius_m'])
        results = abs_sweep(
            users, p['heights_m'], [math.radians(d) for d in p['deltas_deg']],
            self.model, self.atm, self.hw,
            bandwidth=p['bandwidth_ghz'] * 1e9,
            carrier=p['carrier_ghz'] * 1e9,
            demand_rate=p['demand_gbps'] * 1e9,
            timing=self.timing,
            subchannel_width=self.config.subchannel_width,
            workers=self.workers,
            matched_ue_beam=p['matched_ue_beam'],
        )
        self._write(pd.DataFrame(
            [(r.parameter[0], r.parameter[1], r.served_count, r.total_rate) for r in results],
            columns=['height_m', 'delta_rad', 'served_count', 'sum_rate_bps'],
        ), 'abs.csv')
        best = best_coverage(results)
        height, delta = best.parameter
        self._write(abs_corridor(p['n_drones'], p['corridor_m'], height, delta), 'abs_corridor.csv')
        return classify(True, mobility.name != 'static'), (
            f'optimum h={height:g} m δ={math.degrees(delta):g}° serves {best.served_count}/{len(users)} users, '
            f'{best.total_rate / 1e9:.2f} Gbps'
        )


def record_run(config: SimConfig, status: str, execution_time: float, result: Optional[RunResult] = None,
               error_message: str = ''):
    try:
        SimulationRun.objects.create(
            scenario=config.scenario,
            status=status,
            seed=str(config.seed),
            config=config.to_dict(),
            summary=result.summary if result else '',
            output_dir=str(config.output),
            files=[str(f) for f in result.files] if result else [],
            error_message=error_message,
            execution_time=execution_time,
        )
    except DatabaseError as e:
        logger.warning(f'Could not record simulation run: {e}')


def run(config: SimConfig, workers: Optional[int] = None) -> RunResult:
    """Run a scenario and log the outcome; errors propagate after being recorded"""
    start_time = time.time()
    status, result, error_message = 'error', None, ''
    logger.info(f'Running scenario {config.scenario} (seed {config.seed}) into {config.output}')
    try:
        result = ScenarioRunner(config, workers).run()
        status = 'success'
        logger.info(result.summary)
        return result
    except SimulationError as e:
        status = 'infeasible' if e.exit_code == 3 else 'error'
        error_message = str(e)
        logger.error(f'Scenario {config.scenario} failed: {e}')
        raise
    finally:
        execution_time = time.time() - start_time
        logger.info(f'Scenario {config.scenario} finished in {execution_time:.2f}s ({status})')
        record_run(config, status, execution_time, result, error_message)
