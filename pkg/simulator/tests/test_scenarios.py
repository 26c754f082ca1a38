import math

import numpy as np
from django.test import SimpleTestCase

from simulator.atmosphere import AbsorptionModel, Atmosphere
from simulator.channel import Band, SpectrumPlan, adaptive_band
from simulator.exceptions import DomainError, LinkInfeasible
from simulator.link import BeamConfig, RadioHardware, capacity_bps
from simulator.mobility import (
    AlignmentTiming,
    alignment_fraction,
    alignment_from_offsets,
    mobility_class,
    offset_series,
    sample_trajectory,
)
from simulator.scenarios import (
    MobilityType,
    UserField,
    abs_corridor,
    abs_optimize,
    abs_spacing,
    abs_sweep,
    backhaul_beamwidth_sweep,
    best_coverage,
    classify,
    disk_field,
    kiosk_field,
    kiosk_link_c_sweep,
    kiosk_link_d_coverage,
    kiosk_optimal_beamwidth,
    max_hop_distance,
    plan_backhaul,
    repeaters_for,
)

MODEL = AbsorptionModel.builtin()
ATM = Atmosphere()
HW = RadioHardware()
TIMING = AlignmentTiming()
COARSE_PLAN = SpectrumPlan(grid_step=1e9)
STATIC = mobility_class('static')
S1 = mobility_class('S1')
S2 = mobility_class('S2')
S3 = mobility_class('S3')


def degrees(*values):
    return [math.radians(v) for v in values]


class TaxonomyTests(SimpleTestCase):
    def test_classify(self):
        self.assertEqual(classify(False, False), MobilityType.STATIC_STATIC)
        self.assertEqual(classify(False, True), MobilityType.STATIC_MOBILE)
        self.assertEqual(classify(True, False), MobilityType.MOBILE_STATIC)
        self.assertEqual(classify(True, True), MobilityType.MOBILE_MOBILE)

    def test_numbers_and_labels(self):
        self.assertEqual([t.number for t in MobilityType], [1, 2, 3, 4])
        self.assertEqual(MobilityType.STATIC_MOBILE.label, 'S-M')
        self.assertEqual(MobilityType.STATIC_STATIC.range_class, 'long range')


class RepeaterTests(SimpleTestCase):
    def test_examples(self):
        self.assertEqual(repeaters_for(500.0, 200.0), 2)
        self.assertEqual(repeaters_for(100.0, 100.0), 0)
        self.assertEqual(repeaters_for(100.0, 50.0), 1)
        self.assertEqual(repeaters_for(100.0, 49.9), 2)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for total, hop in zip(rng.uniform(1, 5000, 200), rng.uniform(1, 300, 200)):
            n = 0
            while total / (n + 1) > hop:
                n += 1
            self.assertEqual(repeaters_for(total, hop), n)

    def test_invalid(self):
        with self.assertRaises(DomainError):
            repeaters_for(0.0, 10.0)


class BackhaulTests(SimpleTestCase):
    def test_plan_invariants(self):
        rng = np.random.default_rng(5)
        for total, rate in zip(rng.uniform(10, 2000, 200), rng.uniform(10e9, 150e9, 200)):
            result = plan_backhaul(total, MODEL, ATM, HW, rate, 10e9, plan=COARSE_PLAN)
            minimal = next(n for n in range(10000) if total / (n + 1) <= result.max_hop_distance)
            self.assertEqual(result.repeater_count, minimal)
            self.assertLessEqual(result.hop_distance, result.max_hop_distance + 1e-9)
            self.assertAlmostEqual(result.hop_distance * (result.repeater_count + 1), total)
            if result.repeater_count:
                self.assertGreater(total / result.repeater_count, result.max_hop_distance)
            self.assertGreaterEqual(result.per_hop_rate, rate)
            self.assertAlmostEqual(result.band.bandwidth, 10e9)

    def test_bisection_matches_linear_scan(self):
        rate, bandwidth, d_max = 150e9, 10e9, 60.0

        def feasible(distance):
            band = adaptive_band(MODEL, ATM, distance, bandwidth, COARSE_PLAN)
            return capacity_bps(MODEL, ATM, HW, band, distance) >= rate

        expected = max(round(i * 0.1, 1) for i in range(10, 600) if feasible(i * 0.1))
        self.assertEqual(max_hop_distance(MODEL, ATM, HW, rate, bandwidth, d_max, COARSE_PLAN), expected)

    def test_search_bound_returned_when_feasible(self):
        self.assertEqual(max_hop_distance(MODEL, ATM, HW, 1e9, 10e9, 50.0, COARSE_PLAN), 50.0)

    def test_infeasible_rate(self):
        with self.assertRaises(LinkInfeasible):
            max_hop_distance(MODEL, ATM, HW, 1e13, 10e9, plan=COARSE_PLAN)
        with self.assertRaises(LinkInfeasible):
            plan_backhaul(500.0, MODEL, ATM, HW, 1e13, 10e9, plan=COARSE_PLAN)

    def test_beamwidth_sweep(self):
        sweep = backhaul_beamwidth_sweep(
            500.0, degrees(1, 10, 170), MODEL, ATM, HW, 100e9, 10e9, plan=COARSE_PLAN,
        )
        self.assertEqual(sweep['feasible'].tolist(), [1, 1, 0])
        self.assertEqual(int(sweep['repeater_count'].iloc[2]), -1)
        self.assertGreaterEqual(sweep['max_hop_m'].iloc[0], sweep['max_hop_m'].iloc[1])


class UserFieldTests(SimpleTestCase):
    def test_kiosk_field(self):
        users = kiosk_field(200, 3, S1)
        self.assertEqual(users, kiosk_field(200, 3, S1))
        r = users.ground_distances
        self.assertTrue(np.all((r >= 0.5) & (r <= 5.0)))
        angles = [abs(math.atan2(y, x)) for x, y in users.positions]
        self.assertLessEqual(max(angles), math.radians(60) + 1e-12)
        self.assertEqual(len(set(users.seeds)), 200)

    def test_disk_field(self):
        users = disk_field(200, 3, S2, radius=100.0)
        self.assertLessEqual(users.ground_distances.max(), 100.0)
        self.assertNotEqual(users.positions, disk_field(200, 4, S2).positions)

    def test_mismatched_lengths(self):
        with self.assertRaises(DomainError):
            UserField(positions=((1.0, 0.0),), mobility=(), seeds=(0,))


class KioskLinkCTests(SimpleTestCase):
    def sweep(self, mobility, grid):
        return kiosk_link_c_sweep(mobility, grid, MODEL, ATM, HW, 2.0, 20e9, seeds=range(20), plan=COARSE_PLAN)

    def test_static_user_prefers_narrowest_beam(self):
        curve = self.sweep(STATIC, degrees(*range(1, 31)))
        throughput = curve['mean_throughput_bps'].to_numpy()
        self.assertTrue(np.all(np.diff(throughput) < 0))
        self.assertTrue(curve['served_count'].all())

    def test_mobility_shifts_optimum_to_wider_beams(self):
        grid = degrees(*range(1, 31))
        s1 = self.sweep(S1, grid)
        s3 = self.sweep(S3, grid)
        self.assertLess(s3['mean_throughput_bps'].idxmax(), s1['mean_throughput_bps'].idxmax())
        self.assertLess(s1['mean_throughput_bps'].iloc[0], 0.2 * s1['mean_throughput_bps'].max())

    def test_empty_grid(self):
        with self.assertRaises(DomainError):
            self.sweep(S1, [])


class KioskLinkDTests(SimpleTestCase):
    def coverage(self, users, delta, **kwargs):
        return kiosk_link_d_coverage(users, delta, MODEL, ATM, HW, plan=COARSE_PLAN, **kwargs)

    def test_single_static_user(self):
        users = UserField(positions=((1.0, 0.0),), mobility=(STATIC,), seeds=(0,))
        self.assertEqual(self.coverage(users, math.radians(10)).served_count, 1)
        self.assertEqual(self.coverage(users, math.radians(10), demand_rate=math.inf).served_count, 0)

    def test_matches_per_user_oracle(self):
        users = kiosk_field(30, 7, S1)
        delta = math.radians(15)
        result = self.coverage(users, delta)
        hw = HW.with_beams(rx_beamwidth=delta)
        expected = []
        for (x, y), mobility, seed in zip(users.positions, users.mobility, users.seeds):
            distance = math.hypot(x, y)
            band = adaptive_band(MODEL, ATM, distance, 20e9, COARSE_PLAN)
            stats = alignment_fraction(
                sample_trajectory(mobility, seed), BeamConfig(delta),
                TIMING.realign_latency, TIMING.duration, TIMING.timestep,
            )
            expected.append(capacity_bps(MODEL, ATM, hw, band, distance) / 30 * stats.aligned_fraction)
        np.testing.assert_allclose(result.per_user_rate, expected, rtol=1e-12)
        self.assertEqual(result.served_count, sum(r >= 10e9 for r in expected))

    def test_served_count_falls_with_demand(self):
        users = kiosk_field(30, 7, S1)
        counts = [
            self.coverage(users, math.radians(40), demand_rate=gbps * 1e9).served_count
            for gbps in (1, 5, 10, 20, 50)
        ]
        self.assertEqual(counts, sorted(counts, reverse=True))

    def test_less_mobile_user_never_loses(self):
        users = kiosk_field(30, 7, S1)
        delta = math.radians(15)
        before = self.coverage(users, delta)
        after = self.coverage(users.with_user_class(0, STATIC), delta)
        self.assertGreaterEqual(after.per_user_rate[0], before.per_user_rate[0])
        self.assertEqual(after.per_user_rate[1:], before.per_user_rate[1:])
        self.assertGreaterEqual(after.served_count, before.served_count)

    def test_optimal_beamwidth_by_class(self):
        users = kiosk_field(30, 2024, S1)
        grid = degrees(*range(1, 61))
        best = {
            cls.name: kiosk_optimal_beamwidth(users, cls, grid, MODEL, ATM, HW, plan=COARSE_PLAN)[0]
            for cls in (STATIC, S1, S3)
        }
        self.assertEqual(best['static'], grid[0])
        self.assertGreater(best['S1'], grid[0])
        self.assertLess(best['S1'], grid[-1])
        self.assertGreater(best['S1'], best['S3'])


class AerialBaseStationTests(SimpleTestCase):
    def test_user_under_the_drone(self):
        users = UserField(positions=((0.0, 0.0),), mobility=(STATIC,), seeds=(0,))
        height, delta, best = abs_optimize(users, [10.0, 20.0], degrees(10, 20), MODEL, ATM, HW)
        self.assertEqual((height, delta), (10.0, math.radians(10)))
        self.assertEqual(best.served_count, 1)

    def test_empty_footprint(self):
        users = UserField(positions=((50.0, 0.0),), mobility=(STATIC,), seeds=(0,))
        [result] = abs_sweep(users, [10.0], degrees(10), MODEL, ATM, HW)
        self.assertEqual(result.served_count, 0)
        self.assertEqual(result.per_user_rate, (0.0,))

    def test_footprint_rule(self):
        users = UserField(positions=((50.0, 0.0), (0.0, 60.0)), mobility=(STATIC, STATIC), seeds=(0, 1))
        [result] = abs_sweep(users, [100.0], degrees(60), MODEL, ATM, HW)
        self.assertGreater(result.per_user_rate[0], 0.0)
        self.assertEqual(result.per_user_rate[1], 0.0)

    def test_sweep_order(self):
        users = disk_field(5, 1, STATIC)
        results = abs_sweep(users, [10.0, 20.0], degrees(10, 20, 30), MODEL, ATM, HW)
        self.assertEqual([r.parameter[0] for r in results], [10.0] * 3 + [20.0] * 3)

    def test_optimum_matches_brute_force(self):
        users = disk_field(50, 2024, S2)
        heights = [float(h) for h in range(10, 201, 10)]
        deltas = degrees(*range(1, 61))
        height, delta, best = abs_optimize(users, heights, deltas, MODEL, ATM, HW)

        offsets = [
            offset_series(sample_trajectory(m, s), TIMING.duration, TIMING.timestep)[-1]
            for m, s in zip(users.mobility, users.seeds)
        ]
        ground = users.ground_distances
        band = Band(325e9, 10e9)
        scores = {}
        for d in deltas:
            fractions = [
                alignment_from_offsets(o, d, TIMING.realign_latency, TIMING.timestep).aligned_fraction
                for o in offsets
            ]
            hw = HW.with_beams(tx_beamwidth=d, rx_beamwidth=d)
            for h in heights:
                inside = [i for i, r in enumerate(ground) if r <= h * math.tan(d / 2)]
                rates = [
                    capacity_bps(MODEL, ATM, hw, band, math.hypot(h, ground[i])) / len(inside) * fractions[i]
                    for i in inside
                ]
                scores[(h, d)] = (sum(r >= 10e9 for r in rates), sum(rates))
        served = max(s for s, _ in scores.values())
        self.assertEqual(best.served_count, served)
        top = max(rate for s, rate in scores.values() if s == served)
        self.assertAlmostEqual(best.total_rate, top, delta=top * 1e-9)
        self.assertEqual(scores[(height, delta)][0], served)

        self.assertLess(heights[0], height)
        self.assertLess(height, heights[-1])
        self.assertLess(deltas[0], delta)
        self.assertLess(delta, deltas[-1])
        corners = [(heights[0], deltas[0]), (heights[0], deltas[-1]), (heights[-1], deltas[0]), (heights[-1], deltas[-1])]
        for corner in corners:
            self.assertGreaterEqual(best.served_count, scores[corner][0])
            self.assertGreater((best.served_count, best.total_rate), scores[corner])

    def test_fixed_ue_beam(self):
        users = UserField(positions=((3.0, 0.0),), mobility=(STATIC,), seeds=(0,))
        [fixed] = abs_sweep(users, [20.0], degrees(30), MODEL, ATM, HW, matched_ue_beam=False)
        [matched] = abs_sweep(users, [20.0], degrees(30), MODEL, ATM, HW)
        band = Band(325e9, 10e9)
        slant = math.hypot(20.0, 3.0)
        wide = math.radians(30)
        expected = capacity_bps(MODEL, ATM, HW.with_beams(tx_beamwidth=wide), band, slant)
        self.assertAlmostEqual(fixed.per_user_rate[0] / expected, 1.0, delta=1e-9)
        expected = capacity_bps(MODEL, ATM, HW.with_beams(tx_beamwidth=wide, rx_beamwidth=wide), band, slant)
        self.assertAlmostEqual(matched.per_user_rate[0] / expected, 1.0, delta=1e-9)
        # a 30° UE beam has less gain than the 10° default
        self.assertLess(matched.per_user_rate[0], fixed.per_user_rate[0])

    def test_invalid_beamwidth(self):
        users = disk_field(5, 1, STATIC)
        with self.assertRaises(DomainError):
            abs_sweep(users, [10.0], [math.pi], MODEL, ATM, HW)


class CorridorTests(SimpleTestCase):
    def test_spacing(self):
        self.assertAlmostEqual(abs_spacing(3, 200.0, 100.0, math.radians(60)), 100.0)
        self.assertAlmostEqual(abs_spacing(2, 1000.0, 10.0, math.radians(90)), 20.0)
        self.assertAlmostEqual(abs_spacing(2, 1000.0, 50.0, math.radians(60)), 57.735, places=3)

    def test_spacing_needs_two_drones(self):
        with self.assertRaises(DomainError):
            abs_spacing(1, 1000.0, 50.0, math.radians(60))

    def test_corridor_positions(self):
        corridor = abs_corridor(3, 200.0, 100.0, math.radians(60))
        np.testing.assert_allclose(corridor['x_m'], [0.0, 100.0, 200.0], atol=1e-9)
        corridor = abs_corridor(2, 1000.0, 10.0, math.radians(90))
        np.testing.assert_allclose(corridor['x_m'], [490.0, 510.0])
        self.assertEqual(list(corridor.columns), ['drone', 'x_m', 'height_m', 'footprint_radius_m'])

    def test_best_coverage_prefers_higher_rate(self):
        users = UserField(positions=((0.0, 0.0),), mobility=(STATIC,), seeds=(0,))
        results = abs_sweep(users, [10.0], degrees(10, 20), MODEL, ATM, HW, demand_rate=math.inf)
        self.assertEqual(best_coverage(results).parameter[1], math.radians(10))
