import math

import numpy as np
from django.test import SimpleTestCase

from simulator.atmosphere import AbsorptionModel, Atmosphere, absorption_coefficient
from simulator.channel import Band, absorption_loss_db, spreading_loss_db
from simulator.exceptions import DomainError
from simulator.link import (
    DEFAULT_SUBCHANNEL_WIDTH,
    BeamConfig,
    RadioHardware,
    capacity_bps,
    capacity_over_distances,
    gain_db,
    gain_from_beamwidth,
    link_snr_db,
    rate_density_curve,
    rate_density_gbps_per_ghz,
    subchannel_capacity,
    subchannel_snr_db,
    subchannels,
    thermal_noise_dbm,
)


class GainTests(SimpleTestCase):
    def test_exact_values(self):
        self.assertEqual(gain_from_beamwidth(2 * math.pi), 1.0)
        self.assertEqual(gain_from_beamwidth(math.pi), 2.0)

    def test_ten_degrees(self):
        self.assertAlmostEqual(gain_from_beamwidth(math.radians(10)), 525.6, delta=0.5)
        self.assertAlmostEqual(gain_db(math.radians(10)), 27.21, delta=0.01)

    def test_strictly_decreasing(self):
        gains = [gain_from_beamwidth(math.radians(d)) for d in range(1, 361)]
        self.assertTrue(all(a > b for a, b in zip(gains, gains[1:])))

    def test_gain_times_cap_solid_angle_is_4pi(self):
        for delta in np.linspace(0.01, 2 * math.pi, 50):
            solid_angle = 2 * math.pi * (1 - math.cos(delta / 2))
            self.assertAlmostEqual(gain_from_beamwidth(delta) * solid_angle / (4 * math.pi), 1.0, delta=1e-9)

    def test_invalid_beamwidth(self):
        for delta in (0.0, -1.0, 7.0):
            with self.assertRaises(DomainError):
                gain_from_beamwidth(delta)
        with self.assertRaises(DomainError):
            BeamConfig(beamwidth=0.0)
        with self.assertRaises(DomainError):
            BeamConfig(boresight=(1.0, 1.0, 0.0))


class NoiseTests(SimpleTestCase):
    def test_kTB(self):
        self.assertAlmostEqual(thermal_noise_dbm(290.0, 10e9, 0.0), -73.98, delta=0.01)

    def test_noise_figure_and_bandwidth(self):
        base = thermal_noise_dbm(290.0, 1e9, 0.0)
        self.assertAlmostEqual(thermal_noise_dbm(290.0, 1e9, 10.0) - base, 10.0, places=12)
        self.assertAlmostEqual(thermal_noise_dbm(290.0, 10e9, 0.0) - base, 10.0, places=12)

    def test_non_positive_bandwidth(self):
        with self.assertRaises(DomainError):
            thermal_noise_dbm(290.0, 0.0, 0.0)


class SnrTests(SimpleTestCase):
    def isotropic(self, tx_power):
        beam = BeamConfig(beamwidth=2 * math.pi)
        return RadioHardware(tx_power=tx_power, noise_figure=0.0, tx_beam=beam, rx_beam=beam)

    def test_cancellation(self):
        noise = thermal_noise_dbm(290.0, 10e9, 0.0)
        self.assertAlmostEqual(link_snr_db(self.isotropic(noise), 0.0, 10e9), 0.0, places=12)

    def test_linear_in_tx_power(self):
        a = link_snr_db(self.isotropic(0.0), 80.0, 1e9)
        b = link_snr_db(self.isotropic(3.0), 80.0, 1e9)
        self.assertAlmostEqual(b - a, 3.0, places=12)

    def test_default_budget_matches_term_by_term(self):
        hw = RadioHardware()
        atm = Atmosphere(relative_humidity=20.0)
        model = AbsorptionModel.builtin()
        loss = spreading_loss_db(130e9, 1.0) + absorption_loss_db(absorption_coefficient(model, 130e9, atm), 1.0)
        expected = 10.0 + 2 * gain_db(math.radians(10)) - loss - thermal_noise_dbm(290.0, 1e9, 10.0)
        self.assertAlmostEqual(link_snr_db(hw, loss, 1e9), expected, places=9)
        self.assertAlmostEqual(expected, 63.7, delta=0.5)


class CapacityTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.model = AbsorptionModel.builtin()
        cls.hw = RadioHardware()

    def test_flat_snr(self):
        self.assertEqual(subchannel_capacity([1e10], [1.0]), 1e10)
        self.assertEqual(subchannel_capacity([5e9, 5e9], [3.0, 3.0]), 2e10)

    def test_flat_snr_row_wise(self):
        rows = subchannel_capacity(np.array([[5e9, 5e9]]), np.array([[3.0, 3.0], [1.0, 1.0]]), axis=1)
        self.assertEqual(list(rows), [2e10, 1e10])

    def test_flat_snr_through_capacity(self):
        # one 10 GHz subchannel at an SNR of exactly 3 gives 20 Gbit/s
        atm = Atmosphere(relative_humidity=0.0)
        band = Band(130e9, 10e9)
        loss = spreading_loss_db(130e9, 1.0)
        snr_db = 10 * math.log10(3.0)
        tx_power = snr_db + loss + thermal_noise_dbm(290.0, DEFAULT_SUBCHANNEL_WIDTH, 10.0) - 2 * gain_db(math.radians(10))
        hw = RadioHardware(tx_power=tx_power)
        model = AbsorptionModel()
        self.assertAlmostEqual(capacity_bps(model, atm, hw, band, 1.0, subchannel_width=10e9) / 2e10, 1.0, delta=1e-9)

    def test_partial_last_subchannel(self):
        centers, widths = subchannels(Band(100.5e9, 1e9), 300e6)
        self.assertEqual(len(widths), 4)
        self.assertAlmostEqual(widths[-1], 100e6, delta=1e-3)
        self.assertAlmostEqual(widths.sum(), 1e9, delta=1e-3)
        self.assertAlmostEqual(centers[0], 100.15e9, delta=1e-3)

    def test_subchannel_wider_than_band(self):
        with self.assertRaises(DomainError):
            subchannels(Band(130e9, 1e9), 2e9)

    def test_rate_density_anchor(self):
        atm = Atmosphere(relative_humidity=20.0)
        capacity = capacity_bps(self.model, atm, self.hw, Band(130e9, 10e9), 1.0)
        self.assertGreaterEqual(capacity, 2e11)
        density = rate_density_gbps_per_ghz(capacity, 10e9)
        self.assertGreaterEqual(density, 15.0)
        self.assertLessEqual(density, 30.0)
        at_1thz = capacity_bps(self.model, atm, self.hw, Band(1000e9, 10e9), 1.0)
        self.assertLess(rate_density_gbps_per_ghz(at_1thz, 10e9), density)

    def test_matches_per_subchannel_sum(self):
        atm = Atmosphere(relative_humidity=20.0)
        band = Band(130e9, 10.05e9)
        centers, widths = subchannels(band, 100e6)
        self.assertAlmostEqual(widths[-1], 50e6, delta=1e-3)
        total = 0.0
        for f, w in zip(centers, widths):
            loss = spreading_loss_db(f, 1.0) + absorption_loss_db(absorption_coefficient(self.model, f, atm), 1.0)
            power = self.hw.tx_power + 10 * math.log10(w / 100e6)
            snr_db = (power + 2 * gain_db(self.hw.tx_beam.beamwidth) - loss
                      - thermal_noise_dbm(290.0, w, self.hw.noise_figure))
            total += w * math.log2(1 + 10 ** (snr_db / 10))
        self.assertAlmostEqual(capacity_bps(self.model, atm, self.hw, band, 1.0) / total, 1.0, delta=1e-9)

    def test_converges_with_subchannel_width(self):
        atm = Atmosphere(relative_humidity=20.0)
        band = Band(130e9, 10e9)
        coarse = capacity_bps(self.model, atm, self.hw, band, 1.0, subchannel_width=100e6)
        fine = capacity_bps(self.model, atm, self.hw, band, 1.0, subchannel_width=50e6)
        self.assertLess(abs(fine - coarse) / coarse, 1e-6)
        densities = [
            rate_density_gbps_per_ghz(capacity_bps(self.model, atm, self.hw, band, 1.0, subchannel_width=w), 10e9)
            for w in (1e9, 100e6, 10e6)
        ]
        for density in densities:
            self.assertAlmostEqual(density, densities[1], delta=1e-3)
            self.assertTrue(15.0 <= density <= 30.0)

    def test_total_power_is_independent_of_split(self):
        widths = np.array([100e6, 50e6, 50e6])
        snr_db = subchannel_snr_db(self.hw, np.full(3, 80.0), widths)
        self.assertAlmostEqual(snr_db[0], snr_db[1], places=9)
        self.assertAlmostEqual(snr_db[0], link_snr_db(self.hw, 80.0, 100e6), places=9)

    def test_monotone_in_distance_humidity_and_power(self):
        band = Band(300e9, 10e9)
        atm = Atmosphere()
        by_distance = [capacity_bps(self.model, atm, self.hw, band, d) for d in (1, 2, 5, 10, 50)]
        self.assertEqual(by_distance, sorted(by_distance, reverse=True))
        by_rh = [capacity_bps(self.model, Atmosphere(relative_humidity=rh), self.hw, band, 10.0)
                 for rh in (0, 20, 50, 100)]
        self.assertEqual(by_rh, sorted(by_rh, reverse=True))
        louder = RadioHardware(tx_power=20.0)
        self.assertGreater(capacity_bps(self.model, atm, louder, band, 10.0), by_distance[3])

    def test_vectorized_distances_match(self):
        atm = Atmosphere()
        band = Band(105e9, 10e9)
        many = capacity_over_distances(self.model, atm, self.hw, band, [10.0, 50.0, 120.0])
        for d, value in zip((10.0, 50.0, 120.0), many):
            self.assertAlmostEqual(capacity_bps(self.model, atm, self.hw, band, d) / value, 1.0, delta=1e-12)

    def test_density_falls_across_the_band(self):
        curve = rate_density_curve(self.model, Atmosphere(), self.hw, 1.0, 10e9, [130e9, 200e9, 300e9, 1000e9])
        densities = list(curve['rate_density_gbps_per_ghz'])
        self.assertTrue(all(a > b for a, b in zip(densities, densities[1:])))
        self.assertEqual(list(curve.columns), ['frequency_hz', 'rate_density_gbps_per_ghz'])


class RateDensityTests(SimpleTestCase):
    def test_division(self):
        self.assertEqual(rate_density_gbps_per_ghz(2e11, 1e10), 20.0)
        self.assertEqual(rate_density_gbps_per_ghz(0.0, 1e10), 0.0)
        self.assertEqual(rate_density_gbps_per_ghz(4e11, 2e10), 20.0)

    def test_zero_bandwidth(self):
        with self.assertRaises(DomainError):
            rate_density_gbps_per_ghz(1e9, 0.0)
