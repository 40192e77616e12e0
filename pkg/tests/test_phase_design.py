import unittest

import numpy as np
from numpy.testing import assert_allclose
from scipy import special

from core.aperture import ApertureConfig, element_positions
from core.exceptions import DomainError
from core.phase_design import (
    Convention,
    PadMode,
    PhaseProfile,
    aperture_grid,
    design_circular,
    design_numeric,
    design_parabolic,
    discretize,
    lobe_corrected_trajectory,
    main_lobe_offset,
    stationary_phase_residuals,
    total_phase,
)
from core.trajectory import (
    CircularTrajectory,
    ConstantTrajectory,
    LinearTrajectory,
    ParabolicTrajectory,
    position,
    ray_geometry,
    slope,
    tangent_intercept,
)

K0 = 2 * np.pi
CFG = ApertureConfig(num_elements=1001)


def circular_gradient(xi, radius=80.0):
    u = xi / radius
    return -K0 * np.sqrt(u * u - 1.0) / u


class TestApertureGrid(unittest.TestCase):
    def test_grid_contains_element_positions(self):
        xi = aperture_grid(CFG, 8)
        self.assertEqual(xi.size, 4001)
        self.assertEqual(xi[-1], 500.0)
        assert_allclose(xi[::4], element_positions(CFG), atol=1e-12)

    def test_single_element(self):
        assert_allclose(aperture_grid(ApertureConfig(num_elements=1)), [0.0])


class TestNumericDesigner(unittest.TestCase):
    def test_constant_trajectory_gives_zero_phase(self):
        profile = design_numeric(ConstantTrajectory(z_start=1, z_end=100, x0=3.0), CFG)
        self.assertTrue(np.all(profile.phase == 0))
        self.assertTrue(np.all(profile.element_phases == 0))

    def test_linear_trajectory_uses_plane_wave(self):
        m = 0.4
        profile = design_numeric(LinearTrajectory(z_start=1, z_end=100, slope=m, x0=10.0), CFG)
        assert_allclose(profile.phase, K0 * profile.xi * m / np.sqrt(1 + m * m), rtol=1e-12)

    def test_circle_matches_closed_form_gradient(self):
        traj = CircularTrajectory(z_start=0.0, z_end=79.5, radius=80.0)
        numeric = design_numeric(traj, CFG)
        closed = design_circular(80.0, CFG)
        mask = (numeric.xi >= 84.0) & (numeric.xi <= 320.0)
        expected = circular_gradient(numeric.xi[mask])

        rel = np.abs(numeric.gradient()[mask] - expected) / np.abs(expected)
        self.assertGreaterEqual(np.mean(rel <= 1e-3), 0.99)
        rel_closed = np.abs(closed.gradient()[mask] - expected) / np.abs(expected)
        self.assertLess(np.max(rel_closed), 1e-3)
        self.assertAlmostEqual(numeric.covered[0], 80.0)

    def test_parabola_matches_closed_form_gradient(self):
        traj = ParabolicTrajectory(z_start=0.0, z_end=2240.0, alpha=1e-4, orientation=-1)
        numeric = design_numeric(traj, CFG)
        closed = design_parabolic(1e-4, CFG, orientation=-1)
        mask = (numeric.xi >= 5.0) & (numeric.xi <= 400.0)
        g_num, g_closed = numeric.gradient()[mask], closed.gradient()[mask]
        self.assertLess(np.max(np.abs(g_num - g_closed) / np.abs(g_closed)), 1e-3)

    def test_snell_gradient_law(self):
        traj = ParabolicTrajectory(z_start=0.0, z_end=1000.0, alpha=2.5e-4, apex_x=250.0)
        profile = design_numeric(traj, CFG)
        gradient = profile.gradient()
        for xi in np.linspace(10.0, 240.0, 24):
            i = int(round(xi * 8))
            theta = ray_geometry(traj, float(profile.xi[i])).deviation_angle
            self.assertLess(abs(gradient[i] - K0 * np.sin(theta)) / K0, 1e-3)

    def test_strict_pad_mode_limits_domain(self):
        traj = CircularTrajectory(z_start=0.0, z_end=60.0, radius=80.0)
        profile = design_numeric(traj, CFG, pad_mode=PadMode.STRICT)
        self.assertGreaterEqual(profile.domain[0], 80.0 - 1e-9)
        self.assertLess(profile.domain[1], 500.0)
        with self.assertRaises(DomainError):
            profile.element_phases

    def test_zero_pad_mode_warns(self):
        traj = CircularTrajectory(z_start=0.0, z_end=79.5, radius=80.0)
        with self.assertLogs("tabs.phase_design", level="WARNING"):
            profile = design_numeric(traj, CFG, pad_mode="zero")
        self.assertTrue(np.all(profile.phase[profile.xi < 80.0] == 0.0))


class TestClosedForms(unittest.TestCase):
    def test_circular_reference_values(self):
        conjugate = design_circular(80.0, CFG, convention=Convention.CONJUGATE)
        i_r, i_2r = 80 * 8, 160 * 8
        self.assertAlmostEqual(conjugate.phase[i_r], 0.0, delta=1e-9)
        self.assertAlmostEqual(conjugate.phase[i_2r], K0 * 80 * (np.sqrt(3) - np.pi / 3), delta=1e-9)
        self.assertAlmostEqual(conjugate.phase[i_2r], 344.2, delta=0.1)
        propagation = design_circular(80.0, CFG)
        assert_allclose(propagation.phase, -conjugate.phase)

    def test_circular_discretization_matches_direct_evaluation(self):
        profile = design_circular(80.0, CFG)
        positions = element_positions(CFG)
        keep = positions >= 80.0
        u = positions[keep] / 80.0
        direct = -K0 * 80.0 * (np.sqrt(u * u - 1) - np.arccos(1 / u))
        assert_allclose(profile.element_phases[keep], direct, atol=1e-3)

    def test_parabolic_reference_values(self):
        profile = design_parabolic(1e-4, CFG, orientation=-1)
        self.assertEqual(profile.phase[0], 0.0)
        expected = -(4e-4 * K0 * 100 / 3) * np.sqrt(100 / 1e-4) * special.hyp2f1(0.5, 1.5, 2.5, -0.04)
        self.assertAlmostEqual(profile.phase[800] / expected, 1.0, delta=1e-12)

    def test_parabolic_orientation_mirrors_profile(self):
        left = design_parabolic(2.5e-4, CFG, apex_x=250.0, orientation=-1)
        right = design_parabolic(2.5e-4, CFG, apex_x=250.0, orientation=1)
        # phi_right(250 - t) = phi_left(250 + t)
        assert_allclose(right.phase[:2001][::-1], left.phase[2000:], rtol=1e-12, atol=1e-9)

    def test_closed_form_matches_numeric_on_reference_parabola(self):
        traj = ParabolicTrajectory(z_start=0.0, z_end=1000.0, alpha=2.5e-4, apex_x=250.0)
        numeric = design_numeric(traj, CFG)
        closed = design_parabolic(2.5e-4, CFG, apex_x=250.0, orientation=1)
        mask = (numeric.xi >= 10.0) & (numeric.xi <= 240.0)
        rel = np.abs(numeric.gradient()[mask] - closed.gradient()[mask]) / np.abs(closed.gradient()[mask])
        self.assertLess(np.max(rel), 1e-3)

    def test_invalid_parameters(self):
        with self.assertRaises(DomainError):
            design_circular(-1.0, CFG)
        with self.assertRaises(DomainError):
            design_parabolic(0.0, CFG)
        with self.assertRaises(DomainError):
            design_parabolic(1e-4, CFG, orientation=2)
        with self.assertRaises(DomainError):
            design_circular(600.0, CFG, pad_mode=PadMode.STRICT)


class TestDiscretize(unittest.TestCase):
    def test_zero_profile(self):
        cfg = ApertureConfig(num_elements=5)
        xi = aperture_grid(cfg)
        profile = PhaseProfile(xi, np.zeros_like(xi), cfg, "manual", (0.0, cfg.aperture_length))
        assert_allclose(discretize(profile, cfg), np.zeros(5))

    def test_linear_profile(self):
        cfg = ApertureConfig(num_elements=3)
        xi = np.linspace(0.0, 1.0, 9)
        profile = PhaseProfile(xi, K0 * xi * np.sin(np.pi / 6), cfg, "manual", (0.0, 1.0))
        assert_allclose(discretize(profile, cfg), [0.0, np.pi / 2, np.pi], atol=1e-12)
        assert_allclose(profile.weights().phases, [0.0, np.pi / 2, np.pi], atol=1e-12)

    def test_profile_validation(self):
        cfg = ApertureConfig(num_elements=3)
        with self.assertRaises(DomainError):
            PhaseProfile(np.array([0.0, 0.5, 0.4]), np.zeros(3), cfg, "manual", (0.0, 0.5))
        with self.assertRaises(DomainError):
            PhaseProfile(np.array([0.0, 2.0]), np.zeros(2), cfg, "manual", (0.0, 2.0))


class TestTotalPhase(unittest.TestCase):
    def setUp(self):
        self.cfg = ApertureConfig(num_elements=41)
        xi = aperture_grid(self.cfg)
        self.flat = PhaseProfile(xi, np.zeros_like(xi), self.cfg, "manual", (0.0, self.cfg.aperture_length))

    def test_on_axis(self):
        tp = total_phase(self.flat, (0.0, 100.0), self.cfg)
        self.assertAlmostEqual(tp.exact[0], 200 * np.pi)

    def test_fresnel_error(self):
        tp = total_phase(self.flat, (10.0, 100.0), self.cfg)
        diff = tp.exact[0] - tp.fresnel[0]
        self.assertAlmostEqual(diff, K0 * (np.sqrt(10100.0) - 100.5), places=10)
        self.assertAlmostEqual(abs(diff), 0.0078, delta=1e-4)

    def test_rejects_points_on_the_array_line(self):
        with self.assertRaises(DomainError):
            total_phase(self.flat, (1.0, 0.0), self.cfg)

    def check_stationary_point(self, profile, traj, z):
        check = stationary_phase_residuals(profile, traj, CFG, z)
        theta = np.arctan(slope(traj, z))
        # exact k0*r has curvature k0 cos^3(theta) / z at the tangent ray, the Fresnel form k0 / z
        expected = (K0 / z) * (1.0 - np.cos(theta) ** 3)
        self.assertLessEqual(abs(check.aperture_point - tangent_intercept(traj, z)), 0.125)
        self.assertAlmostEqual(check.fresnel_second_derivative / expected, 1.0, delta=1e-2)
        self.assertLess(abs(check.second_derivative), 0.01 * expected)
        return check

    def test_stationary_point_on_parabola(self):
        traj = ParabolicTrajectory(z_start=0.0, z_end=1000.0, alpha=2.5e-4, apex_x=250.0)
        profile = design_parabolic(2.5e-4, CFG, apex_x=250.0, orientation=1)
        for z in (200.0, 500.0, 800.0):
            with self.subTest(z=z):
                check = self.check_stationary_point(profile, traj, z)
                self.assertLess(abs(check.first_derivative), 1e-4)

    def test_stationary_point_on_circle(self):
        traj = CircularTrajectory(z_start=0.0, z_end=79.5, radius=80.0)
        profile = design_circular(80.0, CFG)
        for z in (20.0, 40.0, 60.0):
            with self.subTest(z=z):
                self.check_stationary_point(profile, traj, z)


class TestSteeringLimit(unittest.TestCase):
    def test_gradient_never_exceeds_wave_number(self):
        profiles = {
            "circular": design_circular(80.0, CFG),
            "numeric_circle": design_numeric(CircularTrajectory(z_start=0.0, z_end=79.5, radius=80.0), CFG),
            "parabolic": design_parabolic(1e-4, CFG, apex_x=500.0, orientation=1),
            "lobe_circular": design_circular(80.0, CFG, lobe_correction=True),
        }
        for name, profile in profiles.items():
            with self.subTest(profile=name):
                self.assertLessEqual(np.max(np.abs(profile.gradient())), K0)

    def test_circle_steers_close_to_endfire(self):
        # sin(theta) at xi = D is sqrt(1 - (R/D)^2) = 0.987
        self.assertGreater(np.max(np.abs(design_circular(80.0, CFG).gradient())), 0.98 * K0)


class TestSamplingIndependence(unittest.TestCase):
    def test_element_phases_do_not_depend_on_design_grid(self):
        trajectories = {
            "circle": CircularTrajectory(z_start=0.0, z_end=79.5, radius=80.0),
            "parabola": ParabolicTrajectory(z_start=100.0, z_end=1000.0, alpha=2.5e-4, apex_x=250.0),
        }
        for name, traj in trajectories.items():
            with self.subTest(trajectory=name):
                coarse = design_numeric(traj, CFG, samples_per_wavelength=8).element_phases
                fine = design_numeric(traj, CFG, samples_per_wavelength=16).element_phases
                self.assertLessEqual(np.sqrt(np.mean((coarse - fine) ** 2)), 1e-4)

    def test_numeric_circle_matches_closed_form_phase(self):
        numeric = design_numeric(CircularTrajectory(z_start=0.0, z_end=79.5, radius=80.0), CFG)
        closed = design_circular(80.0, CFG)
        keep = numeric.xi >= 80.0
        assert_allclose(numeric.phase[keep], closed.phase[keep], rtol=1e-9, atol=1e-6)


class TestLobeCorrection(unittest.TestCase):
    def test_main_lobe_offset_values(self):
        self.assertAlmostEqual(main_lobe_offset(80.0, K0), 1.0232600649, places=8)
        self.assertAlmostEqual(main_lobe_offset(5000.0, K0), 4.0608102586, places=8)
        assert_allclose(main_lobe_offset(np.array([80.0, 5000.0]), K0), [1.0232600649, 4.0608102586])
        with self.assertRaises(DomainError):
            main_lobe_offset(0.0, K0)

    def test_corrected_circle_is_a_smaller_circle(self):
        traj = CircularTrajectory(z_start=0.0, z_end=79.5, radius=80.0)
        corrected = lobe_corrected_trajectory(traj, K0)
        inner = 80.0 - main_lobe_offset(80.0, K0)
        z = np.linspace(0.0, 70.0, 50)
        assert_allclose(np.hypot(position(corrected, z), z), inner, atol=1e-6)

    def test_corrected_parabola_moves_apex_outward(self):
        traj = ParabolicTrajectory(z_start=0.0, z_end=1500.0, alpha=1e-4, apex_x=500.0)
        corrected = lobe_corrected_trajectory(traj, K0)
        self.assertAlmostEqual(position(corrected, 0.0), 500.0 + main_lobe_offset(5000.0, K0), places=6)

    def test_numeric_design_matches_corrected_closed_form(self):
        traj = CircularTrajectory(z_start=0.0, z_end=79.5, radius=80.0)
        numeric = design_numeric(traj, CFG, lobe_correction=True)
        closed = design_circular(80.0, CFG, lobe_correction=True)
        mask = (numeric.xi >= 84.0) & (numeric.xi <= 320.0)
        expected = circular_gradient(numeric.xi[mask], radius=80.0 - main_lobe_offset(80.0, K0))
        rel = np.abs(numeric.gradient()[mask] - expected) / np.abs(expected)
        self.assertGreaterEqual(np.mean(rel <= 1e-3), 0.99)
        rel_closed = np.abs(closed.gradient()[mask] - expected) / np.abs(expected)
        self.assertLess(np.max(rel_closed), 1e-3)

    def test_straight_trajectory_rejected(self):
        with self.assertRaises(DomainError):
            lobe_corrected_trajectory(LinearTrajectory(z_start=1.0, z_end=100.0, slope=0.3), K0)


if __name__ == "__main__":
    unittest.main()
