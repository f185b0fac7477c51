import math
import unittest

import numpy as np

from hybrid_precoding import channel
from hybrid_precoding.channel import ArrayGeometry, ChannelError
from hybrid_precoding.config import SystemConfig, AngleModel, ConfigError


def small_config(**changes) -> SystemConfig:
	values = dict(n_tx=16, n_rf=4, n_users=3, n_paths=5, trials=1)
	values.update(changes)
	return SystemConfig(**values)


class TestArrayResponse(unittest.TestCase):
	def test_broadside(self) -> None:
		for n_tx in (1, 4, 256):
			a = channel.array_response(0.0, ArrayGeometry(n_tx))
			self.assertEqual(a.shape, (n_tx, 1))
			np.testing.assert_allclose(a, np.full((n_tx, 1), 1/math.sqrt(n_tx)), rtol=0, atol=1e-15)

	def test_endfire_half_wavelength(self) -> None:
		a = channel.array_response(math.pi/2, ArrayGeometry(2, 0.5))
		expected = np.array([[1], [-1]])/math.sqrt(2)
		np.testing.assert_allclose(a, expected, rtol=0, atol=1e-12)

	def test_unit_norm(self) -> None:
		geom = ArrayGeometry(64, 0.5)
		for theta in np.linspace(-math.pi/2, math.pi/2, 17):
			a = channel.array_response(theta, geom)
			self.assertAlmostEqual(np.linalg.norm(a), 1.0, delta=1e-12)
			np.testing.assert_allclose(np.abs(a), 1/8, rtol=0, atol=1e-12)

	def test_steering_matrix_columns(self) -> None:
		geom = ArrayGeometry(8)
		thetas = [-0.3, 0.1, 1.2]
		A = channel.steering_matrix(thetas, geom)
		for col, theta in enumerate(thetas):
			np.testing.assert_allclose(A[:, [col]], channel.array_response(theta, geom), rtol=0, atol=1e-15)

	def test_bad_geometry(self) -> None:
		with self.assertRaises(ChannelError):
			ArrayGeometry(0)
		with self.assertRaises(ChannelError):
			ArrayGeometry(4, 0.0)


class TestLargeScaleFading(unittest.TestCase):
	def test_unit_distance(self) -> None:
		for alpha in (0.0, 2.0, 4.6):
			self.assertEqual(channel.large_scale_fading(1.0, alpha), 1.0)

	def test_values(self) -> None:
		self.assertAlmostEqual(channel.large_scale_fading(10.0, 4.6)/10**-4.6, 1.0, delta=1e-12)
		self.assertAlmostEqual(channel.large_scale_fading(10.0, 4.6), 2.5119e-5, delta=1e-9)
		self.assertAlmostEqual(channel.large_scale_fading(100.0, 4.6)/10**-9.2, 1.0, delta=1e-12)

	def test_non_positive_distance(self) -> None:
		with self.assertRaises(ChannelError):
			channel.large_scale_fading(0.0, 4.6)
		with self.assertRaises(ChannelError):
			channel.large_scale_fading(-5.0, 4.6)


class TestGenerateChannel(unittest.TestCase):
	def test_single_path_collapse(self) -> None:
		geom = ArrayGeometry(32)
		theta = 0.4
		H = channel.assemble_channel([theta], [[1.0]], [1.0], geom)
		expected = math.sqrt(32)*channel.array_response(theta, geom)
		np.testing.assert_allclose(H, expected, rtol=0, atol=1e-12)

	def test_deterministic(self) -> None:
		cfg = small_config()
		first = channel.generate_channel(cfg, np.random.default_rng(7))
		second = channel.generate_channel(cfg, np.random.default_rng(7))

		np.testing.assert_array_equal(first.H, second.H)
		np.testing.assert_array_equal(first.path_angles, second.path_angles)
		np.testing.assert_array_equal(first.path_gains, second.path_gains)
		np.testing.assert_array_equal(first.distances_m, second.distances_m)

	def test_shapes_and_fading(self) -> None:
		cfg = small_config()
		chan = channel.generate_channel(cfg, np.random.default_rng(3))

		self.assertEqual(chan.H.shape, (16, 3))
		self.assertEqual(chan.path_angles.shape, (3, 5))
		self.assertEqual(chan.n_users, 3)
		self.assertEqual(chan.n_paths, 5)
		self.assertTrue(np.all((chan.distances_m >= cfg.d_min_m) & (chan.distances_m <= cfg.d_max_m)))
		np.testing.assert_allclose(chan.large_scale, chan.distances_m**(-cfg.path_loss_exp), rtol=1e-15)

	def test_reassemble(self) -> None:
		cfg = small_config(angle_model=AngleModel.PER_USER)
		chan = channel.generate_channel(cfg, np.random.default_rng(11))
		H = chan.reassemble(ArrayGeometry.from_config(cfg))
		np.testing.assert_allclose(H, chan.H, rtol=0, atol=1e-12*np.abs(chan.H).max())

	def test_shared_angles(self) -> None:
		chan = channel.generate_channel(small_config(), np.random.default_rng(5))
		for row in chan.path_angles[1: ]:
			np.testing.assert_array_equal(row, chan.path_angles[0])

	def test_per_user_angles(self) -> None:
		chan = channel.generate_channel(small_config(angle_model=AngleModel.PER_USER), np.random.default_rng(5))
		self.assertFalse(np.array_equal(chan.path_angles[0], chan.path_angles[1]))

	def test_shared_angles_need_enough_paths(self) -> None:
		with self.assertRaises(ConfigError) as cm:
			small_config(n_users=4, n_paths=3)
		self.assertIn('K ≤ L', str(cm.exception))

		small_config(n_users=4, n_paths=3, angle_model=AngleModel.PER_USER)

	def test_mean_channel_energy(self) -> None:
		# ξ = 1 (unit distance), unit path variances: E‖h_k‖² = N_T
		cfg = SystemConfig(n_tx=16, n_rf=1, n_users=1, n_paths=8, d_min_m=1.0, d_max_m=1.0, trials=1)
		rng = np.random.default_rng(2024)

		energies = [ np.linalg.norm(channel.generate_channel(cfg, rng).H)**2 for _ in range(10_000) ]

		self.assertAlmostEqual(np.mean(energies)/16, 1.0, delta=0.03)
