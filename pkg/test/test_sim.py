import os
import random
import unittest
from unittest import mock

import numpy as np

from hybrid_precoding import linalg, metrics, sim
from hybrid_precoding.config import SystemConfig, AngleModel, ConfigError
from hybrid_precoding.precoding import RankDeficientChannel, m_max


slow_tests = bool(os.getenv('HPSIM_SLOW_TESTS'))


def small_config(**changes) -> SystemConfig:
	values = dict(n_tx=32, n_rf=8, n_users=4, n_paths=8, trials=3, master_seed=42)
	values.update(changes)
	return SystemConfig(**values)


class TestAggregate(unittest.TestCase):
	def test_single(self) -> None:
		self.assertEqual(sim.aggregate([5.0]), (5.0, 0.0))

	def test_pair(self) -> None:
		est = sim.aggregate([1.0, 3.0])
		self.assertEqual(est.mean, 2.0)
		self.assertEqual(est.se, 1.0)

	def test_permutation_invariant(self) -> None:
		values = [ v*1e3 for v in np.random.default_rng(1).standard_normal(500) ]
		shuffled = list(values)
		random.Random(3).shuffle(shuffled)

		a = sim.aggregate(values)
		b = sim.aggregate(shuffled)
		self.assertAlmostEqual(a.mean, b.mean, delta=1e-12)
		self.assertAlmostEqual(a.se, b.se, delta=1e-12)

	def test_empty(self) -> None:
		with self.assertRaises(sim.SimulationError):
			sim.aggregate([])


class TestTrial(unittest.TestCase):
	def test_seed_streams(self) -> None:
		a = sim.trial_rng(7, (1, 4), 0).standard_normal(4)
		b = sim.trial_rng(7, (1, 4), 0).standard_normal(4)
		c = sim.trial_rng(7, (1, 4), 1).standard_normal(4)
		d = sim.trial_rng(7, (1, 4), 0, attempt=1).standard_normal(4)

		np.testing.assert_array_equal(a, b)
		self.assertFalse(np.array_equal(a, c))
		self.assertFalse(np.array_equal(a, d))

	def test_deterministic(self) -> None:
		cfg = small_config()
		self.assertEqual(sim.run_trial(cfg, 5), sim.run_trial(cfg, 5))

	def test_full_rank_matches_zf(self) -> None:
		cfg = small_config(m_override=4)
		for idx in range(3):
			result = sim.run_trial(cfg, idx)
			self.assertAlmostEqual(result.error_f2, 0.0, delta=1e-20)
			self.assertAlmostEqual(result.svdde.throughput_bps/result.zf.throughput_bps, 1.0, delta=1e-9)

	def test_truncated_flops_within_budget(self) -> None:
		cfg = small_config()
		for idx in range(3):
			result = sim.run_trial(cfg, idx)
			self.assertEqual(result.svdde.m_used, m_max(8, 4))
			self.assertLessEqual(result.svdde.flops.lambda3, result.svdde.flops.lambda1)
			self.assertGreater(result.error_f2, 0.0)

	def test_resampling(self) -> None:
		real_build = sim.build_precoders
		calls = []

		def flaky_build(cfg, rng, m):
			calls.append(m)
			if len(calls) <= 2:
				raise RankDeficientChannel('rank-deficient equivalent channel (test)')
			return real_build(cfg, rng, m)

		with mock.patch('hybrid_precoding.sim.build_precoders', side_effect=flaky_build):
			result = sim.run_trial(small_config(), 0)

		self.assertEqual(result.discarded, 2)
		self.assertEqual(len(calls), 3)

	def test_retry_budget(self) -> None:
		always = RankDeficientChannel('rank-deficient equivalent channel (test)')
		with mock.patch('hybrid_precoding.sim.build_precoders', side_effect=always) as build:
			with self.assertRaises(sim.SimulationError):
				sim.run_trial(small_config(), 0)
		self.assertEqual(build.call_count, sim.RETRY_BUDGET + 1)


class TestDefaultScenario(unittest.TestCase):
	def test_nulling_and_power(self) -> None:
		cfg = SystemConfig(n_users=8, master_seed=2024)
		for idx in range(200):
			pre, _ = sim.draw_precoders(cfg, idx)

			M = np.abs(pre.chan.H.conj().T @ pre.rf.F_RF @ pre.zf.F_BB)
			for k in range(8):
				self.assertTrue(np.all(np.delete(M[k], k) <= 1e-9*M[k, k]), f'trial {idx}, user {k}')

			for bb in (pre.zf, pre.svdde):
				power = np.linalg.norm(pre.rf.F_RF @ bb.F_BB)**2
				self.assertAlmostEqual(power/cfg.tx_power_w, 1.0, delta=1e-10)


class TestTruncatedEffectiveChannel(unittest.TestCase):
	def test_projected_zero_forcing(self) -> None:
		cfg = small_config(n_tx=64, n_rf=12, n_users=8, n_paths=4, angle_model=AngleModel.PER_USER)
		m = m_max(12, 8)
		noise = metrics.noise_power(cfg)

		for idx in range(5):
			pre, _ = sim.draw_precoders(cfg, idx)
			HF = pre.chan.H.conj().T @ pre.rf.F_RF
			E_zf = HF @ pre.zf.F_BB
			E_svdde = HF @ pre.svdde.F_BB

			V = linalg.thin_svd(pre.zf.F_BB).V[:, :m]
			P = V @ V.conj().T
			self.assertAlmostEqual(np.trace(P).real, m, delta=1e-10)
			# rows of a projector: Σ_i |P_ki|² = P_kk
			np.testing.assert_allclose(np.sum(np.abs(P)**2, axis=1), np.diag(P).real, rtol=0, atol=1e-10)

			alpha = np.linalg.norm(pre.svdde.F_BB)/np.linalg.norm(pre.zf.F_BB @ P)
			expected = alpha*E_zf @ P
			np.testing.assert_allclose(E_svdde, expected, rtol=0, atol=1e-9*np.abs(expected).max())

			# each user's SINR is capped by its share P_kk of the projection
			sinr = metrics.sinr_per_user(pre.chan, pre.rf, pre.svdde, noise)
			for k, p in enumerate(np.diag(P).real):
				self.assertLessEqual(sinr[k]*(1 - p), p*(1 + 1e-6) + 1e-12, f'trial {idx}, user {k}')


class TestRunTrials(unittest.TestCase):
	def test_jobs_independent(self) -> None:
		cfg = small_config(trials=6)
		self.assertEqual(sim.run_trials(cfg, (1, 4), jobs=1), sim.run_trials(cfg, (1, 4), jobs=3))

	def test_progress(self) -> None:
		seen = []
		sim.run_trials(small_config(trials=4), jobs=2, progress=lambda done, total: seen.append((done, total)))
		self.assertEqual(seen, [ (n, 4) for n in range(1, 5) ])


class TestSweeps(unittest.TestCase):
	def test_single_user_point(self) -> None:
		cfg = small_config(trials=1)
		result = sim.sweep_users(cfg, [2])

		self.assertEqual(result.axis_name, 'n_users')
		self.assertEqual(result.axis_values, (2, ))
		self.assertEqual(len(result.points), 1)

		trial = sim.run_trial(cfg.replace(n_users=2), 0, (int(sim.Axis.USERS), 2))
		point = result.points[0]
		self.assertEqual(point.trials, 1)
		self.assertEqual(point.thr_zf, (trial.zf.throughput_bps, 0.0))
		self.assertEqual(point.ee_svdde, (trial.svdde.ee_bps_per_w, 0.0))
		self.assertEqual(point.err_f2, (trial.error_f2, 0.0))

	def test_users_range_checked(self) -> None:
		with self.assertRaises(ConfigError):
			sim.sweep_users(small_config(), [2, 9])
		with self.assertRaises(ConfigError):
			sim.sweep_users(small_config(), [1])

	def test_rf_chains(self) -> None:
		cfg = small_config(trials=2)
		result = sim.sweep_rf_chains(cfg, [4, 6, 8])

		self.assertEqual(result.axis_name, 'n_rf')
		self.assertEqual([ p.m_used for p in result.points ], [ m_max(n, 4) for n in (4, 6, 8) ])
		self.assertEqual(result.discarded, sum(p.discarded for p in result.points))

	def test_rf_single_value(self) -> None:
		cfg = small_config(trials=2)
		result = sim.sweep_rf_chains(cfg, [8])
		trials = [ sim.run_trial(cfg, idx, (int(sim.Axis.RF_CHAINS), 8)) for idx in range(2) ]
		self.assertEqual(result.points[0].thr_svdde, sim.aggregate([ t.svdde.throughput_bps for t in trials ]))

	def test_rf_chains_range_checked(self) -> None:
		with self.assertRaises(ConfigError):
			sim.sweep_rf_chains(small_config(), [3])
		with self.assertRaises(ConfigError):
			sim.sweep_rf_chains(small_config(), [33])


@unittest.skipUnless(slow_tests, 'set HPSIM_SLOW_TESTS to run the trend reproductions')
class TestUserSweepTrends(unittest.TestCase):
	k_values = list(range(4, 41, 2))

	@classmethod
	def setUpClass(cls) -> None:
		cfg = SystemConfig(angle_model=AngleModel.PER_USER, trials=200, master_seed=1)
		jobs = os.cpu_count() or 1
		cls.curves = { n_rf: sim.sweep_users(cfg.replace(n_rf=n_rf), cls.k_values, jobs=jobs) for n_rf in (50, 70) }

	def _means(self, n_rf:int, attr:str) -> list[float]:
		return [ getattr(p, attr).mean for p in self.curves[n_rf].points ]

	def test_error_has_interior_minimum(self) -> None:
		for n_rf in (50, 70):
			errors = self._means(n_rf, 'err_f2')
			smoothed = np.convolve(errors, np.ones(3)/3, mode='valid')
			best = int(np.argmin(smoothed))
			self.assertGreater(best, 0)
			self.assertLess(best, len(smoothed) - 1)
			self.assertTrue(12 <= self.k_values[best + 1] <= 30, f'N_RF = {n_rf}: minimum at K = {self.k_values[best + 1]}')

	def _gaps(self, n_rf:int, attr:str) -> dict[int, float]:
		zf = self._means(n_rf, f'{attr}_zf')
		svdde = self._means(n_rf, f'{attr}_svdde')
		for k, s, z in zip(self.k_values, svdde, zf):
			self.assertLessEqual(s, z, f'N_RF = {n_rf}, K = {k}')
		return { k: (z - s)/z for k, z, s in zip(self.k_values, zf, svdde) }

	def test_throughput_gap_widens(self) -> None:
		# m_max/K falls with K, so the truncated precoder keeps a smaller share of each user's signal
		for n_rf in (50, 70):
			self.assertLess(m_max(n_rf, 32)/32, m_max(n_rf, 8)/8)
			gap = self._gaps(n_rf, 'thr')
			self.assertGreater(gap[32], gap[8], f'N_RF = {n_rf}')

	def test_energy_efficiency_trend(self) -> None:
		for n_rf in (50, 70):
			gap = self._gaps(n_rf, 'ee')
			self.assertGreater(gap[32], gap[8], f'N_RF = {n_rf}')

			svdde = dict(zip(self.k_values, self._means(n_rf, 'ee_svdde')))
			self.assertGreater(svdde[16], svdde[32], f'N_RF = {n_rf}')
			self.assertGreater(svdde[16], svdde[40], f'N_RF = {n_rf}')
