import csv
import os
import unittest
from tempfile import TemporaryDirectory
from os.path import join as pjoin

from hybrid_precoding import config, results
from hybrid_precoding.config import SystemConfig
from hybrid_precoding.results import RunManifest, ResultsError
from hybrid_precoding.sim import Estimate, SweepPoint, SweepResult


def read_rows(path:str) -> list[dict[str, str]]:
	with open(path, newline='', encoding='ascii') as fp:
		return list(csv.DictReader(fp))


def point(axis_value:int, scale:float=1.0) -> SweepPoint:
	return SweepPoint(
		axis_value=axis_value,
		trials=200,
		err_f2=Estimate(0.1234567890123456789*scale, 1/3),
		thr_zf=Estimate(4.2e10*scale, 1e7/7),
		thr_svdde=Estimate(4.1e10*scale, 2e7/7),
		ptot_zf=Estimate(251.3, 0.0),
		ptot_svdde=Estimate(249.871, 0.0),
		ee_zf=Estimate(1.6712e8, 1e5/3),
		ee_svdde=Estimate(1.6409e8, 2e5/3),
		m_used=7,
		discarded=0,
	)


def manifest() -> RunManifest:
	return RunManifest(config=SystemConfig().to_dict(), version='test', master_seed=0, command='sweep-users')


class TestCsv(unittest.TestCase):
	def setUp(self) -> None:
		self.tmp = TemporaryDirectory()
		self.path = pjoin(self.tmp.name, 'out.csv')

	def tearDown(self) -> None:
		self.tmp.cleanup()

	def test_single_point(self) -> None:
		result = SweepResult('n_users', (8, ), (point(8), ))
		man = manifest()

		results.emit_csv(result, man, self.path)

		with open(self.path, 'rb') as fp:
			data = fp.read()
		lines = data.split(b'\n')
		self.assertEqual(len(lines), 3)  # trailing LF
		self.assertEqual(lines[-1], b'')
		self.assertNotIn(b'\r', data)
		self.assertEqual(lines[0].decode(), ','.join(results.CSV_COLUMNS))
		self.assertEqual(man.outputs, [self.path])

	def test_round_trip(self) -> None:
		points = (point(4), point(6, 1/3), point(8, 7.0))
		result = SweepResult('n_users', (4, 6, 8), points)

		results.emit_csv(result, manifest(), self.path)
		rows = read_rows(self.path)

		self.assertEqual(len(rows), 3)
		for row, p in zip(rows, points):
			self.assertEqual(row['axis'], 'n_users')
			self.assertEqual(int(row['axis_value']), p.axis_value)
			self.assertEqual(int(row['trials']), p.trials)
			self.assertEqual(float(row['err_f2_mean']), p.err_f2.mean)
			self.assertEqual(float(row['err_f2_se']), p.err_f2.se)
			self.assertEqual(float(row['thr_zf_bps']), p.thr_zf.mean)
			self.assertEqual(float(row['thr_svdde_bps']), p.thr_svdde.mean)
			self.assertEqual(float(row['ptot_zf_w']), p.ptot_zf.mean)
			self.assertEqual(float(row['ptot_svdde_w']), p.ptot_svdde.mean)
			self.assertEqual(float(row['ee_zf']), p.ee_zf.mean)
			self.assertEqual(float(row['ee_svdde']), p.ee_svdde.mean)
			self.assertEqual(int(row['m_used']), p.m_used)

	def test_byte_identical(self) -> None:
		result = SweepResult('n_rf', (50, 70), (point(50), point(70, 0.5)))
		other = pjoin(self.tmp.name, 'again.csv')

		results.emit_csv(result, manifest(), self.path)
		results.emit_csv(result, manifest(), other)

		with open(self.path, 'rb') as a, open(other, 'rb') as b:
			self.assertEqual(a.read(), b.read())

	def test_format_float(self) -> None:
		self.assertEqual(results.format_float(0.1), '0.10000000000000001')
		self.assertEqual(results.format_float(2e9), '2000000000')
		self.assertEqual(results.format_float(1/3), '0.33333333333333331')

	def test_error_curve(self) -> None:
		man = manifest()
		results.emit_error_curve([1, 2, 3], [5.0, 1.0, 0.0], man, self.path)

		rows = read_rows(self.path)
		self.assertEqual([ (int(r['m']), float(r['err_f2'])) for r in rows ], [ (1, 5.0), (2, 1.0), (3, 0.0) ])
		self.assertEqual(man.outputs, [self.path])

	def test_unwritable(self) -> None:
		path = pjoin(self.tmp.name, 'no', 'such', 'dir', 'out.csv')
		with self.assertRaises(ResultsError) as cm:
			results.emit_csv(SweepResult('n_users', (8, ), (point(8), )), manifest(), path)
		self.assertIn(path, str(cm.exception))


class TestManifest(unittest.TestCase):
	def setUp(self) -> None:
		self.tmp = TemporaryDirectory()

	def tearDown(self) -> None:
		self.tmp.cleanup()

	def test_round_trip(self) -> None:
		out = pjoin(self.tmp.name, 'sweep.csv')
		man = manifest()
		man.arguments = { 'k-min': 4, 'rf-list': [50, 70], 'out': out }
		man.outputs.append(out)
		path = results.manifest_path(out)

		results.write_manifest(man, path)
		loaded = results.read_manifest(path)

		self.assertEqual(path, out + '.manifest.json')
		self.assertEqual(loaded, man)
		self.assertEqual(config.parse_config(overrides=loaded.config), SystemConfig(codebook_size=1024))

	def test_missing_fields(self) -> None:
		with self.assertRaises(ResultsError):
			RunManifest.from_dict({ 'config': {}, 'version': '1' })

	def test_missing_file(self) -> None:
		with self.assertRaises(ResultsError):
			results.read_manifest(pjoin(self.tmp.name, 'nothing.json'))

	def test_malformed(self) -> None:
		path = pjoin(self.tmp.name, 'bad.json')
		with open(path, 'w') as fp:
			fp.write('[1, 2')
		with self.assertRaises(ValueError):
			results.read_manifest(path)
		self.assertEqual(os.listdir(self.tmp.name), ['bad.json'])
