import csv
import os
from os.path import dirname
from dataclasses import dataclass, field, asdict
from tempfile import mkstemp
from typing import Any, Iterable

from .config import debug
from .sim import SweepResult
from .utils import read_json, write_json, now_stamp


CSV_COLUMNS = (
	'axis', 'axis_value', 'trials',
	'err_f2_mean', 'err_f2_se',
	'thr_zf_bps', 'thr_svdde_bps',
	'ptot_zf_w', 'ptot_svdde_w',
	'ee_zf', 'ee_svdde',
	'm_used',
)

ERROR_CURVE_COLUMNS = ('m', 'err_f2')


class ResultsError(RuntimeError):
	pass


@dataclass
class RunManifest:
	"""Everything needed to regenerate a run's output files."""
	config:dict[str, Any]
	version:str
	master_seed:int
	command:str
	arguments:dict[str, Any] = field(default_factory=dict)
	outputs:list[str] = field(default_factory=list)
	timestamp:str = field(default_factory=now_stamp)

	def to_dict(self) -> dict[str, Any]:
		return asdict(self)

	@classmethod
	def from_dict(cls, data:dict[str, Any]) -> 'RunManifest':
		missing = [ key for key in ('config', 'version', 'master_seed', 'command') if key not in data ]
		if missing:
			raise ResultsError('manifest lacks %s' % ', '.join(missing))
		known = { key: data[key] for key in ('config', 'version', 'master_seed', 'command', 'arguments', 'outputs', 'timestamp') if key in data }
		return cls(**known)


def manifest_path(output_path:str) -> str:
	return output_path + '.manifest.json'


def format_float(value:float) -> str:
	# 17 significant digits round-trip every double; no locale involved
	return format(float(value), '.17g')


def _write_rows(path:str, header:Iterable[str], rows:Iterable[list[str]]) -> None:
	try:
		fd, tmp_name = mkstemp(dir=dirname(path) or '.')
	except OSError as ose:
		raise ResultsError(f'{path}: {ose.strerror}')

	try:
		with os.fdopen(fd, 'w', newline='', encoding='ascii') as fp:
			writer = csv.writer(fp, delimiter=',', lineterminator='\n')
			writer.writerow(list(header))
			writer.writerows(rows)
		os.replace(tmp_name, path)

	except OSError as ose:
		try:
			os.remove(tmp_name)
		except FileNotFoundError:
			pass
		raise ResultsError(f'{path}: {ose.strerror}')

	debug('[results] wrote %s' % path)


def emit_csv(result:SweepResult, manifest:RunManifest, path:str) -> None:
	rows = []
	for point in result.points:
		rows.append([
			result.axis_name,
			str(point.axis_value),
			str(point.trials),
			format_float(point.err_f2.mean),
			format_float(point.err_f2.se),
			format_float(point.thr_zf.mean),
			format_float(point.thr_svdde.mean),
			format_float(point.ptot_zf.mean),
			format_float(point.ptot_svdde.mean),
			format_float(point.ee_zf.mean),
			format_float(point.ee_svdde.mean),
			str(point.m_used),
		])

	_write_rows(path, CSV_COLUMNS, rows)
	manifest.outputs.append(path)


def emit_error_curve(m_values:list[int], errors:list[float], manifest:RunManifest, path:str) -> None:
	rows = [ [str(m), format_float(err)] for m, err in zip(m_values, errors) ]
	_write_rows(path, ERROR_CURVE_COLUMNS, rows)
	manifest.outputs.append(path)


def write_manifest(manifest:RunManifest, path:str) -> None:
	err = write_json(path, manifest.to_dict())
	if err is not None:
		raise ResultsError(f'{path}: {err}')
	debug('[results] wrote manifest %s' % path)


def read_manifest(path:str) -> RunManifest:
	try:
		data = read_json(path)
	except OSError as ose:
		raise ResultsError(f'{path}: {ose.strerror}')
	return RunManifest.from_dict(data)
