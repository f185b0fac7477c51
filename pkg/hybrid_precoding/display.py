from .metrics import MetricsRecord
from .sim import SweepResult
from .styles import _0, _b, _c, _f, _g, _o
from .utils import plural


def format_si(value:float, unit:str) -> str:
	prefixes = ((1e12, 'T'), (1e9, 'G'), (1e6, 'M'), (1e3, 'k'), (1, ''), (1e-3, 'm'), (1e-6, 'µ'), (1e-9, 'n'))
	magnitude = abs(value)
	for scale, prefix in prefixes:
		if magnitude >= scale:
			return f'{value/scale:.4g} {prefix}{unit}'
	return f'{value:.4g} {unit}'


def print_records(records:list[MetricsRecord], error_f2:float|None=None) -> None:
	"""Side-by-side table of every MetricsRecord field, one column per algorithm."""
	names = [ rec.algorithm.value for rec in records ]

	def row(label:str, values:list[str]) -> None:
		cells = ''.join(f'{v:>18}' for v in values)
		print(f'  {_o}{label:<22}{_0}{cells}')

	print(f'  {"":<22}' + ''.join(f'{_b}{name:>18}{_0}' for name in names))

	row('m used', [ str(r.m_used) for r in records ])
	num_users = len(records[0].sinr_per_user)
	for k in range(num_users):
		row(f'SINR user {k + 1}', [ f'{r.sinr_per_user[k]:.6g}' for r in records ])
	row('throughput', [ format_si(r.throughput_bps, 'bit/s') for r in records ])
	row('P PA', [ format_si(r.power.p_pa, 'W') for r in records ])
	row('P phase shifters', [ format_si(r.power.p_ps_network, 'W') for r in records ])
	row('P RF chains', [ format_si(r.power.p_rf_chains, 'W') for r in records ])
	row('P baseband', [ format_si(r.power.p_bb, 'W') for r in records ])
	row('P total', [ format_si(r.power.p_total, 'W') for r in records ])
	row('energy efficiency', [ format_si(r.ee_bps_per_w, 'bit/J') for r in records ])
	row('Λ1 flops', [ str(r.flops.lambda1) for r in records ])
	row('Λ2 flops', [ str(r.flops.lambda2) for r in records ])
	row('Λ3 flops', [ str(r.flops.lambda3) for r in records ])
	row('Φ flops', [ str(r.flops.phi) for r in records ])
	row('Δ flops', [ str(r.flops.delta) for r in records ])
	row('Ω flops', [ str(r.flops.omega) for r in records ])

	if error_f2 is not None:
		print(f'  {_o}{"‖E‖_F²":<22}{_0}{error_f2:>18.6g}')


def print_sweep(result:SweepResult) -> None:
	header = f'{result.axis_name:>8} {"m":>4} {"‖E‖_F²":>12} {"R zf":>14} {"R svdde":>14} {"EE zf":>14} {"EE svdde":>14}'
	print(f'{_b}{header}{_0}')
	for p in result.points:
		print(f'{_c}{p.axis_value:>8}{_0} {p.m_used:>4} {p.err_f2.mean:>12.5g} '
		      f'{format_si(p.thr_zf.mean, "b/s"):>14} {format_si(p.thr_svdde.mean, "b/s"):>14} '
		      f'{format_si(p.ee_zf.mean, "b/J"):>14} {format_si(p.ee_svdde.mean, "b/J"):>14}')

	if result.discarded:
		print(f'{_f}{result.discarded} rank-deficient draw{plural(result.discarded)} resampled{_0}')


def print_error_curve(m_values:list[int], errors:list[float], m_max:int|None) -> None:
	print(f'{_b}{"m":>4} {"‖E‖_F²":>14}{_0}')
	for m, err in zip(m_values, errors):
		marker = f'  {_g}◀ m_max{_0}' if m == m_max else ''
		print(f'{m:>4} {err:>14.6g}{marker}')
