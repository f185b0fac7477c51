"""SINR, throughput, flop accounting, power consumption and energy efficiency.

Flop convention: complex multiply = 6, complex add = 2, so each output entry of
an n×k complex matrix-vector product costs 8k − 2.
"""
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import constants

from .config import SystemConfig, SinrForm, debug
from .channel import ChannelRealization
from .precoding import RfPrecoder, BasebandPrecoder


NOISE_TEMPERATURE_K = 290.0


class MetricsError(ValueError):
	pass


class Algorithm(str, enum.Enum):
	ZF = 'zf'
	SVDDE = 'svdde'

class FlopKind(str, enum.Enum):
	LAMBDA1 = 'lambda1'   # F_BB·s
	LAMBDA2 = 'lambda2'   # A·B·s
	LAMBDA3 = 'lambda3'   # C·R·s


@dataclass(frozen=True)
class FlopReport:
	lambda1:int
	lambda2:int
	lambda3:int
	phi:int       # extra flops per precode application vs. Λ1 (negative: saving)
	delta:int     # flops charged per precode application
	omega:int     # flops of the precoding algorithm, once per coherence block


@dataclass(frozen=True)
class PowerBreakdown:
	p_pa:float
	p_ps_network:float
	p_rf_chains:float
	p_bb:float
	p_total:float


@dataclass(frozen=True)
class MetricsRecord:
	sinr_per_user:tuple[float, ...]
	throughput_bps:float
	power:PowerBreakdown
	ee_bps_per_w:float
	flops:FlopReport
	m_used:int
	algorithm:Algorithm


def sinr_per_user(chan:ChannelRealization, rf:RfPrecoder, bb:BasebandPrecoder, noise_w:float, form:SinrForm=SinrForm.STANDARD) -> np.ndarray:
	if not noise_w > 0:
		raise MetricsError(f'noise power must be positive, got {noise_w}')
	if chan.H.shape[0] != rf.F_RF.shape[0] or rf.F_RF.shape[1] != bb.F_BB.shape[0] or bb.F_BB.shape[1] != chan.n_users:
		raise MetricsError('dimension mismatch: H %s, F_RF %s, F_BB %s' % (chan.H.shape, rf.F_RF.shape, bb.F_BB.shape))

	# q[k, i] = |h_k^H F_RF F_BB(:, i)|²
	q = np.abs(chan.H.conj().T @ (rf.F_RF @ bb.F_BB))**2
	if SinrForm(form) == SinrForm.PAPER_LITERAL:
		q = q*q

	signal = np.diag(q).copy()
	interference = q.sum(axis=1) - signal
	# the row sum minus the diagonal can go slightly negative in floating point
	interference = np.maximum(interference, 0.0)

	return signal/(noise_w + interference)


def throughput(sinrs, bandwidth_hz:float) -> float:
	sinrs = np.asarray(sinrs, dtype=np.float64)
	if np.any(sinrs < 0):
		raise MetricsError('SINR values must be non-negative')
	return bandwidth_hz*math.fsum(np.log2(1 + sinrs))


def flop_count(kind:FlopKind, n_rf:int, k:int, m:int|None=None) -> int:
	kind = FlopKind(kind)
	if kind == FlopKind.LAMBDA1:
		return 8*n_rf*k - 2*n_rf
	if kind == FlopKind.LAMBDA2:
		return 8*(n_rf*k + k*k) - 2*(n_rf + k)
	if m is None:
		raise MetricsError('lambda3 needs the truncation rank m')
	return 8*(n_rf*m + m*k) - 2*(n_rf + m)


def algorithm_flops(algorithm:Algorithm, n_rf:int, k:int, m:int) -> int:
	zf = k**3 + 9*n_rf*k**2 + 3*n_rf*k
	if Algorithm(algorithm) == Algorithm.ZF:
		return zf
	# the ZF input costs K³ of the total; the SVD another 4·N_RF²·K + 22·K³
	return 9*n_rf*k**2 + 3*n_rf*k + 4*n_rf**2*k + 23*k**3 + 2*m*n_rf


def flop_report(algorithm:Algorithm, n_rf:int, k:int, m:int) -> FlopReport:
	lambda1 = flop_count(FlopKind.LAMBDA1, n_rf, k)
	lambda2 = flop_count(FlopKind.LAMBDA2, n_rf, k)
	lambda3 = flop_count(FlopKind.LAMBDA3, n_rf, k, m)
	delta = lambda1 if Algorithm(algorithm) == Algorithm.ZF else lambda3

	return FlopReport(
		lambda1=lambda1,
		lambda2=lambda2,
		lambda3=lambda3,
		phi=delta - lambda1,
		delta=delta,
		omega=algorithm_flops(algorithm, n_rf, k, m),
	)


def noise_power(cfg:SystemConfig) -> float:
	if cfg.noise_w is not None:
		return cfg.noise_w
	return constants.k*NOISE_TEMPERATURE_K*cfg.bandwidth_hz*10**(cfg.noise_figure_db/10)


def bb_power(delta:int, omega:int, cfg:SystemConfig) -> float:
	"""Baseband power: per-symbol precoding plus the algorithm amortized over a coherence block."""
	W = cfg.bandwidth_hz
	return W*delta/cfg.l_bs_flops_per_w + W/(cfg.w_c_hz*cfg.t_c_s)*omega/cfg.l_bs_flops_per_w


def total_power(cfg:SystemConfig, p_bb:float) -> PowerBreakdown:
	p_pa = cfg.tx_power_w/cfg.pa_efficiency
	p_ps_network = cfg.n_tx*cfg.n_rf*cfg.p_ps_w
	p_rf_chains = cfg.n_rf*cfg.p_rf_w
	return PowerBreakdown(
		p_pa=p_pa,
		p_ps_network=p_ps_network,
		p_rf_chains=p_rf_chains,
		p_bb=p_bb,
		p_total=p_pa + p_ps_network + p_rf_chains + p_bb,
	)


def energy_efficiency(r_sum:float, p_total:float) -> float:
	if not p_total > 0:
		raise MetricsError(f'total power must be positive, got {p_total} W')
	return r_sum/p_total


def evaluate(algorithm:Algorithm, chan:ChannelRealization, rf:RfPrecoder, bb:BasebandPrecoder, cfg:SystemConfig, m:int) -> MetricsRecord:
	sinrs = sinr_per_user(chan, rf, bb, noise_power(cfg), cfg.sinr_form)
	r_sum = throughput(sinrs, cfg.bandwidth_hz)

	flops = flop_report(algorithm, cfg.n_rf, cfg.n_users, m)
	power = total_power(cfg, bb_power(flops.delta, flops.omega, cfg))

	debug('[metrics] %-5s m=%-3d R=%.4g bit/s  P=%.4g W' % (Algorithm(algorithm).value, m, r_sum, power.p_total))

	return MetricsRecord(
		sinr_per_user=tuple(float(s) for s in sinrs),
		throughput_bps=r_sum,
		power=power,
		ee_bps_per_w=energy_efficiency(r_sum, power.p_total),
		flops=flops,
		m_used=m,
		algorithm=Algorithm(algorithm),
	)
