"""Monte-Carlo harness: one trial is channel → RF beams → ZF → SVDDE → metrics.

Every trial draws from its own random stream, derived from the master seed and
the trial's coordinates (sweep axis, axis value, trial index, resampling attempt),
so results do not depend on execution order or on the number of workers.
"""
import math
import enum
import concurrent.futures as futures
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .config import SystemConfig, ConfigError, debug
from .channel import ArrayGeometry, ChannelRealization, generate_channel
from .precoding import RfPrecoder, BasebandPrecoder, SvddeFactors, RankDeficientChannel, \
	select_rf_precoder, equivalent_channel, zf_baseband, svdde, m_max
from .metrics import Algorithm, MetricsRecord, evaluate


RETRY_BUDGET = 16


class SimulationError(RuntimeError):
	pass


class Axis(enum.IntEnum):
	# part of the per-trial seed derivation; values must stay stable
	NONE = 0
	USERS = 1
	RF_CHAINS = 2

	@property
	def label(self) -> str:
		return { Axis.NONE: 'none', Axis.USERS: 'n_users', Axis.RF_CHAINS: 'n_rf' }[self]


class Estimate(NamedTuple):
	mean:float
	se:float


@dataclass(frozen=True)
class Precoders:
	chan:ChannelRealization
	rf:RfPrecoder
	zf:BasebandPrecoder
	factors:SvddeFactors
	svdde:BasebandPrecoder


@dataclass(frozen=True)
class TrialResult:
	zf:MetricsRecord
	svdde:MetricsRecord
	error_f2:float
	discarded:int      # rank-deficient draws that were resampled


@dataclass(frozen=True)
class SweepPoint:
	axis_value:int
	trials:int
	err_f2:Estimate
	thr_zf:Estimate
	thr_svdde:Estimate
	ptot_zf:Estimate
	ptot_svdde:Estimate
	ee_zf:Estimate
	ee_svdde:Estimate
	m_used:int
	discarded:int


@dataclass(frozen=True)
class SweepResult:
	axis_name:str
	axis_values:tuple[int, ...]
	points:tuple[SweepPoint, ...]

	@property
	def discarded(self) -> int:
		return sum(point.discarded for point in self.points)


def trial_rng(master_seed:int, stream:Sequence[int], trial_index:int, attempt:int=0) -> np.random.Generator:
	seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(*stream, trial_index, attempt))
	return np.random.default_rng(seq)


def truncation_rank(cfg:SystemConfig) -> int:
	if cfg.m_override is not None:
		return cfg.m_override
	return m_max(cfg.n_rf, cfg.n_users)


def build_precoders(cfg:SystemConfig, rng:np.random.Generator, m:int) -> Precoders:
	"""One channel draw and both precoders; raises RankDeficientChannel for an unusable draw."""
	geom = ArrayGeometry.from_config(cfg)

	chan = generate_channel(cfg, rng)
	rf = select_rf_precoder(chan, geom, cfg.n_rf, cfg.codebook_entries)
	H_eq = equivalent_channel(chan, rf)

	zf = zf_baseband(H_eq, rf, cfg.tx_power_w, cfg.normalization)
	factors, truncated = svdde(zf.F_BB, m, rf, cfg.tx_power_w, cfg.normalization)

	return Precoders(chan, rf, zf, factors, truncated)


def draw_precoders(cfg:SystemConfig, trial_index:int, stream:Sequence[int]=(), m:int|None=None) -> tuple[Precoders, int]:
	"""Precoders of one trial, resampling rank-deficient draws; returns them with the number of discarded draws."""
	if m is None:
		m = truncation_rank(cfg)

	for attempt in range(RETRY_BUDGET + 1):
		rng = trial_rng(cfg.master_seed, stream, trial_index, attempt)
		try:
			return build_precoders(cfg, rng, m), attempt
		except RankDeficientChannel as rdc:
			debug('[sim] trial %d%s attempt %d resampled: %s' % (trial_index, list(stream), attempt, rdc))

	raise SimulationError(f'trial {trial_index}: equivalent channel rank-deficient in {RETRY_BUDGET + 1} draws')


def run_trial(cfg:SystemConfig, trial_index:int, stream:Sequence[int]=()) -> TrialResult:
	m = truncation_rank(cfg)
	pre, attempt = draw_precoders(cfg, trial_index, stream, m)

	zf = evaluate(Algorithm.ZF, pre.chan, pre.rf, pre.zf, cfg, cfg.n_users)
	truncated = evaluate(Algorithm.SVDDE, pre.chan, pre.rf, pre.svdde, cfg, m)

	return TrialResult(zf, truncated, pre.factors.error_f2, attempt)


def aggregate(values:Sequence[float]) -> Estimate:
	"""Mean and standard error (sample stddev/√n); order-independent via exactly rounded sums."""
	n = len(values)
	if n == 0:
		raise SimulationError('cannot aggregate an empty list')

	mean = math.fsum(values)/n
	if n == 1:
		return Estimate(mean, 0.0)

	variance = math.fsum((v - mean)**2 for v in values)/(n - 1)
	return Estimate(mean, math.sqrt(variance/n))


ProgressCallback = Callable[[int, int], None]   # (completed, total)

def run_trials(cfg:SystemConfig, stream:Sequence[int]=(), jobs:int=1, progress:ProgressCallback|None=None) -> list[TrialResult]:
	"""All cfg.trials trials of one point, in trial order whatever 'jobs' is."""
	if jobs <= 1:
		results = []
		for idx in range(cfg.trials):
			results.append(run_trial(cfg, idx, stream))
			if progress:
				progress(idx + 1, cfg.trials)
		return results

	with futures.ThreadPoolExecutor(max_workers=jobs, thread_name_prefix='hpsim-trial') as executor:
		promises = [
			executor.submit(run_trial, cfg, idx, stream)
			for idx in range(cfg.trials)
		]
		for completed, _ in enumerate(futures.as_completed(promises), start=1):
			if progress:
				progress(completed, cfg.trials)

	return [ p.result() for p in promises ]


def summarize(axis_value:int, results:list[TrialResult]) -> SweepPoint:
	def est(values) -> Estimate:
		return aggregate(list(values))

	m_values = { r.svdde.m_used for r in results }
	if len(m_values) != 1:
		raise SimulationError(f'inconsistent truncation ranks {sorted(m_values)} at {axis_value}')

	return SweepPoint(
		axis_value=axis_value,
		trials=len(results),
		err_f2=est(r.error_f2 for r in results),
		thr_zf=est(r.zf.throughput_bps for r in results),
		thr_svdde=est(r.svdde.throughput_bps for r in results),
		ptot_zf=est(r.zf.power.p_total for r in results),
		ptot_svdde=est(r.svdde.power.p_total for r in results),
		ee_zf=est(r.zf.ee_bps_per_w for r in results),
		ee_svdde=est(r.svdde.ee_bps_per_w for r in results),
		m_used=m_values.pop(),
		discarded=sum(r.discarded for r in results),
	)


def _sweep(cfg:SystemConfig, axis:Axis, points:list[tuple[int, SystemConfig]], jobs:int, progress:ProgressCallback|None) -> SweepResult:
	total = len(points)*cfg.trials
	done_before = 0

	summaries = []
	for value, point_cfg in points:
		def point_progress(completed:int, _total:int, offset=done_before) -> None:
			if progress:
				progress(offset + completed, total)

		results = run_trials(point_cfg, (int(axis), value), jobs=jobs, progress=point_progress)
		summary = summarize(value, results)
		debug('[sim] %s = %d: m = %d, %d discarded' % (axis.label, value, summary.m_used, summary.discarded))
		summaries.append(summary)
		done_before += point_cfg.trials

	return SweepResult(axis.label, tuple(v for v, _ in points), tuple(summaries))


def sweep_users(cfg:SystemConfig, k_values:Sequence[int], jobs:int=1, progress:ProgressCallback|None=None) -> SweepResult:
	points = []
	for k in k_values:
		if not 2 <= k <= cfg.n_rf:
			raise ConfigError(f'violated invariant "2 ≤ K ≤ N_RF": K = {k}, n_rf = {cfg.n_rf}')
		points.append((int(k), cfg.replace(n_users=int(k))))
	return _sweep(cfg, Axis.USERS, points, jobs, progress)


def sweep_rf_chains(cfg:SystemConfig, n_rf_values:Sequence[int], jobs:int=1, progress:ProgressCallback|None=None) -> SweepResult:
	points = []
	for n_rf in n_rf_values:
		if not cfg.n_users <= n_rf <= cfg.n_tx:
			raise ConfigError(f'violated invariant "K ≤ N_RF ≤ N_T": n_rf = {n_rf}, K = {cfg.n_users}, n_tx = {cfg.n_tx}')
		points.append((int(n_rf), cfg.replace(n_rf=int(n_rf))))
	return _sweep(cfg, Axis.RF_CHAINS, points, jobs, progress)
