"""RF beam selection, equivalent zero-forcing and the truncated-SVD baseband split.

The baseband precoder F_BB (N_RF×K) is factored as C·R with C = [σ_1 u_1 … σ_m u_m]
and R = [v_1 … v_m]^H, so that applying it costs Λ3(m) instead of Λ1 flops.
"""
import math
from dataclasses import dataclass

import numpy as np

from .config import Normalization, debug
from .channel import ArrayGeometry, ChannelRealization, steering_matrix
from .linalg import IllConditionedError, ThinSvd, as_matrix, solve_hermitian, thin_svd


class PrecodingError(ValueError):
	pass

class RankDeficientChannel(PrecodingError):
	pass

class NoAdmissibleRank(PrecodingError):
	pass


@dataclass(frozen=True)
class RfPrecoder:
	F_RF:np.ndarray              # N_T×N_RF, constant modulus 1/√N_T
	selected_angles:np.ndarray   # N_RF radians, in selection order
	codebook_size:int

	@property
	def n_rf(self) -> int:
		return self.F_RF.shape[1]


@dataclass(frozen=True)
class BasebandPrecoder:
	F_BB:np.ndarray              # N_RF×K
	normalization:Normalization
	tx_power_w:float


@dataclass(frozen=True)
class SvddeFactors:
	C:np.ndarray                 # N_RF×m
	R:np.ndarray                 # m×K
	m:int
	error_f2:float               # ‖F_BB_opt − C·R‖_F²

	def product(self) -> np.ndarray:
		return self.C @ self.R


def codebook_angles(size:int) -> np.ndarray:
	"""Angles whose sines are uniformly spaced on [-1, 1)."""
	if size < 1:
		raise PrecodingError(f'codebook needs at least one entry, got {size}')
	return np.arcsin(-1 + 2*np.arange(size)/size)


def select_rf_precoder(chan:ChannelRealization, geom:ArrayGeometry, n_rf:int, codebook_size:int) -> RfPrecoder:
	"""Pick the n_rf codebook beams with the largest aggregate user correlation Σ_k |a(θ)^H h_k|²."""
	K = chan.n_users
	if n_rf > codebook_size:
		raise PrecodingError(f'cannot select {n_rf} RF beams from a codebook of {codebook_size}')
	if n_rf < K:
		raise PrecodingError(f'need at least K = {K} RF chains, got {n_rf}')

	angles = codebook_angles(codebook_size)
	codebook = steering_matrix(angles, geom)

	correlation = np.abs(codebook.conj().T @ chan.H)**2
	score = correlation.sum(axis=1)

	# greedy pick among the unselected beams; the score does not depend on earlier picks,
	# so this is a stable descending sort (ties keep codebook order)
	selected = np.argsort(-score, kind='stable')[:n_rf]

	debug('[precoding] RF beams: best score %.3g, worst selected %.3g' % (score[selected[0]], score[selected[-1]]))

	return RfPrecoder(codebook[:, selected], angles[selected], codebook_size)


def equivalent_channel(chan:ChannelRealization, rf:RfPrecoder) -> np.ndarray:
	if chan.H.shape[0] != rf.F_RF.shape[0]:
		raise PrecodingError(f'channel has {chan.H.shape[0]} antennas, RF precoder {rf.F_RF.shape[0]}')
	return chan.H.conj().T @ rf.F_RF


def normalize_baseband(F_BB:np.ndarray, rf:RfPrecoder, p_t:float, normalization:Normalization) -> BasebandPrecoder:
	"""Scale F_BB so ‖F_RF F_BB‖_F² = P_T (power_exact) or ‖F_BB‖_F = 1 (paper_literal)."""
	if normalization == Normalization.PAPER_LITERAL:
		scale = 1/np.linalg.norm(F_BB)
	else:
		scale = math.sqrt(p_t)/np.linalg.norm(rf.F_RF @ F_BB)
	return BasebandPrecoder(F_BB*scale, Normalization(normalization), p_t)


def zf_baseband(H_eq, rf:RfPrecoder, p_t:float, normalization:Normalization=Normalization.POWER_EXACT) -> BasebandPrecoder:
	"""Equivalent ZF: F_BB = H_eq^H (H_eq H_eq^H)^{-1} D, D giving every user P_T/K."""
	H_eq = as_matrix(H_eq, 'H_eq')
	K, n_rf = H_eq.shape
	if n_rf != rf.n_rf:
		raise PrecodingError(f'H_eq has {n_rf} columns, RF precoder has {rf.n_rf} chains')
	if K > n_rf:
		raise RankDeficientChannel(f'rank-deficient equivalent channel: {K} users > {n_rf} RF chains')

	# row equilibration is a diagonal factor that D absorbs
	row_norms = np.linalg.norm(H_eq, axis=1)
	if np.any(row_norms == 0):
		raise RankDeficientChannel('rank-deficient equivalent channel: a user has a zero equivalent channel')
	H_unit = H_eq/row_norms.reshape(-1, 1)

	gram = H_unit @ H_unit.conj().T
	gram = (gram + gram.conj().T)/2
	try:
		X = solve_hermitian(gram, np.eye(K))
	except IllConditionedError as ice:
		raise RankDeficientChannel(f'rank-deficient equivalent channel ({ice})')

	W = H_unit.conj().T @ X

	column_norms = np.linalg.norm(rf.F_RF @ W, axis=0)
	D = math.sqrt(p_t/K)/column_norms
	F_BB = W*D.reshape(1, -1)

	return normalize_baseband(F_BB, rf, p_t, normalization)


def m_max(n_rf:int, k:int) -> int:
	"""Largest m with Λ3(m) ≤ Λ1, i.e. floor(N_RF·K / (N_RF + K − 1/4))."""
	if k < 1 or n_rf < k:
		raise PrecodingError(f'need 1 ≤ K ≤ N_RF, got K = {k}, N_RF = {n_rf}')

	# exact: N_RF·K/(N_RF + K − 1/4) = 4·N_RF·K/(4·N_RF + 4·K − 1)
	m = (4*n_rf*k)//(4*n_rf + 4*k - 1)
	if m < 1:
		raise NoAdmissibleRank(f'no admissible truncation rank for N_RF = {n_rf}, K = {k}')
	return m


def _check_rank(m:int, k:int) -> None:
	if not 1 <= m <= k:
		raise PrecodingError(f'truncation rank m = {m} outside [1, {k}]')


def svdde(F_BB_opt, m:int, rf:RfPrecoder, p_t:float, normalization:Normalization=Normalization.POWER_EXACT, svd:ThinSvd|None=None) -> tuple[SvddeFactors, BasebandPrecoder]:
	"""Truncated-SVD split of F_BB_opt into C (N_RF×m) and R (m×K), and the renormalized C·R."""
	F = as_matrix(F_BB_opt, 'F_BB_opt')
	_check_rank(m, F.shape[1])

	if svd is None:
		svd = thin_svd(F)

	C = svd.U[:, :m]*svd.singular_values[:m]
	R = svd.V[:, :m].conj().T
	factors = SvddeFactors(C, R, m, svd.tail_energy(m))

	return factors, normalize_baseband(factors.product(), rf, p_t, normalization)


def decomposition_error_curve(F_BB_opt, m_values) -> list[float]:
	"""‖F_BB_opt − C·R‖_F² for every m, from one SVD."""
	F = as_matrix(F_BB_opt, 'F_BB_opt')
	for m in m_values:
		_check_rank(m, F.shape[1])

	svd = thin_svd(F)
	return [ svd.tail_energy(m) for m in m_values ]
