"""Dense complex linear algebra used by the precoders.

Matrices are plain 2-D numpy arrays (complex128); the helpers here only add the
checks and conventions the rest of the package relies on.
"""
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .config import debug


SVD_TOLERANCE = 1e-10
HERMITIAN_TOLERANCE = 1e-12
MAX_CONDITION = 1e12


class LinalgError(ValueError):
	pass

class IllConditionedError(LinalgError):
	pass


class ThinSvd(NamedTuple):
	"""Economy SVD A = U·diag(σ)·V^H of an n×k matrix (n ≥ k).

	Note that V (k×k) is stored, not V^H.
	"""
	U:np.ndarray
	singular_values:np.ndarray
	V:np.ndarray

	def reconstruct(self, rank:int|None=None) -> np.ndarray:
		r = len(self.singular_values) if rank is None else rank
		return (self.U[:, :r]*self.singular_values[:r]) @ self.V[:, :r].conj().T

	def tail_energy(self, rank:int) -> float:
		"""Σ_{i>rank} σ_i², the squared Frobenius error of the best rank-'rank' approximation."""
		tail = self.singular_values[rank:]
		return float(np.sum(tail*tail))


def as_matrix(a, name:str='matrix') -> np.ndarray:
	"""Return 'a' as a finite 2-D complex128 array."""
	m = np.asarray(a, dtype=np.complex128)
	if m.ndim == 1:
		m = m.reshape(-1, 1)
	if m.ndim != 2 or 0 in m.shape:
		raise LinalgError(f'{name}: expected a non-empty 2-D matrix, got shape {m.shape}')
	if not np.all(np.isfinite(m)):
		raise LinalgError(f'{name}: non-finite entries (NaN/Inf)')
	return m


def thin_svd(a) -> ThinSvd:
	A = as_matrix(a, 'thin_svd input')
	n, k = A.shape
	if n < k:
		raise LinalgError(f'thin_svd: needs rows ≥ cols, got {n}×{k}')

	U, s, Vh = scipy.linalg.svd(A, full_matrices=False, lapack_driver='gesdd')

	# LAPACK returns them sorted already; enforce it since truncation depends on it
	order = np.argsort(-s, kind='stable')
	if np.any(order != np.arange(k)):
		U, s, Vh = U[:, order], s[order], Vh[order, :]

	return ThinSvd(U, s, Vh.conj().T)


def solve_hermitian(g, b) -> np.ndarray:
	"""Solve G·X = B for Hermitian positive-definite G (Cholesky)."""
	G = as_matrix(g, 'G')
	B = as_matrix(b, 'B')

	k = G.shape[0]
	if G.shape != (k, k):
		raise LinalgError(f'solve_hermitian: G must be square, got {G.shape[0]}×{G.shape[1]}')
	if B.shape[0] != k:
		raise LinalgError(f'solve_hermitian: B has {B.shape[0]} rows, G is {k}×{k}')

	scale = max(1.0, float(np.linalg.norm(G)))
	if np.linalg.norm(G - G.conj().T) > HERMITIAN_TOLERANCE*scale:
		raise LinalgError('solve_hermitian: G is not Hermitian')

	cond = np.linalg.cond(G)
	if not np.isfinite(cond) or cond > MAX_CONDITION:
		debug('[linalg] condition estimate %.3g > %.0e' % (cond, MAX_CONDITION))
		raise IllConditionedError('ill-conditioned equivalent channel (condition estimate %.3g)' % cond)

	try:
		factor = scipy.linalg.cho_factor(G, lower=True, check_finite=False)
	except np.linalg.LinAlgError:
		raise IllConditionedError('ill-conditioned equivalent channel (not positive-definite)')

	return scipy.linalg.cho_solve(factor, B, check_finite=False)
