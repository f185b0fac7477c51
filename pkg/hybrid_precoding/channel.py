"""Saleh-Valenzuela multipath channels seen from a uniform linear array.

Column k of H is

	h_k = sqrt(N_T ξ_k / L) Σ_l g_l^k a(θ_l)

with ξ_k = d_k^(-α) and a(θ) the unit-norm ULA response.
"""
import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, AngleModel, debug


class ChannelError(ValueError):
	pass


@dataclass(frozen=True)
class ArrayGeometry:
	n_tx:int
	spacing_wavelengths:float = 0.5
	wavelength_m:float = 1.0

	def __post_init__(self):
		if self.n_tx < 1:
			raise ChannelError(f'array needs at least one antenna, got n_tx = {self.n_tx}')
		if not self.spacing_wavelengths > 0:
			raise ChannelError(f'antenna spacing must be positive, got {self.spacing_wavelengths}')

	@classmethod
	def from_config(cls, cfg:SystemConfig) -> 'ArrayGeometry':
		return cls(cfg.n_tx, cfg.spacing_wavelengths, cfg.wavelength_m)


@dataclass(frozen=True)
class ChannelRealization:
	H:np.ndarray                # N_T×K, column k is h_k
	path_angles:np.ndarray      # K×L radians (rows equal under the shared angle model)
	path_gains:np.ndarray       # K×L complex
	distances_m:np.ndarray      # K
	large_scale:np.ndarray      # K, ξ_k

	@property
	def n_users(self) -> int:
		return self.H.shape[1]

	@property
	def n_paths(self) -> int:
		return self.path_gains.shape[1]

	def reassemble(self, geom:ArrayGeometry) -> np.ndarray:
		return assemble_channel(self.path_angles, self.path_gains, self.large_scale, geom)


def steering_matrix(thetas, geom:ArrayGeometry) -> np.ndarray:
	"""N_T×len(thetas) matrix whose columns are a(θ)."""
	thetas = np.atleast_1d(np.asarray(thetas, dtype=np.float64))
	p = np.arange(geom.n_tx).reshape(-1, 1)
	phase = 2*np.pi*geom.spacing_wavelengths*np.sin(thetas).reshape(1, -1)
	return np.exp(1j*p*phase)/math.sqrt(geom.n_tx)


def array_response(theta:float, geom:ArrayGeometry) -> np.ndarray:
	"""ULA response a(θ) as an N_T×1 column; entry p is exp(j·p·2π·(d/λ)·sin θ)/√N_T."""
	return steering_matrix([theta], geom)


def large_scale_fading(d:float, alpha:float) -> float:
	if not d > 0:
		raise ChannelError(f'distance must be positive, got {d} m')
	return d**(-alpha)


def assemble_channel(path_angles, path_gains, large_scale, geom:ArrayGeometry) -> np.ndarray:
	"""H (N_T×K) from per-user path angles (K×L or L), gains (K×L) and ξ (K)."""
	gains = np.atleast_2d(np.asarray(path_gains, dtype=np.complex128))
	K, L = gains.shape
	angles = np.asarray(path_angles, dtype=np.float64)
	if angles.ndim == 1:
		angles = np.broadcast_to(angles, (K, L))
	xi = np.asarray(large_scale, dtype=np.float64).reshape(K)

	H = np.empty((geom.n_tx, K), dtype=np.complex128)
	for k in range(K):
		A = steering_matrix(angles[k], geom)
		H[:, k] = math.sqrt(geom.n_tx*xi[k]/L)*(A @ gains[k])
	return H


def generate_channel(cfg:SystemConfig, rng:np.random.Generator) -> ChannelRealization:
	cfg.validate()

	K = cfg.n_users
	L = cfg.n_paths
	geom = ArrayGeometry.from_config(cfg)

	if cfg.angle_model == AngleModel.SHARED:
		angles = np.tile(rng.uniform(-np.pi/2, np.pi/2, size=L), (K, 1))
	else:
		angles = rng.uniform(-np.pi/2, np.pi/2, size=(K, L))

	sigma = np.sqrt(np.asarray(cfg.path_gain_variances)/2)
	gains = (rng.standard_normal((K, L)) + 1j*rng.standard_normal((K, L)))*sigma

	distances = rng.uniform(cfg.d_min_m, cfg.d_max_m, size=K)
	xi = np.array([large_scale_fading(d, cfg.path_loss_exp) for d in distances])

	H = assemble_channel(angles, gains, xi, geom)
	debug('[channel] K=%d L=%d %s  ξ ∈ [%.3g, %.3g]' % (K, L, cfg.angle_model.value, xi.min(), xi.max()))

	return ChannelRealization(H, angles, gains, distances, xi)
