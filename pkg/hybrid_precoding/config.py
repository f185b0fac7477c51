import enum
import os
import math
import dataclasses
from dataclasses import dataclass
from os.path import join as pjoin, expanduser, expandvars
from typing import Any, Callable

from scipy import constants


env_config_path = 'HPSIM_CONFIG'
env_debug = 'HPSIM_DEBUG'

user_cache_home = os.getenv('XDG_CACHE_HOME') or expanduser(expandvars(pjoin('$HOME', '.cache')))

if os.getenv(env_debug):
	_debug_log = pjoin(user_cache_home, 'hybrid_precoding', 'debug.log')
	os.makedirs(pjoin(user_cache_home, 'hybrid_precoding'), exist_ok=True)
	_debug_fp = open(_debug_log, 'a')
	def debug(*args, **kw):
		print(*args, **kw, file=_debug_fp, flush=True)
else:
	def debug(*_, **__):
		pass


class ConfigError(ValueError):
	pass


class AngleModel(str, enum.Enum):
	SHARED = 'shared'
	PER_USER = 'per_user'

class Normalization(str, enum.Enum):
	POWER_EXACT = 'power_exact'
	PAPER_LITERAL = 'paper_literal'

class SinrForm(str, enum.Enum):
	STANDARD = 'standard'
	PAPER_LITERAL = 'paper_literal'


CODEBOOK_OVERSAMPLING = 4
MAX_SEED = 2**64


@dataclass(frozen=True)
class SystemConfig:
	"""Scenario, hardware-power and algorithm parameters of one simulation point.

	Defaults are the 28 GHz, 256-antenna, 60-RF-chain scenario with the usual
	mmWave power figures (PA efficiency 38 %, 12 mW per phase shifter, 57 mW per
	RF chain). Construction validates every range; invalid combinations raise
	ConfigError naming the violated invariant.
	"""
	n_tx:int = 256
	n_rf:int = 60
	n_users:int = 8
	n_paths:int = 20
	carrier_hz:float = 28e9
	bandwidth_hz:float = 1e9
	spacing_wavelengths:float = 0.5
	tx_power_w:float = 5.0
	path_loss_exp:float = 4.6
	path_gain_var:tuple[float, ...] = (1.0,)
	d_min_m:float = 20.0
	d_max_m:float = 100.0
	angle_model:AngleModel = AngleModel.SHARED
	noise_figure_db:float = 9.0
	noise_w:float|None = None           # None: thermal noise from bandwidth and noise figure
	pa_efficiency:float = 0.38
	p_ps_w:float = 0.012
	p_rf_w:float = 0.057
	l_bs_flops_per_w:float = 12.8e9
	w_c_hz:float = 100e6
	t_c_s:float = 35e-6
	codebook_size:int|None = None       # None: CODEBOOK_OVERSAMPLING * n_tx
	m_override:int|None = None
	normalization:Normalization = Normalization.POWER_EXACT
	sinr_form:SinrForm = SinrForm.STANDARD
	trials:int = 200
	master_seed:int = 0

	def __post_init__(self):
		self.validate()

	@property
	def wavelength_m(self) -> float:
		return constants.c / self.carrier_hz

	@property
	def codebook_entries(self) -> int:
		if self.codebook_size is None:
			return CODEBOOK_OVERSAMPLING*self.n_tx
		return self.codebook_size

	@property
	def path_gain_variances(self) -> tuple[float, ...]:
		if len(self.path_gain_var) == 1:
			return self.path_gain_var*self.n_paths
		return self.path_gain_var

	def replace(self, **changes) -> 'SystemConfig':
		return dataclasses.replace(self, **changes)

	def validate(self) -> None:
		def require(ok:bool, invariant:str, detail:str) -> None:
			if not ok:
				raise ConfigError(f'violated invariant "{invariant}": {detail}')

		for name in ('n_tx', 'n_rf', 'n_users', 'n_paths', 'trials'):
			value = getattr(self, name)
			require(isinstance(value, int) and value >= 1, f'{name} ≥ 1', f'{name} = {value!r}')

		require(self.n_users <= self.n_rf, 'K ≤ N_RF', f'n_users = {self.n_users}, n_rf = {self.n_rf}')
		require(self.n_rf <= self.n_tx, 'N_RF ≤ N_T', f'n_rf = {self.n_rf}, n_tx = {self.n_tx}')
		if self.angle_model == AngleModel.SHARED:
			require(self.n_users <= self.n_paths, 'K ≤ L (shared path angles)',
			        f'n_users = {self.n_users}, n_paths = {self.n_paths}; use angle_model = per_user for more users than paths')

		for name in ('carrier_hz', 'bandwidth_hz', 'spacing_wavelengths', 'tx_power_w',
		             'p_ps_w', 'p_rf_w', 'l_bs_flops_per_w', 'w_c_hz', 't_c_s'):
			value = getattr(self, name)
			require(math.isfinite(value) and value > 0, f'{name} > 0', f'{name} = {value!r}')

		require(0 < self.pa_efficiency <= 1, '0 < η_PA ≤ 1', f'pa_efficiency = {self.pa_efficiency!r}')
		require(math.isfinite(self.path_loss_exp) and self.path_loss_exp >= 0, 'α ≥ 0', f'path_loss_exp = {self.path_loss_exp!r}')
		require(0 < self.d_min_m <= self.d_max_m and math.isfinite(self.d_max_m), '0 < d_min ≤ d_max',
		        f'd_min_m = {self.d_min_m!r}, d_max_m = {self.d_max_m!r}')
		require(len(self.path_gain_var) in (1, self.n_paths), 'len(path_gain_var) ∈ {1, L}',
		        f'{len(self.path_gain_var)} variances for {self.n_paths} paths')
		require(all(math.isfinite(v) and v > 0 for v in self.path_gain_var), 'σ_g² > 0', f'path_gain_var = {self.path_gain_var!r}')
		require(math.isfinite(self.noise_figure_db), 'noise_figure_db finite', f'noise_figure_db = {self.noise_figure_db!r}')
		if self.noise_w is not None:
			require(math.isfinite(self.noise_w) and self.noise_w > 0, 'σ_n² > 0', f'noise_w = {self.noise_w!r}')
		require(self.codebook_entries >= self.n_rf, 'N_RF ≤ codebook_size',
		        f'codebook_size = {self.codebook_entries}, n_rf = {self.n_rf}')
		if self.m_override is not None:
			require(1 <= self.m_override <= self.n_users, '1 ≤ m ≤ K',
			        f'm_override = {self.m_override}, n_users = {self.n_users}')
		require(0 <= self.master_seed < MAX_SEED, '0 ≤ master_seed < 2^64', f'master_seed = {self.master_seed}')

	def to_dict(self) -> dict[str, Any]:
		"""Fully materialized snapshot, using the same value forms as the config document."""
		snapshot:dict[str, Any] = {}
		for field in dataclasses.fields(self):
			value = getattr(self, field.name)
			if isinstance(value, enum.Enum):
				value = value.value
			elif isinstance(value, tuple):
				value = list(value)
			snapshot[field.name] = value
		snapshot['codebook_size'] = self.codebook_entries
		return snapshot


###############################################################################
# layered key/value stores

class Store(enum.IntEnum):
	Memory = 1    # command-line overrides
	File = 2      # config document
	Defaults = 3

_defaults = SystemConfig()

_configuration_defaults:dict[str, Any] = {
	field.name: getattr(_defaults, field.name)
	for field in dataclasses.fields(SystemConfig)
}

_file_config:dict[str, Any] = {}
_memory_config:dict[str, Any] = {}

_config_stores = {
	Store.Memory:   _memory_config,
	Store.File:     _file_config,
	Store.Defaults: _configuration_defaults,
}


def _parse_int(text:str) -> int:
	return int(text, 10)

def _parse_float(text:str) -> float:
	value = float(text)
	if not math.isfinite(value):
		raise ValueError('not finite')
	return value

def _optional(parse:Callable[[str], Any], *none_words:str) -> Callable[[str], Any]:
	def parse_optional(text:str) -> Any:
		if text.lower() in none_words:
			return None
		return parse(text)
	parse_optional.__doc__ = '%s or a number' % ' / '.join(none_words)
	return parse_optional

def _parse_floats(text:str) -> tuple[float, ...]:
	values = tuple(_parse_float(part.strip()) for part in text.split(','))
	if not values:
		raise ValueError('empty list')
	return values

def _parse_enum(enum_type:type[enum.Enum]) -> Callable[[str], Any]:
	def parse(text:str) -> Any:
		return enum_type(text.lower())
	parse.__doc__ = ' | '.join(member.value for member in enum_type)
	return parse


_value_parsers:dict[str, Callable[[str], Any]] = {
	'n_tx': _parse_int,
	'n_rf': _parse_int,
	'n_users': _parse_int,
	'n_paths': _parse_int,
	'carrier_hz': _parse_float,
	'bandwidth_hz': _parse_float,
	'spacing_wavelengths': _parse_float,
	'tx_power_w': _parse_float,
	'path_loss_exp': _parse_float,
	'path_gain_var': _parse_floats,
	'd_min_m': _parse_float,
	'd_max_m': _parse_float,
	'angle_model': _parse_enum(AngleModel),
	'noise_figure_db': _parse_float,
	'noise_w': _optional(_parse_float, 'auto'),
	'pa_efficiency': _parse_float,
	'p_ps_w': _parse_float,
	'p_rf_w': _parse_float,
	'l_bs_flops_per_w': _parse_float,
	'w_c_hz': _parse_float,
	't_c_s': _parse_float,
	'codebook_size': _optional(_parse_int, 'auto'),
	'm_override': _optional(_parse_int, 'none', 'auto'),
	'normalization': _parse_enum(Normalization),
	'sinr_form': _parse_enum(SinrForm),
	'trials': _parse_int,
	'master_seed': _parse_int,
}

assert set(_value_parsers) == set(_configuration_defaults), 'every config key needs a parser'


def known_keys() -> list[str]:
	return list(_configuration_defaults)


def parse_value(key:str, value:Any) -> Any:
	"""Convert 'value' (document text, or an already typed value) to the key's type."""
	parse = _value_parsers.get(key)
	if parse is None:
		raise ConfigError(f'unknown config key "{key}"')

	if isinstance(value, enum.Enum):
		value = value.value
	if isinstance(value, (list, tuple)):
		value = ','.join(str(v) for v in value)
	if value is None:
		value = 'auto'
	if not isinstance(value, str):
		value = str(value)

	try:
		return parse(value.strip())
	except ValueError:
		expected = parse.__doc__ or parse.__name__.replace('_parse_', '')
		raise ConfigError(f'bad value for "{key}": {value!r} (expected {expected})')


def parse_document(text:str, source:str='<config>') -> dict[str, Any]:
	"""Parse a flat 'key = value' document ('#' comments, blank lines ignored)."""
	values:dict[str, Any] = {}

	for line_num, line in enumerate(text.splitlines(), start=1):
		line = line.split('#', 1)[0].strip()
		if not line:
			continue

		key, sep, raw = line.partition('=')
		key = key.strip()
		if not sep or not key:
			raise ConfigError(f'{source}:{line_num}: expected "key = value", got {line!r}')

		try:
			values[key] = parse_value(key, raw)
		except ConfigError as ce:
			raise ConfigError(f'{source}:{line_num}: {ce}')

	return values


def load(path:str) -> None:
	"""Load a config document into Store.File (replacing its previous content)."""
	try:
		with open(path, encoding='utf-8') as fp:
			text = fp.read()
	except OSError as ose:
		raise ConfigError(f'cannot read config file {path}: {ose.strerror}')

	values = parse_document(text, source=path)

	_file_config.clear()
	_file_config.update(values)
	debug('[config] loaded %d key%s from %s' % (len(values), '' if len(values) == 1 else 's', path))


def default_path() -> str|None:
	return os.getenv(env_config_path) or None


def set(key:str, value:Any, store:Store=Store.Memory) -> None:
	if store == Store.Defaults:
		raise ConfigError('defaults are read-only')
	_config_stores[store][key] = parse_value(key, value)


def get(key:str) -> Any:
	if key not in _configuration_defaults:
		raise ConfigError(f'unknown config key "{key}"')

	# from high to low priority
	for store in (Store.Memory, Store.File, Store.Defaults):
		config = _config_stores[store]
		if key in config:
			return config[key]

	return None


def source(key:str) -> Store:
	for store in (Store.Memory, Store.File):
		if key in _config_stores[store]:
			return store
	return Store.Defaults


def forget_all(store:Store) -> None:
	if store == Store.Defaults:
		raise ConfigError('defaults are read-only')
	_config_stores[store].clear()


def resolve() -> SystemConfig:
	"""Materialize the current layers into a validated SystemConfig."""
	values = { key: get(key) for key in _configuration_defaults }
	for key in values:
		if source(key) != Store.Defaults:
			debug('[config] %-20s = %r  (%s)' % (key, values[key], source(key).name.lower()))
	return SystemConfig(**values)


def parse_config(path:str|None=None, overrides:dict[str, Any]|None=None) -> SystemConfig:
	"""Build a SystemConfig from an optional document and overrides, leaving the global stores untouched.

	Overrides take precedence over document values; missing keys take the defaults.
	"""
	values = dict(_configuration_defaults)

	if path is not None:
		try:
			with open(path, encoding='utf-8') as fp:
				values.update(parse_document(fp.read(), source=path))
		except OSError as ose:
			raise ConfigError(f'cannot read config file {path}: {ose.strerror}')

	for key, value in (overrides or {}).items():
		values[key] = parse_value(key, value)

	return SystemConfig(**values)
