#! /usr/bin/env python3

import re
import sys
from os.path import basename, splitext

from typing import Callable, Any

from . import config, progress, utils
from .context import Context, BadUsageError
from .config import SystemConfig, ConfigError, MAX_SEED, SinrForm, Normalization, debug
from .styles import _0, _00, _b, _c, _f, _o, _E
from .display import print_records, print_sweep, print_error_curve
from .utils import term_size, warning_prefix, error_badge
from .linalg import LinalgError
from .precoding import PrecodingError, decomposition_error_curve, m_max
from .metrics import MetricsError
from .sim import SimulationError, SweepResult, Axis, draw_precoders, run_trial, summarize, sweep_users, sweep_rf_chains
from .results import ResultsError, RunManifest, emit_csv, emit_error_curve, write_manifest, read_manifest, manifest_path

PRG = basename(sys.argv[0])

VERSION = '1.0'
VERSION_DATE = '2026-10-19'

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3


class Error(str):
	pass


def start(argv:list[str]) -> int:
	# we set these functions to avoid import cycle
	ctx = Context(eat_option, resolve_cmd)

	try:
		ctx.parse_args(argv)
	except BadUsageError as bue:
		print(f'{warning_prefix(ctx.command)} {bue}', file=sys.stderr)
		print_usage(file=sys.stderr)
		return EXIT_USAGE

	ctx.configure_handler(known_commands)

	width, height = term_size()

	try:
		err = ctx.invoke(width=width)

	except BadUsageError as bue:
		print(f'{warning_prefix(ctx.command)} {bue}', file=sys.stderr)
		return EXIT_USAGE

	except ConfigError as ce:
		print(f'{warning_prefix(ctx.command)} {error_badge()} {ce}', file=sys.stderr)
		return EXIT_USAGE

	except (SimulationError, LinalgError, PrecodingError, MetricsError, ResultsError, utils.FatalJSONError) as e:
		print(f'{warning_prefix(ctx.command)} {error_badge()} {e}', file=sys.stderr)
		return EXIT_RUNTIME

	if err is not None:
		print(f'{warning_prefix(ctx.command)} {err}', file=sys.stderr)
		return EXIT_USAGE

	return EXIT_OK


###############################################################################


def resolve_cmd(name:str) -> str:
	matching = []

	for primary in known_commands:
		cmd_def = known_commands[primary]
		aliases = cmd_def.get('alias')
		names:list[str] = [primary] + list(aliases if isinstance(aliases, tuple) else ())

		for alias in names:
			if name == alias:
				return primary
			if alias.startswith(name.lower()):
				matching.append(primary)

	matching = sorted(set(matching))
	if len(matching) == 1:
		return matching[0]

	if len(matching) > 1:
		raise BadUsageError(f'Ambiguous command: {_E}{name}{_00}  matches: ' + f'{_o},{_0} '.join(matching))

	raise BadUsageError(f'Unknown command: {_E}{name}{_00}')


long_option_arg_ptn = re.compile(r'^(?P<option>--[^= ]+)(?:=(?P<arg>.*))$')

def eat_option(command:str|None, option:str, args:list[str], options:dict, unknown_ok:bool=False, context_name:str|None=None) -> bool:
	if option in ('-h', '--help'):
		if command or context_name:
			print_cmd_help(command or context_name)
		else:
			print_usage()
		sys.exit(EXIT_OK)

	option_arg:str|None = None

	# long option combined with its argument, i.e. --option=argument
	m = long_option_arg_ptn.search(option)
	if m:
		option = m.group('option')
		option_arg = m.group('arg')

	opt_def = option_def(command, option)
	if not opt_def:
		if unknown_ok:
			return False
		raise BadUsageError(f'Unknown option: {option}')

	key:str = opt_def['key']

	set_func = opt_def.get('func')
	if not set_func:
		def _set_opt(v, key, options):
			options[key] = v
		set_func = _set_opt

	arg_type = opt_def.get('arg')

	if not arg_type:
		if option_arg:
			bad_opt_arg(option, option_arg, None)
		set_func(True, key, options)
		return True

	if option_arg is None and args:
		option_arg = args.pop(0)

	if option_arg is None:
		bad_opt_arg(option, None, arg_type)

	arg_str = str(option_arg)

	validator = opt_def.get('validator', lambda v: v)
	validator_explain = validator.__doc__ or ''

	try:
		v = arg_type(arg_str)
		v = validator(v)
		if v is None:
			raise ValueError
		err = set_func(v, key, options)
		if err:
			bad_opt_arg(option, arg_str, arg_type, explain=err)
	except ValueError:
		bad_opt_arg(option, arg_str, arg_type, explain=validator_explain)

	return True


def bad_opt_arg(option:str, arg:str|None, arg_type:Callable|None, explain:str|None=None) -> None:
	if arg_type is None:
		raise BadUsageError(f'Unexpected argument for {_o}{option}{_0}: {_b}{arg}{_0}')

	explain = ('; %s' % explain) if explain else ''
	if arg is None:
		raise BadUsageError(f'Required argument missing for {_o}{option}{_0}{explain}')

	raise BadUsageError(f'Bad option argument for {_o}{option}{_0}: {_b}{arg}{_0}  ({arg_type.__name__} expected{explain})')


###############################################################################
# command implementations; each takes the resolved config and option dict so
# that 'replay' can run them straight from a manifest

def _progress_callback(label:str, width:int) -> Callable[[int, int], None]|None:
	if not sys.stderr.isatty():
		return None

	bars:dict[int, Callable] = {}

	def show(completed:int, total:int) -> None:
		bar = bars.get(total)
		if bar is None:
			bar = bars.setdefault(total, progress.new(total, min(width, 100)))
		print(bar(completed, label), end='', file=sys.stderr, flush=True)
		if completed == total:
			print(f'\r{_00}\x1b[K', end='', file=sys.stderr, flush=True)

	return show


def _new_manifest(cfg:SystemConfig, command:str, options:dict[str, Any], out:str) -> RunManifest:
	return RunManifest(
		config=cfg.to_dict(),
		version=VERSION,
		master_seed=cfg.master_seed,
		command=command,
		arguments={ **options, 'out': out },
	)


def _write_sweep(result:SweepResult, cfg:SystemConfig, command:str, options:dict[str, Any], out:str|None) -> None:
	if not out:
		return
	manifest = _new_manifest(cfg, command, options, out)
	emit_csv(result, manifest, out)
	write_manifest(manifest, manifest_path(out))
	print(f'{_f}wrote {out}{_0}')


def run_single(cfg:SystemConfig, options:dict[str, Any], out:str|None, jobs:int, width:int) -> Error|None:
	trial = options.get('trial', 0)

	result = run_trial(cfg, trial, (int(Axis.NONE), ))

	print(f'{_b}trial {trial}{_0}  K = {cfg.n_users}  N_RF = {cfg.n_rf}  N_T = {cfg.n_tx}  seed = {cfg.master_seed}')
	print_records([result.zf, result.svdde], error_f2=result.error_f2)
	if result.discarded:
		print(f'{_f}{result.discarded} rank-deficient draw{utils.plural(result.discarded)} resampled{_0}')

	summary = SweepResult(Axis.NONE.label, (trial, ), (summarize(trial, [result]), ))
	_write_sweep(summary, cfg, 'single', options, out)
	return None


def _user_range(cfg:SystemConfig, options:dict[str, Any]) -> list[int]:
	k_min = options.get('k-min', 4)
	k_step = options.get('k-step', 2)
	k_max = options.get('k-max')
	if k_max is None:
		k_max = cfg.n_rf
		if cfg.angle_model == config.AngleModel.SHARED:
			k_max = min(k_max, cfg.n_paths)

	k_values = list(range(k_min, k_max + 1, k_step))
	if not k_values:
		raise ConfigError(f'empty user range {k_min}..{k_max} (step {k_step})')
	return k_values


def run_sweep_users(cfg:SystemConfig, options:dict[str, Any], out:str|None, jobs:int, width:int) -> Error|None:
	rf_list = options.get('rf-list')

	if not rf_list:
		k_values = _user_range(cfg, options)
		result = sweep_users(cfg, k_values, jobs=jobs, progress=_progress_callback('users', width))
		print_sweep(result)
		_write_sweep(result, cfg, 'sweep-users', options, out)
		return None

	manifest = _new_manifest(cfg, 'sweep-users', options, out) if out else None

	for n_rf in rf_list:
		curve_cfg = cfg.replace(n_rf=n_rf, n_users=min(cfg.n_users, n_rf))
		k_values = _user_range(curve_cfg, options)
		result = sweep_users(curve_cfg, k_values, jobs=jobs, progress=_progress_callback(f'N_RF={n_rf}', width))

		print(f'{_c}N_RF = {n_rf}{_0}')
		print_sweep(result)

		if manifest is not None and out:
			curve_path = f'{splitext(out)[0]}_nrf{n_rf}.csv'
			emit_csv(result, manifest, curve_path)
			print(f'{_f}wrote {curve_path}{_0}')

	if manifest is not None and out:
		write_manifest(manifest, manifest_path(out))

	return None


def run_sweep_rf(cfg:SystemConfig, options:dict[str, Any], out:str|None, jobs:int, width:int) -> Error|None:
	n_rf_values = options.get('list')
	if not n_rf_values:
		return Error(f'Required option missing: {_o}--list{_0}')

	result = sweep_rf_chains(cfg, n_rf_values, jobs=jobs, progress=_progress_callback('RF chains', width))
	print_sweep(result)
	_write_sweep(result, cfg, 'sweep-rf', options, out)
	return None


def _rank_values(ranks:str|None, k:int) -> list[int]:
	if not ranks:
		return list(range(1, k + 1))

	def bound(text:str) -> int:
		text = text.strip()
		return k if text.upper() == 'K' else int(text, 10)

	try:
		if '..' in ranks:
			lo, hi = ranks.split('..', 1)
			values = list(range(bound(lo), bound(hi) + 1))
		else:
			values = [ bound(part) for part in ranks.split(',') ]
	except ValueError:
		raise ConfigError(f'bad rank list "{ranks}" (expected a..b or m1,m2,...)')

	if not values or any(not 1 <= m <= k for m in values):
		raise ConfigError(f'violated invariant "1 ≤ m ≤ K": --m {ranks} with K = {k}')
	return values


def run_error_curve(cfg:SystemConfig, options:dict[str, Any], out:str|None, jobs:int, width:int) -> Error|None:
	trial = options.get('trial', 0)
	m_values = _rank_values(options.get('m'), cfg.n_users)

	# every rank is listed, so the flop budget does not apply
	pre, _ = draw_precoders(cfg, trial, (int(Axis.NONE), ), m=cfg.n_users)
	errors = decomposition_error_curve(pre.zf.F_BB, m_values)

	try:
		best = m_max(cfg.n_rf, cfg.n_users)
	except PrecodingError:
		best = None

	print_error_curve(m_values, errors, best)

	if out:
		manifest = _new_manifest(cfg, 'error-curve', options, out)
		emit_error_curve(m_values, errors, manifest, out)
		write_manifest(manifest, manifest_path(out))
		print(f'{_f}wrote {out}{_0}')

	return None


_runners:dict[str, Callable[..., Error|None]] = {
	'single': run_single,
	'sweep-users': run_sweep_users,
	'sweep-rf': run_sweep_rf,
	'error-curve': run_error_curve,
}


###############################################################################


def _run(ctx:Context, width:int) -> Error|None:
	if ctx.command_arguments:
		return Error(f'Unexpected argument: {_b}{ctx.command_arguments[0]}{_0}')

	cfg = ctx.system_config()
	runner = _runners[str(ctx.command)]
	return runner(cfg, ctx.command_options, ctx.global_option('out'), ctx.global_option('jobs', 1), width)


def cmd_single(ctx:Context, width:int) -> Error|None:
	return _run(ctx, width)

def _single_help() -> None:
	print_cmd_usage('single', '[--trial N]')
	print('Runs one trial at one configuration point and prints every metric for ZF and SVDDE.')

setattr(cmd_single, 'help', _single_help)


def cmd_sweep_users(ctx:Context, width:int) -> Error|None:
	return _run(ctx, width)

def _sweep_users_help() -> None:
	print_cmd_usage('sweep-users', ['[--k-min N] [--k-max N] [--k-step N]', '--rf-list N_RF[,N_RF...]'])
	print('Sweeps the number of users K; with --rf-list, one sweep (and one CSV) per RF-chain count.')

setattr(cmd_sweep_users, 'help', _sweep_users_help)


def cmd_sweep_rf(ctx:Context, width:int) -> Error|None:
	return _run(ctx, width)

def _sweep_rf_help() -> None:
	print_cmd_usage('sweep-rf', '--list N_RF[,N_RF...]')
	print('Sweeps the number of RF chains at fixed K.')

setattr(cmd_sweep_rf, 'help', _sweep_rf_help)


def cmd_error_curve(ctx:Context, width:int) -> Error|None:
	return _run(ctx, width)

def _error_curve_help() -> None:
	print_cmd_usage('error-curve', '[--m a..b | m1,m2,...] [--trial N]')
	print('Squared Frobenius error of the rank-m baseband split for one channel draw (default m = 1..K).')

setattr(cmd_error_curve, 'help', _error_curve_help)


def cmd_replay(ctx:Context, width:int) -> Error|None:
	if len(ctx.command_arguments) != 1:
		return Error('Expected exactly one manifest path')

	path = ctx.command_arguments[0]
	manifest = read_manifest(path)
	debug('[replay] %s: %s recorded %s' % (path, manifest.command, manifest.timestamp))

	runner = _runners.get(manifest.command)
	if runner is None:
		return Error(f'{path}: cannot replay command "{manifest.command}"')

	if manifest.version != VERSION:
		print(f'{warning_prefix("replay")} manifest written by version {manifest.version}, this is {VERSION}', file=sys.stderr)

	cfg = config.parse_config(overrides=manifest.config)
	options = dict(manifest.arguments)
	out = options.pop('out', None)

	return runner(cfg, options, out, ctx.global_option('jobs', 1), width)

def _replay_help() -> None:
	print_cmd_usage('replay', '<manifest>')
	print('Re-runs the command recorded in a manifest and rewrites its output files.')

setattr(cmd_replay, 'help', _replay_help)


def cmd_help(ctx:Context, *args, **kw) -> Error|None:
	if ctx.command_arguments:
		topic = ctx.command_arguments.pop(0)
		if topic in ('env', 'environment'):
			print_env_help()
			return None
		if topic in ('config', 'keys'):
			print_config_help()
			return None
		print_cmd_help(resolve_cmd(topic))
		return None

	print_usage()
	return None

def _help_help() -> None:
	print_cmd_usage('help', '[<topic>]')
	print('Topics:')
	print(f'    {_o}env          {_0} Environment variables')
	print(f'    {_o}config       {_0} Configuration keys and defaults')
	print(f'    {_o}<command>    {_0} Help for a command')

setattr(cmd_help, 'help', _help_help)


known_commands:dict[str, dict[str, Any]] = {
	'single': {
		'alias': ('s', ),
		'handler': cmd_single,
		'help': 'Run one trial and print all metrics.',
	},
	'sweep-users': {
		'alias': ('u', 'users'),
		'handler': cmd_sweep_users,
		'help': 'Sweep the number of users.',
	},
	'sweep-rf': {
		'alias': ('r', 'rf'),
		'handler': cmd_sweep_rf,
		'help': 'Sweep the number of RF chains.',
	},
	'error-curve': {
		'alias': ('e', ),
		'handler': cmd_error_curve,
		'help': 'Decomposition error versus truncation rank.',
	},
	'replay': {
		'alias': (),
		'handler': cmd_replay,
		'help': 'Reproduce the outputs recorded in a manifest.',
	},
	'help': {
		'alias': ('h', ),
		'handler': cmd_help,
		'help': 'Show help.',
	},
}


def _int_list(text:str) -> list[int]:
	values = [ int(part, 10) for part in text.split(',') if part.strip() ]
	if not values:
		raise ValueError('empty list')
	return values
_int_list.__name__ = 'list'

def _append(value:str, key:str, options:dict) -> str|None:
	options.setdefault(key, []).append(value)
	return None

def _valid_int(a:int, b:int|None=None) -> Callable[[int], int|None]:
	def verify(v:int) -> int|None:
		if v >= a and (b is None or v <= b):
			return v
		return None
	verify.__doc__ = 'at least %d' % a if b is None else 'between %d and %d' % (a, b)
	return verify

def _valid_choice(choices:list[str]) -> Callable[[str], str|None]:
	def verify(v:str) -> str|None:
		return v if v in choices else None
	verify.__doc__ = ' | '.join(choices)
	return verify

def _valid_positive_list(values:list[int]) -> list[int]|None:
	'comma-separated positive integers'
	return values if all(v >= 1 for v in values) else None


__opt_trial = {
	'trial': { 'name': '--trial', 'arg': int, 'validator': _valid_int(0), 'help': 'Trial index (selects the random draw; default: 0)' },
}

command_options:dict[str|None, dict[str, dict[str, Any]]] = {
	None: { # i.e. global options
		'config':        { 'name': ('-c', '--config'), 'arg': str, 'help': f'Config document (default: ${config.env_config_path})' },
		'seed':          { 'name': '--seed', 'arg': int, 'validator': _valid_int(0, MAX_SEED - 1), 'help': 'Master seed' },
		'out':           { 'name': ('-o', '--out'), 'arg': str, 'help': 'Write CSV (and manifest) to this path' },
		'trials':        { 'name': ('-n', '--trials'), 'arg': int, 'validator': _valid_int(1), 'help': 'Trials per sweep point' },
		'sinr-form':     { 'name': '--sinr-form', 'arg': str, 'validator': _valid_choice([ f.value for f in SinrForm ]), 'help': 'SINR expression' },
		'normalization': { 'name': '--normalization', 'arg': str, 'validator': _valid_choice([ n.value for n in Normalization ]), 'help': 'Baseband power normalization' },
		'set':           { 'name': '--set', 'arg': str, 'func': _append, 'help': 'Override a config key, key=value (repeatable)' },
		'jobs':          { 'name': ('-j', '--jobs'), 'arg': int, 'validator': _valid_int(1, 256), 'help': 'Worker threads (results do not depend on it)' },
	},
	'single': {
		**__opt_trial,
	},
	'sweep-users': {
		'k-min':         { 'name': '--k-min', 'arg': int, 'validator': _valid_int(2), 'help': 'Smallest K (default: 4)' },
		'k-max':         { 'name': '--k-max', 'arg': int, 'validator': _valid_int(2), 'help': 'Largest K (default: largest admissible)' },
		'k-step':        { 'name': '--k-step', 'arg': int, 'validator': _valid_int(1), 'help': 'K increment (default: 2)' },
		'rf-list':       { 'name': '--rf-list', 'arg': _int_list, 'validator': _valid_positive_list, 'help': 'One sweep per RF-chain count' },
	},
	'sweep-rf': {
		'list':          { 'name': '--list', 'arg': _int_list, 'validator': _valid_positive_list, 'help': 'RF-chain counts to evaluate' },
	},
	'error-curve': {
		'm':             { 'name': '--m', 'arg': str, 'help': 'Ranks, a..b (b may be K) or m1,m2,...' },
		**__opt_trial,
	},
}


def option_def(command:str|None, option:str|None=None):
	cmd_opts = command_options.get(command)

	if not isinstance(cmd_opts, dict) or not cmd_opts:
		return None

	if option is None:
		return cmd_opts

	for key, opt in cmd_opts.items():
		names = opt['name'] if isinstance(opt['name'], tuple) else (opt['name'], )
		if option in names:
			return { 'key': key, **opt }

	return None


def print_cmd_usage(command:str, syntax:str|list[str]='') -> None:
	entry = known_commands[command]

	summary = entry.get('help')
	if summary:
		print(f'{_b}{summary}{_0}')

	aliases = entry.get('alias')
	if aliases and isinstance(aliases, tuple):
		print(f'{_b}Alias:{_0} %s' % ', '.join(aliases))

	if isinstance(syntax, str):
		syntax = [syntax]

	for stx in syntax:
		print(f'{_b}Usage:{_0} %s [<global options>] {_c}%s{_0} %s' % (PRG, command, stx))


def print_cmd_option_help(command:str|None, print_label:bool=True, file=None) -> None:
	options = option_def(command)
	if not options:
		return

	if print_label:
		print(f'{_b}Options:{_0}', file=file)

	for opt in options.values():
		option = opt.get('name')
		if type(option) is tuple:
			option = ', '.join(option)

		arg_type = opt.get('arg')
		if arg_type is not None:
			option = '%s %s' % (option, arg_placeholder(option, arg_type))

		print('   %-26s %s' % (option, opt.get('help', '')), file=file)


def arg_placeholder(option, arg_type):
	if arg_type is str:
		return 'string'
	if arg_type is int:
		return 'N'
	if arg_type is _int_list:
		return 'N,N,...'

	raise RuntimeError(f'{option} argument placeholder type can not be %s' % arg_type.__name__)


def print_cmd_help_table(file=None) -> None:
	for cmd, cmd_info in known_commands.items():
		aliases = cmd_info['alias']
		alias_text = f'  {_f}(%s){_0}' % ', '.join(aliases) if aliases else ''
		pad = ' '*(14 - len(cmd))
		print(f'  {_c}{cmd}{_0}{pad}{cmd_info["help"]}{alias_text}', file=file)


def print_usage(file=None) -> None:
	print(f'{_b}%s{_0} / hybrid precoding simulator (ZF and truncated-SVD baseband)' % PRG, file=file)
	print('Version %s (%s)' % (VERSION, VERSION_DATE), file=file)
	print(f'{_b}Usage:{_0} %s [<global options>] <{_b}command{_0}> [{_o}<options ...>{_0}]' % PRG, file=file)
	print(file=file)
	print(f'Where {_b}<global options>{_0} are:', file=file)
	print_cmd_option_help(None, print_label=False, file=file)
	print(file=file)
	print(f'Where {_b}<command>{_0} is:', file=file)
	print_cmd_help_table(file=file)
	print(file=file)
	print(f'See: %s {_b}<command> --help{_0} for command-specific help.' % PRG, file=file)
	print(f'Global options may also follow the command.  Shortest unique prefix of a command is enough.', file=file)
	if utils.json_serializer() == 'json':
		print(f'  {_f}Install \'orjson\' for faster manifest load/save{_0}', file=file)


def print_env_help() -> None:
	print('Some defaults may be overriden by environment variables:')
	print(f'  {_b}{config.env_config_path:20}{_0} Path to configuration document')
	print(f'  {_b}{config.env_debug:20}{_0} Write a debug log to ~/.cache/hybrid_precoding/debug.log')


def print_config_help() -> None:
	defaults = SystemConfig().to_dict()
	print(f'{_b}Configuration keys{_0} (one "key = value" per line; "#" starts a comment):')
	for key in config.known_keys():
		value = defaults[key]
		if isinstance(value, list):
			value = ','.join(str(v) for v in value)
		elif value is None:
			value = 'auto'
		print(f'  {_o}{key:22}{_0} {value}')


def print_cmd_help(command:str) -> None:
	show_help = getattr(known_commands[command]['handler'], 'help')
	show_help()
	print_cmd_option_help(command)


def main(argv:list[str]|None=None) -> None:
	if argv is None:
		argv = sys.argv[1: ]

	try:
		sys.exit(start(argv))

	except KeyboardInterrupt:
		print('** User break', file=sys.stderr)
		sys.exit(1)


if __name__ == '__main__':
	main()
