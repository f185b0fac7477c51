from . import config
from .config import SystemConfig, ConfigError, debug

from typing import Callable, Any


class BadUsageError(RuntimeError):
	pass


class Context:
	def __init__(self, eo:Callable, rc:Callable):
		self._eat_option = eo
		self._resolve_cmd = rc

		self.global_options:dict[str, Any] = {}
		self.command:str|None = None
		self.command_options:dict[str, Any] = {}
		self.command_arguments:list[str] = []

		self.handler:Callable = self._no_command

	def invoke(self, width:int) -> str|None:
		debug('[ctx] command:', self.command)
		debug('      ARGS:', self.command_arguments)
		debug('      OPTS:', self.command_options)
		debug('      GLOBAL:', self.global_options)

		return self.handler(self, width=width)


	def configure_handler(self, handler_map:dict) -> bool:
		if self.command is not None:
			self.handler = handler_map[self.command]['handler']
			return True

		return False


	def parse_args(self, args:list[str]) -> None:
		"""Split 'args' into command, command options, global options and arguments.

		Options may appear before or after the command; an option is first
		matched against the command's own options, then the global ones.
		"""
		args = list(args)

		while args:
			arg = args.pop(0)

			debug('check arg: "%s"' % arg)

			if arg.startswith('-') and len(arg) > 1:
				if self.command and self._eat_option(self.command, arg, args, self.command_options, unknown_ok=True):
					debug('  -> %s opt: %s' % (self.command, arg))
					continue

				# raises BadUsageError if not a global option either
				self._eat_option(None, arg, args, self.global_options, context_name=self.command)
				debug('  -> global opt:', arg)
				continue

			if not self.command:
				self.set_command(self._resolve_cmd(arg))
				debug('  -> cmd = %s' % self.command)
				continue

			self.command_arguments.append(arg)
			debug('  -> "%s" [%s]' % (self.command, ' '.join(self.command_arguments)))

		if not self.command:
			raise BadUsageError('no command given')


	def set_command(self, name:str) -> None:
		self.command = name


	def global_option(self, name:str, default_value:Any|None=None) -> Any:
		return self.global_options.get(name, default_value)


	def system_config(self) -> SystemConfig:
		"""Load the config document (if any) and apply the command-line overrides."""
		path = self.global_option('config') or config.default_path()
		if path:
			config.load(path)

		for assignment in self.global_option('set', []):
			key, sep, value = assignment.partition('=')
			if not sep or not key.strip():
				raise ConfigError(f'expected key=value, got "{assignment}"')
			config.set(key.strip(), value)

		dedicated = {
			'seed': 'master_seed',
			'trials': 'trials',
			'sinr-form': 'sinr_form',
			'normalization': 'normalization',
		}
		for option, key in dedicated.items():
			if option in self.global_options:
				config.set(key, self.global_options[option])

		return config.resolve()


	def _no_command(self, *a, **kw):
		raise RuntimeError('no command set')

	def __str__(self) -> str:
		return '[CTX "%s" %s %s]' % (self.command, self.command_options, self.command_arguments)
