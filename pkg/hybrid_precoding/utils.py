from datetime import datetime
from os.path import basename, dirname
from shutil import get_terminal_size
from tempfile import mkstemp
from types import ModuleType as Module
from typing import Any, Sized
import json
import os
import sys

from .styles import _00, _c, _b, _E

orjson:Module|None
try:
	import orjson
except ImportError:
	orjson = None

PRG = basename(sys.argv[0]) or 'hpsim'

class FatalJSONError(ValueError):
	pass


def json_serializer() -> str:
	return 'orjson' if orjson is not None else 'json'


def warning_prefix(context_name:str|None=None) -> str:
	label = PRG if context_name is None else f'{PRG} {context_name}'
	return f'{_c}[{_00}{_b}{label}{_c}]{_00}'


def error_badge() -> str:
	return f'{_E}ERROR{_00}'


def read_json(filepath:str) -> dict:
	"""Read a JSON object; raises FileNotFoundError if missing, FatalJSONError if malformed."""
	with open(filepath, 'rb') as fp:
		raw = fp.read()

	try:
		obj = orjson.loads(raw) if orjson is not None else json.loads(raw)
	except ValueError as ve:  # both decoders raise ValueError subclasses
		raise FatalJSONError(f'{filepath}: {ve}')

	if not isinstance(obj, dict):
		raise FatalJSONError(f'{filepath}: expected a JSON object, got {type(obj).__name__}')
	return obj


def _encode(data:Any) -> bytes:
	if orjson is not None:
		return orjson.dumps(data, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS) + b'\n'
	return (json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + '\n').encode('utf-8')


def write_json(filepath:str, data:Any) -> Exception|None:
	"""Atomically replace 'filepath' with 'data' as indented JSON. Returns the error instead of raising."""
	try:
		fd, tmp_name = mkstemp(dir=dirname(filepath) or '.', prefix='.manifest-')
	except OSError as e:
		return e

	try:
		with os.fdopen(fd, 'wb') as fp:
			fp.write(_encode(data))
		os.replace(tmp_name, filepath)
	except Exception as e:
		os.remove(tmp_name)
		return e

	return None


def term_size() -> tuple[int, int]:
	size = get_terminal_size(fallback=(100, 60))
	return size.columns, size.lines


def plural(n:int|Sized) -> str:
	count = n if isinstance(n, int) else len(n)
	return '' if count == 1 else 's'


def now_stamp() -> str:
	return datetime.now().astimezone().isoformat(' ', timespec='seconds')
