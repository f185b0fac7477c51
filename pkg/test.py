import os
import subprocess
import sys

def run():
	env = dict(os.environ)
	args = sys.argv[1:]
	if '--slow' in args:
		args.remove('--slow')
		env['HPSIM_SLOW_TESTS'] = '1'

	proc = subprocess.run(
		[sys.executable, '-u', '-m', 'unittest', 'discover', '-s', 'test', *args],
		env=env,
	)
	sys.exit(proc.returncode)
