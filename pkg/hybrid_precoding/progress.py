from typing import Callable


def new(total:int, width:int, bg_color:int|str=4, r_info:Callable|None=None) -> Callable:
	"""
	:param total: Total number of items to process (e.g. trials of a sweep)
	:param width: Render width
	:param bg_color: Bar background color, default: blue.
	:param r_info: Function that returns a formatted string for the right-side info text.
	Returns a function that, when called, returns a printable progress bar.
	"""
	bar_ch = ('▏', '▎', '▍', '▌', '▋', '▊', '▉')

	rinfo_w = len(str(total))
	def _default_rinfo(c, t):
		return f'{c:>{rinfo_w}}/{t:<{rinfo_w}}'

	if r_info is None:
		r_info = _default_rinfo

	CLR = '\x1b[K'   # clear to end-of-line
	INV = '\x1b[7m'  # video inversion
	RST = '\x1b[m'   # reset all attributes
	DIM = '\x1b[2m'  # faint/dim color

	bar_head = f'\x1b[4{bg_color}m'

	def gen(curr:int, text:str|None=None) -> str:
		right_info = r_info(curr, total)
		left_info = '%3.0f%% ' % (100*curr/total if total else 100)

		bar_w = max(1, width - len(left_info) - len(right_info) - 3)
		done = bar_w*min(curr, total)/total if total else bar_w

		int_w = int(done)
		head = bar_ch[int((done % 1)*len(bar_ch))] if int_w < bar_w else ''
		tail_w = bar_w - int_w - len(head)

		label = f' {text}' if text else ''

		return ''.join([
			'\r', CLR,
			DIM, left_info, RST,
			'▕',
			INV, ' '*int_w, RST,
			bar_head, head, ' '*tail_w, RST,
			'▏',
			DIM, right_info, label, RST,
		])

	gen.__name__ = 'progress_bar'
	gen.__doc__ = '''Return a rendered progress bar at 'curr' (of 'total') progress.'''

	setattr(gen, 'total', total)
	setattr(gen, 'width', width)

	return gen
