# ANSI SGR sequences for terminal output

_00 = '\x1b[m'               # reset everything
_0 = '\x1b[22;23;24;39m'     # reset weight and foreground only
_b = '\x1b[1m'               # bold: headings, metric labels
_f = '\x1b[2m'               # faint: units, notes, resample counts
_g = '\x1b[32;1m'            # green: m_max marker
_c = '\x1b[33;1m'            # yellow: command names, prefix brackets
_o = '\x1b[34;1m'            # blue: options, config keys
_E = '\x1b[41;97;1m'         # ERROR badge
