""" Reading and writing scenario files and sweep outputs.

Scenario files hold one ``section.key = value`` assignment per line;
blank lines and anything after ``#`` are ignored. Values are Python
literals (numbers, tuples, lists, True/False/None, quoted strings); a
value that is not a literal is taken as a bare string.

"""

import logging
logger = logging.getLogger(__name__)

import ast
import re
from collections import OrderedDict

import xarray

from . sim import SweepResult

__all__ = ['read_keyvalue', 'format_keyvalue', 'parse_value',
           'write_sweep_csv', 'save_sweep_netcdf', 'load_sweep_netcdf']

KEY_REGEX = re.compile(r"^[A-Za-z_]\w*(\.[A-Za-z_]\w*)+$")

#: Format of every floating-point CSV field (9 significant digits)
CSV_FLOAT_FORMAT = "%.9g"


def _strip_comment(line):
    """ Drop a trailing comment, leaving '#' inside quotes alone. """
    quote = None
    for i, ch in enumerate(line):
        if quote is not None:
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch == '#':
            return line[:i]
    return line


def parse_value(text):
    """ Interpret a value string as a Python literal, or else as a bare
    string. """
    text = text.strip()
    try:
        return ast.literal_eval(text)
    except (ValueError, TypeError, SyntaxError):
        return text


def read_keyvalue(text):
    """ Parse key-value text into an ordered mapping.

    Parameters
    ----------
    text : str
        Contents of a scenario file

    Returns
    -------
    OrderedDict of dotted key -> value; later assignments win

    Raises
    ------
    ValueError
        On a malformed line; the message gives the line number

    """
    items = OrderedDict()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if '=' not in line:
            raise ValueError("line %d: expected 'section.key = value'"
                             % lineno)
        key, value = line.split('=', 1)
        key = key.strip()
        if not KEY_REGEX.match(key):
            raise ValueError("line %d: malformed key '%s'" % (lineno, key))
        items[key] = parse_value(value)
    return items


def format_keyvalue(items, header=None):
    """ Render a mapping in the scenario-file grammar.

    Parameters
    ----------
    items : iterable of (key, value) or mapping
    header : str, optional
        Emitted first as '#' comment lines

    """
    if hasattr(items, 'items'):
        items = items.items()
    lines = []
    if header:
        lines.extend("# " + h if h else "#" for h in header.splitlines())
    for key, value in items:
        lines.append("%s = %r" % (key, value))
    return "\n".join(lines) + "\n"


def write_sweep_csv(result, path):
    """ Write the per-point summary of a SweepResult as CSV.

    Columns follow `SweepResult.to_frame`; floats carry 9 significant
    digits and missing statistics are written as 'nan'.

    """
    df = result.to_frame()
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT,
              na_rep="nan", lineterminator="\n")
    logger.debug("wrote %d rows to %s", len(df), path)
    return path


def save_sweep_netcdf(result, path):
    """ Persist the per-trial dataset of a SweepResult. """
    result.ds.to_netcdf(path)
    logger.debug("saved sweep dataset to %s", path)
    return path


def load_sweep_netcdf(path):
    """ Read a dataset written by `save_sweep_netcdf` into a
    SweepResult. """
    with xarray.open_dataset(path) as ds:
        ds = ds.load()
    ds = ds.assign_coords(scheme=[str(s) for s in ds['scheme'].values])
    return SweepResult(ds)
