""" Unit conversions, random-stream helpers and history bookkeeping
shared by the simulator modules.

"""

import sys
from datetime import datetime

import numpy as np

__all__ = ['dbm_to_watts', 'watts_to_dbm', 'db_to_linear', 'linear_to_db',
           'noise_power_dbm', 'complex_normal', 'substream',
           'append_history', 'get_timestamp']

#: Linear values at or below this floor are reported as -120 dB
DB_FLOOR = 1e-12

#####################################################################
## UNIT CONVERSIONS

def dbm_to_watts(dbm):
    """ Convert a power in dBm to watts. """
    return 10.**((np.asarray(dbm, dtype=float) - 30.)/10.)

def watts_to_dbm(watts):
    """ Convert a power in watts to dBm. """
    return 10.*np.log10(np.asarray(watts, dtype=float)) + 30.

def db_to_linear(db):
    """ Convert a power ratio in dB to a linear ratio. """
    return 10.**(np.asarray(db, dtype=float)/10.)

def linear_to_db(ratio, floor=DB_FLOOR):
    """ Convert a linear power ratio to dB, clamping values at or below
    `floor` so that exactly-zero ratios map to a finite number.

    Parameters
    ----------
    ratio : float or array-like
        Non-negative linear power ratio(s)
    floor : float
        Smallest ratio represented; defaults to 1e-12 (-120 dB)

    """
    ratio = np.maximum(np.asarray(ratio, dtype=float), floor)
    return 10.*np.log10(ratio)

def noise_power_dbm(bandwidth_hz):
    """ Thermal noise power, -170 dBm/Hz integrated over the bandwidth. """
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive; got %r" % bandwidth_hz)
    return -170. + 10.*np.log10(bandwidth_hz)

#####################################################################
## RANDOM STREAMS

def complex_normal(rng, shape):
    """ Draw i.i.d. CN(0, 1) samples; real and imaginary parts are
    independent N(0, 1/2). """
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j*im)/np.sqrt(2.)

def substream(master_seed, *key):
    """ Build an independent random Generator keyed on a master seed and
    a tuple of non-negative integers.

    Two calls with the same arguments return generators in identical
    states, so a stream can be re-created anywhere (another process, a
    later re-run) without passing generator state around.

    >>> a = substream(7, 0, 3).standard_normal()
    >>> b = substream(7, 0, 3).standard_normal()
    >>> a == b
    True

    """
    seq = np.random.SeedSequence(int(master_seed),
                                 spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(seq)

#####################################################################
## HISTORY / TIMESTAMPS

def append_history(ds, call_str=None, extra_info=None):
    """ Add a line to a Dataset's history record indicating the
    current calling context or operation.

    Parameters
    ----------
    ds : xarray.Dataset
        The Dataset to append history information to
    call_str : str, optional
        The full calling path of the operation - including the script
        name and arguments. If not passed, will grab from sys.argv
    extra_info : str, optional
        Additional info to include in the history statement

    Returns
    -------
    Dataset with appended history

    """
    history = ds.attrs.get('history', "")

    if call_str is None:
        call_str = " ".join(sys.argv)
    if extra_info is not None:
        call_str += " ({})".format(extra_info)

    history = (get_timestamp(fmt="%a %b %d %H:%M:%S %Y") +
               ": {}\n".format(call_str) +
               history)
    ds.attrs['history'] = history

    return ds

def get_timestamp(time=True, date=True, fmt=None):
    """ Return the current timestamp in machine local time.

    Parameters:
    -----------
    time, date : Boolean
        Flag to include the time or date components, respectively,
        in the output.
    fmt : str, optional
        If passed, will override the time/date choice and use as
        the format string passed to `strftime`.

    """

    time_format = "%H:%M:%S"
    date_format = "%Y-%m-%d"

    if fmt is None:
        if time and date:
            fmt = date_format + " " + time_format
        elif time:
            fmt = time_format
        elif date:
            fmt = date_format
        else:
            raise ValueError("One of `date` or `time` must be True!")

    return datetime.now().strftime(fmt)
