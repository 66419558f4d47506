""" Monte Carlo simulator for fully-passive jamming of multi-user MISO
downlinks by an illegitimate intelligent reflecting surface.

"""

from __future__ import absolute_import, division

# Set default logging handler to avoid "No handler found" warnings.
import logging
from logging import NullHandler
logging.getLogger(__name__).addHandler(NullHandler())

from . utilities import *
from . channel import *
from . beamforming import *
from . reflect import *
from . pj_opt import *
from . sim import *
from . io import *
from . scripting import *
