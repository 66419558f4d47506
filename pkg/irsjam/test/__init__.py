""" Basic testing. """

import numpy as np

from .. channel import ChannelSet
from .. sim import default_config
from .. utilities import complex_normal


def random_channels(rng, k_users, n_ap, n_irs):
    """ Unit-variance channel set with no large-scale loss; keeps the
    numbers well scaled for gradient and optimality checks. """
    return ChannelSet(complex_normal(rng, (k_users, n_ap)),
                      complex_normal(rng, (n_irs, n_ap)),
                      complex_normal(rng, (k_users, n_irs)))


def small_config(n_irs_y=4, n_irs_z=4, **kws):
    """ Reference scenario shrunk to a small IRS and few trials. """
    cfg = default_config()
    arrays = cfg.arrays._replace(n_irs_y=n_irs_y, n_irs_z=n_irs_z)
    kws.setdefault('n_trials', 4)
    return cfg._replace(arrays=arrays, **kws).validate()
