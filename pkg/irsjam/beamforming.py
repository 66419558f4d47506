""" Zero-forcing beamforming with water-filling power allocation, and the
link metrics (SINR, sum rate, interference-to-noise ratio) evaluated for
a beamformer on an arbitrary channel.

"""

import logging
from collections import namedtuple

import numpy as np
from scipy import linalg

from . utilities import linear_to_db

logger = logging.getLogger(__name__)

__all__ = ['Beamformer', 'TrialMetrics', 'SingularChannelError',
           'zf_beamformer', 'water_filling', 'evaluate']

#: Smallest-to-largest singular value ratio below which H is rank deficient
RANK_TOL = 1e-10

ALLOCATIONS = ('waterfilling', 'equal')
NORMALIZATIONS = ('per_column', 'literal')


class SingularChannelError(ValueError):
    """ The channel matrix handed to the precoder is rank deficient. """
    pass


class Beamformer(namedtuple('Beamformer', ['w', 'p', 'gains'])):
    """ Precoder W (N_A x K), the radiated power per column p and the
    effective ZF gains g_k = 1/||a_k||^2 of the unnormalized directions.
    """
    __slots__ = ()

    @property
    def total_power(self):
        return float(np.sum(self.p))


class TrialMetrics(namedtuple('TrialMetrics', ['sinr', 'rates', 'sum_rate',
                                               'i_over_n', 'n_resamples',
                                               'channel_digest'])):
    """ Link metrics of one trial.

    Attributes
    ----------
    sinr : array of K floats
        Per-user SINR (linear)
    rates : array of K floats
        Per-user rate log2(1 + sinr) in bit/s/Hz
    sum_rate : float
        Sum of `rates`
    i_over_n : float
        Aggregate inter-user interference over noise (linear)
    n_resamples : int
        Channel redraws needed before the trial succeeded
    channel_digest : str or None
        Digest of the realization the trial ran on

    """
    __slots__ = ()

    @property
    def i_over_n_db(self):
        return float(linear_to_db(self.i_over_n))


def water_filling(gains, p0, noise, return_level=False):
    """ Water-filling over parallel channels with power gains `gains`.

    Solves max sum log2(1 + p_k g_k / noise) s.t. sum p_k = p0, p_k >= 0;
    the solution is p_k = max(0, mu - noise/g_k). The water level is found
    exactly by dropping the weakest channels (highest floors) until the
    level clears every remaining floor.

    Parameters
    ----------
    gains : array-like of positive floats
    p0 : float
        Total power (W)
    noise : float
        Noise power (W)
    return_level : bool
        Also return the water level mu

    Returns
    -------
    p : array of non-negative floats (and mu if `return_level`)

    """
    gains = np.asarray(gains, dtype=float)
    if gains.ndim != 1 or gains.size < 1:
        raise ValueError("gains must be a non-empty vector")
    if np.any(gains <= 0) or p0 <= 0:
        raise ValueError("water filling needs positive gains and power")

    floors = noise/gains
    order = np.argsort(floors, kind='stable')
    sorted_floors = floors[order]

    n_active = gains.size
    mu = (p0 + np.sum(sorted_floors))/n_active
    while mu <= sorted_floors[n_active - 1] and n_active > 1:
        n_active -= 1
        mu = (p0 + np.sum(sorted_floors[:n_active]))/n_active

    p = np.maximum(mu - floors, 0.)
    p[order[n_active:]] = 0.

    if return_level:
        return p, mu
    return p


def zf_beamformer(h, p0, noise, allocation='waterfilling',
                  normalization='per_column'):
    """ Zero-forcing precoder for the row-channel matrix `h`.

    The directions a_k are the columns of the pseudoinverse
    h^H (h h^H)^-1, so h_u a_k = 0 for every u != k. Powers come from
    water-filling over the gains g_k = 1/||a_k||^2 (or an equal split).

    Parameters
    ----------
    h : K x N_A complex array
        Row k is the conjugate channel of user k; K <= N_A
    p0 : float
        Total transmit power (W)
    noise : float
        Noise power (W), used by water-filling
    allocation : str
        'waterfilling' or 'equal'
    normalization : str
        'per_column' scales each direction to norm sqrt(p_k);
        'literal' scales A P^(1/2) by the Frobenius norm of A

    Returns
    -------
    Beamformer

    """
    h = np.asarray(h, dtype=complex)
    k, n_ap = h.shape
    if k > n_ap:
        raise ValueError("ZF needs K <= N_A; got K=%d, N_A=%d" % (k, n_ap))
    if allocation not in ALLOCATIONS:
        raise ValueError("unknown power allocation '%s'" % allocation)
    if normalization not in NORMALIZATIONS:
        raise ValueError("unknown ZF normalization '%s'" % normalization)

    sv = linalg.svdvals(h)
    if sv[-1] < RANK_TOL*sv[0] or sv[0] == 0:
        raise SingularChannelError("channel is rank deficient (cond %.3g)"
                                   % (sv[0]/max(sv[-1], 1e-300)))

    a = linalg.pinv(h)
    norms = np.linalg.norm(a, axis=0)
    gains = 1./norms**2

    if allocation == 'waterfilling':
        p = water_filling(gains, p0, noise)
    else:
        p = np.full(k, p0/k)

    if normalization == 'per_column':
        w = a*(np.sqrt(p)/norms)[None, :]
    else:
        w = a*np.sqrt(p)[None, :]/np.linalg.norm(a)

    radiated = np.sum(np.abs(w)**2, axis=0)
    return Beamformer(w, radiated, gains)


def evaluate(h_eval, bf, noise, extra_interference=0.):
    """ SINR, rates and I/N of beamformer `bf` on channel `h_eval`.

    sinr_k = |h_k w_k|^2 / (sum_{u != k} |h_k w_u|^2 + extra + noise);
    I/N sums the inter-user terms over all k and divides by the noise
    only, so an additive jammer does not count as interference.

    Parameters
    ----------
    h_eval : K x N_A complex array
        Channel seen during data transmission
    bf : Beamformer
    noise : float
        Noise power (W)
    extra_interference : float
        Additional interference power at every receiver (W)

    Returns
    -------
    TrialMetrics

    """
    h_eval = np.asarray(h_eval)
    if h_eval.shape != (bf.w.shape[1], bf.w.shape[0]):
        raise ValueError("channel %r does not match beamformer %r"
                         % (h_eval.shape, bf.w.shape))

    power = np.abs(h_eval @ bf.w)**2
    signal = np.diag(power).copy()
    off_diagonal = ~np.eye(power.shape[0], dtype=bool)
    interference = np.where(off_diagonal, power, 0.).sum(axis=1)

    sinr = signal/(interference + extra_interference + noise)
    rates = np.log2(1. + sinr)
    i_over_n = float(np.sum(interference)/noise)

    return TrialMetrics(sinr, rates, float(np.sum(rates)), i_over_n, 0, None)
