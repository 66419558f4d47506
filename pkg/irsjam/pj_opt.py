""" The CSI-based passive jammer: choose IRS phases that minimize the sum
rate of users served by a ZF precoder designed on the direct channel.

The discrete problem is relaxed to the complex circle manifold
|phi_n| = 1, solved by Riemannian conjugate gradient, and projected back
onto the phase alphabet. `brute_force_pj` enumerates small instances
exactly.

Notation
--------
With the precoder W_d fixed, the received amplitude of stream u at user
k is linear in phi:

    x_ku(phi) = phi^T a_ku + b_ku,
    a_ku[n] = H_I[k, n] (G W_d)[n, u],    b_ku = (H_d W_d)[k, u].

Gradients are taken with respect to the conjugate coordinates phi*;
the derivative of f along a direction d is then 2 Re(g^H d).

"""

import logging
import itertools
import time
from collections import namedtuple

import numpy as np
from scipy import stats

from . beamforming import zf_beamformer
from . reflect import ReflectVector, quantize, MODULUS_TOL

logger = logging.getLogger(__name__)

__all__ = ['PjProblem', 'RcgOptions', 'RcgResult', 'InstanceTooLargeError',
           'pj_objective', 'pj_euclidean_gradient', 'rcg_minimize',
           'csi_pj_attack', 'refine_discrete', 'brute_force_pj',
           'gradient_scaling']

#: Largest brute-force search space (number of candidate vectors)
MAX_CANDIDATES = 2**20

#: Candidates evaluated per vectorized batch
_BATCH = 4096

_LN2 = np.log(2.)


class InstanceTooLargeError(ValueError):
    """ The exhaustive search space exceeds MAX_CANDIDATES. """
    pass


class RcgOptions(namedtuple('RcgOptions', ['max_iters', 'grad_tol',
                                           'initial_step', 'shrink', 'slope',
                                           'max_backtracks', 'restart_period',
                                           'n_starts', 'local_search'])):
    """ Riemannian conjugate gradient settings.

    Attributes
    ----------
    max_iters : int
        Iteration cap
    grad_tol : float
        Stop once ||Riemannian gradient|| / sqrt(N_I) falls below this
    initial_step : float
        First Armijo trial step, applied to the search direction scaled to
        unit max-element magnitude
    shrink : float
        Backtracking factor in (0, 1)
    slope : float
        Armijo sufficient-decrease coefficient in (0, 1)
    max_backtracks : int
        Backtracks before the line search is declared failed
    restart_period : int
        Reset to steepest descent every this many iterations
    n_starts : int
        Starts of the attack: the all-ones vector plus n_starts - 1 random
    local_search : bool
        Polish each quantized start with `refine_discrete`, keeping it
        only where it lowers the discrete objective

    """
    __slots__ = ()

    def __new__(cls, max_iters=500, grad_tol=1e-6, initial_step=1.,
                shrink=0.5, slope=1e-4, max_backtracks=30, restart_period=20,
                n_starts=4, local_search=True):
        if int(max_iters) < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0 < slope < 1:
            raise ValueError("slope must lie in (0, 1)")
        if initial_step <= 0 or grad_tol < 0:
            raise ValueError("initial_step must be positive and grad_tol"
                             " non-negative")
        if int(max_backtracks) < 1 or int(restart_period) < 1 \
                or int(n_starts) < 1:
            raise ValueError("max_backtracks, restart_period and n_starts"
                             " must be >= 1")
        return super(RcgOptions, cls).__new__(
            cls, int(max_iters), float(grad_tol), float(initial_step),
            float(shrink), float(slope), int(max_backtracks),
            int(restart_period), int(n_starts), bool(local_search)
        )


RcgResult = namedtuple('RcgResult', ['phi', 'trace', 'n_iters', 'grad_norm',
                                     'status'])
RcgResult.__doc__ = """ Outcome of `rcg_minimize`.

`status` is 'converged', 'max_iters' or 'line_search_failed'; `trace`
holds the objective at the start and after every accepted step.
"""


class PjProblem(object):
    """ Sum-rate minimization instance for a fixed direct-channel precoder.

    Parameters
    ----------
    channels : ChannelSet
    w_d : Beamformer
        Precoder designed from `channels.h_direct` alone
    noise : float
        Noise power (W)

    """

    def __init__(self, channels, w_d, noise):
        if w_d.w.shape != (channels.n_ap, channels.k_users):
            raise ValueError("precoder shape %r does not match channels"
                             % (w_d.w.shape, ))
        self.channels = channels
        self.w_d = w_d
        self.noise = float(noise)

        gw = channels.g_ap_irs @ w_d.w
        #: a[k, u, n]
        self.a = channels.h_irs_lu[:, None, :]*gw.T[None, :, :]
        #: b[k, u]
        self.b = channels.h_direct @ w_d.w
        self._q_total = None
        self._c_total = None

    @classmethod
    def from_channels(cls, channels, p0, noise, **zf_kws):
        """ Build the problem with W_d = ZF on the direct channel. """
        w_d = zf_beamformer(channels.h_direct, p0, noise, **zf_kws)
        return cls(channels, w_d, noise)

    @property
    def k_users(self):
        return self.b.shape[0]

    @property
    def n_irs(self):
        return self.a.shape[2]

    def _quadratic_forms(self):
        """ Q_k = sum_u conj(a_ku) a_ku^T and c_k = sum_u b_ku conj(a_ku),
        so that dT_k/dphi* = Q_k phi + c_k for the total received power
        T_k = sum_u |x_ku|^2. Built once; O(K^2 N_I^2). """
        if self._q_total is None:
            self._q_total = np.einsum('kun,kum->knm', self.a.conj(), self.a)
            self._c_total = np.einsum('ku,kun->kn', self.b, self.a.conj())
        return self._q_total, self._c_total

    def amplitudes(self, phis):
        """ x[m, k, u] for a batch of reflect vectors phis[m, n]. """
        phis = np.atleast_2d(phis)
        return np.einsum('mn,kun->mku', phis, self.a) + self.b[None]

    def sum_rates(self, phis):
        """ Sum rate for every row of `phis`. """
        return _sum_rates(self.amplitudes(phis), self.noise)


def _sum_rates(x, noise):
    """ Sum rates from amplitudes x[..., k, u]. """
    power = np.abs(x)**2
    total = power.sum(axis=-1)
    signal = np.diagonal(power, axis1=-2, axis2=-1)
    interference = total - signal
    # log2(1 + S/(I + N)) = log2(N + T) - log2(N + I)
    rates = np.log2(noise + total) \
        - np.log2(noise + np.maximum(interference, 0.))
    return rates.sum(axis=-1)


def _check_phi(phi_bar, prob):
    phi_bar = np.asarray(getattr(phi_bar, 'entries', phi_bar), dtype=complex)
    if phi_bar.shape != (prob.n_irs, ):
        raise ValueError("reflect vector has shape %r; problem has %d"
                         " elements" % (phi_bar.shape, prob.n_irs))
    if np.max(np.abs(np.abs(phi_bar) - 1.)) > MODULUS_TOL:
        raise ValueError("reflect vector is not unit modulus")
    return phi_bar


def pj_objective(phi_bar, prob):
    """ Sum rate R_sum(phi_bar) under the fixed precoder W_d; the attack
    minimizes this value.

    Parameters
    ----------
    phi_bar : array-like of N_I unit-modulus complex values
    prob : PjProblem

    Returns
    -------
    float

    """
    phi_bar = _check_phi(phi_bar, prob)
    return float(prob.sum_rates(phi_bar)[0])


def pj_euclidean_gradient(phi_bar, prob):
    """ Gradient of `pj_objective` with respect to conj(phi_bar).

    R_sum = sum_k log2(N + T_k) - log2(N + I_k) with T_k the total and I_k
    the interference power at user k. Their gradients come from the
    cached quadratic forms, at O(K N_I^2) per call after an O(K^2 N_I^2)
    set-up.

    Returns
    -------
    array of N_I complex values

    """
    phi_bar = _check_phi(phi_bar, prob)
    q_total, c_total = prob._quadratic_forms()

    x = prob.amplitudes(phi_bar)[0]
    power = np.abs(x)**2
    total = power.sum(axis=1)
    signal = np.diag(power)
    interference = np.maximum(total - signal, 0.)

    grad_total = q_total @ phi_bar + c_total
    idx = np.arange(prob.k_users)
    own = x[idx, idx][:, None]*prob.a[idx, idx].conj()
    grad_interference = grad_total - own

    weights_t = 1./(_LN2*(prob.noise + total))
    weights_i = 1./(_LN2*(prob.noise + interference))
    return weights_t @ grad_total - weights_i @ grad_interference


def _project(phi, v):
    """ Tangent-space projection at phi on the complex circle manifold. """
    return v - np.real(v*phi.conj())*phi


def _retract(phi, step):
    """ Element-wise normalization of phi + step. """
    y = phi + step
    mag = np.abs(y)
    out = phi.copy()
    ok = mag > 0
    out[ok] = y[ok]/mag[ok]
    return out


def rcg_minimize(prob, opts, init):
    """ Minimize `pj_objective` over the unit-modulus manifold.

    Polak-Ribiere+ conjugate directions, vector transport by projection,
    Armijo backtracking from `opts.initial_step` (relative to the
    direction's largest element), and a steepest-descent restart every
    `opts.restart_period` iterations or whenever the conjugate direction
    fails to descend.

    Parameters
    ----------
    prob : PjProblem
    opts : RcgOptions
    init : array-like of N_I unit-modulus complex values

    Returns
    -------
    RcgResult

    """
    phi = _check_phi(init, prob)
    phi = phi/np.abs(phi)
    n = phi.size

    f = pj_objective(phi, prob)
    trace = [f]
    rgrad = _project(phi, pj_euclidean_gradient(phi, prob))
    direction = -rgrad
    status = 'max_iters'
    grad_norm = np.linalg.norm(rgrad)/np.sqrt(n)

    n_iters = 0
    for n_iters in range(1, opts.max_iters + 1):
        grad_norm = np.linalg.norm(rgrad)/np.sqrt(n)
        if grad_norm <= opts.grad_tol:
            status = 'converged'
            break

        slope = 2.*np.real(np.vdot(rgrad, direction))
        if slope >= 0:
            direction = -rgrad
            slope = -2.*np.real(np.vdot(rgrad, rgrad))

        t = opts.initial_step/np.max(np.abs(direction))
        for _ in range(opts.max_backtracks):
            candidate = _retract(phi, t*direction)
            f_new = pj_objective(candidate, prob)
            if f_new <= f + opts.slope*t*slope:
                break
            t *= opts.shrink
        else:
            status = 'line_search_failed'
            logger.warning("RCG line search failed at iteration %d"
                           " (objective %.6g)", n_iters, f)
            break

        rgrad_new = _project(candidate,
                             pj_euclidean_gradient(candidate, prob))
        if n_iters % opts.restart_period == 0:
            beta = 0.
        else:
            moved = _project(candidate, rgrad)
            beta = np.real(np.vdot(rgrad_new, rgrad_new - moved)) \
                / np.real(np.vdot(rgrad, rgrad))
            beta = max(beta, 0.)
        direction = -rgrad_new + beta*_project(candidate, direction)

        phi, f, rgrad = candidate, f_new, rgrad_new
        trace.append(f)

    grad_norm = np.linalg.norm(rgrad)/np.sqrt(n)
    logger.debug("RCG %s after %d iterations: objective %.6g, |grad| %.3g",
                 status, n_iters, f, grad_norm)
    return RcgResult(phi, np.asarray(trace), n_iters, grad_norm, status)


def csi_pj_attack(prob, alphabet, opts, rng=None):
    """ Discrete reflect vector from the relaxed RCG solution.

    Starts RCG from the all-ones vector and, when `rng` is given, from
    `opts.n_starts - 1` uniformly random phase vectors; each result is
    quantized to `alphabet`, optionally polished by `refine_discrete`, and
    the lowest discrete sum rate wins (the earliest start on ties).

    Parameters
    ----------
    prob : PjProblem
    alphabet : PhaseAlphabet
    opts : RcgOptions
    rng : numpy.random.Generator, optional
        Source of the random starts; without it only all-ones is used

    Returns
    -------
    ReflectVector

    """
    n = prob.n_irs
    starts = [np.ones(n, dtype=complex)]
    if rng is not None:
        for _ in range(opts.n_starts - 1):
            starts.append(np.exp(2j*np.pi*rng.uniform(0., 1., n)))

    best, best_rate = None, np.inf
    for i, init in enumerate(starts):
        result = rcg_minimize(prob, opts, init)
        candidate = quantize(result.phi, alphabet)
        rate = pj_objective(candidate.entries, prob)
        logger.debug("start %d: relaxed %.6g, quantized %.6g", i,
                     result.trace[-1], rate)
        if opts.local_search:
            refined = refine_discrete(prob, candidate, opts.max_iters)
            refined_rate = pj_objective(refined.entries, prob)
            if refined_rate <= rate:
                candidate, rate = refined, refined_rate
        if rate < best_rate:
            best, best_rate = candidate, rate
    return best


#: Amplitude entries evaluated per refinement block
_REFINE_BLOCK = 2**20


def refine_discrete(prob, vector, max_moves=500):
    """ Best-improvement search over single-element phase changes.

    Starting from a discrete reflect vector, repeatedly applies the one
    change of a single element to another alphabet phase that lowers the
    sum rate most, until no change helps or `max_moves` is reached. A
    change at element n moves every amplitude by (e^{j theta} - phi_n) a_ku[n],
    so one pass costs O(N_I |alphabet| K^2).

    Parameters
    ----------
    prob : PjProblem
    vector : ReflectVector
        Discrete start; its alphabet is searched
    max_moves : int

    Returns
    -------
    ReflectVector
        A vector no worse than `vector`

    """
    alphabet = vector.alphabet
    if alphabet is None:
        raise ValueError("refinement needs a discrete reflect vector")
    phases = np.array(vector.phases, dtype=float)
    _check_phi(np.exp(1j*phases), prob)
    values = alphabet.values
    choices = np.exp(1j*values)
    a_by_element = np.moveaxis(prob.a, 2, 0)
    k = prob.k_users
    chunk = max(1, _REFINE_BLOCK//(alphabet.size*k*k))

    phi = np.exp(1j*phases)
    x = prob.amplitudes(phi)[0]
    rate = _sum_rates(x, prob.noise)
    n_moves = 0
    while n_moves < max_moves:
        best = (rate, None, None)
        for start in range(0, prob.n_irs, chunk):
            stop = min(start + chunk, prob.n_irs)
            delta = choices[None, :] - phi[start:stop, None]
            cand = x + delta[:, :, None, None] \
                * a_by_element[start:stop, None]
            rates = _sum_rates(cand, prob.noise)
            i = np.unravel_index(np.argmin(rates), rates.shape)
            if rates[i] < best[0]:
                best = (rates[i], start + i[0], i[1])
        new_rate, n, s = best
        if n is None or new_rate >= rate - 1e-12*max(abs(rate), 1.):
            break
        x = x + (choices[s] - phi[n])*prob.a[:, :, n]
        phi[n], phases[n], rate = choices[s], values[s], new_rate
        n_moves += 1
    logger.debug("discrete refinement: %d moves, sum rate %.6g", n_moves,
                 rate)
    return ReflectVector(phases, alphabet)


def _candidate_batches(alphabet, n):
    """ Yield phase blocks of the alphabet^n enumeration in
    itertools.product order. """
    values = alphabet.values
    combos = itertools.product(range(alphabet.size), repeat=n)
    while True:
        block = list(itertools.islice(combos, _BATCH))
        if not block:
            return
        yield values[np.asarray(block)]


def brute_force_pj(prob, alphabet):
    """ Exact discrete minimizer by enumeration of alphabet^N_I.

    Candidates are visited in lexicographic order of their phase indices
    (element 0 most significant); the first minimizer is returned.

    Raises
    ------
    InstanceTooLargeError
        If the search space exceeds MAX_CANDIDATES

    """
    n = prob.n_irs
    if alphabet.bits*n > np.log2(MAX_CANDIDATES):
        raise InstanceTooLargeError(
            "refusing to enumerate 2^%d candidates (limit 2^%d)"
            % (alphabet.bits*n, int(np.log2(MAX_CANDIDATES)))
        )

    best_phases, best_rate = None, np.inf
    for phases in _candidate_batches(alphabet, n):
        rates = prob.sum_rates(np.exp(1j*phases))
        i = int(np.argmin(rates))
        if rates[i] < best_rate:
            best_phases, best_rate = phases[i], rates[i]
    return ReflectVector(best_phases, alphabet)


def gradient_scaling(prob_factory, n_elements, repeats=5):
    """ Time one Euclidean gradient per problem size and fit the log-log
    slope of time against N_I.

    Parameters
    ----------
    prob_factory : callable
        Maps N_I to a PjProblem
    n_elements : sequence of ints
    repeats : int
        Timings per size; the minimum is kept

    Returns
    -------
    (slope, seconds) : float, array of floats

    """
    seconds = []
    for n in n_elements:
        prob = prob_factory(n)
        phi = np.ones(n, dtype=complex)
        pj_euclidean_gradient(phi, prob)  # warm the quadratic-form cache
        best = np.inf
        for _ in range(repeats):
            tic = time.perf_counter()
            pj_euclidean_gradient(phi, prob)
            best = min(best, time.perf_counter() - tic)
        seconds.append(best)
        logger.debug("gradient at N_I=%d: %.3g s", n, best)
    seconds = np.asarray(seconds)
    fit = stats.linregress(np.log(n_elements), np.log(seconds))
    return fit.slope, seconds
