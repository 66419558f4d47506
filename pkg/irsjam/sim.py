""" Monte Carlo engine: the four downlink scenarios (no jammer, active
jammer, CSI-based passive jammer and the fully-passive jammer) and the
parameter sweeps over transmit power, quantization bits and IRS size.

Random streams
--------------
Every trial draws from generators keyed on the master seed:

    channels:  (axis code, axis value bits, trial, 0)
    attack:    (axis code, axis value bits, trial, scheme code)

where "axis value bits" is the IEEE-754 bit pattern of the float axis
value, so a value keeps its streams when the sweep list is reordered.
Each scheme re-creates the channel stream, so at a fixed (axis value,
trial) all schemes run on the same realization. Results therefore do not
depend on execution order or on the number of workers.

"""

import logging
from collections import namedtuple

import numpy as np
import pandas as pd
import xarray as xr
import dask

from . beamforming import (zf_beamformer, evaluate, SingularChannelError,
                           ALLOCATIONS, NORMALIZATIONS)
from . channel import (ArraySpec, FadingSpec, sample_geometry,
                       sample_channels, assemble_combined)
from . pj_opt import PjProblem, RcgOptions, csi_pj_attack
from . reflect import PhaseAlphabet, random_reflect, MAX_BITS
from . utilities import (dbm_to_watts, db_to_linear, noise_power_dbm,
                         substream, append_history)

logger = logging.getLogger(__name__)

__all__ = ['ScenarioConfig', 'SweepResult', 'TrialAbortError',
           'default_config', 'draw_scenario', 'run_trial_no_jammer',
           'run_trial_active_jammer', 'run_trial_csi_pj', 'run_trial_fpj',
           'run_point_trial', 'scheme_labels', 'axis_points', 'sweep',
           'csi_pj_n_irs',
           'SCHEMES', 'AXES']

SCHEMES = ('no_jammer', 'aj', 'csi_pj', 'fpj')
AXES = ('power', 'bits', 'elements')

_AXIS_CODES = {'power': 0, 'bits': 1, 'elements': 2}
#: Axis code of single operating-point runs
POINT_CODE = 3
_SCHEME_CODES = {'no_jammer': 1, 'aj': 2, 'csi_pj': 3, 'fpj': 4}
_CHANNEL_CODE = 0

#: Attacked rates may exceed the baseline by this much before a warning
_RATE_SLACK = 1e-9


class TrialAbortError(RuntimeError):
    """ A trial kept hitting singular channels after every allowed
    redraw. """
    pass


_CONFIG_FIELDS = [
    'arrays', 'ap_position', 'irs_position', 'cluster_center',
    'cluster_radius', 'fading', 'k_users', 'p0_dbm', 'bandwidth_hz',
    'quant_bits', 'p0_dbm_sweep', 'quant_bits_sweep', 'n_elements_sweep',
    'aj_over_n_db', 'n_trials', 'master_seed', 'power_allocation',
    'zf_normalization', 'irs_enabled', 'schemes', 'max_resamples',
    'csi_pj_irs', 'rcg',
]


class ScenarioConfig(namedtuple('ScenarioConfig', _CONFIG_FIELDS)):
    """ Everything needed to reproduce a run.

    `p0_dbm`, `quant_bits` and `arrays` fix the operating point; the
    `*_sweep` lists hold the values visited along each sweep axis. The
    noise power is derived from `bandwidth_hz` on every access.

    """
    __slots__ = ()

    @property
    def noise_dbm(self):
        return noise_power_dbm(self.bandwidth_hz)

    @property
    def noise_watts(self):
        return float(dbm_to_watts(self.noise_dbm))

    @property
    def p0_watts(self):
        return float(dbm_to_watts(self.p0_dbm))

    @property
    def alphabet(self):
        return PhaseAlphabet(self.quant_bits)

    def validate(self):
        """ Check ranges and cross-field constraints.

        Raises
        ------
        ValueError
            Message prefixed with the dotted name of the offending key

        """
        def fail(key, msg):
            raise ValueError("%s: %s" % (key, msg))

        if self.k_users < 1:
            fail('system.k_users', "need at least one user")
        if self.k_users > self.arrays.n_ap:
            fail('system.k_users', "K exceeds antenna count (%d > %d)"
                 % (self.k_users, self.arrays.n_ap))
        if self.bandwidth_hz <= 0:
            fail('system.bandwidth_hz', "must be positive")
        if self.cluster_radius < 0:
            fail('geometry.cluster_radius', "must be non-negative")
        if not 0 <= self.quant_bits <= MAX_BITS:
            fail('system.quant_bits', "must lie in [0, %d]" % MAX_BITS)
        if any(not 0 <= b <= MAX_BITS for b in self.quant_bits_sweep):
            fail('sweep.quant_bits', "must lie in [0, %d]" % MAX_BITS)
        if any(min(ny, nz) < 1 for ny, nz in self.n_elements_sweep):
            fail('sweep.n_elements', "IRS dimensions must be >= 1")
        if self.n_trials < 1:
            fail('experiment.n_trials', "must be >= 1")
        if self.master_seed < 0:
            fail('experiment.master_seed', "must be non-negative")
        if self.max_resamples < 0:
            fail('experiment.max_resamples', "must be non-negative")
        if self.power_allocation not in ALLOCATIONS:
            fail('system.power_allocation', "one of %s" % (ALLOCATIONS, ))
        if self.zf_normalization not in NORMALIZATIONS:
            fail('system.zf_normalization', "one of %s" % (NORMALIZATIONS, ))
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown or not self.schemes:
            fail('experiment.schemes', "choose from %s" % (SCHEMES, ))
        if self.csi_pj_irs is not None and min(self.csi_pj_irs) < 1:
            fail('experiment.csi_pj_irs', "IRS dimensions must be >= 1")
        if len(set(scheme_labels(self))) != len(scheme_labels(self)):
            fail('sweep.aj_over_n_db', "ratios must give distinct labels"
                 " (%s)" % ", ".join(_aj_labels(self)))
        return self


def default_config():
    """ The reference scenario: 12-antenna AP at the origin, a 32 x 32 IRS
    at (5, 5, 2) m and four users in a 10 m disk around (200, 0, 0) m,
    180 kHz bandwidth. """
    return ScenarioConfig(
        arrays=ArraySpec(12, 32, 32),
        ap_position=(0., 0., 0.),
        irs_position=(5., 5., 2.),
        cluster_center=(200., 0., 0.),
        cluster_radius=10.,
        fading=FadingSpec(2., 2., (32.6, 22.), (35.6, 20.), (35.6, 22.)),
        k_users=4,
        p0_dbm=20.,
        bandwidth_hz=180e3,
        quant_bits=1,
        p0_dbm_sweep=(-10., 0., 10., 20., 30.),
        quant_bits_sweep=(1, 2, 3, 4),
        n_elements_sweep=((8, 8), (16, 16), (32, 32)),
        aj_over_n_db=(5., 10.),
        n_trials=200,
        master_seed=20240917,
        power_allocation='waterfilling',
        zf_normalization='per_column',
        irs_enabled=True,
        schemes=SCHEMES,
        max_resamples=16,
        csi_pj_irs=None,
        rcg=RcgOptions(),
    )

#####################################################################
## SINGLE TRIALS

def draw_scenario(cfg, rng):
    """ Place the users and draw one ChannelSet. With `irs_enabled` off
    the IRS->LU channels are zeroed after sampling so the stream
    advances identically. """
    geometry = sample_geometry(rng, cfg.ap_position, cfg.irs_position,
                               cfg.cluster_center, cfg.cluster_radius,
                               cfg.k_users)
    channels = sample_channels(rng, geometry, cfg.arrays, cfg.fading)
    if not cfg.irs_enabled:
        channels = channels.without_irs()
    return channels


def _zf(cfg, h):
    return zf_beamformer(h, cfg.p0_watts, cfg.noise_watts,
                         allocation=cfg.power_allocation,
                         normalization=cfg.zf_normalization)


def _resampled(cfg, rng, attempt, label):
    """ Run `attempt(channels)` on fresh draws until no precoder hits a
    singular channel; at most `cfg.max_resamples` redraws. """
    for n_redraws in range(cfg.max_resamples + 1):
        channels = draw_scenario(cfg, rng)
        try:
            metrics = attempt(channels)
        except SingularChannelError as err:
            logger.debug("%s: %s; redrawing", label, err)
            continue
        return metrics._replace(n_resamples=n_redraws,
                                channel_digest=channels.digest())
    raise TrialAbortError("%s: singular channel after %d redraws"
                          % (label, cfg.max_resamples))


def run_trial_no_jammer(cfg, rng):
    """ ZF on the direct channel, evaluated on the direct channel.

    Parameters
    ----------
    cfg : ScenarioConfig
    rng : numpy.random.Generator
        Channel stream

    Returns
    -------
    TrialMetrics

    """
    def attempt(channels):
        w_d = _zf(cfg, channels.h_direct)
        return evaluate(channels.h_direct, w_d, cfg.noise_watts)
    return _resampled(cfg, rng, attempt, 'no_jammer')


def run_trial_active_jammer(cfg, rng, aj_over_n_db):
    """ As `run_trial_no_jammer` with jamming power
    P_J = noise * 10^(aj_over_n_db / 10) at every receiver. """
    p_jam = cfg.noise_watts*float(db_to_linear(aj_over_n_db))

    def attempt(channels):
        w_d = _zf(cfg, channels.h_direct)
        return evaluate(channels.h_direct, w_d, cfg.noise_watts,
                        extra_interference=p_jam)
    return _resampled(cfg, rng, attempt, 'aj_%gdB' % aj_over_n_db)


def run_trial_csi_pj(cfg, rng, alphabet=None, attack_rng=None):
    """ The AP serves the users with ZF on the direct channel while an IRS
    with full CSI picks the reflect vector minimizing the sum rate.

    With `cfg.csi_pj_irs` set, the jammer controls only that corner of
    the IRS: the full ChannelSet is drawn as for every other scheme and
    then restricted with `ChannelSet.irs_subarray`.

    Parameters
    ----------
    cfg : ScenarioConfig
    rng : numpy.random.Generator
        Channel stream; also used for the random RCG starts when
        `attack_rng` is not given
    alphabet : PhaseAlphabet, optional
        Defaults to `cfg.alphabet`
    attack_rng : numpy.random.Generator, optional

    Returns
    -------
    TrialMetrics

    """
    alphabet = cfg.alphabet if alphabet is None else alphabet

    def attempt(channels):
        if cfg.csi_pj_irs is not None:
            channels = channels.irs_subarray(cfg.arrays.n_irs_y,
                                             *cfg.csi_pj_irs)
        prob = PjProblem(channels, _zf(cfg, channels.h_direct),
                         cfg.noise_watts)
        starts_rng = rng if attack_rng is None else attack_rng
        phi = csi_pj_attack(prob, alphabet, cfg.rcg, rng=starts_rng)
        attacked = evaluate(assemble_combined(channels, phi), prob.w_d,
                            cfg.noise_watts)
        baseline = evaluate(channels.h_direct, prob.w_d, cfg.noise_watts)
        if attacked.sum_rate > baseline.sum_rate + _RATE_SLACK:
            logger.warning("CSI-PJ raised the sum rate (%.6g > %.6g)",
                           attacked.sum_rate, baseline.sum_rate)
        return attacked
    return _resampled(cfg, rng, attempt, 'csi_pj')


def run_trial_fpj(cfg, rng, alphabet=None, attack_rng=None,
                  age_channel=True):
    """ Fully-passive jamming by active channel aging.

    The AP designs ZF on the combined channel under a random reflect
    vector phi1 (pilot phase); data is then sent while the IRS shows an
    independent random phi2. With `age_channel` off, phi2 = phi1.

    Parameters
    ----------
    cfg : ScenarioConfig
    rng : numpy.random.Generator
        Channel stream; also supplies the reflect vectors when
        `attack_rng` is not given
    alphabet : PhaseAlphabet, optional
        Defaults to `cfg.alphabet`
    attack_rng : numpy.random.Generator, optional
    age_channel : bool

    Returns
    -------
    TrialMetrics

    """
    alphabet = cfg.alphabet if alphabet is None else alphabet

    def attempt(channels):
        phases_rng = rng if attack_rng is None else attack_rng
        phi1 = random_reflect(phases_rng, channels.n_irs, alphabet)
        phi2 = random_reflect(phases_rng, channels.n_irs, alphabet) \
            if age_channel else phi1
        w1 = _zf(cfg, assemble_combined(channels, phi1))
        return evaluate(assemble_combined(channels, phi2), w1,
                        cfg.noise_watts)
    return _resampled(cfg, rng, attempt, 'fpj')

#####################################################################
## SWEEPS

def _aj_labels(cfg):
    return ["aj_%gdB" % r for r in cfg.aj_over_n_db]


def scheme_labels(cfg, schemes=None):
    """ Output labels, one per active-jammer ratio for 'aj'. """
    schemes = cfg.schemes if schemes is None else schemes
    labels = []
    for scheme in schemes:
        if scheme == 'aj':
            labels.extend(_aj_labels(cfg))
        else:
            labels.append(scheme)
    return sorted(labels)


def axis_points(cfg, axis):
    """ (axis value, config at that point) for every sweep value. The
    elements axis is labelled by the total element count N_I. """
    if axis == 'power':
        return [(float(p), cfg._replace(p0_dbm=float(p)))
                for p in cfg.p0_dbm_sweep]
    elif axis == 'bits':
        return [(float(b), cfg._replace(quant_bits=int(b)))
                for b in cfg.quant_bits_sweep]
    elif axis == 'elements':
        a = cfg.arrays
        return [(float(ny*nz),
                 cfg._replace(arrays=ArraySpec(a.n_ap, ny, nz,
                                               a.element_spacing)))
                for ny, nz in cfg.n_elements_sweep]
    else:
        raise ValueError("unknown sweep axis '%s'; choose from %s"
                         % (axis, AXES))


def csi_pj_n_irs(cfg):
    """ Number of IRS elements the CSI-based jammer controls under `cfg`.
    """
    a = cfg.arrays
    if cfg.csi_pj_irs is None:
        return a.n_irs
    n_y, n_z = cfg.csi_pj_irs
    return min(n_y, a.n_irs_y)*min(n_z, a.n_irs_z)


def _value_key(value):
    """ Non-negative integer stream key for a float axis value. """
    return int(np.float64(value).view(np.uint64))


def run_point_trial(cfg, axis_code, value, trial, labels):
    """ Run every scheme in `labels` for one (axis value, trial).

    Parameters
    ----------
    cfg : ScenarioConfig
        Config at this axis value
    axis_code : int
    value : float
        Axis value; keys the random streams together with `trial`
    trial : int
    labels : sequence of str
        Output labels as given by `scheme_labels(cfg)`

    Returns
    -------
    (results, errors) : dict of label -> TrialMetrics or None, list of str

    """
    seed, key = cfg.master_seed, _value_key(value)
    ratios = dict(zip(_aj_labels(cfg), cfg.aj_over_n_db))
    results, errors = {}, []
    for label in labels:
        scheme = 'aj' if label in ratios else label
        rng = substream(seed, axis_code, key, trial, _CHANNEL_CODE)
        attack_rng = substream(seed, axis_code, key, trial,
                               _SCHEME_CODES[scheme])
        try:
            if scheme == 'no_jammer':
                metrics = run_trial_no_jammer(cfg, rng)
            elif scheme == 'aj':
                metrics = run_trial_active_jammer(cfg, rng, ratios[label])
            elif scheme == 'csi_pj':
                metrics = run_trial_csi_pj(cfg, rng, attack_rng=attack_rng)
            else:
                metrics = run_trial_fpj(cfg, rng, attack_rng=attack_rng)
        except TrialAbortError as err:
            results[label] = None
            errors.append("value %g trial %d: %s" % (value, trial, err))
            continue
        results[label] = metrics
    return results, errors


class SweepResult(object):
    """ Per-trial outcomes of a sweep and their aggregates.

    Wraps an xarray.Dataset with variables `sum_rate`, `i_over_n_db` and
    `n_resamples` on dims (axis_value, scheme, trial). Aborted trials are
    NaN and excluded from every statistic.

    """

    def __init__(self, ds, errors=None):
        self.ds = ds
        self.errors = list(errors or [])

    @property
    def axis_name(self):
        return self.ds.attrs['axis_name']

    @property
    def schemes(self):
        return [str(s) for s in self.ds['scheme'].values]

    @property
    def n_aborted(self):
        return int(self.ds['sum_rate'].isnull().sum())

    def summary(self):
        """ Means and standard errors per (axis_value, scheme).

        Standard errors are std(ddof=1)/sqrt(n) over successful trials
        and NaN when fewer than two succeeded. I/N statistics average the
        per-trial dB values.

        Returns
        -------
        pandas.DataFrame indexed by (axis_value, scheme)

        """
        ds = self.ds
        n = ds['sum_rate'].count('trial')
        stats = xr.Dataset({
            'mean_sum_rate_bps_hz': ds['sum_rate'].mean('trial'),
            'stderr_sum_rate': _stderr(ds['sum_rate'], n),
            'mean_i_over_n_db': ds['i_over_n_db'].mean('trial'),
            'stderr_i_over_n_db': _stderr(ds['i_over_n_db'], n),
            'n_trials': n,
            'n_resamples': ds['n_resamples'].sum('trial').astype(int),
        })
        df = stats.to_dataframe()
        return df.reorder_levels(['axis_value', 'scheme']).sort_index()

    def to_frame(self):
        """ Summary laid out in CSV column order, one row per point and
        scheme sorted by axis value then scheme label. """
        df = self.summary().reset_index()
        df.insert(0, 'axis_name', self.axis_name)
        columns = ['axis_name', 'axis_value', 'scheme',
                   'mean_sum_rate_bps_hz', 'stderr_sum_rate',
                   'mean_i_over_n_db', 'stderr_i_over_n_db',
                   'n_trials', 'n_resamples']
        df = df[columns].sort_values(['axis_value', 'scheme'],
                                     kind='mergesort')
        return df.reset_index(drop=True)

    def paired_difference(self, scheme_a, scheme_b, var='sum_rate'):
        """ Trial-paired difference `scheme_a - scheme_b` of `var`.

        Returns
        -------
        pandas.DataFrame indexed by axis_value with columns mean, stderr, n

        """
        diff = self.ds[var].sel(scheme=scheme_a) \
            - self.ds[var].sel(scheme=scheme_b)
        n = diff.count('trial')
        out = xr.Dataset({'mean': diff.mean('trial'),
                          'stderr': _stderr(diff, n), 'n': n})
        return out.to_dataframe()


def _stderr(da, n):
    std = da.std('trial', ddof=1)
    return (std/np.sqrt(n)).where(n >= 2)


def sweep(cfg, axis, schemes=None, parallel=1):
    """ Run `cfg.n_trials` trials of every scheme at every point of a
    sweep axis.

    Parameters
    ----------
    cfg : ScenarioConfig
    axis : str
        'power', 'bits' or 'elements'
    schemes : sequence of str, optional
        Subset of SCHEMES; defaults to `cfg.schemes`
    parallel : int
        Worker processes; 1 runs everything in this process

    Returns
    -------
    SweepResult

    """
    cfg.validate()
    points = axis_points(cfg, axis)
    labels = scheme_labels(cfg, schemes)
    axis_code = _AXIS_CODES[axis]
    logger.info("sweep %s: %d points x %d trials, schemes %s", axis,
                len(points), cfg.n_trials, ", ".join(labels))

    values = [v for v, _ in points]
    if len(set(values)) != len(values):
        raise ValueError("sweep %s: duplicate axis values %s"
                         % (axis, values))

    # Elements each scheme actually drives, per point
    n_irs = np.array([[csi_pj_n_irs(point_cfg) if label == 'csi_pj'
                       else point_cfg.arrays.n_irs for label in labels]
                      for _, point_cfg in points])
    if cfg.csi_pj_irs is not None and 'csi_pj' in labels:
        capped = n_irs[:, labels.index('csi_pj')]
        logger.warning("CSI-PJ drives a %dx%d sub-array: N_I = %s",
                       cfg.csi_pj_irs[0], cfg.csi_pj_irs[1],
                       ", ".join("%d" % n for n in capped))

    tasks = [dask.delayed(run_point_trial)(point_cfg, axis_code, v, t,
                                           labels)
             for v, point_cfg in points
             for t in range(cfg.n_trials)]
    if parallel > 1:
        outputs = dask.compute(*tasks, scheduler='processes',
                               num_workers=int(parallel))
    else:
        outputs = dask.compute(*tasks, scheduler='synchronous')

    shape = (len(points), len(labels), cfg.n_trials)
    sum_rate = np.full(shape, np.nan)
    i_over_n_db = np.full(shape, np.nan)
    n_resamples = np.zeros(shape, dtype=int)
    errors = []
    for flat, (results, errs) in enumerate(outputs):
        i, t = divmod(flat, cfg.n_trials)
        errors.extend(errs)
        for j, label in enumerate(labels):
            metrics = results[label]
            if metrics is None:
                continue
            sum_rate[i, j, t] = metrics.sum_rate
            i_over_n_db[i, j, t] = metrics.i_over_n_db
            n_resamples[i, j, t] = metrics.n_resamples

    for err in errors:
        logger.warning("trial aborted, %s", err)

    dims = ('axis_value', 'scheme', 'trial')
    ds = xr.Dataset(
        {'sum_rate': (dims, sum_rate, {'units': 'bit/s/Hz'}),
         'i_over_n_db': (dims, i_over_n_db, {'units': 'dB'}),
         'n_resamples': (dims, n_resamples),
         'n_irs': (('axis_value', 'scheme'), n_irs)},
        coords={'axis_value': values,
                'scheme': labels,
                'trial': np.arange(cfg.n_trials)},
        attrs={'axis_name': axis, 'master_seed': int(cfg.master_seed),
               'n_trials': int(cfg.n_trials)}
    )
    ds = append_history(ds, extra_info="sweep %s" % axis)

    result = SweepResult(ds, errors)
    for value, row in result.summary().groupby(level='axis_value'):
        logger.info("  %s = %g: %s", axis, value, ", ".join(
            "%s %.3f" % (s, r) for (_, s), r
            in row['mean_sum_rate_bps_hz'].items()))
    return result
