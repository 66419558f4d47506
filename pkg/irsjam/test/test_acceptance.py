""" End-to-end behaviour on the reference scenario at reduced trial
counts: zero-forcing exactness, the aging null control, jamming
effectiveness against the active jammer, sensitivity to the phase
resolution, the two passive jammers side by side and gradient cost
scaling. """

import unittest

import numpy as np

from .. pj_opt import PjProblem, gradient_scaling
from .. reflect import PhaseAlphabet
from .. sim import (default_config, run_trial_no_jammer, run_trial_csi_pj,
                    run_trial_fpj, sweep)
from .. utilities import substream
from . import random_channels, small_config

#: Significance of the paired orderings, in standard errors
N_SIGMA = 3.


class TestInterferenceFree(unittest.TestCase):

    def test_zero_forcing_exact(self):
        cfg = small_config(2, 2)
        worst = max(run_trial_no_jammer(cfg, substream(100, t)).i_over_n
                    for t in range(1000))
        self.assertLess(worst, 1e-9)

    def test_aging_null_control(self):
        cfg = default_config()
        worst = max(run_trial_fpj(cfg, substream(101, t),
                                  attack_rng=substream(101, t, 4),
                                  age_channel=False).i_over_n
                    for t in range(200))
        self.assertLess(worst, 1e-9)


class TestJammingEffectiveness(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cfg = default_config()._replace(
            p0_dbm_sweep=(0., 10., 20., 30.), n_trials=40,
            schemes=('no_jammer', 'aj', 'fpj'))
        cls.result = sweep(cfg, 'power')
        cls.summary = cls.result.summary()

    def _assert_paired_less(self, lower, higher, p0):
        diff = self.result.paired_difference(higher, lower).loc[p0]
        self.assertGreater(diff['mean'], N_SIGMA*diff['stderr'],
                           "%s vs %s at %g dBm" % (lower, higher, p0))

    def test_active_jammer_ordering(self):
        for p0 in (0., 10., 20., 30.):
            self._assert_paired_less('aj_5dB', 'no_jammer', p0)
            self._assert_paired_less('aj_10dB', 'aj_5dB', p0)

    def test_fpj_beats_active_jammer(self):
        for p0 in (0., 10., 20., 30.):
            self._assert_paired_less('fpj', 'aj_5dB', p0)

    def test_fpj_interference(self):
        row = self.summary.loc[(20., 'fpj')]
        self.assertGreater(row['mean_i_over_n_db'],
                           N_SIGMA*row['stderr_i_over_n_db'])
        self.assertEqual(self.summary.loc[(20., 'no_jammer'),
                                          'mean_i_over_n_db'], -120.)

    def test_more_power_does_not_help(self):
        gap = self.result.paired_difference('no_jammer', 'fpj')
        steps = np.diff(gap['mean'].values)
        slack = gap['stderr'].values[1:]
        self.assertTrue(np.all(steps > -slack), gap)
        clean = self.summary.xs('no_jammer', level='scheme')
        self.assertTrue(np.all(np.diff(clean['mean_sum_rate_bps_hz']) > 0))


class TestCsiPassiveJammer(unittest.TestCase):

    def test_lowers_rate_and_interferes(self):
        cfg = small_config(8, 8, p0_dbm_sweep=(20., ), n_trials=5,
                           schemes=('no_jammer', 'csi_pj'))
        result = sweep(cfg, 'power')
        diff = result.paired_difference('no_jammer', 'csi_pj').loc[20.]
        self.assertGreater(diff['mean'], 0.)
        row = result.summary().loc[(20., 'csi_pj')]
        self.assertGreater(row['mean_i_over_n_db'], 0.)


class TestQuantizationBits(unittest.TestCase):
    """ Paired over the same channel streams at N_I = 64; only the phase
    alphabet changes. """

    @classmethod
    def setUpClass(cls):
        cfg = small_config(8, 8)
        n_trials = 30
        cls.csi_pj = {b: np.empty(n_trials) for b in (1, 3)}
        cls.fpj = {b: np.empty(n_trials) for b in (1, 2, 3, 4)}
        for t in range(n_trials):
            for b in cls.csi_pj:
                cls.csi_pj[b][t] = run_trial_csi_pj(
                    cfg, substream(103, t), alphabet=PhaseAlphabet(b),
                    attack_rng=substream(103, t, 3)).sum_rate
            for b in cls.fpj:
                cls.fpj[b][t] = run_trial_fpj(
                    cfg, substream(103, t), alphabet=PhaseAlphabet(b),
                    attack_rng=substream(103, t, 4)).sum_rate

    def test_csi_pj_improves_with_bits(self):
        diff = self.csi_pj[1] - self.csi_pj[3]
        stderr = diff.std(ddof=1)/np.sqrt(diff.size)
        self.assertGreater(diff.mean(), N_SIGMA*stderr)

    def test_fpj_insensitive_to_bits(self):
        means = [r.mean() for r in self.fpj.values()]
        stderrs = [r.std(ddof=1)/np.sqrt(r.size) for r in self.fpj.values()]
        self.assertLess(max(means) - min(means), 2.*max(stderrs))


class TestPassiveJammerComparison(unittest.TestCase):
    """ CSI-based against fully-passive jamming at N_I = 64 and 256.

    In this channel model the CSI-based jammer interferes more than the
    fully-passive one, and its advantage widens with the IRS size. The
    reverse orderings are kept as expected failures, so a model change
    that flips them is reported as an unexpected success.

    """

    @classmethod
    def setUpClass(cls):
        cfg = default_config()._replace(
            n_elements_sweep=((8, 8), (16, 16)), n_trials=10,
            schemes=('csi_pj', 'fpj'))
        cls.result = sweep(cfg, 'elements')
        cls.gap = cls.result.paired_difference('csi_pj', 'fpj')
        cls.extra_in = cls.result.paired_difference('csi_pj', 'fpj',
                                                    var='i_over_n_db')

    def test_csi_pj_interferes_more(self):
        row = self.extra_in.loc[256.]
        self.assertGreater(row['mean'], N_SIGMA*row['stderr'])

    @unittest.expectedFailure
    def test_fpj_interferes_more(self):
        row = self.extra_in.loc[256.]
        self.assertGreater(-row['mean'], N_SIGMA*row['stderr'])

    def test_csi_pj_advantage_widens(self):
        gap = self.gap['mean']
        self.assertLess(gap.loc[256.], gap.loc[64.])
        self.assertLess(gap.loc[64.], 0.)

    @unittest.expectedFailure
    def test_fpj_advantage_widens(self):
        gap = self.gap['mean']
        self.assertGreater(gap.loc[256.], gap.loc[64.])


class TestGradientCost(unittest.TestCase):

    def test_quadratic_scaling(self):
        rng = np.random.default_rng(102)

        def factory(n):
            return PjProblem.from_channels(random_channels(rng, 4, 12, n),
                                           1., 1.)

        slope, _ = gradient_scaling(factory, [64, 128, 256, 512],
                                    repeats=7)
        self.assertGreater(slope, 1.6)
        self.assertLess(slope, 2.4)


if __name__ == "__main__":
    unittest.main()
