""" The CSI-based passive jammer: objective, gradient, RCG and the
exhaustive oracle. """

import itertools
import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from .. beamforming import evaluate
from .. channel import assemble_combined
from .. pj_opt import (PjProblem, RcgOptions, InstanceTooLargeError,
                       pj_objective, pj_euclidean_gradient, rcg_minimize,
                       csi_pj_attack, refine_discrete, brute_force_pj,
                       gradient_scaling)
from .. reflect import PhaseAlphabet, ReflectVector, random_reflect
from . import random_channels


def _problem(rng, k=3, n_ap=6, n_irs=16, noise=1.):
    return PjProblem.from_channels(random_channels(rng, k, n_ap, n_irs),
                                   1., noise)


def _unit(rng, n):
    return np.exp(2j*np.pi*rng.uniform(0., 1., n))


class TestObjective(unittest.TestCase):

    def test_matches_link_evaluation(self):
        rng = np.random.default_rng(0)
        prob = _problem(rng)
        phi = _unit(rng, 16)
        m = evaluate(assemble_combined(prob.channels, phi), prob.w_d,
                     prob.noise)
        self.assertAlmostEqual(pj_objective(phi, prob), m.sum_rate,
                               places=10)

    def test_accepts_reflect_vector(self):
        rng = np.random.default_rng(1)
        prob = _problem(rng)
        v = random_reflect(rng, 16, PhaseAlphabet(2))
        self.assertEqual(pj_objective(v, prob), pj_objective(v.entries, prob))

    def test_rejects_bad_input(self):
        prob = _problem(np.random.default_rng(2))
        with self.assertRaises(ValueError):
            pj_objective(np.ones(15), prob)
        with self.assertRaises(ValueError):
            pj_objective(np.full(16, 1.01), prob)


class TestGradient(unittest.TestCase):

    def test_finite_differences(self):
        rng = np.random.default_rng(10)
        eps = 1e-6
        for _ in range(20):
            k = int(rng.integers(2, 5))
            n_ap = int(rng.integers(max(k, 4), 13))
            n_irs = int(rng.integers(8, 65))
            prob = _problem(rng, k, n_ap, n_irs)
            phi = _unit(rng, n_irs)
            g = pj_euclidean_gradient(phi, prob)

            for _ in range(16):
                d = rng.standard_normal(n_irs) \
                    + 1j*rng.standard_normal(n_irs)
                d /= np.linalg.norm(d)
                f_plus = prob.sum_rates(phi + eps*d)[0]
                f_minus = prob.sum_rates(phi - eps*d)[0]
                numeric = (f_plus - f_minus)/(2*eps)
                analytic = 2.*np.real(np.vdot(g, d))
                self.assertLess(abs(numeric - analytic),
                                1e-6*max(np.linalg.norm(g), 1.))

    def test_quadratic_forms_cached(self):
        prob = _problem(np.random.default_rng(3))
        q1, _ = prob._quadratic_forms()
        q2, _ = prob._quadratic_forms()
        self.assertIs(q1, q2)
        self.assertEqual(q1.shape, (3, 16, 16))


class TestRcg(unittest.TestCase):

    def test_monotone_descent(self):
        rng = np.random.default_rng(4)
        prob = _problem(rng, n_irs=32)
        res = rcg_minimize(prob, RcgOptions(max_iters=200), _unit(rng, 32))
        self.assertTrue(np.all(np.diff(res.trace) <= 1e-12))
        self.assertLess(res.trace[-1], res.trace[0])
        assert_allclose(np.abs(res.phi), 1.)
        self.assertIn(res.status,
                      ('converged', 'max_iters', 'line_search_failed'))

    def test_max_iters(self):
        rng = np.random.default_rng(5)
        prob = _problem(rng, n_irs=32)
        res = rcg_minimize(prob, RcgOptions(max_iters=3, grad_tol=0.),
                           np.ones(32))
        self.assertEqual(res.status, 'max_iters')
        self.assertEqual(res.n_iters, 3)
        self.assertEqual(len(res.trace), 4)

    def test_converges_without_irs(self):
        rng = np.random.default_rng(6)
        chans = random_channels(rng, 2, 4, 8).without_irs()
        prob = PjProblem.from_channels(chans, 1., 1.)
        res = rcg_minimize(prob, RcgOptions(), np.ones(8))
        self.assertEqual(res.status, 'converged')
        self.assertEqual(res.n_iters, 1)

    def test_options_validated(self):
        for kws in ({'max_iters': 0}, {'shrink': 1.}, {'slope': 0.},
                    {'initial_step': -1.}, {'n_starts': 0}):
            with self.assertRaises(ValueError):
                RcgOptions(**kws)


class TestAttackAndOracle(unittest.TestCase):

    def test_brute_force_is_exact(self):
        rng = np.random.default_rng(7)
        prob = _problem(rng, k=2, n_ap=4, n_irs=4)
        alphabet = PhaseAlphabet(2)
        best = brute_force_pj(prob, alphabet)
        values = [pj_objective(np.exp(1j*np.array(c)), prob)
                  for c in itertools.product(alphabet.values, repeat=4)]
        self.assertAlmostEqual(pj_objective(best, prob), min(values),
                               places=12)
        self.assertEqual(best.alphabet, alphabet)

    def test_brute_force_first_minimizer(self):
        rng = np.random.default_rng(8)
        chans = random_channels(rng, 2, 4, 5).without_irs()
        prob = PjProblem.from_channels(chans, 1., 1.)
        best = brute_force_pj(prob, PhaseAlphabet(1))
        assert_array_equal(best.phases, 0.)

    def test_brute_force_guard(self):
        rng = np.random.default_rng(9)
        with self.assertRaises(InstanceTooLargeError):
            brute_force_pj(_problem(rng, n_irs=21), PhaseAlphabet(1))
        with self.assertRaises(InstanceTooLargeError):
            brute_force_pj(_problem(rng, n_irs=11), PhaseAlphabet(2))

    def test_oracle_sandwich(self):
        rng = np.random.default_rng(11)
        alphabet = PhaseAlphabet(1)
        matches = 0
        for i in range(20):
            prob = _problem(rng, k=3, n_ap=6, n_irs=8)
            exact = pj_objective(brute_force_pj(prob, alphabet), prob)
            attack = csi_pj_attack(prob, alphabet, RcgOptions(),
                                   rng=np.random.default_rng(100 + i))
            attacked = pj_objective(attack, prob)
            randoms = [pj_objective(random_reflect(rng, 8, alphabet), prob)
                       for _ in range(256)]
            self.assertLessEqual(exact, attacked + 1e-9)
            self.assertLessEqual(attacked, np.median(randoms))
            matches += attacked <= exact + 1e-9
        self.assertGreaterEqual(matches, 5)

    def test_local_search_never_hurts(self):
        rng = np.random.default_rng(14)
        alphabet = PhaseAlphabet(2)
        for i in range(5):
            prob = _problem(rng, k=3, n_ap=6, n_irs=12)
            plain = csi_pj_attack(prob, alphabet,
                                  RcgOptions(local_search=False),
                                  rng=np.random.default_rng(i))
            polished = csi_pj_attack(prob, alphabet, RcgOptions(),
                                     rng=np.random.default_rng(i))
            self.assertLessEqual(pj_objective(polished, prob),
                                 pj_objective(plain, prob) + 1e-12)

    def test_attack_without_rng_is_deterministic(self):
        rng = np.random.default_rng(12)
        prob = _problem(rng)
        a1 = csi_pj_attack(prob, PhaseAlphabet(2), RcgOptions())
        a2 = csi_pj_attack(prob, PhaseAlphabet(2), RcgOptions())
        assert_array_equal(a1.phases, a2.phases)
        self.assertLess(pj_objective(a1, prob),
                        pj_objective(np.ones(16), prob))


class TestRefineDiscrete(unittest.TestCase):

    def test_single_changes_cannot_improve(self):
        rng = np.random.default_rng(15)
        alphabet = PhaseAlphabet(2)
        prob = _problem(rng, k=3, n_ap=6, n_irs=10)
        start = random_reflect(rng, 10, alphabet)
        refined = refine_discrete(prob, start)
        best = pj_objective(refined, prob)
        self.assertLessEqual(best, pj_objective(start, prob))
        self.assertEqual(refined.alphabet, alphabet)
        for n in range(10):
            for value in alphabet.values:
                phases = np.array(refined.phases)
                phases[n] = value
                self.assertGreaterEqual(
                    pj_objective(np.exp(1j*phases), prob), best - 1e-9)

    def test_move_limit(self):
        rng = np.random.default_rng(16)
        prob = _problem(rng, n_irs=8)
        start = random_reflect(rng, 8, PhaseAlphabet(1))
        same = refine_discrete(prob, start, max_moves=0)
        assert_array_equal(same.phases, start.phases)

    def test_rejects_continuous_vector(self):
        prob = _problem(np.random.default_rng(17))
        with self.assertRaises(ValueError):
            refine_discrete(prob, ReflectVector(np.zeros(16)))


class TestGradientScaling(unittest.TestCase):

    def test_returns_timings(self):
        rng = np.random.default_rng(13)
        slope, seconds = gradient_scaling(
            lambda n: _problem(rng, n_irs=n), [16, 32], repeats=2)
        self.assertEqual(seconds.shape, (2, ))
        self.assertTrue(np.all(seconds > 0))
        self.assertTrue(np.isfinite(slope))


if __name__ == "__main__":
    unittest.main()
