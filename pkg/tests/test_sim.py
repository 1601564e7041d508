import math
import unittest

import szt.analysis
import szt.core
import szt.grad
import szt.prior
import szt.sim
from szt.sim import OuParams


class OuParams__init(unittest.TestCase):

    def test(self):
        params = OuParams(kappa = 2.0, sigma = 1.0, delta = 0.5, dt = 1e-4, trials = 10)
        self.assertEqual(params.lam, 1.0)

    def test__coarse_time_step(self):
        with self.assertRaises(szt.core.InvalidInputError):
            OuParams(kappa = 1.0, sigma = 1.0, delta = 0.5, dt = 0.01, trials = 10)

    def test__invalid(self):
        with self.assertRaises(szt.core.InvalidInputError):
            OuParams(kappa = 0.0, sigma = 1.0, delta = 0.5, dt = 1e-4, trials = 10)
        with self.assertRaises(szt.core.InvalidInputError):
            OuParams(kappa = 1.0, sigma = 1.0, delta = 0.5, dt = 1e-4, trials = 0)


class ou_mfpt_mc(unittest.TestCase):

    def test__matches_bvp(self):
        params = OuParams(kappa = 1.0, sigma = 1.0, delta = 0.5, dt = 1e-4, trials = 1000, seed = 1)
        estimate = szt.sim.ou_mfpt_mc(params)
        reference = szt.sim.ou_mfpt_bvp(1.0, 1.0, 0.5)
        self.assertEqual(estimate.trials_escaped, 1000)
        self.assertLess(abs(estimate.mean - reference), 0.05 * reference + estimate.ci95_halfwidth)

    def test__threads(self):
        params = OuParams(kappa = 1.0, sigma = 1.0, delta = 0.5, dt = 1e-3, trials = 1200, seed = 2)
        self.assertEqual(szt.sim.ou_mfpt_mc(params, threads = 1), szt.sim.ou_mfpt_mc(params, threads = 3))

    def test__non_escape(self):
        params = OuParams(kappa = 1.0, sigma = 1.0, delta = 0.5, dt = 1e-4, trials = 5)
        with self.assertRaises(szt.sim.NonEscapeError) as context:
            szt.sim.ou_mfpt_mc(params, max_steps = 1)
        self.assertEqual(context.exception.steps, 1)
        self.assertGreater(context.exception.remaining, 0)


class ou_mfpt_bvp(unittest.TestCase):

    def test__diffusion_limit(self):
        # Without mean reversion, the exit time from (-delta, delta) is delta^2 / sigma^2
        self.assertAlmostEqual(szt.sim.ou_mfpt_bvp(1e-8, 1.0, 1.0), 1.0, places = 6)
        self.assertAlmostEqual(szt.sim.ou_mfpt_bvp(1e-8, 2.0, 1.0), 0.25, places = 6)

    def test__increasing_in_barrier(self):
        self.assertLess(szt.sim.ou_mfpt_bvp(1.0, 1.0, 1.0), szt.sim.ou_mfpt_bvp(1.0, 1.0, 1.25))

    def test__invalid(self):
        with self.assertRaises(szt.core.InvalidInputError):
            szt.sim.ou_mfpt_bvp(1.0, 0.0, 1.0)


class renewal_mc(unittest.TestCase):

    def test__waiting_times(self):
        prior = szt.prior.LaplacePrior(1.0)
        delta = math.sqrt(2)
        step = szt.analysis.DeterministicStep(0.5)
        estimate = szt.sim.renewal_mc(step, prior, delta, trials = 2000, seed = 0)
        self.assertAlmostEqual(estimate.expected_T_F, 1 / szt.analysis.phi_f(prior, delta, 0.5))
        self.assertAlmostEqual(estimate.expected_T_R, 1 / szt.analysis.phi_r(prior, delta, 0.5))
        self.assertLess(abs(estimate.mean_T_F - estimate.expected_T_F), 4 * estimate.se_T_F)
        self.assertLess(abs(estimate.mean_T_R - estimate.expected_T_R), 4 * estimate.se_T_R)
        self.assertGreater(estimate.ratio, 1.0)

    def test__deterministic(self):
        prior = szt.prior.LaplacePrior(1.0)
        step = szt.analysis.ExponentialStep(0.2, 1.0)
        kwargs = dict(step = step, prior = prior, delta = 1.0, trials = 300, seed = 5)
        self.assertEqual(szt.sim.renewal_mc(**kwargs), szt.sim.renewal_mc(**kwargs, threads = 2))

    def test__support(self):
        with self.assertRaises(szt.grad.OutOfDomainError):
            szt.sim.renewal_mc(szt.analysis.DeterministicStep(2.0), szt.prior.LaplacePrior(1.0), 1.0, 10, 0)
