import unittest

import numpy as np

import szt.core
import szt.grad
import szt.prior
from szt.core import TernaryCode
from szt.grad import SteKind


class ste_backward(unittest.TestCase):

    def test__szt(self):
        grad = szt.grad.ste_backward(
            SteKind.SZT,
            w = [-0.5, 0.5, -2.0, 2.0],
            delta = 1.0,
            code = [TernaryCode.ZERO_MINUS, TernaryCode.ZERO_PLUS, TernaryCode.MINUS_ONE, TernaryCode.PLUS_ONE],
            upstream = [1.0, 1.0, 1.0, 1.0],
        )
        np.testing.assert_array_equal(grad, [-1.0, 1.0, 1.0, 1.0])

    def test__bt(self):
        grad = szt.grad.ste_backward(SteKind.BT, w = [-0.5], delta = 1.0, code = [2], upstream = [3.0])
        np.testing.assert_array_equal(grad, [3.0])

    def test__sr_requires_rng(self):
        with self.assertRaises(szt.grad.MissingRandomnessError):
            szt.grad.ste_backward(SteKind.SR, w = 0.5, delta = 1.0, code = 0, upstream = 1.0)
        grad = szt.grad.ste_backward(SteKind.SR, 0.5, 1.0, 0, 2.0, rng = szt.core.RandomSource(0))
        self.assertEqual(float(grad), 2.0)

    def test__deterministic(self):
        self.assertTrue(SteKind.BT.deterministic)
        self.assertTrue(SteKind.SZT.deterministic)
        self.assertFalse(SteKind.SR.deterministic)


class sr_round(unittest.TestCase):

    def test__outside_dead_zone(self):
        codes = szt.grad.sr_round([2.0, -2.0], 1.0, szt.core.RandomSource(0))
        np.testing.assert_array_equal(codes, [TernaryCode.PLUS_ONE, TernaryCode.MINUS_ONE])

    def test__never_zero_minus(self):
        codes = szt.grad.sr_round(np.linspace(-1, 1, 101), 1.0, szt.core.RandomSource(0))
        self.assertNotIn(TernaryCode.ZERO_MINUS, codes.tolist())

    def test__unbiased(self):
        codes = szt.grad.sr_round(np.full(20000, 0.3), 1.0, szt.core.RandomSource(1))
        self.assertAlmostEqual(float(np.mean(szt.core.numeric_value(codes))), 0.3, delta = 0.02)

    def test__scalar(self):
        self.assertIsInstance(szt.grad.sr_round(0.0, 1.0, szt.core.RandomSource(0)), TernaryCode)


class bias_bound(unittest.TestCase):

    def test(self):
        self.assertEqual(szt.grad.bias_bound(SteKind.BT, 0.5, 1.0, 2.0), 2.0)
        self.assertEqual(szt.grad.bias_bound(SteKind.SZT, -0.5, 1.0, 2.0), 1.0)
        self.assertEqual(szt.grad.bias_bound(SteKind.SR, 0.5, 1.0, 2.0), 0.0)

    def test__out_of_domain(self):
        with self.assertRaises(szt.grad.OutOfDomainError):
            szt.grad.bias_bound(SteKind.SZT, 1.5, 1.0, 1.0)

    def test__variance_bound(self):
        self.assertEqual(szt.grad.variance_bound(SteKind.SZT, 1.0, 2.0), 0.0)
        self.assertEqual(szt.grad.variance_bound(SteKind.SR, 1.0, 2.0), 1.0)


class mse_estimate_mc(unittest.TestCase):

    def test__deterministic_estimators(self):
        bt = szt.grad.mse_estimate_mc(SteKind.BT, 0.25, 1.0, [1.0, 0.0], trials = 100, seed = 0)
        self.assertEqual(bt.variance, 0.0)
        self.assertAlmostEqual(bt.bias_sq, 1.0)
        szt_report = szt.grad.mse_estimate_mc(SteKind.SZT, 0.25, 1.0, [1.0, 0.0], trials = 100, seed = 0)
        self.assertEqual(szt_report.variance, 0.0)
        self.assertAlmostEqual(szt_report.bias_sq, 0.0625)
        self.assertAlmostEqual(szt_report.mse, 0.0625)

    def test__stochastic_rounding(self):
        report = szt.grad.mse_estimate_mc(SteKind.SR, 0.5, 1.0, [1.0], trials = 20000, seed = 0)
        self.assertLess(report.bias_sq, 1e-3)
        self.assertAlmostEqual(report.variance, 0.25, delta = 0.01)
        self.assertLessEqual(report.variance, szt.grad.variance_bound(SteKind.SR, 1.0, 1.0) + 3 * report.se_variance)

    def test__threads(self):
        kwargs = dict(kind = SteKind.SR, w = 0.3, delta = 1.0, g = [1.0], trials = 5000, seed = 7)
        self.assertEqual(
            szt.grad.mse_estimate_mc(**kwargs, threads = 1),
            szt.grad.mse_estimate_mc(**kwargs, threads = 3),
        )

    def test__out_of_domain(self):
        with self.assertRaises(szt.grad.OutOfDomainError):
            szt.grad.mse_estimate_mc(SteKind.SZT, 2.0, 1.0, [1.0], trials = 10, seed = 0)


class avg_dead_zone_mse(unittest.TestCase):

    def test__closed_forms_match_quadrature(self):
        for prior in (szt.prior.LaplacePrior(1.0), szt.prior.GaussianPrior(1.0)):
            for k in (0.5, 1.0, 2.0):
                with self.subTest(prior = prior, k = k):
                    self.assertAlmostEqual(
                        szt.grad.avg_dead_zone_mse(prior, k),
                        szt.grad.avg_dead_zone_mse(prior, k, method = 'quadrature'),
                        places = 6,
                    )

    def test__uniform_limit(self):
        # For small thresholds the density is flat inside of the dead zone
        self.assertAlmostEqual(szt.grad.avg_dead_zone_mse(szt.prior.GaussianPrior(1.0), 1e-2), 1 / 3, places = 4)

    def test__below_one_third(self):
        for k in (0.5, 1.0, 2.0):
            self.assertLess(szt.grad.avg_dead_zone_mse(szt.prior.LaplacePrior(1.0), k), 1 / 3)


class momentum_simulate(unittest.TestCase):

    def test__bt(self):
        trajectory = szt.grad.momentum_simulate(SteKind.BT, 0.9, 1.0, steps = 10, m0 = 1.0)
        np.testing.assert_allclose(trajectory, 0.81 ** np.arange(1, 11))

    def test__stationary(self):
        trajectory = szt.grad.momentum_simulate(SteKind.SZT, 0.5, 1.0, steps = 100, sign = -1)
        self.assertAlmostEqual(trajectory[-1], 4.0)
        trajectory = szt.grad.momentum_simulate(SteKind.SR, 0.5, 1.0, steps = 100)
        self.assertAlmostEqual(trajectory[-1], 4.0)

    def test__invalid_beta(self):
        for beta in (0.0, 1.0):
            with self.assertRaises(szt.grad.OutOfDomainError):
                szt.grad.momentum_simulate(SteKind.SZT, beta, 1.0, steps = 10)
