import unittest

import numpy as np

import szt.core
import szt.prior
from szt.prior import (
    EmpiricalPrior,
    GaussianPrior,
    HalfGaussianPrior,
    HalfLaplacePrior,
    LaplacePrior,
)


class LaplacePrior__moments(unittest.TestCase):

    def test(self):
        prior = LaplacePrior(0.5)
        self.assertAlmostEqual(prior.std_dev(), np.sqrt(2) * 0.5)
        self.assertAlmostEqual(prior.second_moment(), 0.5)
        self.assertAlmostEqual(prior.density_at_zero(), 1.0)

    def test__abs_cdf(self):
        prior = LaplacePrior(2.0)
        self.assertAlmostEqual(float(prior.abs_cdf(2.0)), 1 - np.exp(-1))
        self.assertAlmostEqual(float(prior.abs_cdf(0.0)), 0.0)

    def test__invalid_scale(self):
        for b in (0.0, -1.0, np.nan):
            with self.assertRaises(szt.core.InvalidInputError):
                LaplacePrior(b)


class GaussianPrior__moments(unittest.TestCase):

    def test(self):
        prior = GaussianPrior(2.0)
        self.assertAlmostEqual(prior.std_dev(), 2.0)
        self.assertAlmostEqual(prior.second_moment(), 4.0)
        self.assertAlmostEqual(prior.density_at_zero(), 1 / (2.0 * np.sqrt(2 * np.pi)))

    def test__abs_cdf(self):
        prior = GaussianPrior(1.0)
        self.assertAlmostEqual(float(prior.abs_cdf(1.0)), 0.682689492, places = 6)
        self.assertAlmostEqual(float(prior.abs_cdf(1.0)), float(prior.cdf(1.0) - prior.cdf(-1.0)))


class HalfPriors(unittest.TestCase):

    def test__support(self):
        for prior in (HalfLaplacePrior(1.0), HalfGaussianPrior(1.0)):
            with self.subTest(prior = prior):
                self.assertFalse(prior.symmetric)
                self.assertEqual(float(prior.pdf(-0.5)), 0.0)
                self.assertAlmostEqual(float(prior.abs_cdf(1.0)), float(prior.cdf(1.0)))

    def test__half_laplace(self):
        prior = HalfLaplacePrior(0.5)
        self.assertAlmostEqual(prior.std_dev(), 0.5)
        self.assertAlmostEqual(prior.density_at_zero(), 2.0)

    def test__half_gaussian(self):
        prior = HalfGaussianPrior(1.0)
        self.assertAlmostEqual(prior.std_dev(), np.sqrt(1 - 2 / np.pi))
        self.assertAlmostEqual(prior.second_moment(), 1.0)


class EmpiricalPrior__init(unittest.TestCase):

    def test(self):
        prior = EmpiricalPrior([3.0, -1.0, 2.0, -4.0])
        np.testing.assert_array_equal(prior.samples, [-4.0, -1.0, 2.0, 3.0])
        self.assertTrue(prior.symmetric)
        self.assertFalse(prior.parametric)
        self.assertAlmostEqual(float(prior.cdf(0.0)), 0.5)
        self.assertAlmostEqual(float(prior.abs_cdf(2.0)), 0.5)
        self.assertAlmostEqual(prior.second_moment(), 7.5)

    def test__degenerate(self):
        with self.assertRaises(szt.core.InvalidInputError):
            EmpiricalPrior([1.0, 1.0, 1.0])
        with self.assertRaises(szt.core.InvalidInputError):
            EmpiricalPrior([1.0, np.inf])

    def test__sample(self):
        prior = EmpiricalPrior([-1.0, 0.5, 2.0])
        samples = prior.sample(100, szt.core.RandomSource(0))
        self.assertTrue(set(samples.tolist()) <= {-1.0, 0.5, 2.0})


class Prior__sample(unittest.TestCase):

    def test__deterministic(self):
        prior = LaplacePrior(1.0)
        np.testing.assert_array_equal(
            prior.sample(10, szt.core.RandomSource(3)),
            prior.sample(10, szt.core.RandomSource(3)),
        )

    def test__statistics(self):
        prior = GaussianPrior(1.5)
        samples = prior.sample(20000, szt.core.RandomSource(1))
        self.assertAlmostEqual(np.std(samples), 1.5, delta = 0.05)


class Prior__eq(unittest.TestCase):

    def test(self):
        self.assertEqual(LaplacePrior(1.0), LaplacePrior(1.0))
        self.assertNotEqual(LaplacePrior(1.0), LaplacePrior(2.0))
        self.assertNotEqual(LaplacePrior(1.0), HalfLaplacePrior(1.0))
        self.assertEqual(len({LaplacePrior(1.0), LaplacePrior(1.0)}), 1)

    def test__repr(self):
        self.assertEqual(repr(GaussianPrior(2.0)), '<GaussianPrior sigma=2.0>')


class create_prior(unittest.TestCase):

    def test(self):
        self.assertEqual(szt.prior.create_prior('laplace', 2.0), LaplacePrior(2.0))
        self.assertEqual(szt.prior.create_prior('half-gaussian', 1.0), HalfGaussianPrior(1.0))

    def test__unknown(self):
        with self.assertRaises(szt.core.InvalidInputError):
            szt.prior.create_prior('cauchy', 1.0)
        with self.assertRaises(szt.core.InvalidInputError):
            szt.prior.create_prior('empirical', 1.0)


class fit_prior(unittest.TestCase):

    def test__laplace(self):
        prior = szt.prior.fit_prior('laplace', [-2.0, -1.0, 1.0, 2.0])
        self.assertIsInstance(prior, LaplacePrior)
        self.assertAlmostEqual(prior.b, 1.5)

    def test__gaussian(self):
        prior = szt.prior.fit_prior('gaussian', [-2.0, 2.0])
        self.assertAlmostEqual(prior.sigma, 2.0)

    def test__empirical(self):
        prior = szt.prior.fit_prior('empirical', [1.0, 2.0])
        self.assertIsInstance(prior, EmpiricalPrior)

    def test__empty(self):
        with self.assertRaises(szt.core.InvalidInputError):
            szt.prior.fit_prior('laplace', [])
