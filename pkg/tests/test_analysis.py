import math
import unittest

import numpy as np

import szt.analysis
import szt.core
import szt.prior
from szt.analysis import (
    DeterministicStep,
    EmpiricalStep,
    ExponentialStep,
)
from szt.grad import (
    OutOfDomainError,
    SteKind,
)


LAPLACE = szt.prior.LaplacePrior(1.0)
SQRT2 = math.sqrt(2)


class phi_r(unittest.TestCase):

    def test__laplace(self):
        self.assertAlmostEqual(szt.analysis.phi_r(LAPLACE, SQRT2, 0.1), 1 - math.exp(-0.1))

    def test__quadrature(self):
        for prior in (LAPLACE, szt.prior.GaussianPrior(1.0), szt.prior.HalfLaplacePrior(1.0)):
            with self.subTest(prior = prior):
                self.assertAlmostEqual(
                    szt.analysis.phi_r(prior, 1.0, 0.3),
                    szt.analysis.phi_r(prior, 1.0, 0.3, method = 'quadrature'),
                    places = 9,
                )

    def test__array(self):
        values = szt.analysis.phi_r(LAPLACE, SQRT2, [0.1, 0.2])
        self.assertEqual(values.shape, (2,))

    def test__out_of_domain(self):
        for s in (0.0, SQRT2, 2.0, -0.1):
            with self.assertRaises(OutOfDomainError):
                szt.analysis.phi_r(LAPLACE, SQRT2, s)


class phi_f(unittest.TestCase):

    def test__laplace(self):
        self.assertAlmostEqual(szt.analysis.phi_f(LAPLACE, SQRT2, 0.1), math.exp(-SQRT2) * math.expm1(0.1))

    def test__quadrature(self):
        for prior in (LAPLACE, szt.prior.GaussianPrior(1.0), szt.prior.HalfGaussianPrior(1.0)):
            with self.subTest(prior = prior):
                self.assertAlmostEqual(
                    szt.analysis.phi_f(prior, 1.0, 0.3),
                    szt.analysis.phi_f(prior, 1.0, 0.3, method = 'quadrature'),
                    places = 9,
                )


class sensitivity_ratio(unittest.TestCase):

    def test__laplace(self):
        report = szt.analysis.sensitivity_ratio(LAPLACE, SQRT2, 0.1)
        self.assertAlmostEqual(report.ratio, math.exp(SQRT2 - 0.1))
        self.assertAlmostEqual(report.ratio, 3.7218, delta = 1e-4)
        self.assertAlmostEqual(report.lower_bound, math.exp(SQRT2))
        self.assertTrue(report.violated)
        self.assertTrue(report.to_dict()['violated'])

    def test__small_steps(self):
        report = szt.analysis.sensitivity_ratio(LAPLACE, SQRT2, 1e-6)
        self.assertAlmostEqual(report.ratio / report.lower_bound, 1.0, places = 5)

    def test__density_ratio(self):
        self.assertAlmostEqual(szt.analysis.density_ratio(szt.prior.GaussianPrior(1.0), 1.0), math.exp(0.5))


class StepDist__mgf(unittest.TestCase):

    def test__deterministic(self):
        step = DeterministicStep(0.2)
        self.assertAlmostEqual(step.mgf(1.0), math.exp(0.2))
        self.assertEqual(step.upper, 0.2)

    def test__exponential(self):
        step = ExponentialStep(0.1, 1.0)
        self.assertAlmostEqual(step.mgf_minus_one(2.0), step.expect(lambda s: np.expm1(2.0 * s)), places = 9)
        self.assertAlmostEqual(step.mgf_minus_one(step.rate), step.expect(lambda s: np.expm1(step.rate * s)), places = 9)
        self.assertAlmostEqual(step.expect(lambda s: np.ones_like(s)), 1.0, places = 9)

    def test__exponential_sample(self):
        samples = ExponentialStep(0.5, 0.3).sample(1000, szt.core.RandomSource(0))
        self.assertTrue(np.all((samples > 0) & (samples < 0.3)))

    def test__empirical(self):
        step = EmpiricalStep([0.1, 0.3])
        self.assertAlmostEqual(step.mgf_minus_one(1.0), (math.expm1(0.1) + math.expm1(0.3)) / 2)
        self.assertEqual(step.upper, 0.3)

    def test__invalid(self):
        with self.assertRaises(OutOfDomainError):
            DeterministicStep(0.0)
        with self.assertRaises(OutOfDomainError):
            EmpiricalStep([0.1, -0.1])
        with self.assertRaises(szt.core.InvalidInputError):
            szt.analysis.create_step('gamma', 0.1, 1.0)


class expected_ratio(unittest.TestCase):

    def test__deterministic(self):
        ratio = szt.analysis.expected_ratio(DeterministicStep(0.1), 1.0, SQRT2)
        self.assertAlmostEqual(ratio, math.exp(SQRT2 - 0.1))

    def test__matches_expectations(self):
        step = ExponentialStep(0.1, SQRT2)
        ratio = szt.analysis.expected_ratio(step, 1.0, SQRT2)
        numerator = step.expect(lambda s: -np.expm1(-s))
        denominator = step.expect(lambda s: np.exp(-SQRT2) * np.expm1(s))
        self.assertAlmostEqual(ratio, numerator / denominator, places = 6)

    def test__support(self):
        with self.assertRaises(OutOfDomainError):
            szt.analysis.expected_ratio(DeterministicStep(2.0), 1.0, SQRT2)


class feedback_events(unittest.TestCase):

    def test(self):
        report = szt.analysis.feedback_events(100, DeterministicStep(0.1), LAPLACE, SQRT2)
        self.assertAlmostEqual(report.E_F, 100 * szt.analysis.phi_f(LAPLACE, SQRT2, 0.1))
        self.assertAlmostEqual(report.E_R, 100 * szt.analysis.phi_r(LAPLACE, SQRT2, 0.1))
        self.assertAlmostEqual(report.ratio, math.exp(SQRT2 - 0.1))

    def test__channels(self):
        priors = [szt.prior.LaplacePrior(1.0), szt.prior.LaplacePrior(2.0)]
        deltas = [1.0, 2.0]
        report = szt.analysis.feedback_events(10, DeterministicStep(0.1), priors, deltas)
        self.assertEqual(len(report.per_channel), 2)
        self.assertAlmostEqual(report.E_F, sum(channel['E_F'] for channel in report.per_channel))
        self.assertAlmostEqual(report.min_lower_bound, math.e)

    def test__invalid(self):
        with self.assertRaises(OutOfDomainError):
            szt.analysis.feedback_events(0, DeterministicStep(0.1), LAPLACE, SQRT2)


class entropy(unittest.TestCase):

    def test__values(self):
        self.assertAlmostEqual(szt.analysis.entropy_bt(1 / 3), math.log2(3))
        self.assertAlmostEqual(szt.analysis.entropy_szt(0.5), 2.0)
        self.assertAlmostEqual(szt.analysis.entropy_bt(1.0), 0.0)
        self.assertAlmostEqual(szt.analysis.entropy_szt(0.0), 1.0)

    def test__gap(self):
        for p0 in np.linspace(0, 1, 21):
            self.assertAlmostEqual(szt.analysis.entropy_szt(p0) - szt.analysis.entropy_bt(p0), szt.analysis.entropy_gap(p0))

    def test__invalid(self):
        for p0 in (-0.1, 1.1):
            with self.assertRaises(OutOfDomainError):
                szt.analysis.entropy_gap(p0)

    def test__dead_zone_mass(self):
        self.assertAlmostEqual(szt.analysis.dead_zone_mass(LAPLACE, 1.0), 1 - math.exp(-1))
        with self.assertRaises(szt.core.InvalidInputError):
            szt.analysis.dead_zone_mass(LAPLACE, 0.0)


class pac_bayes(unittest.TestCase):

    def test__bound(self):
        bound = szt.analysis.pac_bayes_bound(0.1, 2.0, 101, 0.05)
        self.assertAlmostEqual(bound, 0.1 + math.sqrt((2.0 + math.log(2 * math.sqrt(101) / 0.05)) / 200))

    def test__gap(self):
        self.assertAlmostEqual(
            szt.analysis.pac_bayes_gap(10 ** 6, 0.25, 10 ** 5),
            math.sqrt(10 ** 6 * 0.25 * math.log(2) / (2 * (10 ** 5 - 1))),
        )

    def test__gap_bounds_difference(self):
        d, p0, n = 10 ** 4, 0.5, 10 ** 3
        exact = (
            szt.analysis.pac_bayes_bound(0.0, szt.analysis.kl_reduction(d, p0), n, 0.05)
            - szt.analysis.pac_bayes_bound(0.0, 0.0, n, 0.05)
        )
        self.assertLessEqual(exact, szt.analysis.pac_bayes_gap(d, p0, n))

    def test__invalid(self):
        with self.assertRaises(OutOfDomainError):
            szt.analysis.pac_bayes_bound(0.1, 1.0, 1, 0.05)
        with self.assertRaises(OutOfDomainError):
            szt.analysis.pac_bayes_bound(0.1, -1.0, 10, 0.05)
        with self.assertRaises(OutOfDomainError):
            szt.analysis.pac_bayes_bound(0.1, 1.0, 10, 1.0)
        with self.assertRaises(OutOfDomainError):
            szt.analysis.kl_reduction(0, 0.5)


class kl(unittest.TestCase):

    def test__codeword_uniform(self):
        for p0 in (0.0, 0.3, 1.0):
            result = szt.analysis.kl_codeword_uniform(p0)
            self.assertAlmostEqual(result['difference'], -p0 * math.log(2))

    def test__noise_inflated(self):
        result = szt.analysis.kl_noise_inflated(LAPLACE, SQRT2)
        self.assertAlmostEqual(result['difference'], 0.0)
        self.assertLess(result['reference'], 0.0)

    def test__categorical(self):
        self.assertEqual(szt.analysis.categorical_kl([0.5, 0.5], [0.5, 0.5]), 0.0)
        self.assertEqual(szt.analysis.categorical_kl([0.5, 0.5], [1.0, 0.0]), math.inf)

    def test__state_distributions(self):
        states = szt.analysis.state_distributions(0.4)
        np.testing.assert_allclose(states['bt'], [0.4, 0.3, 0.0, 0.3])
        np.testing.assert_allclose(states['szt'], [0.2, 0.3, 0.2, 0.3])
        states = szt.analysis.state_distributions(0.4, symmetric = False)
        np.testing.assert_allclose(states['szt'], [0.2, 0.6, 0.2, 0.0])


class mfpt(unittest.TestCase):

    def test__barrier(self):
        self.assertEqual(szt.analysis.barrier(2.0, 1.0, 0.5), 1.0)
        with self.assertRaises(szt.core.InvalidInputError):
            szt.analysis.barrier(0.0, 1.0, 0.5)

    def test__closed(self):
        self.assertEqual(szt.analysis.mfpt_closed(SteKind.SZT, 2.0, 1.0, 0.5), 0.5)
        lam = 1.0
        expected = math.sqrt(math.pi) / 2 * (math.exp(lam ** 2) * math.erf(lam) - lam * math.sqrt(math.pi)) / lam
        self.assertAlmostEqual(szt.analysis.mfpt_closed(SteKind.BT, 1.0, 1.0, 1.0), expected)

    def test__ratio(self):
        self.assertAlmostEqual(szt.analysis.mfpt_ratio(1.0), math.sqrt(math.pi) / 2 * math.e)


class tabulate(unittest.TestCase):

    def test__entropy(self):
        table = szt.analysis.tabulate('entropy')
        self.assertEqual(len(table), 11)
        self.assertEqual(table.columns[:6], ['p0', 'closed_form', 'oracle', 'abs_error', 'rel_error', 'H_bt'])
        self.assertLess(max(table.column('abs_error')), 1e-12)

    def test__thresholds(self):
        table = szt.analysis.tabulate('thresholds')
        self.assertEqual(len(table), 4)
        for row in table.rows:
            self.assertLess(row['abs_error'], 0.01 * row['std_dev'])

    def test__deterministic(self):
        self.assertEqual(szt.analysis.tabulate('ratio-mgf', seed = 3), szt.analysis.tabulate('ratio-mgf', seed = 3))

    def test__unknown(self):
        with self.assertRaises(szt.core.InvalidInputError):
            szt.analysis.tabulate('foo')
