import unittest

import numpy as np

import szt.core
import szt.kernel
import szt.prior
from szt.core import (
    PackedTernaryTensor,
    PerChannel,
    PerLayer,
)
from szt.kernel import LinearStack


def _random_tensor(rows, cols, granularity, seed = 0):
    rng = szt.core.RandomSource(seed)
    codes = rng.choice(4, size = (rows, cols)).astype(np.uint8)
    channels = granularity.channel_count((rows, cols))
    scales = rng.uniform(0.5, 2.0, size = channels).tolist()
    return PackedTernaryTensor.from_codes(codes, granularity, scales, scales)


class ternary_gemm(unittest.TestCase):

    def test__integers_exact(self):
        tensor = _random_tensor(70, 33, PerLayer())
        tensor = PackedTernaryTensor.from_codes(tensor.codes, PerLayer(), [1.0], [1.0])
        x = szt.core.RandomSource(1).choice(np.arange(-100, 100), size = 33)
        y = szt.kernel.ternary_gemm(tensor, x)
        np.testing.assert_array_equal(y, szt.core.numeric_value(tensor.codes).astype(np.int64) @ x)

    def test__dense_oracle(self):
        for granularity in (PerLayer(), PerChannel(0), PerChannel(1)):
            with self.subTest(granularity = granularity):
                tensor = _random_tensor(12, 9, granularity)
                x = szt.core.RandomSource(2).normal(size = 9)
                np.testing.assert_allclose(szt.kernel.ternary_gemm(tensor, x), tensor.decode() @ x, atol = 1e-12)

    def test__matrix_operand(self):
        tensor = _random_tensor(5, 4, PerChannel(0))
        x = szt.core.RandomSource(3).normal(size = (4, 3))
        np.testing.assert_allclose(szt.kernel.ternary_gemm(tensor, x), tensor.decode() @ x, atol = 1e-12)

    def test__threads(self):
        tensor = _random_tensor(200, 16, PerLayer())
        x = szt.core.RandomSource(4).normal(size = 16)
        np.testing.assert_array_equal(
            szt.kernel.ternary_gemm(tensor, x, threads = 1),
            szt.kernel.ternary_gemm(tensor, x, threads = 4),
        )

    def test__shape_mismatch(self):
        tensor = _random_tensor(3, 4, PerLayer())
        with self.assertRaises(szt.kernel.ShapeMismatchError):
            szt.kernel.ternary_gemm(tensor, np.zeros(5))
        vector = PackedTernaryTensor.from_codes([0, 1], PerLayer(), [1.0], [1.0])
        with self.assertRaises(szt.kernel.ShapeMismatchError):
            szt.kernel.ternary_gemm(vector, np.zeros(2))


class LinearStack__init(unittest.TestCase):

    def test(self):
        stack = LinearStack([np.ones((3, 2)), np.ones((4, 3))])
        self.assertEqual(stack.depth, 2)
        self.assertEqual(stack.input_dim, 2)
        self.assertEqual(stack.output_dim, 4)
        np.testing.assert_array_equal(stack.forward([1.0, 1.0]), [6.0] * 4)

    def test__shape_mismatch(self):
        with self.assertRaises(szt.kernel.ShapeMismatchError):
            LinearStack([np.ones((3, 2)), np.ones((4, 2))])
        with self.assertRaises(szt.kernel.ShapeMismatchError):
            LinearStack([np.ones((3, 2))], [np.zeros(2)])
        with self.assertRaises(szt.kernel.ShapeMismatchError):
            LinearStack([])

    def test__suffix_products(self):
        w1, w2 = np.ones((3, 2)), 2 * np.ones((4, 3))
        products = LinearStack([w1, w2]).suffix_products()
        self.assertEqual(len(products), 3)
        np.testing.assert_array_equal(products[0], w2 @ w1)
        np.testing.assert_array_equal(products[1], w2)
        np.testing.assert_array_equal(products[2], np.eye(4))


class stacked_error_variance(unittest.TestCase):

    def test__single_layer(self):
        stack = LinearStack([np.ones((3, 2))])
        self.assertAlmostEqual(szt.kernel.stacked_error_variance(stack, 0.5), 0.5 * 6 + 0.5 * 3)

    def test__input_and_identity_terms(self):
        stack = LinearStack([np.ones((2, 2))])
        self.assertAlmostEqual(szt.kernel.stacked_error_variance(stack, 0.1), 0.4 + 0.1 * 2)

    def test__monte_carlo(self):
        rng = szt.core.RandomSource(5)
        stack = LinearStack(
            [rng.normal(size = (5, 3)) / 2, rng.normal(size = (4, 5)) / 2, rng.normal(size = (2, 4)) / 2],
        )
        expected = szt.kernel.stacked_error_variance(stack, 0.1)
        measured = szt.kernel.stacked_error_variance_mc(stack, 0.1, trials = 100000, seed = 0)
        self.assertAlmostEqual(measured, expected, delta = 0.05 * expected)


class stacked_snr_mc(unittest.TestCase):

    def test__schemes_agree(self):
        rng = szt.core.RandomSource(6)
        stack = LinearStack([rng.normal(size = (4, 3)), rng.normal(size = (2, 4))])
        report = szt.kernel.stacked_snr_mc(stack, szt.prior.LaplacePrior(1.0), 1.0, trials = 100, seed = 0)
        self.assertEqual(report.var_bt, report.var_szt)
        self.assertGreater(report.var_szt, 0)
        self.assertEqual(report.to_dict()['trials'], 100)
