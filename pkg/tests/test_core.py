import unittest

import numpy as np
from hypothesis import (
    given,
    strategies as st,
)

import szt.core
from szt.core import (
    PackedTernaryTensor,
    PerChannel,
    PerLayer,
    TernaryCode,
)

from . import testsuite


codes_strategy = st.lists(st.sampled_from(list(TernaryCode)), max_size = 64)


class TernaryCode__values(unittest.TestCase):

    def test__numeric_value(self):
        self.assertEqual(TernaryCode.ZERO_PLUS.numeric_value, 0)
        self.assertEqual(TernaryCode.PLUS_ONE.numeric_value, 1)
        self.assertEqual(TernaryCode.ZERO_MINUS.numeric_value, 0)
        self.assertEqual(TernaryCode.MINUS_ONE.numeric_value, -1)

    def test__stored_sign(self):
        self.assertEqual(TernaryCode.ZERO_PLUS.stored_sign, +1)
        self.assertEqual(TernaryCode.PLUS_ONE.stored_sign, +1)
        self.assertEqual(TernaryCode.ZERO_MINUS.stored_sign, -1)
        self.assertEqual(TernaryCode.MINUS_ONE.stored_sign, -1)

    def test__arrays(self):
        codes = np.array([[0, 1], [2, 3]], dtype = np.uint8)
        np.testing.assert_array_equal(szt.core.numeric_value(codes), [[0, 1], [0, -1]])
        np.testing.assert_array_equal(szt.core.stored_sign(codes), [[1, 1], [-1, -1]])

    def test__str(self):
        self.assertEqual([str(code) for code in TernaryCode], ['0+', '+1', '0-', '-1'])

    def test__invalid(self):
        with self.assertRaises(szt.core.InvalidInputError):
            szt.core.as_code_array([0, 4])
        with self.assertRaises(szt.core.InvalidInputError):
            szt.core.as_code_array([0.5])


class pack_codes(unittest.TestCase):

    def test__reference_vector(self):
        data = szt.core.pack_codes(
            [TernaryCode.ZERO_PLUS, TernaryCode.PLUS_ONE, TernaryCode.ZERO_MINUS, TernaryCode.MINUS_ONE],
        )
        self.assertEqual(data, b'\xe4')

    def test__padding(self):
        self.assertEqual(szt.core.pack_codes([TernaryCode.MINUS_ONE]), b'\x03')
        self.assertEqual(szt.core.pack_codes([TernaryCode.PLUS_ONE] * 5), b'\x55\x01')

    def test__empty(self):
        self.assertEqual(szt.core.pack_codes([]), b'')

    @given(codes_strategy)
    def test__layout(self, codes):
        data = szt.core.pack_codes(codes)
        self.assertEqual(len(data), szt.core.payload_length(len(codes)))
        for idx, code in enumerate(codes):
            self.assertEqual((data[idx // 4] >> (2 * (idx % 4))) & 0b11, code.value)


class unpack_codes(unittest.TestCase):

    @given(codes_strategy)
    def test__inverse(self, codes):
        unpacked = szt.core.unpack_codes(szt.core.pack_codes(codes), len(codes))
        np.testing.assert_array_equal(unpacked, [code.value for code in codes])

    def test__capacity(self):
        with self.assertRaises(szt.core.LengthMismatchError) as context:
            szt.core.unpack_codes(b'\x00', 5)
        self.assertEqual(context.exception.expected, 4)
        self.assertEqual(context.exception.actual, 5)


class RandomSource__determinism(unittest.TestCase):

    def test__same_seed(self):
        np.testing.assert_array_equal(
            szt.core.RandomSource(7).normal(size = 10),
            szt.core.RandomSource(7).normal(size = 10),
        )

    def test__derive(self):
        rng = szt.core.RandomSource(7)
        np.testing.assert_array_equal(rng.derive(3).uniform(size = 5), rng.derive(3).uniform(size = 5))
        self.assertFalse(np.array_equal(rng.derive(3).uniform(size = 5), rng.derive(4).uniform(size = 5)))
        self.assertEqual(rng.derive(3).derive(1).path, (3, 1))

    def test__derive_independent_of_draws(self):
        rng = szt.core.RandomSource(7)
        expected = rng.derive(0).uniform(size = 3)
        rng.uniform(size = 100)
        np.testing.assert_array_equal(rng.derive(0).uniform(size = 3), expected)

    def test__invalid_seed(self):
        with self.assertRaises(szt.core.InvalidInputError):
            szt.core.RandomSource(-1)
        with self.assertRaises(szt.core.InvalidInputError):
            szt.core.RandomSource(2 ** 64)


class PackedTernaryTensor__init(unittest.TestCase):

    def test__payload_length(self):
        with self.assertRaises(szt.core.LengthMismatchError):
            PackedTernaryTensor((2, 3), PerLayer(), [1.0], [1.0], b'\x00')

    def test__threshold_count(self):
        with self.assertRaises(szt.core.LengthMismatchError):
            PackedTernaryTensor((2, 3), PerChannel(0), [1.0], [1.0], b'\x00\x00')

    def test__non_positive_threshold(self):
        with self.assertRaises(szt.core.InvalidInputError):
            PackedTernaryTensor((4,), PerLayer(), [0.0], [1.0], b'\x00')

    def test__invalid_axis(self):
        with self.assertRaises(szt.core.InvalidInputError):
            PackedTernaryTensor((4,), PerChannel(1), [1.0], [1.0], b'\x00')


class PackedTernaryTensor__decode(unittest.TestCase):

    def test__per_layer(self):
        tensor = PackedTernaryTensor.from_codes([[0, 1], [2, 3]], PerLayer(), [0.5], [0.5])
        np.testing.assert_array_equal(tensor.decode(), [[0.0, 0.5], [0.0, -0.5]])

    def test__per_channel(self):
        tensor = PackedTernaryTensor.from_codes([[1, 3], [1, 3]], PerChannel(0), [1.0, 2.0], [1.0, 2.0])
        np.testing.assert_array_equal(tensor.decode(), [[1.0, -1.0], [2.0, -2.0]])
        tensor = PackedTernaryTensor.from_codes([[1, 3], [1, 3]], PerChannel(1), [1.0, 2.0], [1.0, 2.0])
        np.testing.assert_array_equal(tensor.decode(), [[1.0, -2.0], [1.0, -2.0]])


class PackedTernaryTensor__serialization(unittest.TestCase):

    def setUp(self):
        codes = szt.core.RandomSource(0).choice(4, size = (3, 5)).astype(np.uint8)
        self.tensor = PackedTernaryTensor.from_codes(codes, PerChannel(1), [0.1, 0.2, 0.3, 0.4, 0.5], [1.0] * 5)

    def test__from_bytes(self):
        restored = PackedTernaryTensor.from_bytes(self.tensor.to_bytes())
        self.assertEqual(restored, self.tensor)
        np.testing.assert_array_equal(restored.codes, self.tensor.codes)

    def test__header(self):
        data = self.tensor.to_bytes()
        self.assertEqual(data[:4], szt.core.MAGIC)
        self.assertEqual(data[4:7], bytes([szt.core.FORMAT_VERSION, 2, 2]))

    def test__bad_magic(self):
        with self.assertRaises(szt.core.InvalidInputError):
            PackedTernaryTensor.from_bytes(b'XXXX' + self.tensor.to_bytes()[4:])

    def test__bad_version(self):
        data = bytearray(self.tensor.to_bytes())
        data[4] = 99
        with self.assertRaises(szt.core.InvalidInputError):
            PackedTernaryTensor.from_bytes(bytes(data))

    def test__truncated(self):
        with self.assertRaises(szt.core.LengthMismatchError):
            PackedTernaryTensor.from_bytes(self.tensor.to_bytes()[:-1])
        with self.assertRaises(szt.core.LengthMismatchError):
            PackedTernaryTensor.from_bytes(self.tensor.to_bytes()[:12])

    def test__digest(self):
        self.assertEqual(len(self.tensor.digest()), 64)
        self.assertEqual(self.tensor.digest(), PackedTernaryTensor.from_bytes(self.tensor.to_bytes()).digest())

    @testsuite.with_temporary_paths(1)
    def test__files(self, path):
        filepath = szt.core.write_szt(self.tensor, path / 'tensor.szt')
        self.assertEqual(szt.core.read_szt(filepath), self.tensor)


class require_finite(unittest.TestCase):

    def test(self):
        np.testing.assert_array_equal(szt.core.require_finite([1, 2]), [1.0, 2.0])
        for value in (np.nan, np.inf, -np.inf):
            with self.assertRaises(szt.core.InvalidInputError):
                szt.core.require_finite([1.0, value])

    def test__positive(self):
        self.assertEqual(szt.core.require_positive(2, 'x'), 2.0)
        for value in (0.0, -1.0, np.inf, np.nan):
            with self.assertRaises(szt.core.InvalidInputError):
                szt.core.require_positive(value, 'x')
