import unittest

import numpy as np

import szt.core
import szt.grad
import szt.train
from szt.core import TernaryCode
from szt.grad import SteKind
from szt.train import (
    Dataset,
    DeltaRefresh,
    TrainConfig,
)

from . import testsuite


def _train(snapshots = False, **kwargs):
    config = TrainConfig(**dict(dict(epochs = 2, batch = 8, hidden = 6), **kwargs))
    dataset = szt.train.synth_dataset('regression', 32, seed = 1)
    return szt.train.train(config, dataset, snapshots = snapshots)


class count_transitions(unittest.TestCase):

    def test(self):
        before = [TernaryCode.ZERO_PLUS, TernaryCode.ZERO_PLUS, TernaryCode.MINUS_ONE, TernaryCode.PLUS_ONE]
        after = [TernaryCode.ZERO_MINUS, TernaryCode.PLUS_ONE, TernaryCode.ZERO_MINUS, TernaryCode.PLUS_ONE]
        self.assertEqual(szt.train.count_transitions(before, after), (2, 1))

    def test__unchanged(self):
        codes = np.array([[0, 1], [2, 3]])
        self.assertEqual(szt.train.count_transitions(codes, codes), (0, 0))


class synth_dataset(unittest.TestCase):

    def test__parity_enumeration(self):
        dataset = szt.train.synth_dataset('parity', 4, seed = 0, inputs = 2)
        self.assertEqual(dataset.x.tolist(), [[-1, -1], [-1, 1], [1, -1], [1, 1]])
        self.assertEqual(dataset.y.ravel().tolist(), [0, 1, 1, 0])

    def test__regression(self):
        dataset = szt.train.synth_dataset('regression', 10, seed = 0, inputs = 3, outputs = 2)
        self.assertEqual(len(dataset), 10)
        self.assertEqual((dataset.inputs, dataset.outputs), (3, 2))
        np.testing.assert_array_equal(dataset.x, szt.train.synth_dataset('regression', 10, seed = 0, inputs = 3).x)

    def test__regression_without_noise(self):
        dataset = szt.train.synth_dataset('regression', 64, seed = 2, inputs = 3, outputs = 2, noise = 0.0)
        coef = np.linalg.lstsq(dataset.x, dataset.y, rcond = None)[0]
        np.testing.assert_allclose(dataset.x @ coef, dataset.y, atol = 1e-10)
        self.assertLess(float(np.mean((dataset.x @ coef - dataset.y) ** 2)), 1e-20)

    def test__invalid(self):
        with self.assertRaises(szt.core.InvalidInputError):
            szt.train.synth_dataset('regression', 0, seed = 0)
        with self.assertRaises(szt.core.InvalidInputError):
            szt.train.synth_dataset('mnist', 10, seed = 0)
        with self.assertRaises(szt.core.InvalidInputError):
            Dataset(x = np.zeros((2, 3)), y = np.zeros((3, 1)), kind = 'regression')


class TrainConfig__init(unittest.TestCase):

    def test__lr(self):
        config = TrainConfig(lr_schedule = (0.1, 0.01))
        self.assertEqual([config.lr(epoch) for epoch in range(3)], [0.1, 0.01, 0.01])

    def test__noise_seed(self):
        self.assertEqual(TrainConfig(seed = 3).effective_noise_seed, 3)
        self.assertEqual(TrainConfig(seed = 3, noise_seed = 4).effective_noise_seed, 4)

    def test__invalid(self):
        for kwargs in (dict(epochs = -1), dict(batch = 0), dict(lr_schedule = (-0.1,)), dict(beta = 1.0)):
            with self.subTest(**kwargs):
                with self.assertRaises(szt.core.InvalidInputError):
                    TrainConfig(**kwargs)


class ToyNet__create(unittest.TestCase):

    def test(self):
        net = szt.train.ToyNet.create(inputs = 4, hidden = 8, outputs = 1, seed = 0)
        self.assertEqual(net.params['w1'].shape, (8, 4))
        self.assertEqual(net.params['w2'].shape, (1, 8))
        self.assertAlmostEqual(net.deltas['w1'], np.std(net.params['w1'], ddof = 1))

    def test__reference_codes(self):
        net = szt.train.ToyNet.create(inputs = 4, hidden = 8, outputs = 1, seed = 0)
        codes_szt = net.reference_codes(SteKind.SZT)
        codes_sr = net.reference_codes(SteKind.SR)
        for name in szt.train.LAYERS:
            np.testing.assert_array_equal(
                szt.core.numeric_value(codes_szt[name]),
                szt.core.numeric_value(codes_sr[name]),
            )
            self.assertNotIn(TernaryCode.ZERO_MINUS, codes_sr[name].ravel().tolist())

    def test__sr_requires_rng(self):
        net = szt.train.ToyNet.create(inputs = 4, hidden = 8, outputs = 1, seed = 0)
        with self.assertRaises(szt.grad.MissingRandomnessError):
            net.encode(SteKind.SR)


class ToyNet__loss(unittest.TestCase):

    def test__bt_equals_szt(self):
        dataset = szt.train.synth_dataset('regression', 32, seed = 1)
        net = szt.train.ToyNet.create(inputs = 4, hidden = 6, outputs = 1, seed = 0)
        self.assertGreater(net.loss(dataset, SteKind.SZT), 0)
        self.assertEqual(net.loss(dataset, SteKind.SZT), net.loss(dataset, SteKind.BT))

    def test__bt_equals_szt_after_training(self):
        report = _train(ste = SteKind.SZT)
        dataset = szt.train.synth_dataset('regression', 32, seed = 1)
        codes = report.net.reference_codes(SteKind.SZT)
        self.assertIn(TernaryCode.ZERO_MINUS, np.concatenate([codes[name].ravel() for name in szt.train.LAYERS]).tolist())
        self.assertEqual(report.net.loss(dataset, SteKind.SZT), report.net.loss(dataset, SteKind.BT))

    def test__parity(self):
        dataset = szt.train.synth_dataset('parity', 16, seed = 0)
        net = szt.train.ToyNet.create(inputs = 4, hidden = 6, outputs = 1, seed = 0)
        self.assertEqual(net.loss(dataset, SteKind.SZT), net.loss(dataset, SteKind.BT))


class qat_step(unittest.TestCase):

    def test__divergence(self):
        net = szt.train.ToyNet.create(inputs = 2, hidden = 4, outputs = 1, seed = 0)
        batch = Dataset(x = np.ones((2, 2)), y = np.full((2, 1), np.inf), kind = 'regression')
        state = szt.train.OptimizerState.create(net)
        with self.assertRaises(szt.train.DivergenceError) as context:
            szt.train.qat_step(net, batch, TrainConfig(), state)
        self.assertEqual(context.exception.step, 0)

    def test__momentum_record(self):
        dataset = szt.train.synth_dataset('regression', 16, seed = 1)
        for ste in (SteKind.BT, SteKind.SZT):
            with self.subTest(ste = ste):
                net = szt.train.ToyNet.create(inputs = 4, hidden = 6, outputs = 1, seed = 0)
                state = szt.train.OptimizerState.create(net)
                state.momentum['w1'] = np.full_like(net.params['w1'], 0.5)
                config = TrainConfig(ste = ste, beta = 0.9)
                result = szt.train.qat_step(net, dataset, config, state, record_momentum = True)
                record = result.momentum['w1']
                self.assertGreater(np.count_nonzero(record.inside), 0)
                np.testing.assert_array_equal(record.before, np.full_like(record.before, 0.5))
                np.testing.assert_array_equal(record.after, state.momentum['w1'])
                sign = szt.core.stored_sign(record.codes) if ste is SteKind.SZT else np.ones(record.codes.shape)
                g_hat = np.where(record.inside, sign, 1) * record.upstream
                np.testing.assert_array_equal(record.after, 0.9 * record.before + g_hat)

    def test__without_momentum_record(self):
        dataset = szt.train.synth_dataset('regression', 16, seed = 1)
        net = szt.train.ToyNet.create(inputs = 4, hidden = 6, outputs = 1, seed = 0)
        result = szt.train.qat_step(net, dataset, TrainConfig(), szt.train.OptimizerState.create(net))
        self.assertIsNone(result.momentum)


class train(unittest.TestCase):

    def test__deterministic(self):
        for ste in SteKind:
            with self.subTest(ste = ste):
                self.assertEqual(_train(ste = ste).checkpoint_digest, _train(ste = ste).checkpoint_digest)

    def test__threads(self):
        self.assertEqual(_train(threads = 1).checkpoint_digest, _train(threads = 2).checkpoint_digest)

    def test__noise_seed(self):
        self.assertNotEqual(
            _train(ste = SteKind.SR, noise_seed = 1).checkpoint_digest,
            _train(ste = SteKind.SR, noise_seed = 2).checkpoint_digest,
        )

    def test__no_representational_transitions_without_signed_zero(self):
        for ste in (SteKind.BT, SteKind.SR):
            with self.subTest(ste = ste):
                self.assertEqual(_train(ste = ste).representational_transitions, 0)

    def test__recount(self):
        report = _train(ste = SteKind.SZT, snapshots = True)
        self.assertEqual(len(report.snapshots), report.steps + 1)
        self.assertEqual(
            szt.train.recount_transitions(report.snapshots),
            (report.numeric_transitions, report.representational_transitions),
        )

    def test__momentum_record(self):
        report = szt.train.train(
            TrainConfig(epochs = 2, batch = 8, hidden = 6),
            szt.train.synth_dataset('regression', 32, seed = 1),
            record_momentum = True,
        )
        self.assertEqual(len(report.momentum), report.steps)
        self.assertEqual(set(report.momentum[0]), set(szt.train.LAYERS))
        for previous, current in zip(report.momentum[:-1], report.momentum[1:]):
            np.testing.assert_array_equal(current['w2'].before, previous['w2'].after)
        self.assertIsNone(_train().momentum)

    def test__zero_learning_rate(self):
        report = _train(lr_schedule = (0.0,))
        self.assertEqual(report.numeric_transitions, 0)
        self.assertEqual(report.representational_transitions, 0)

    def test__report(self):
        report = _train(delta_refresh = DeltaRefresh.PER_EPOCH)
        self.assertEqual(report.steps, 8)
        data = report.to_dict()
        self.assertEqual(len(data['loss_curve']), 2)
        self.assertEqual(set(data['deltas']), {'w1', 'w2'})

    @testsuite.with_temporary_paths(1)
    def test__checkpoint(self, path):
        report = _train()
        written = szt.train.save_checkpoint(report, SteKind.SZT, path)
        self.assertEqual([filepath.name for filepath in written], ['layer-1.szt', 'layer-2.szt', 'latent.dill.gz'])
        tensor = szt.core.read_szt(path / 'layer-1.szt')
        np.testing.assert_array_equal(tensor.codes, report.net.reference_codes(SteKind.SZT)['w1'])
        net, state = szt.train.load_checkpoint(path)
        self.assertEqual(net.digest(SteKind.SZT), report.checkpoint_digest)
        self.assertEqual(state.step, report.steps)
