import dataclasses
import enum
import gzip
import hashlib
import itertools
import pathlib

import dill
import numpy as np

import szt.core
import szt.grad
import szt.kernel
import szt.quantizer
import szt.status
from szt.core import PerLayer
from szt.grad import SteKind
from szt.quantizer import (
    FixedK,
    LayerQuantConfig,
)
from szt.typing import (
    Any,
    ArrayLike,
    CodeArray,
    Dict,
    List,
    Literal,
    Optional,
    PathLike,
    RealArray,
    Seed,
    Self,
    Sequence,
    Tuple,
)

TaskKind = Literal['regression', 'parity']
"""
The synthetic tasks.
"""

LAYERS = ('w1', 'w2')
PARAMETERS = ('w1', 'b1', 'w2', 'b2')

# Streams of the random source, by purpose
_STREAM_INIT = 0
_STREAM_ORDER = 1
_STREAM_NOISE = 2


class DivergenceError(szt.core.SztError):
    """
    Raised when the training loss is not finite.
    """

    def __init__(self, message: str, epoch: int, step: int, loss: float):
        super().__init__(message)

        self.epoch = epoch
        """
        The epoch in which the loss diverged.
        """

        self.step = step
        """
        The global step in which the loss diverged.
        """

        self.loss = loss
        """
        The non-finite loss value.
        """


class DeltaRefresh(enum.Enum):
    """
    When the thresholds of the network are re-calibrated during training.
    """

    NEVER = 'never'
    PER_EPOCH = 'per-epoch'


@dataclasses.dataclass(frozen = True)
class Dataset:
    """
    Labeled examples, one per row.
    """

    x: RealArray
    y: RealArray
    kind: TaskKind

    def __post_init__(self):
        if len(self.x) == 0:
            raise szt.core.InvalidInputError('The dataset is empty')
        if len(self.x) != len(self.y):
            raise szt.core.InvalidInputError(f'Got {len(self.x)} inputs but {len(self.y)} targets')

    def __len__(self) -> int:
        return len(self.x)

    @property
    def inputs(self) -> int:
        return self.x.shape[1]

    @property
    def outputs(self) -> int:
        return self.y.shape[1]


def synth_dataset(
        kind: TaskKind,
        size: int,
        seed: Seed,
        inputs: int = 4,
        outputs: int = 1,
        noise: float = 0.1,
    ) -> Dataset:
    """
    Generate a synthetic task.

    The regression targets are :math:`y = A x + \\epsilon` with Gaussian :math:`A`, :math:`x`, and noise of standard
    deviation `noise`. The parity labels are 1 if an odd number of the inputs is negative, and 0 otherwise. If `size`
    equals :math:`2^{inputs}`, the parity inputs enumerate all sign patterns of :math:`\\pm 1`.

    .. runblock:: pycon

        >>> import szt.train
        >>> szt.train.synth_dataset('parity', 4, seed = 0, inputs = 2).x
    """
    if size < 1:
        raise szt.core.InvalidInputError(f'Dataset size must be positive: {size}')
    rng = szt.core.RandomSource(seed)
    if kind == 'regression':
        a = rng.derive(0).normal(size = (outputs, inputs))
        x = rng.derive(1).normal(size = (size, inputs))
        y = x @ a.T + noise * rng.derive(2).normal(size = (size, outputs))
    elif kind == 'parity':
        if size == 2 ** inputs:
            x = np.array(list(itertools.product((-1.0, 1.0), repeat = inputs)))
        else:
            x = rng.derive(1).normal(size = (size, inputs))
        y = (np.sum(x < 0, axis = 1) % 2).astype(float).reshape(-1, 1)
    else:
        raise szt.core.InvalidInputError(f'Unknown task: "{kind}"')
    return Dataset(x = x, y = y, kind = kind)


class ToyNet:
    """
    Two-layer perceptron :math:`x \\mapsto W_2 \\, \\mathrm{relu}(W_1 x + b_1) + b_2`, whose weight matrices are
    quantized per layer (the biases are kept at full precision).

    Arguments:
        params: The latent weights ``w1`` (hidden x inputs) and ``w2`` (outputs x hidden), and the biases ``b1`` and
            ``b2``.
        deltas: The threshold of each weight matrix.
        quant_config: The quantization settings, shared by both layers (per-layer granularity).
    """

    params: Dict[str, RealArray]
    """
    The latent (full-precision) parameters.
    """

    deltas: Dict[str, float]
    """
    The threshold of each weight matrix, which is also its reconstruction scale.
    """

    quant_config: LayerQuantConfig

    def __init__(
            self,
            params: Dict[str, RealArray],
            deltas: Dict[str, float],
            quant_config: LayerQuantConfig = LayerQuantConfig(),
        ):
        assert isinstance(quant_config.granularity, PerLayer), 'Only per-layer thresholds are supported'
        self.params = {name: szt.core.require_finite(params[name], name).astype(float) for name in PARAMETERS}
        self.deltas = {name: szt.core.require_positive(deltas[name], f'threshold of {name}') for name in LAYERS}
        self.quant_config = quant_config
        w1, b1, w2, b2 = (self.params[name] for name in PARAMETERS)
        if w1.ndim != 2 or w2.ndim != 2 or b1.shape != (w1.shape[0],) or b2.shape != (w2.shape[0],):
            raise szt.kernel.ShapeMismatchError('Weights must be matrices with one bias per row')
        if w2.shape[1] != w1.shape[0]:
            raise szt.kernel.ShapeMismatchError(f'Hidden sizes {w1.shape[0]} and {w2.shape[1]} differ')

    @classmethod
    def create(cls, inputs: int, hidden: int, outputs: int, seed: Seed, k: float = 1.0) -> Self:
        """
        Initialize the weights with variance :math:`1 / \\mathrm{fan_{in}}`, and calibrate the thresholds to `k` times
        their standard deviation.
        """
        rng = szt.core.RandomSource(seed).derive(_STREAM_INIT)
        params = dict(
            w1 = rng.derive(0).normal(scale = 1 / np.sqrt(inputs), size = (hidden, inputs)),
            b1 = np.zeros(hidden),
            w2 = rng.derive(1).normal(scale = 1 / np.sqrt(hidden), size = (outputs, hidden)),
            b2 = np.zeros(outputs),
        )
        quant_config = LayerQuantConfig(threshold_rule = FixedK(k))
        net = cls(params, dict(w1 = 1.0, w2 = 1.0), quant_config)
        net.calibrate()
        return net

    def calibrate(self) -> None:
        """
        Re-calibrate the thresholds to the current latent weights.
        """
        for name in LAYERS:
            self.deltas[name] = szt.quantizer.calibrate_tensor(self.params[name], self.quant_config)[0].delta

    def encode(self, kind: SteKind, rng: Optional[szt.core.RandomSource] = None) -> Dict[str, CodeArray]:
        """
        The code words of both weight matrices for the forward pass.

        Stochastic rounding draws from `rng`. The other kinds are deterministic (see :meth:`reference_codes`).
        """
        if kind is SteKind.SR:
            if rng is None:
                raise szt.grad.MissingRandomnessError('Stochastic rounding requires a random source')
            return {name: szt.grad.sr_round(self.params[name], self.deltas[name], rng.derive(idx))
                    for idx, name in enumerate(LAYERS)}
        return self.reference_codes(kind)

    def reference_codes(self, kind: SteKind) -> Dict[str, CodeArray]:
        """
        The deterministic code words of both weight matrices. Stochastic rounding is referenced to the balanced
        ternary codes, since its zero is unsigned.
        """
        encode = szt.quantizer.encode_szt if kind is SteKind.SZT else szt.quantizer.encode_bt
        return {name: encode(self.params[name], self.deltas[name]) for name in LAYERS}

    def packed(self, codes: Dict[str, CodeArray]) -> Dict[str, szt.core.PackedTernaryTensor]:
        """
        Pack the code words, with each threshold as the reconstruction scale.
        """
        return {
            name: szt.core.PackedTernaryTensor.from_codes(codes[name], PerLayer(), [delta], [delta])
            for name, delta in self.deltas.items()
        }

    def forward(
            self,
            x: RealArray,
            codes: Dict[str, CodeArray],
            threads: int = 1,
        ) -> Tuple[RealArray, Dict[str, RealArray]]:
        """
        Evaluate the quantized network.

        Returns:
            The outputs (one row per example), and the intermediates needed by the backward pass.
        """
        tensors = self.packed(codes)
        z1 = szt.kernel.ternary_gemm(tensors['w1'], x.T, threads = threads).T + self.params['b1']
        a1 = np.maximum(z1, 0)
        out = szt.kernel.ternary_gemm(tensors['w2'], a1.T, threads = threads).T + self.params['b2']
        return out, dict(x = x, z1 = z1, a1 = a1)

    def loss(self, dataset: Dataset, kind: SteKind, threads: int = 1) -> float:
        """
        The loss of the network on `dataset`, evaluated with the reference codes of `kind`.
        """
        out, _ = self.forward(dataset.x, self.reference_codes(kind), threads = threads)
        return _loss_and_gradient(dataset.kind, out, dataset.y)[0]

    def decoded(self, codes: Dict[str, CodeArray]) -> Dict[str, RealArray]:
        return {name: self.deltas[name] * szt.core.numeric_value(codes[name]).astype(float) for name in LAYERS}

    def digest(self, kind: SteKind) -> str:
        """
        SHA-256 digest of the latent parameters and the packed reference codes.
        """
        sha = hashlib.sha256()
        for name in PARAMETERS:
            sha.update(np.ascontiguousarray(self.params[name], dtype = '<f8').tobytes())
        for tensor in self.packed(self.reference_codes(kind)).values():
            sha.update(tensor.to_bytes())
        return sha.hexdigest()

    def copy(self) -> Self:
        return ToyNet({name: value.copy() for name, value in self.params.items()}, dict(self.deltas), self.quant_config)


@dataclasses.dataclass(frozen = True)
class TrainConfig:
    """
    Settings of a training run.
    """

    ste: SteKind = SteKind.SZT

    epochs: int = 20

    batch: int = 32

    lr_schedule: Sequence[float] = (0.05,)
    """
    Learning rate of each epoch. The last value is used for all subsequent epochs.
    """

    beta: float = 0.9
    """
    Momentum coefficient in :math:`[0, 1)`.
    """

    seed: Seed = 0
    """
    Seeds the initialization and the order of the examples.
    """

    noise_seed: Optional[Seed] = None
    """
    Seeds stochastic rounding. Defaults to :attr:`seed`.
    """

    delta_refresh: DeltaRefresh = DeltaRefresh.NEVER

    hidden: int = 16

    k: float = 1.0
    """
    Threshold ratio used to calibrate the network.
    """

    threads: int = 1

    def __post_init__(self):
        if self.epochs < 0 or self.batch < 1 or self.hidden < 1:
            raise szt.core.InvalidInputError('Epochs must be non-negative, batch and hidden sizes positive')
        if len(self.lr_schedule) == 0 or any(not lr >= 0 for lr in self.lr_schedule):
            raise szt.core.InvalidInputError(f'Learning rates must be non-negative: {self.lr_schedule}')
        if not 0 <= self.beta < 1:
            raise szt.core.InvalidInputError(f'Momentum coefficient must be in [0, 1): {self.beta}')

    def lr(self, epoch: int) -> float:
        return self.lr_schedule[min(epoch, len(self.lr_schedule) - 1)]

    @property
    def effective_noise_seed(self) -> Seed:
        return self.seed if self.noise_seed is None else self.noise_seed


@dataclasses.dataclass
class OptimizerState:
    """
    State of SGD with momentum.
    """

    momentum: Dict[str, RealArray]

    step: int = 0
    """
    Number of completed updates.
    """

    epoch: int = 0

    @classmethod
    def create(cls, net: ToyNet) -> Self:
        return cls({name: np.zeros_like(value) for name, value in net.params.items()})


@dataclasses.dataclass(frozen = True)
class MomentumRecord:
    """
    The momentum of one weight matrix across an update, with what the surrogate gradient was computed from.
    """

    inside: np.ndarray
    """
    Whether each latent weight was inside of the dead zone before the update.
    """

    codes: CodeArray
    """
    The code words of the forward pass.
    """

    upstream: RealArray
    """
    The gradient of the loss with respect to the decoded weights.
    """

    before: RealArray

    after: RealArray


@dataclasses.dataclass(frozen = True)
class StepResult:
    loss: float
    numeric_transitions: int
    representational_transitions: int

    momentum: Optional[Dict[str, MomentumRecord]] = None
    """
    The momentum records of the weight matrices, if requested.
    """


def count_transitions(before: ArrayLike, after: ArrayLike) -> Tuple[int, int]:
    """
    Count the numeric transitions (the numeric value changes) and the representational transitions (:math:`0^+
    \\leftrightarrow 0^-`) between two arrays of code words.

    .. runblock:: pycon

        >>> from szt.core import TernaryCode
        >>> from szt.train import count_transitions
        >>> count_transitions([TernaryCode.ZERO_PLUS, TernaryCode.ZERO_PLUS], [TernaryCode.ZERO_MINUS, TernaryCode.PLUS_ONE])
    """
    before = szt.core.as_code_array(before)
    after = szt.core.as_code_array(after)
    assert before.shape == after.shape, 'Code arrays must have the same shape'
    numeric = szt.core.numeric_value(before) != szt.core.numeric_value(after)
    zeros = (szt.core.numeric_value(before) == 0) & (szt.core.numeric_value(after) == 0)
    representational = zeros & (before != after)
    return int(np.count_nonzero(numeric)), int(np.count_nonzero(representational))


def _loss_and_gradient(kind: TaskKind, out: RealArray, y: RealArray) -> Tuple[float, RealArray]:
    if kind == 'regression':
        residual = out - y
        return float(np.mean(residual ** 2)), 2 * residual / residual.size
    else:
        # Logistic loss on the logits, log(1 + e^out) - y out
        loss = np.mean(np.logaddexp(0, out) - y * out)
        probability = np.exp(-np.logaddexp(0, -out))
        return float(loss), (probability - y) / out.size


def qat_step(
        net: ToyNet,
        batch: Dataset,
        config: TrainConfig,
        state: OptimizerState,
        rng: Optional[szt.core.RandomSource] = None,
        record_momentum: bool = False,
    ) -> StepResult:
    """
    One update of quantization-aware training.

    The latent weights are encoded and decoded, the quantized network is evaluated, and the loss gradient is passed
    through the straight-through estimator of :attr:`TrainConfig.ste`. Then the latent parameters are updated by SGD
    with momentum, and the code transitions caused by the update are counted (using the deterministic codes of
    :meth:`ToyNet.reference_codes`).

    Arguments:
        net: The network, updated in place.
        batch: The examples.
        config: The training settings.
        state: The optimizer state, updated in place.
        rng: Random source of stochastic rounding (only used for :attr:`SteKind.SR`).
        record_momentum: Whether to return a :class:`MomentumRecord` for each weight matrix.

    Raises:
        DivergenceError: If the loss is not finite.
    """
    kind = config.ste
    codes = net.encode(kind, rng)
    out, cache = net.forward(batch.x, codes, threads = config.threads)
    loss, d_out = _loss_and_gradient(batch.kind, out, batch.y)
    if not np.isfinite(loss):
        raise DivergenceError(f'Loss diverged at step {state.step}: {loss}', state.epoch, state.step, loss)

    decoded = net.decoded(codes)
    d_a1 = d_out @ decoded['w2']
    d_z1 = d_a1 * (cache['z1'] > 0)
    upstream = dict(w1 = d_z1.T @ cache['x'], w2 = d_out.T @ cache['a1'])
    grads = dict(b1 = d_z1.sum(axis = 0), b2 = d_out.sum(axis = 0))
    for name in LAYERS:
        grads[name] = szt.grad.ste_backward(kind, net.params[name], net.deltas[name], codes[name], upstream[name], rng)

    before = net.reference_codes(kind)
    inside = {name: np.abs(net.params[name]) <= net.deltas[name] for name in LAYERS}
    momentum_before = dict(state.momentum)
    lr = config.lr(state.epoch)
    for name in PARAMETERS:
        state.momentum[name] = config.beta * state.momentum[name] + grads[name]
        net.params[name] = net.params[name] - lr * state.momentum[name]
    after = net.reference_codes(kind)
    state.step += 1

    numeric, representational = 0, 0
    for name in LAYERS:
        counts = count_transitions(before[name], after[name])
        numeric += counts[0]
        representational += counts[1]
    momentum = None
    if record_momentum:
        momentum = {
            name: MomentumRecord(inside[name], codes[name], upstream[name], momentum_before[name], state.momentum[name])
            for name in LAYERS
        }
    return StepResult(
        loss = loss,
        numeric_transitions = numeric,
        representational_transitions = representational,
        momentum = momentum,
    )


@dataclasses.dataclass
class RunReport:
    """
    Outcome of a training run.
    """

    loss_curve: List[float]
    """
    Mean loss of each epoch.
    """

    numeric_transitions: int
    """
    Total number of numeric code transitions.
    """

    representational_transitions: int
    """
    Total number of representational code transitions (zero for balanced ternary and stochastic rounding).
    """

    checkpoint_digest: str
    """
    SHA-256 digest of the final latent parameters and codes.
    """

    steps: int

    net: ToyNet
    """
    The trained network.
    """

    state: OptimizerState
    """
    The final optimizer state.
    """

    snapshots: Optional[List[Dict[str, CodeArray]]] = None
    """
    The reference codes before the first and after each update, if requested.
    """

    momentum: Optional[List[Dict[str, MomentumRecord]]] = None
    """
    The momentum records of each update, if requested.
    """

    def to_dict(self) -> Dict[str, Any]:
        return dict(
            loss_curve = list(self.loss_curve),
            numeric_transitions = self.numeric_transitions,
            representational_transitions = self.representational_transitions,
            checkpoint_digest = self.checkpoint_digest,
            steps = self.steps,
            deltas = dict(self.net.deltas),
        )


def recount_transitions(snapshots: Sequence[Dict[str, CodeArray]]) -> Tuple[int, int]:
    """
    Count the transitions between consecutive code snapshots.
    """
    numeric, representational = 0, 0
    for before, after in zip(snapshots[:-1], snapshots[1:]):
        for name in LAYERS:
            counts = count_transitions(before[name], after[name])
            numeric += counts[0]
            representational += counts[1]
    return numeric, representational


def train(
        config: TrainConfig,
        dataset: Dataset,
        net: Optional[ToyNet] = None,
        status: Optional[szt.status.Status] = None,
        snapshots: bool = False,
        record_momentum: bool = False,
    ) -> RunReport:
    """
    Quantization-aware training of a :class:`ToyNet`.

    The order of the examples is permuted in each epoch by a random stream derived from :attr:`TrainConfig.seed`, so
    that two runs with the same settings produce identical digests (for the deterministic estimators also for
    different thread counts).

    Arguments:
        config: The settings.
        dataset: The examples.
        net: The initial network. Created from :attr:`TrainConfig.seed` if omitted.
        status: Receives an update after each epoch.
        snapshots: Whether to record the reference codes after each update (see :func:`recount_transitions`).
        record_momentum: Whether to record the momentum of the weight matrices in each update.

    Raises:
        DivergenceError: If the loss is not finite.
    """
    if net is None:
        net = ToyNet.create(dataset.inputs, config.hidden, dataset.outputs, config.seed, config.k)
    state = OptimizerState.create(net)
    order_rng = szt.core.RandomSource(config.seed).derive(_STREAM_ORDER)
    noise_rng = szt.core.RandomSource(config.effective_noise_seed).derive(_STREAM_NOISE)
    recorded = [net.reference_codes(config.ste)] if snapshots else None
    momentum = list() if record_momentum else None

    loss_curve = list()
    numeric, representational = 0, 0
    for epoch in szt.status.progress(status, range(config.epochs), details = 'epochs'):
        state.epoch = epoch
        if epoch > 0 and config.delta_refresh is DeltaRefresh.PER_EPOCH:
            net.calibrate()
            if snapshots:
                recorded.append(net.reference_codes(config.ste))
        order = order_rng.derive(epoch).permutation(len(dataset))
        losses = list()
        for start in range(0, len(dataset), config.batch):
            idx = order[start:start + config.batch]
            batch = Dataset(x = dataset.x[idx], y = dataset.y[idx], kind = dataset.kind)
            result = qat_step(net, batch, config, state, noise_rng.derive(state.step), record_momentum)
            losses.append(result.loss)
            numeric += result.numeric_transitions
            representational += result.representational_transitions
            if record_momentum:
                momentum.append(result.momentum)
            if snapshots:
                recorded.append(net.reference_codes(config.ste))
        loss_curve.append(float(np.mean(losses)))
        szt.status.update(status, info = 'epoch', epoch = epoch, loss = loss_curve[-1])

    return RunReport(
        loss_curve = loss_curve,
        numeric_transitions = numeric,
        representational_transitions = representational,
        checkpoint_digest = net.digest(config.ste),
        steps = state.step,
        net = net,
        state = state,
        snapshots = recorded,
        momentum = momentum,
    )


def save_checkpoint(report: RunReport, kind: SteKind, out_dir: PathLike) -> List[pathlib.Path]:
    """
    Write the reference codes of each weight matrix as ``layer-<i>.szt``, and the latent parameters, thresholds, and
    optimizer state as ``latent.dill.gz``.

    Returns:
        The written files.
    """
    out_dir = pathlib.Path(out_dir)
    net = report.net
    written = list()
    for idx, tensor in enumerate(net.packed(net.reference_codes(kind)).values()):
        written.append(szt.core.write_szt(tensor, out_dir / f'layer-{idx + 1}.szt'))
    latent_filepath = out_dir / 'latent.dill.gz'
    with gzip.open(latent_filepath, 'wb') as latent_file:
        dill.dump(
            dict(
                params = net.params,
                deltas = net.deltas,
                momentum = report.state.momentum,
                step = report.state.step,
            ),
            latent_file,
        )
    written.append(latent_filepath)
    return written


def load_checkpoint(out_dir: PathLike) -> Tuple[ToyNet, OptimizerState]:
    """
    Read the latent parameters and optimizer state written by :func:`save_checkpoint`.
    """
    with gzip.open(pathlib.Path(out_dir) / 'latent.dill.gz', 'rb') as latent_file:
        data = dill.load(latent_file)
    net = ToyNet(data['params'], data['deltas'])
    return net, OptimizerState(momentum = data['momentum'], step = data['step'])
