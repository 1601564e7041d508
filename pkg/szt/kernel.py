import dataclasses

import numpy as np

import szt.core
import szt.parallel
import szt.prior
import szt.quantizer
import szt.status
from szt.core import (
    PerChannel,
    TernaryCode,
)
from szt.typing import (
    ArrayLike,
    Dict,
    List,
    Optional,
    RealArray,
    Seed,
    Sequence,
)


class ShapeMismatchError(szt.core.SztError, ValueError):
    """
    Raised when the shapes of operands are not compatible.
    """
    pass


class LinearStack:
    """
    A stack of affine layers :math:`x_{l+1} = W_l x_l + b_l`, without non-linearities.

    Arguments:
        weights: The matrices :math:`W_1, \\dots, W_L`, where :math:`W_l` has the shape
            :math:`n_{l+1} \\times n_l`.
        biases: The bias vectors (zero if omitted).

    Raises:
        ShapeMismatchError: If adjacent dimensions are not compatible.
    """

    weights: List[RealArray]
    """
    The weight matrices, from the input to the output.
    """

    biases: List[RealArray]
    """
    The bias vectors, from the input to the output.
    """

    def __init__(self, weights: Sequence[ArrayLike], biases: Optional[Sequence[ArrayLike]] = None):
        self.weights = [np.atleast_2d(np.asarray(w, dtype = float)) for w in weights]
        if len(self.weights) == 0:
            raise ShapeMismatchError('A stack requires at least one layer')
        if biases is None:
            self.biases = [np.zeros(w.shape[0]) for w in self.weights]
        else:
            self.biases = [np.asarray(b, dtype = float).ravel() for b in biases]
        if len(self.biases) != len(self.weights):
            raise ShapeMismatchError(f'Got {len(self.weights)} weight matrices but {len(self.biases)} biases')
        for idx, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ShapeMismatchError(f'Layer {idx + 1}: weights {w.shape} do not match biases {b.shape}')
            if idx > 0 and w.shape[1] != self.weights[idx - 1].shape[0]:
                raise ShapeMismatchError(
                    f'Layer {idx + 1} expects {w.shape[1]} inputs, but layer {idx} has {self.weights[idx - 1].shape[0]}'
                    ' outputs'
                )

    @property
    def depth(self) -> int:
        return len(self.weights)

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    def forward(self, x: ArrayLike, weights: Optional[Sequence[RealArray]] = None) -> RealArray:
        """
        Propagate inputs through the stack.

        Arguments:
            x: Input vectors, one per row (or a single input vector).
            weights: Replacement weight matrices (e.g., quantized ones). Defaults to :attr:`weights`.
        """
        x = np.asarray(x, dtype = float)
        for w, b in zip(self.weights if weights is None else weights, self.biases):
            x = x @ w.T + b
        return x

    def suffix_products(self) -> List[RealArray]:
        """
        The products :math:`W_L \\cdots W_{l+1}` for :math:`l = 0, \\dots, L`, from the product of all weight matrices
        down to the identity.
        """
        products = [np.eye(self.output_dim)]
        for w in reversed(self.weights):
            products.insert(0, products[0] @ w)
        return products


def ternary_gemm(tensor: szt.core.PackedTernaryTensor, x: ArrayLike, threads: int = 1) -> RealArray:
    """
    Multiply a packed ternary matrix with a vector (or with a matrix of column vectors).

    The products with the code words are replaced by additions and subtractions: each output accumulates the inputs
    at :math:`+1` positions, and subtracts the inputs at :math:`-1` positions. Integer inputs are accumulated in 64-bit
    integers, so that the result equals the dense product exactly. Float inputs fall back to accumulation in 64-bit
    floats. The result is then multiplied by the per-layer or per-row scales. Per-column scales are applied to the
    inputs before accumulation.

    .. runblock:: pycon

        >>> import numpy as np
        >>> from szt.core import PackedTernaryTensor, PerLayer, TernaryCode
        >>> from szt.kernel import ternary_gemm
        >>> row = [[TernaryCode.PLUS_ONE, TernaryCode.ZERO_MINUS, TernaryCode.MINUS_ONE]]
        >>> tensor = PackedTernaryTensor.from_codes(row, PerLayer(), [1.0], [1.0])
        >>> ternary_gemm(tensor, np.array([2, 3, 4]))

    Arguments:
        tensor: The matrix (rank 2).
        x: Vector with one entry per column, or matrix with one row per column of `tensor`.
        threads: Number of threads used for blocks of output rows.

    Raises:
        ShapeMismatchError: If the tensor is not a matrix, or the shapes are not compatible.
    """
    if len(tensor.dims) != 2:
        raise ShapeMismatchError(f'Expected a matrix, got dimensions {tensor.dims}')
    rows, cols = tensor.dims
    x = np.asarray(x)
    if x.ndim not in (1, 2) or x.shape[0] != cols:
        raise ShapeMismatchError(f'Cannot multiply a {rows}x{cols} matrix with an operand of shape {x.shape}')

    granularity = tensor.granularity
    row_scales = np.asarray(tensor.scales)
    if isinstance(granularity, PerChannel) and granularity.axis == 1:
        x = x * (row_scales if x.ndim == 1 else row_scales[:, None])
        row_scales = np.ones(1)
    accumulator = np.int64 if np.issubdtype(x.dtype, np.integer) else np.float64
    x = x.astype(accumulator)

    codes = tensor.codes
    plus = codes == TernaryCode.PLUS_ONE
    minus = codes == TernaryCode.MINUS_ONE

    def run_chunk(chunk_idx: int, start: int, stop: int) -> np.ndarray:
        block = np.zeros((stop - start,) + x.shape[1:], dtype = accumulator)
        for i in range(start, stop):
            block[i - start] = x[plus[i]].sum(axis = 0) - x[minus[i]].sum(axis = 0)
        return block

    y = np.concatenate(szt.parallel.map_chunks(run_chunk, rows, chunk_size = 64, threads = threads))
    if row_scales.size > 1:
        return y * (row_scales if y.ndim == 1 else row_scales[:, None])
    else:
        return y * row_scales[0]


def stacked_error_variance(stack: LinearStack, eps_var: float) -> float:
    """
    Expected squared output error :math:`E \\|x_L - \\tilde x_L\\|^2` when independent zero-mean errors of variance
    `eps_var` (per component) are added to every activation of the stack, the input included.

    The error of activation :math:`l` is propagated through the remaining layers, so the result is
    :math:`\\sigma_\\epsilon^2 \\sum_{l=0}^{L} \\|W_L \\cdots W_{l+1}\\|_F^2`. The first term carries the input error
    through all layers, the last term uses the identity.

    .. runblock:: pycon

        >>> import numpy as np
        >>> from szt.kernel import LinearStack, stacked_error_variance
        >>> stack = LinearStack([np.ones((2, 2))])
        >>> stacked_error_variance(stack, 0.1)
    """
    assert eps_var >= 0, 'Error variance must be non-negative'
    return float(eps_var * sum(np.sum(product ** 2) for product in stack.suffix_products()))


def stacked_error_variance_mc(
        stack: LinearStack,
        eps_var: float,
        trials: int,
        seed: Seed,
        threads: int = 1,
    ) -> float:
    """
    Monte Carlo counterpart of :func:`stacked_error_variance`, which injects independent Gaussian errors into the
    input and after each layer, and measures the squared deviation of the output.
    """
    rng = szt.core.RandomSource(seed)
    eps_std = np.sqrt(eps_var)

    def run_chunk(chunk_idx: int, start: int, stop: int) -> float:
        chunk_rng = rng.derive(chunk_idx)
        error = chunk_rng.normal(0.0, eps_std, size = (stop - start, stack.input_dim))
        for w in stack.weights:
            error = error @ w.T + chunk_rng.normal(0.0, eps_std, size = (stop - start, w.shape[0]))
        return float(np.sum(error ** 2))

    return sum(szt.parallel.map_chunks(run_chunk, trials, threads = threads)) / trials


@dataclasses.dataclass(frozen = True)
class StackedSnrReport:
    """
    Output error of a stack under balanced-ternary and signed-zero ternary quantization.
    """

    var_bt: float
    """
    Mean squared output error of the balanced-ternary stack.
    """

    var_szt: float
    """
    Mean squared output error of the signed-zero ternary stack.
    """

    weight_error_moment: float
    """
    Mean squared reconstruction error per weight.
    """

    trials: int
    """
    Number of random inputs.
    """

    def to_dict(self) -> Dict[str, float]:
        return dataclasses.asdict(self)


def stacked_snr_mc(
        stack: LinearStack,
        prior: szt.prior.Prior,
        delta: float,
        trials: int,
        seed: Seed,
        threads: int = 1,
        status: Optional[szt.status.Status] = None,
    ) -> StackedSnrReport:
    """
    Quantize the weights of a stack in both schemes (reconstruction levels :math:`\\pm\\Delta`), propagate random inputs
    drawn from the `prior`, and measure the output error against the full-precision stack.

    Since both schemes decode to the same values, the two errors are identical.
    """
    delta = szt.core.require_positive(delta, 'threshold')
    assert trials >= 1, 'At least one trial is required'
    decoded = dict()
    for name, encode in (('bt', szt.quantizer.encode_bt), ('szt', szt.quantizer.encode_szt)):
        decoded[name] = [delta * szt.core.numeric_value(encode(w, delta)).astype(float) for w in stack.weights]
    residuals = np.concatenate([(w - q).ravel() for w, q in zip(stack.weights, decoded['szt'])])
    rng = szt.core.RandomSource(seed)

    def run_chunk(chunk_idx: int, start: int, stop: int) -> Dict[str, float]:
        x = prior.sample((stop - start) * stack.input_dim, rng.derive(chunk_idx)).reshape(stop - start, -1)
        reference = stack.forward(x)
        return {name: float(np.sum((stack.forward(x, weights) - reference) ** 2)) for name, weights in decoded.items()}

    szt.status.update(status, info = 'stacked-snr', depth = stack.depth, trials = trials, intermediate = True)
    chunks = szt.parallel.map_chunks(run_chunk, trials, threads = threads)
    return StackedSnrReport(
        var_bt = sum(chunk['bt'] for chunk in chunks) / trials,
        var_szt = sum(chunk['szt'] for chunk in chunks) / trials,
        weight_error_moment = float(np.mean(residuals ** 2)),
        trials = trials,
    )
