import dataclasses
import enum
import json
import pathlib

import numpy as np
import scipy.integrate
import scipy.optimize

import szt.core
import szt.prior
from szt.core import (
    PerChannel,
    PerLayer,
    TernaryCode,
)
from szt.typing import (
    ArrayLike,
    CodeArray,
    Dict,
    List,
    Literal,
    Optional,
    PathLike,
    RealArray,
    Sequence,
    Union,
)


class CalibrationError(szt.core.SztError, ValueError):
    """
    Raised when no valid threshold can be determined for a population (e.g., it is empty or has zero variance).
    """
    pass


class UnsupportedPriorError(szt.core.SztError, ValueError):
    """
    Raised when an operation is not available for the kind of a prior.
    """
    pass


def require_thresholds(delta: ArrayLike, name: str = 'threshold') -> np.ndarray:
    delta = np.asarray(delta, dtype = float)
    if not np.all(np.isfinite(delta) & (delta > 0)):
        raise szt.core.InvalidInputError(f'The {name} must be finite and strictly positive: {delta}')
    return delta


def _as_result(codes: np.ndarray, like: ArrayLike) -> Union[TernaryCode, CodeArray]:
    codes = codes.astype(np.uint8)
    return TernaryCode(int(codes)) if np.ndim(like) == 0 else codes


def encode_bt(w: ArrayLike, delta: ArrayLike) -> Union[TernaryCode, CodeArray]:
    """
    Balanced-ternary encoding: :math:`+1` above :math:`\\Delta`, :math:`-1` below :math:`-\\Delta`, and the single
    zero (stored as the :math:`0^+` pattern) in between.

    Scalars yield a :class:`~szt.core.TernaryCode`, arrays yield arrays of bit patterns. The threshold can be an array
    broadcastable against `w`.

    Raises:
        InvalidInputError: If `w` is not finite or `delta` is not strictly positive.
    """
    w = szt.core.require_finite(w, 'weight')
    delta = require_thresholds(delta)
    codes = np.where(w > delta, TernaryCode.PLUS_ONE, np.where(w < -delta, TernaryCode.MINUS_ONE, TernaryCode.ZERO_PLUS))
    return _as_result(codes, w)


def encode_szt(w: ArrayLike, delta: ArrayLike) -> Union[TernaryCode, CodeArray]:
    """
    Signed-zero ternary encoding.

    Like :func:`encode_bt`, but the dead zone is split by the sign of `w` into :math:`0^+` (for :math:`0 \\leq w \\leq
    \\Delta`) and :math:`0^-` (for :math:`-\\Delta \\leq w < 0`). Exact zeros map to :math:`0^+`.

    .. runblock:: pycon

        >>> from szt.quantizer import encode_szt
        >>> print(encode_szt(-0.3, 1.0), encode_szt([0.5, -0.3, 1.5, -1.01], 1.0))

    Raises:
        InvalidInputError: If `w` is not finite or `delta` is not strictly positive.
    """
    return encode_szt_activation(w, delta, delta)


def encode_szt_activation(
        u: ArrayLike,
        delta_pos: ArrayLike,
        delta_neg: ArrayLike,
    ) -> Union[TernaryCode, CodeArray]:
    """
    Signed-zero ternary encoding with separate thresholds for positive and negative values.

    Raises:
        InvalidInputError: If `u` is not finite or any threshold is not strictly positive.
    """
    u = szt.core.require_finite(u, 'activation')
    delta_pos = require_thresholds(delta_pos, 'positive threshold')
    delta_neg = require_thresholds(delta_neg, 'negative threshold')
    codes = np.where(
        u > delta_pos,
        TernaryCode.PLUS_ONE,
        np.where(
            u < -delta_neg,
            TernaryCode.MINUS_ONE,
            np.where(u < 0, TernaryCode.ZERO_MINUS, TernaryCode.ZERO_PLUS),
        ),
    )
    return _as_result(codes, u)


@dataclasses.dataclass(frozen = True)
class SigmaRule:
    """
    The threshold is the sample standard deviation of the population.
    """

    name = 'sigma'


@dataclasses.dataclass(frozen = True)
class FixedK:
    """
    The threshold is a fixed multiple :attr:`k` of the sample standard deviation.
    """

    name = 'fixed-k'

    k: float
    """
    The ratio of threshold to standard deviation.
    """

    def __post_init__(self):
        szt.core.require_positive(self.k, 'The ratio k')


@dataclasses.dataclass(frozen = True)
class PriorOptimal:
    """
    The threshold minimizes the forward MSE under a prior, see :func:`optimal_threshold`.
    """

    name = 'prior-optimal'

    prior: szt.prior.Prior
    """
    The prior of the weights.
    """


ThresholdRule = Union[SigmaRule, FixedK, PriorOptimal]
"""
Rule which determines the threshold of a population.
"""


class ScaleRule(enum.Enum):
    """
    Reconstruction scale of the quantized values.
    """

    UNIT = 'unit'
    """
    Decode to :math:`\\{-1, 0, +1\\}`.
    """

    EQUAL_THRESHOLD = 'threshold'
    """
    Decode to :math:`\\{-\\Delta, 0, +\\Delta\\}`.
    """


class ZeroTiebreak(enum.Enum):
    """
    Code word used for exact zeros.
    """

    TO_ZERO_PLUS = 'zero-plus'


@dataclasses.dataclass(frozen = True)
class LayerQuantConfig:
    """
    Quantization settings of a layer.
    """

    granularity: szt.core.Granularity = PerLayer()
    """
    Whether a single threshold is used, or one per channel.
    """

    threshold_rule: ThresholdRule = SigmaRule()
    """
    How thresholds are determined.
    """

    scale_rule: ScaleRule = ScaleRule.EQUAL_THRESHOLD
    """
    How code words are reconstructed.
    """

    zero_tiebreak: ZeroTiebreak = ZeroTiebreak.TO_ZERO_PLUS
    """
    Code word for exact zeros.
    """


@dataclasses.dataclass(frozen = True)
class CalibrationResult:
    """
    Outcome of a threshold calibration.
    """

    delta: float
    """
    The threshold (in weight units).
    """

    k: float
    """
    The ratio of :attr:`delta` to the standard deviation of the calibrated population (or prior).
    """

    forward_mse: float
    """
    Expected squared reconstruction error (in squared weight units), with reconstruction levels at the threshold.
    """

    rule: str
    """
    Name of the threshold rule.
    """

    def to_dict(self) -> Dict[str, Union[str, float]]:
        return dataclasses.asdict(self)


def population_mse(weights: ArrayLike, delta: float) -> float:
    """
    The mean squared error of reconstructing the `weights` at the levels :math:`\\{-\\Delta, 0, +\\Delta\\}`.
    """
    weights = np.asarray(weights, dtype = float)
    values = szt.core.numeric_value(encode_szt(weights, delta))
    return float(np.mean((weights - delta * values) ** 2))


def calibrate(weights: Optional[ArrayLike], rule: ThresholdRule) -> CalibrationResult:
    """
    Determine the threshold of a population.

    Under :class:`SigmaRule` and :class:`FixedK` the threshold is derived from the sample standard deviation of the
    `weights`, and the forward MSE is measured on the population. Under :class:`PriorOptimal` the threshold and the
    forward MSE are derived from the prior, and the `weights` are not used.

    .. runblock:: pycon

        >>> import szt.prior, szt.quantizer
        >>> rule = szt.quantizer.PriorOptimal(szt.prior.LaplacePrior(1.0))
        >>> szt.quantizer.calibrate(None, rule)

    Raises:
        CalibrationError: If the population is degenerate (less than two values, or zero variance).
    """
    if isinstance(rule, PriorOptimal):
        delta = optimal_threshold(rule.prior)
        return CalibrationResult(
            delta = delta,
            k = delta / rule.prior.std_dev(),
            forward_mse = mse_forward(rule.prior, delta),
            rule = rule.name,
        )

    weights = szt.core.require_finite(weights, 'weights').ravel()
    if weights.size < 2:
        raise CalibrationError(f'At least two weights are required for calibration (got {weights.size})')
    sigma = float(np.std(weights, ddof = 1))
    if not sigma > 0:
        raise CalibrationError('Cannot calibrate a population with zero variance')
    k = rule.k if isinstance(rule, FixedK) else 1.0
    delta = k * sigma
    return CalibrationResult(
        delta = delta,
        k = k,
        forward_mse = population_mse(weights, delta),
        rule = rule.name,
    )


def channel_slices(weights: np.ndarray, granularity: szt.core.Granularity) -> List[np.ndarray]:
    """
    The flattened populations of the channels (or the single population of the layer).
    """
    if isinstance(granularity, PerChannel):
        granularity.channel_count(weights.shape)
        return list(np.moveaxis(weights, granularity.axis, 0).reshape(weights.shape[granularity.axis], -1))
    else:
        return [weights.ravel()]


def calibrate_tensor(weights: ArrayLike, config: LayerQuantConfig) -> List[CalibrationResult]:
    """
    Calibrate the threshold of each channel (or the single threshold of the layer).

    Raises:
        CalibrationError: If the tensor is empty, or a channel is degenerate.
    """
    weights = szt.core.require_finite(weights, 'weights')
    if weights.size == 0:
        raise CalibrationError('Cannot quantize an empty tensor')
    return [calibrate(channel, config.threshold_rule) for channel in channel_slices(weights, config.granularity)]


def quantize_tensor(
        weights: ArrayLike,
        config: LayerQuantConfig,
        calibration: Optional[Sequence[CalibrationResult]] = None,
    ) -> szt.core.PackedTernaryTensor:
    """
    Quantize a tensor to signed-zero ternary codes.

    Arguments:
        weights: The tensor (rank 0 is treated as a single-element vector).
        config: The quantization settings.
        calibration: Previously computed result of :func:`calibrate_tensor`. Computed if omitted.

    Raises:
        CalibrationError: If the tensor is empty, or a channel is degenerate.
    """
    weights = szt.core.require_finite(weights, 'weights')
    if weights.ndim == 0:
        weights = weights.reshape(1)
    if calibration is None:
        calibration = calibrate_tensor(weights, config)
    thresholds = [result.delta for result in calibration]
    if config.scale_rule == ScaleRule.EQUAL_THRESHOLD:
        scales = thresholds
    else:
        scales = [1.0] * len(thresholds)
    codes = encode_szt(weights, szt.core.broadcast_channels(thresholds, weights.shape, config.granularity))
    return szt.core.PackedTernaryTensor.from_codes(codes, config.granularity, thresholds, scales)


def optimal_threshold(prior: szt.prior.Prior) -> float:
    """
    The threshold which minimizes :func:`mse_forward` under a parametric prior.

    The Laplace optimum is the closed form :math:`\\sqrt{2} b`. Other priors are minimized numerically over
    :math:`(0, 4\\sigma]`, to an absolute tolerance of :math:`10^{-6} \\sigma`.

    .. runblock:: pycon

        >>> import szt.prior, szt.quantizer
        >>> print(szt.quantizer.optimal_threshold(szt.prior.GaussianPrior(1.0)))

    Raises:
        UnsupportedPriorError: If the prior is empirical.
    """
    if not prior.parametric:
        raise UnsupportedPriorError('Calibrate empirical populations with a sigma rule instead')
    if isinstance(prior, szt.prior.LaplacePrior):
        return float(np.sqrt(2) * prior.b)
    sigma = prior.std_dev()
    result = scipy.optimize.minimize_scalar(
        lambda delta: mse_forward(prior, delta),
        bounds = (1e-6 * sigma, 4 * sigma),
        method = 'bounded',
        options = dict(xatol = 1e-6 * sigma),
    )
    return float(result.x)


def laplace_mse(b: float, delta: float) -> float:
    """
    Closed-form forward MSE under a Laplace prior, :math:`2b^2 - e^{-\\Delta/b}(2b\\Delta + \\Delta^2)`.
    """
    return 2 * b ** 2 - np.exp(-delta / b) * (2 * b * delta + delta ** 2)


def mse_forward(
        prior: szt.prior.Prior,
        delta: float,
        method: Literal['auto', 'quadrature'] = 'auto',
    ) -> float:
    """
    Expected squared error of reconstructing a weight drawn from the `prior` at the levels
    :math:`\\{-\\Delta, 0, +\\Delta\\}`.

    With ``method = 'auto'``, the Laplace prior uses the closed form :func:`laplace_mse`, and empirical priors the
    population average. Everything else is integrated by adaptive quadrature with relative tolerance :math:`10^{-8}`.
    """
    delta = szt.core.require_positive(delta, 'threshold')
    if method == 'auto' and isinstance(prior, szt.prior.LaplacePrior):
        return float(laplace_mse(prior.b, delta))
    if not prior.parametric:
        return population_mse(prior.samples, delta)

    inner = scipy.integrate.quad(lambda w: w ** 2 * prior.pdf(w), 0, delta, epsrel = 1e-8)[0]
    outer = scipy.integrate.quad(lambda w: (w - delta) ** 2 * prior.pdf(w), delta, np.inf, epsrel = 1e-8)[0]
    return float((2 if prior.symmetric else 1) * (inner + outer))


def read_dense(filepath: PathLike) -> RealArray:
    """
    Read dense weights from a flat little-endian 32-bit float file, with the dimensions taken from the JSON sidecar
    (the same path with ``.json`` appended), e.g. ``{"dims": [64, 32]}``.

    Raises:
        InvalidInputError: If the sidecar is missing or malformed.
        LengthMismatchError: If the number of values does not match the dimensions.
    """
    filepath = pathlib.Path(filepath)
    sidecar_filepath = filepath.with_name(filepath.name + '.json')
    try:
        dims = [int(d) for d in json.loads(sidecar_filepath.read_text())['dims']]
    except (OSError, ValueError, KeyError, TypeError) as error:
        raise szt.core.InvalidInputError(f'Cannot read the sidecar {sidecar_filepath}: {error}')
    values = np.fromfile(filepath, dtype = '<f4')
    if values.size != int(np.prod(dims)):
        raise szt.core.LengthMismatchError('Weights do not match the dimensions', int(np.prod(dims)), values.size)
    return values.astype(float).reshape(dims)


def write_dense(weights: ArrayLike, filepath: PathLike) -> pathlib.Path:
    """
    Write dense weights in the format read by :func:`read_dense`.
    """
    filepath = pathlib.Path(filepath)
    weights = np.asarray(weights)
    weights.astype('<f4').tofile(filepath)
    filepath.with_name(filepath.name + '.json').write_text(json.dumps(dict(dims = list(weights.shape))))
    return filepath
