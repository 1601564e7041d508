import dataclasses
import enum

import numpy as np
import scipy.integrate
import scipy.special

import szt.core
import szt.parallel
import szt.prior
import szt.quantizer
import szt.status
from szt.core import TernaryCode
from szt.typing import (
    ArrayLike,
    CodeArray,
    Dict,
    Literal,
    Optional,
    RealArray,
    Seed,
    Union,
)


class MissingRandomnessError(szt.core.SztError, ValueError):
    """
    Raised when a stochastic estimator is used without a :class:`~szt.core.RandomSource`.
    """
    pass


class OutOfDomainError(szt.core.SztError, ValueError):
    """
    Raised when an argument lies outside of the domain where a quantity is defined (e.g., a weight outside of the dead
    zone, or a step outside of :math:`(0, \\Delta)`).
    """
    pass


class SteKind(enum.Enum):
    """
    Straight-through estimators for the backward pass of the quantizer.
    """

    BT = 'bt'
    """
    Balanced ternary, passes the upstream gradient unchanged.
    """

    SZT = 'szt'
    """
    Signed-zero ternary, multiplies the upstream gradient by the stored sign inside the dead zone.
    """

    SR = 'sr'
    """
    Stochastic rounding in the forward pass, identity surrogate in the backward pass.
    """

    @property
    def deterministic(self) -> bool:
        return self is not SteKind.SR


def ste_backward(
        kind: SteKind,
        w: ArrayLike,
        delta: ArrayLike,
        code: Union[TernaryCode, ArrayLike],
        upstream: ArrayLike,
        rng: Optional[szt.core.RandomSource] = None,
    ) -> RealArray:
    """
    Surrogate gradient of the quantizer with respect to the latent weight.

    Outside of the dead zone all kinds pass the `upstream` gradient unchanged. Inside of the dead zone, the signed-zero
    estimator multiplies it by the stored sign of the `code`, and the other estimators pass it unchanged.

    Arguments:
        kind: The estimator.
        w: The latent weight(s).
        delta: The threshold(s), broadcastable against `w`.
        code: The code word(s) produced by the forward pass for `w`.
        upstream: The upstream gradient, broadcastable against `w`.
        rng: The random source of the stochastic estimator (required for :attr:`SteKind.SR`, unused otherwise).

    Raises:
        MissingRandomnessError: If `kind` is :attr:`SteKind.SR` and `rng` is `None`.
    """
    if kind is SteKind.SR and rng is None:
        raise MissingRandomnessError('The stochastic-rounding estimator requires a random source')
    upstream = np.asarray(upstream, dtype = float)
    if kind is SteKind.SZT:
        w = szt.core.require_finite(w, 'weight')
        inside = np.abs(w) <= np.asarray(delta, dtype = float)
        return np.where(inside, szt.core.stored_sign(code), 1) * upstream
    else:
        return upstream.copy()


def sr_round(w: ArrayLike, delta: ArrayLike, rng: szt.core.RandomSource) -> Union[TernaryCode, CodeArray]:
    """
    Stochastic rounding onto :math:`\\{-1, 0, +1\\}`.

    Inside of the dead zone, the result is :math:`\\pm 1` (by the sign of `w`) with probability :math:`|w|/\\Delta`,
    and zero otherwise. Outside of the dead zone, the result is clamped to :math:`\\pm 1`. The zero is always stored
    as :math:`0^+`, so stochastic rounding never produces representational transitions.

    Raises:
        InvalidInputError: If `w` is not finite or `delta` is not strictly positive.
    """
    w = szt.core.require_finite(w, 'weight')
    delta = szt.quantizer.require_thresholds(delta)
    probability = np.minimum(np.abs(w) / delta, 1.0)
    rounded_up = rng.uniform(size = probability.shape) < probability
    codes = np.where(
        rounded_up,
        np.where(w >= 0, TernaryCode.PLUS_ONE, TernaryCode.MINUS_ONE),
        TernaryCode.ZERO_PLUS,
    ).astype(np.uint8)
    return TernaryCode(int(codes)) if np.ndim(w) == 0 else codes


def _require_dead_zone(w: float, delta: float) -> None:
    if abs(w) > delta:
        raise OutOfDomainError(f'The weight {w} lies outside of the dead zone [-{delta}, {delta}]')


def bias_bound(kind: SteKind, w: float, delta: float, g_norm: float) -> float:
    """
    Upper bound of the bias :math:`\\|E[\\hat g] - g\\|` of an estimator inside of the dead zone.

    The bounds are :math:`\\|g\\|` for balanced ternary, :math:`(|w|/\\Delta) \\|g\\|` for signed-zero ternary, and
    zero for stochastic rounding.

    Raises:
        OutOfDomainError: If `w` lies outside of the dead zone.
    """
    delta = szt.core.require_positive(delta, 'threshold')
    _require_dead_zone(w, delta)
    assert g_norm >= 0, 'Gradient norm must be non-negative'
    if kind is SteKind.BT:
        return float(g_norm)
    elif kind is SteKind.SZT:
        return abs(w) / delta * g_norm
    else:
        return 0.0


def variance_bound(kind: SteKind, delta: float, g_norm: float) -> float:
    """
    Upper bound of the extra variance of an estimator: zero for the deterministic estimators, and
    :math:`\\frac{1}{4} \\Delta^2 \\|g\\|^2` for stochastic rounding.
    """
    delta = szt.core.require_positive(delta, 'threshold')
    assert g_norm >= 0, 'Gradient norm must be non-negative'
    return delta ** 2 * g_norm ** 2 / 4 if kind is SteKind.SR else 0.0


@dataclasses.dataclass(frozen = True)
class BiasVarianceReport:
    """
    Monte Carlo decomposition of the mean squared error of an estimator.
    """

    bias_sq: float
    """
    Squared norm of the mean error.
    """

    variance: float
    """
    Mean squared deviation of the error from its mean.
    """

    trials: int
    """
    The number of trials.
    """

    se_variance: float = 0.0
    """
    Standard error of :attr:`variance`.
    """

    @property
    def mse(self) -> float:
        """
        The mean squared error, :attr:`bias_sq` plus :attr:`variance`.
        """
        return self.bias_sq + self.variance

    def to_dict(self) -> Dict[str, float]:
        return dict(dataclasses.asdict(self), mse = self.mse)


def mse_estimate_mc(
        kind: SteKind,
        w: float,
        delta: float,
        g: ArrayLike,
        trials: int,
        seed: Seed,
        threads: int = 1,
        status: Optional[szt.status.Status] = None,
    ) -> BiasVarianceReport:
    """
    Measure the bias and variance of an estimator for a weight inside of the dead zone.

    Each trial yields the error of the estimator with respect to the upstream gradient `g`: the balanced-ternary error
    is `g` itself, the signed-zero error is :math:`(|w|/\\Delta) \\, \\mathrm{sgn}(q) \\, g`, and the error of
    stochastic rounding is :math:`(\\Delta v(\\tilde q) - w) \\, g` for a fresh stochastic rounding :math:`\\tilde q`
    of `w`. Deterministic estimators therefore report a variance of exactly zero.

    Raises:
        OutOfDomainError: If `w` lies outside of the dead zone.
    """
    delta = szt.core.require_positive(delta, 'threshold')
    _require_dead_zone(w, delta)
    assert trials >= 1, 'At least one trial is required'
    g = np.atleast_1d(np.asarray(g, dtype = float))

    if kind is SteKind.BT:
        factors = np.ones(trials)
    elif kind is SteKind.SZT:
        sign = szt.core.stored_sign(szt.quantizer.encode_szt(w, delta))
        factors = np.full(trials, abs(w) / delta * sign)
    else:
        rng = szt.core.RandomSource(seed)

        def run_chunk(chunk_idx: int, start: int, stop: int) -> RealArray:
            codes = sr_round(np.full(stop - start, w, dtype = float), delta, rng.derive(chunk_idx))
            return delta * szt.core.numeric_value(codes) - w

        chunks = szt.parallel.map_chunks(run_chunk, trials, threads = threads)
        factors = np.concatenate(chunks)

    szt.status.update(status, info = 'mse-estimate', kind = kind.value, trials = trials, intermediate = True)

    # Shifting by the first trial keeps the variance of identical trials exactly zero
    shifted = factors - factors[0]
    mean_shift = shifted.mean()
    deviations = (shifted - mean_shift) ** 2
    g_sq = float(np.dot(g, g))
    variance = float(deviations.mean()) * g_sq
    se_variance = float(deviations.std() / np.sqrt(trials)) * g_sq
    bias_sq = float((factors[0] + mean_shift) ** 2) * g_sq
    return BiasVarianceReport(bias_sq = bias_sq, variance = variance, trials = trials, se_variance = se_variance)


def avg_dead_zone_mse(
        prior: szt.prior.Prior,
        k: float,
        method: Literal['auto', 'quadrature'] = 'auto',
    ) -> float:
    """
    The conditional expectation :math:`E[(|w|/\\Delta)^2 \\mid |w| \\leq \\Delta]` for :math:`\\Delta = k \\sigma`.

    This is the average squared bias factor of the signed-zero estimator inside of the dead zone. The Laplace and
    Gaussian priors have closed forms, all other priors (and ``method = 'quadrature'``) use adaptive quadrature with
    relative tolerance :math:`10^{-8}`.

    .. runblock:: pycon

        >>> import szt.grad, szt.prior
        >>> print(szt.grad.avg_dead_zone_mse(szt.prior.LaplacePrior(1.0), 1.0))
        >>> print(szt.grad.avg_dead_zone_mse(szt.prior.GaussianPrior(1.0), 1.0))
    """
    k = szt.core.require_positive(k, 'The ratio k')
    delta = k * prior.std_dev()

    if method == 'auto' and isinstance(prior, szt.prior.LaplacePrior):
        a = delta / prior.b
        return float((2 - np.exp(-a) * (a ** 2 + 2 * a + 2)) / (a ** 2 * -np.expm1(-a)))

    if method == 'auto' and isinstance(prior, szt.prior.GaussianPrior):
        density = np.exp(-k ** 2 / 2) / np.sqrt(2 * np.pi)
        return float((1 - 2 * k * density / scipy.special.erf(k / np.sqrt(2))) / k ** 2)

    if not prior.parametric:
        magnitudes = np.abs(prior.samples)
        inside = magnitudes[magnitudes <= delta]
        return float(np.mean((inside / delta) ** 2))

    moment = scipy.integrate.quad(lambda x: (x / delta) ** 2 * prior.pdf(x), 0, delta, epsrel = 1e-8)[0]
    if prior.symmetric:
        moment *= 2
    return float(moment / prior.abs_cdf(delta))


def momentum_simulate(
        kind: SteKind,
        beta: float,
        g_seq: ArrayLike,
        steps: int,
        m0: float = 0.0,
        sign: int = 1,
    ) -> RealArray:
    """
    Iterate the momentum recursion :math:`m_{t+1} = \\beta m_t + \\hat g_t` for a weight which stays inside of the
    dead zone.

    The balanced-ternary estimate is :math:`\\hat g_t = 0` (the quantized output does not respond to the weight), the
    signed-zero estimate is the gradient magnitude modulated by the stored `sign`, and the stochastic-rounding estimate
    is the gradient magnitude itself.

    Arguments:
        kind: The estimator.
        beta: The momentum coefficient in :math:`(0, 1)`.
        g_seq: Gradient magnitudes, a scalar or a sequence (repeated cyclically if shorter than `steps`).
        steps: The number of iterations.
        m0: The initial momentum.
        sign: The stored sign of the weight.

    Returns:
        The squared momentum :math:`m_t^2` after each iteration.

    Raises:
        OutOfDomainError: If `beta` is not in :math:`(0, 1)`.
    """
    if not 0 < beta < 1:
        raise OutOfDomainError(f'Momentum coefficient must be in (0, 1): {beta}')
    assert sign in (-1, 1), 'Stored sign must be -1 or +1'
    g_seq = np.resize(np.asarray(g_seq, dtype = float), steps)
    if kind is SteKind.BT:
        g_hat = np.zeros(steps)
    elif kind is SteKind.SZT:
        g_hat = sign * g_seq
    else:
        g_hat = g_seq
    trajectory = np.empty(steps)
    m = float(m0)
    for t in range(steps):
        m = beta * m + g_hat[t]
        trajectory[t] = m * m
    return trajectory
