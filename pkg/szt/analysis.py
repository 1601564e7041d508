"""
Closed forms of the quantities that characterize signed-zero ternary quantization: per-step transition
sensitivities, feedback event counts, entropies, PAC-Bayes terms, and mean dead-zone escape times.
"""

import dataclasses
import math

import numpy as np
import scipy.integrate
import scipy.special

import szt.config
import szt.core
import szt.grad
import szt.prior
import szt.quantizer
import szt.status
import szt.table
from szt.grad import (
    OutOfDomainError,
    SteKind,
)
from szt.typing import (
    ArrayLike,
    Any,
    Callable,
    Dict,
    List,
    Literal,
    Optional,
    RealArray,
    Seed,
    Sequence,
    Union,
)

Method = Literal['exact', 'quadrature']


class StepDist:
    """
    Distribution of the magnitude :math:`S` of a single latent-weight update, supported on :math:`(0, \\Delta)`.
    """

    def mgf(self, t: float) -> float:
        """
        The moment generating function :math:`M_S(t) = E[e^{tS}]`.
        """
        return 1.0 + self.mgf_minus_one(t)

    def mgf_minus_one(self, t: float) -> float:
        """
        :math:`M_S(t) - 1`, without the cancellation of computing it from :meth:`mgf`.
        """
        raise NotImplementedError()

    def expect(self, func: Callable[[ArrayLike], ArrayLike]) -> float:
        """
        The expectation :math:`E[f(S)]`.
        """
        raise NotImplementedError()

    def sample(self, n: int, rng: szt.core.RandomSource) -> RealArray:
        raise NotImplementedError()

    @property
    def upper(self) -> float:
        """
        The supremum of the support.
        """
        raise NotImplementedError()

    def check_support(self, delta: float) -> None:
        """
        Raises:
            OutOfDomainError: If the support is not within :math:`(0, \\Delta)`.
        """
        if not self.upper < delta:
            raise OutOfDomainError(f'Steps up to {self.upper} are not within (0, {delta})')


@dataclasses.dataclass(frozen = True)
class DeterministicStep(StepDist):
    """
    Every step has the magnitude `s0`.
    """

    s0: float

    def __post_init__(self):
        if not self.s0 > 0:
            raise OutOfDomainError(f'Step magnitude must be positive: {self.s0}')

    def mgf_minus_one(self, t: float) -> float:
        return float(np.expm1(t * self.s0))

    def expect(self, func):
        return float(func(self.s0))

    def sample(self, n: int, rng: szt.core.RandomSource) -> RealArray:
        return np.full(n, self.s0)

    @property
    def upper(self) -> float:
        return self.s0


@dataclasses.dataclass(frozen = True)
class ExponentialStep(StepDist):
    """
    Exponentially distributed steps with the given `mean` (before truncation), truncated to :math:`(0, \\Delta)`.
    """

    mean: float
    delta: float

    def __post_init__(self):
        if not (self.mean > 0 and self.delta > 0):
            raise OutOfDomainError(f'Mean and truncation must be positive: {self.mean}, {self.delta}')

    @property
    def rate(self) -> float:
        return 1 / self.mean

    def mgf_minus_one(self, t: float) -> float:
        r, d = self.rate, self.delta
        mass = -np.expm1(-r * d)
        if np.isclose(t, r, rtol = 1e-14, atol = 0):
            return float(r * d / mass - 1)
        return float(r / (r - t) * -np.expm1((t - r) * d) / mass - 1)

    def pdf(self, s: ArrayLike) -> ArrayLike:
        s = np.asarray(s, dtype = float)
        inside = (s > 0) & (s < self.delta)
        return np.where(inside, self.rate * np.exp(-self.rate * s) / -np.expm1(-self.rate * self.delta), 0.0)

    def expect(self, func):
        result = scipy.integrate.quad(lambda s: func(s) * self.pdf(s), 0, self.delta, epsabs = 0, epsrel = 1e-10)
        return float(result[0])

    def sample(self, n: int, rng: szt.core.RandomSource) -> RealArray:
        # Inverse transform of the truncated distribution function
        u = rng.uniform(size = n)
        s = -np.log1p(u * np.expm1(-self.rate * self.delta)) / self.rate
        return np.clip(s, np.finfo(float).tiny, np.nextafter(self.delta, 0))

    @property
    def upper(self) -> float:
        return self.delta

    def check_support(self, delta: float) -> None:
        if self.delta > delta:
            raise OutOfDomainError(f'Steps truncated at {self.delta} are not within (0, {delta})')


class EmpiricalStep(StepDist):
    """
    Steps drawn from a sample population.
    """

    samples: RealArray

    def __init__(self, samples: ArrayLike):
        samples = szt.core.require_finite(samples, 'step samples').ravel()
        if samples.size == 0 or np.any(samples <= 0):
            raise OutOfDomainError('Step samples must be positive, and there must be at least one')
        self.samples = samples

    def mgf_minus_one(self, t: float) -> float:
        return float(np.mean(np.expm1(t * self.samples)))

    def expect(self, func):
        return float(np.mean(func(self.samples)))

    def sample(self, n: int, rng: szt.core.RandomSource) -> RealArray:
        return rng.choice(self.samples, size = n, replace = True)

    @property
    def upper(self) -> float:
        return float(self.samples.max())


def create_step(kind: Literal['deterministic', 'exponential'], mean: float, delta: float) -> StepDist:
    if kind == 'deterministic':
        return DeterministicStep(mean)
    elif kind == 'exponential':
        return ExponentialStep(mean, delta)
    raise szt.core.InvalidInputError(f'Unknown step distribution: "{kind}"')


def _check_steps(delta: float, s: ArrayLike) -> np.ndarray:
    delta = szt.core.require_positive(delta, 'threshold')
    s = np.asarray(s, dtype = float)
    if not np.all((s > 0) & (s < delta)):
        raise OutOfDomainError(f'Steps must be within (0, {delta})')
    return s


def _scalar_or_array(value: np.ndarray) -> Union[float, RealArray]:
    value = np.asarray(value, dtype = float)
    return float(value) if value.ndim == 0 else value


def _integrate_density(prior: szt.prior.Prior, lower: float, upper: float) -> float:
    mass = scipy.integrate.quad(prior.pdf, lower, upper, epsabs = 0, epsrel = 1e-11, limit = 200)[0]
    return (2 if prior.symmetric else 1) * mass


def phi_r(prior: szt.prior.Prior, delta: float, s: ArrayLike, method: Method = 'exact') -> Union[float, RealArray]:
    """
    Probability that a step of magnitude `s` flips the stored sign of a zero, :math:`P(|w| \\leq s)`.

    For the Laplace prior, this is :math:`1 - e^{-s/b}`. With ``method = 'quadrature'``, the density is integrated
    numerically instead.

    Raises:
        OutOfDomainError: If `s` is not within :math:`(0, \\Delta)`.
    """
    s = _check_steps(delta, s)
    if method == 'quadrature':
        return _scalar_or_array(np.vectorize(lambda x: _integrate_density(prior, 0.0, x))(s))
    if isinstance(prior, szt.prior.LaplacePrior):
        return _scalar_or_array(-np.expm1(-s / prior.b))
    return _scalar_or_array(prior.abs_cdf(s))


def phi_f(prior: szt.prior.Prior, delta: float, s: ArrayLike, method: Method = 'exact') -> Union[float, RealArray]:
    """
    Probability that a step of magnitude `s` moves a weight across the threshold, :math:`P(\\Delta - s < |w| \\leq
    \\Delta)`.

    For the Laplace prior, this is :math:`e^{-\\Delta/b}(e^{s/b} - 1)`.

    .. runblock:: pycon

        >>> import numpy as np, szt.analysis, szt.prior
        >>> print(szt.analysis.phi_f(szt.prior.LaplacePrior(1.0), np.sqrt(2), 0.1))

    Raises:
        OutOfDomainError: If `s` is not within :math:`(0, \\Delta)`.
    """
    s = _check_steps(delta, s)
    if method == 'quadrature':
        return _scalar_or_array(np.vectorize(lambda x: _integrate_density(prior, delta - x, delta))(s))
    if isinstance(prior, szt.prior.LaplacePrior):
        return _scalar_or_array(np.exp(-delta / prior.b) * np.expm1(s / prior.b))
    return _scalar_or_array(prior.abs_cdf(delta) - prior.abs_cdf(delta - s))


def density_ratio(prior: szt.prior.Prior, delta: float) -> float:
    """
    The ratio :math:`p(0) / p(\\Delta)`, or infinity if :math:`p(\\Delta) = 0`.
    """
    at_delta = float(prior.pdf(delta))
    return math.inf if at_delta == 0 else prior.density_at_zero() / at_delta


@dataclasses.dataclass(frozen = True)
class SensitivityReport:
    """
    Per-step sensitivities, and their ratio compared to the density ratio :math:`p(0)/p(\\Delta)`.
    """

    phi_f: float
    """
    Probability of a numeric transition.
    """

    phi_r: float
    """
    Probability of a representational transition.
    """

    ratio: float
    """
    The ratio :math:`\\Phi_R / \\Phi_F` (infinite if :math:`\\Phi_F = 0`).
    """

    lower_bound: float
    """
    The density ratio :math:`p(0)/p(\\Delta)`.
    """

    @property
    def violated(self) -> bool:
        """
        Whether the ratio falls below the density ratio. This happens for finite steps (the density ratio is the
        limit for vanishing steps), so it is reported rather than treated as an error.
        """
        return self.ratio < self.lower_bound

    def to_dict(self) -> Dict[str, Any]:
        return dict(dataclasses.asdict(self), violated = self.violated)


def sensitivity_ratio(prior: szt.prior.Prior, delta: float, s: float, method: Method = 'exact') -> SensitivityReport:
    """
    Compare the sensitivities :func:`phi_r` and :func:`phi_f` for a step of magnitude `s`.

    .. runblock:: pycon

        >>> import numpy as np, szt.analysis, szt.prior
        >>> szt.analysis.sensitivity_ratio(szt.prior.LaplacePrior(1.0), np.sqrt(2), 0.1)
    """
    forward = phi_f(prior, delta, s, method)
    representational = phi_r(prior, delta, s, method)
    return SensitivityReport(
        phi_f = forward,
        phi_r = representational,
        ratio = math.inf if forward == 0 else representational / forward,
        lower_bound = density_ratio(prior, delta),
    )


def expected_ratio(step: StepDist, b: float, delta: float) -> float:
    """
    The ratio :math:`E[\\Phi_R(S)] / E[\\Phi_F(S)]` under a Laplace prior with scale `b`, expressed through the moment
    generating function of the step distribution,

    .. math::

        e^{\\Delta/b} \\, \\frac{1 - M_S(-1/b)}{M_S(1/b) - 1}.

    Raises:
        OutOfDomainError: If the steps are not within :math:`(0, \\Delta)`.
    """
    b = szt.core.require_positive(b, 'Laplace scale')
    step.check_support(delta)
    return float(np.exp(delta / b) * -step.mgf_minus_one(-1 / b) / step.mgf_minus_one(1 / b))


@dataclasses.dataclass(frozen = True)
class FeedbackReport:
    """
    Expected numbers of numeric (:attr:`E_F`) and representational (:attr:`E_R`) transitions over a number of steps.
    """

    E_F: float
    E_R: float

    per_channel: List[Dict[str, float]]
    """
    The expectations and the density ratio of each channel.
    """

    @property
    def ratio(self) -> float:
        return math.inf if self.E_F == 0 else self.E_R / self.E_F

    @property
    def min_lower_bound(self) -> float:
        """
        The smallest density ratio :math:`\\min_c p_c(0)/p_c(\\Delta_c)` of all channels.
        """
        return min(channel['lower_bound'] for channel in self.per_channel)

    def to_dict(self) -> Dict[str, Any]:
        return dict(E_F = self.E_F, E_R = self.E_R, ratio = self.ratio, per_channel = self.per_channel)


def feedback_events(
        n_steps: int,
        step: StepDist,
        prior: Union[szt.prior.Prior, Sequence[szt.prior.Prior]],
        deltas: Union[float, Sequence[float]],
    ) -> FeedbackReport:
    """
    Expected transition counts over `n_steps` updates, summed over channels with thresholds `deltas`.

    Arguments:
        n_steps: Number of updates.
        step: Distribution of the update magnitude.
        prior: The weight prior, either shared or one per channel.
        deltas: One threshold per channel.
    """
    if n_steps < 1:
        raise OutOfDomainError(f'Number of steps must be positive: {n_steps}')
    deltas = list(np.atleast_1d(np.asarray(deltas, dtype = float)))
    priors = list(prior) if isinstance(prior, Sequence) else [prior] * len(deltas)
    assert len(priors) == len(deltas), 'One prior per channel is required'

    channels = list()
    for channel_prior, delta in zip(priors, deltas):
        step.check_support(delta)
        channels.append(
            dict(
                delta = float(delta),
                E_F = n_steps * step.expect(lambda s: phi_f(channel_prior, delta, s)),
                E_R = n_steps * step.expect(lambda s: phi_r(channel_prior, delta, s)),
                lower_bound = density_ratio(channel_prior, delta),
            )
        )
    return FeedbackReport(
        E_F = float(sum(channel['E_F'] for channel in channels)),
        E_R = float(sum(channel['E_R'] for channel in channels)),
        per_channel = channels,
    )


def _check_probability(p: float, name: str = 'probability') -> float:
    if not 0 <= p <= 1:
        raise OutOfDomainError(f'{name} must be within [0, 1]: {p}')
    return float(p)


def _entropy_bits(probabilities: Sequence[float]) -> float:
    # `entr` uses the convention 0 log 0 = 0
    return float(np.sum(scipy.special.entr(np.asarray(probabilities, dtype = float))) / np.log(2))


def entropy_bt(p0: float) -> float:
    """
    Entropy (in bits) of the balanced-ternary states, with the mass :math:`1 - P_0` split evenly between
    :math:`\\pm 1`.
    """
    p0 = _check_probability(p0, 'Dead-zone mass')
    return _entropy_bits([p0, (1 - p0) / 2, (1 - p0) / 2])


def entropy_szt(p0: float) -> float:
    """
    Entropy (in bits) of the signed-zero ternary states, where the dead-zone mass is split evenly between the two
    zeros.
    """
    p0 = _check_probability(p0, 'Dead-zone mass')
    return _entropy_bits([p0 / 2, p0 / 2, (1 - p0) / 2, (1 - p0) / 2])


def entropy_gap(p0: float) -> float:
    """
    The entropy gained by the signed zero, :math:`H_{SZT} - H_{BT} = P_0` bits.

    .. runblock:: pycon

        >>> import szt.analysis
        >>> print(szt.analysis.entropy_gap(0.25))
        >>> print(szt.analysis.entropy_szt(0.5) - szt.analysis.entropy_bt(0.5))
    """
    return _check_probability(p0, 'Dead-zone mass')


def dead_zone_mass(prior: szt.prior.Prior, delta: float) -> float:
    """
    The probability :math:`P_0 = P(|w| \\leq \\Delta)`.
    """
    if not delta > 0:
        raise szt.core.InvalidInputError(f'Threshold must be positive: {delta}')
    return float(prior.abs_cdf(delta))


def pac_bayes_bound(emp_loss: float, kl: float, n: int, delta_conf: float) -> float:
    """
    The PAC-Bayes bound :math:`\\hat L + \\sqrt{(\\mathrm{KL} + \\ln(2\\sqrt{N}/\\delta)) / (2(N-1))}`.

    Raises:
        OutOfDomainError: If `n` is less than 2, `kl` is negative, or the loss or confidence are out of range.
    """
    if n < 2:
        raise OutOfDomainError(f'The bound requires at least two samples: {n}')
    if kl < 0:
        raise OutOfDomainError(f'KL divergence must be non-negative: {kl}')
    _check_probability(emp_loss, 'Empirical loss')
    if not 0 < delta_conf < 1:
        raise OutOfDomainError(f'Confidence must be within (0, 1): {delta_conf}')
    return float(emp_loss + math.sqrt((kl + math.log(2 * math.sqrt(n) / delta_conf)) / (2 * (n - 1))))


def pac_bayes_gap(d: int, p0: float, n: int) -> float:
    """
    The tightening of the PAC-Bayes bound by the KL reduction, :math:`\\sqrt{d P_0 \\ln 2 / (2(N - 1))}`.

    Since :math:`\\sqrt{a + x} - \\sqrt{a} \\leq \\sqrt{x}`, this bounds the exact difference of the two bounds from
    above.

    .. runblock:: pycon

        >>> import szt.analysis
        >>> print(szt.analysis.pac_bayes_gap(10 ** 6, 0.25, 10 ** 5))
    """
    if d < 1 or n < 2:
        raise OutOfDomainError(f'Requires d >= 1 and n >= 2: d={d}, n={n}')
    return math.sqrt(kl_reduction(d, p0) / (2 * (n - 1)))


def kl_reduction(d: int, p0: float) -> float:
    """
    KL reduction in nats over `d` weights, :math:`d P_0 \\ln 2`.
    """
    if d < 1:
        raise OutOfDomainError(f'Number of weights must be positive: {d}')
    return d * _check_probability(p0, 'Dead-zone mass') * math.log(2)


def categorical_kl(q: ArrayLike, p: ArrayLike) -> float:
    """
    The KL divergence :math:`\\sum_i q_i \\ln(q_i / p_i)` in nats, with :math:`0 \\ln 0 = 0` (infinite if :math:`q` puts
    mass where :math:`p` does not).
    """
    q = np.asarray(q, dtype = float)
    p = np.asarray(p, dtype = float)
    assert q.shape == p.shape, 'Distributions must have the same support'
    return float(np.sum(scipy.special.rel_entr(q, p)))


def state_distributions(p0: float, symmetric: bool = True) -> Dict[str, RealArray]:
    """
    Probabilities of the code words ``(0+, +1, 0-, -1)`` under balanced ternary (one zero, the pattern of `0-` is
    unused) and under signed-zero ternary (the dead-zone mass split evenly between the zeros).

    For half priors (``symmetric = False``), the mass outside of the dead zone is at :math:`+1`.
    """
    p0 = _check_probability(p0, 'Dead-zone mass')
    plus, minus = ((1 - p0) / 2, (1 - p0) / 2) if symmetric else (1 - p0, 0.0)
    return dict(
        bt = np.array([p0, plus, 0.0, minus]),
        szt = np.array([p0 / 2, plus, p0 / 2, minus]),
    )


def kl_codeword_uniform(p0: float) -> Dict[str, float]:
    """
    Compare the KL divergences of the balanced and signed-zero state distributions (see :func:`state_distributions`)
    from the reference which assigns equal mass to each of the four code words.

    The difference is :math:`-P_0 \\ln 2` per weight, since the KL divergence from the uniform distribution is the
    negative entropy up to a constant.

    .. runblock:: pycon

        >>> import szt.analysis
        >>> szt.analysis.kl_codeword_uniform(0.5)
    """
    states = state_distributions(p0)
    uniform = np.full(4, 0.25)
    kl_bt = categorical_kl(states['bt'], uniform)
    kl_szt = categorical_kl(states['szt'], uniform)
    return dict(kl_bt = kl_bt, kl_szt = kl_szt, difference = kl_szt - kl_bt, reference = -p0 * math.log(2))


def kl_noise_inflated(prior: szt.prior.Prior, delta: float, inflation: float = 2.0) -> Dict[str, float]:
    """
    Compare the KL divergences of the balanced and signed-zero state distributions from a reference obtained by
    quantizing an independent initialization, whose scale is `inflation` times larger.

    Both zeros are split evenly in the state distributions and in the reference, so the difference vanishes; the
    reduction :math:`-P_0 \\ln 2` requires the code-word uniform reference (see :func:`kl_codeword_uniform`).
    """
    inflation = szt.core.require_positive(inflation, 'inflation')
    p0 = dead_zone_mass(prior, delta)
    reference_p0 = float(prior.abs_cdf(delta / inflation))
    states = state_distributions(p0, prior.symmetric)
    reference = state_distributions(reference_p0, prior.symmetric)
    kl_bt = categorical_kl(states['bt'], reference['bt'])
    kl_szt = categorical_kl(states['szt'], reference['szt'])
    return dict(kl_bt = kl_bt, kl_szt = kl_szt, difference = kl_szt - kl_bt, reference = -p0 * math.log(2))


def barrier(kappa: float, sigma: float, delta: float) -> float:
    """
    The dimensionless barrier :math:`\\lambda = \\kappa \\Delta / \\sigma`.
    """
    for name, value in (('kappa', kappa), ('sigma', sigma), ('delta', delta)):
        szt.core.require_positive(value, name)
    return kappa * delta / sigma


def mfpt_closed(kind: SteKind, kappa: float, sigma: float, delta: float) -> float:
    """
    Closed-form expressions for the mean time until a latent weight, which follows an Ornstein-Uhlenbeck process
    started at zero, leaves the dead zone:

    .. math::

        E[\\tau_{BT}] = \\frac{\\sqrt{\\pi}}{2\\kappa} \\, \\frac{e^{\\lambda^2} \\mathrm{erf}(\\lambda) - \\lambda
        \\sqrt{\\pi}}{\\lambda}, \\qquad E[\\tau_{SZT}] = 1 / \\kappa.

    These expressions are evaluated as they are, and compared to :func:`szt.sim.ou_mfpt_bvp` elsewhere. The
    balanced-ternary expression is negative for small :math:`\\lambda`.
    """
    lam = barrier(kappa, sigma, delta)
    if kind is SteKind.SZT:
        return 1 / kappa
    assert kind is SteKind.BT, f'No closed form for {kind}'
    return float(
        np.sqrt(np.pi) / (2 * kappa) * (np.exp(lam ** 2) * scipy.special.erf(lam) - lam * np.sqrt(np.pi)) / lam
    )


def mfpt_ratio(lam: float) -> float:
    """
    The escape time ratio :math:`(\\sqrt{\\pi} / 2\\lambda) e^{\\lambda^2}`.
    """
    lam = szt.core.require_positive(lam, 'barrier')
    return float(np.sqrt(np.pi) / (2 * lam) * np.exp(lam ** 2))


AnalyzeQuantity = Literal[
    'sensitivity', 'ratio-mgf', 'thresholds', 'dead-zone-mse', 'entropy', 'pacbayes', 'kl', 'mfpt', 'feedback',
]

ANALYZE_QUANTITIES: List[str] = [
    'sensitivity', 'ratio-mgf', 'thresholds', 'dead-zone-mse', 'entropy', 'pacbayes', 'kl', 'mfpt', 'feedback',
]
"""
The quantities tabulated by the ``analyze`` command.
"""


def _row(inputs: Dict[str, Any], closed_form: float, oracle: float, **extra) -> Dict[str, Any]:
    abs_error = abs(closed_form - oracle)
    rel_error = abs_error / abs(oracle) if oracle != 0 else abs_error
    return dict(**inputs, closed_form = closed_form, oracle = oracle, abs_error = abs_error, rel_error = rel_error, **extra)


def _reference_priors(scale: float) -> Dict[str, szt.prior.Prior]:
    return {kind: szt.prior.create_prior(kind, scale) for kind in ('laplace', 'gaussian')}


def _tabulate_sensitivity(config: szt.config.Config, rng: szt.core.RandomSource) -> List[Dict[str, Any]]:
    rows = list()
    for kind, prior in _reference_priors(config['prior_scale']).items():
        delta = prior.std_dev()
        for s in config['steps']:
            if not s < delta:
                continue
            for name, func in (('phi_r', phi_r), ('phi_f', phi_f)):
                inputs = dict(prior = kind, delta = delta, s = s, quantity = name)
                rows.append(_row(inputs, func(prior, delta, s), func(prior, delta, s, method = 'quadrature')))
            report = sensitivity_ratio(prior, delta, s)
            rows.append(
                _row(
                    dict(prior = kind, delta = delta, s = s, quantity = 'ratio'),
                    report.ratio,
                    sensitivity_ratio(prior, delta, s, method = 'quadrature').ratio,
                    lower_bound = report.lower_bound,
                )
            )
    return rows


def _tabulate_ratio_mgf(config: szt.config.Config, rng: szt.core.RandomSource) -> List[Dict[str, Any]]:
    b = config['prior_scale']
    delta = np.sqrt(2) * b
    rows = list()
    for idx, s in enumerate(config['steps']):
        for kind in ('deterministic', 'exponential'):
            step = create_step(kind, s, delta)
            empirical = EmpiricalStep(step.sample(config['trials'], rng.derive(idx)))
            rows.append(
                _row(
                    dict(step = kind, step_mean = s, b = b, delta = delta),
                    expected_ratio(step, b, delta),
                    expected_ratio(empirical, b, delta),
                )
            )
    return rows


def _tabulate_thresholds(config: szt.config.Config, rng: szt.core.RandomSource) -> List[Dict[str, Any]]:
    rows = list()
    for kind in ('laplace', 'gaussian', 'half-laplace', 'half-gaussian'):
        prior = szt.prior.create_prior(kind, config['prior_scale'])
        sigma = prior.std_dev()
        grid = np.linspace(0.005, 4, 800) * sigma
        oracle = float(grid[np.argmin([szt.quantizer.mse_forward(prior, delta) for delta in grid])])
        optimum = szt.quantizer.optimal_threshold(prior)
        rows.append(_row(dict(prior = kind, std_dev = sigma), optimum, oracle, k = optimum / sigma))
    return rows


def _tabulate_dead_zone_mse(config: szt.config.Config, rng: szt.core.RandomSource) -> List[Dict[str, Any]]:
    rows = list()
    for kind, prior in _reference_priors(config['prior_scale']).items():
        for k in config['k_values']:
            rows.append(
                _row(
                    dict(prior = kind, k = k),
                    szt.grad.avg_dead_zone_mse(prior, k),
                    szt.grad.avg_dead_zone_mse(prior, k, method = 'quadrature'),
                )
            )
    return rows


def _tabulate_entropy(config: szt.config.Config, rng: szt.core.RandomSource) -> List[Dict[str, Any]]:
    return [
        _row(dict(p0 = p0), entropy_gap(p0), entropy_szt(p0) - entropy_bt(p0), H_bt = entropy_bt(p0))
        for p0 in np.linspace(0, 1, 11)
    ]


def _tabulate_pacbayes(config: szt.config.Config, rng: szt.core.RandomSource) -> List[Dict[str, Any]]:
    rows = list()
    for d, p0, n in ((10 ** 6, 0.25, 10 ** 5), (10 ** 6, 0.5, 10 ** 6), (10 ** 4, 0.25, 10 ** 3)):
        exact = pac_bayes_bound(0.0, kl_reduction(d, p0), n, 0.05) - pac_bayes_bound(0.0, 0.0, n, 0.05)
        rows.append(
            _row(
                dict(d = d, p0 = p0, n = n),
                pac_bayes_gap(d, p0, n),
                math.sqrt(d * p0 * math.log(2) / (2 * (n - 1))),
                exact_difference = exact,
            )
        )
    return rows


def _tabulate_kl(config: szt.config.Config, rng: szt.core.RandomSource) -> List[Dict[str, Any]]:
    rows = list()
    for p0 in np.linspace(0, 1, 11):
        result = kl_codeword_uniform(p0)
        rows.append(_row(dict(p0 = p0), -kl_reduction(1, p0), result['difference']))
    return rows


def _tabulate_mfpt(config: szt.config.Config, rng: szt.core.RandomSource) -> List[Dict[str, Any]]:
    import szt.sim  # imports this module
    rows = list()
    for kappa in (0.5, 1.0, 2.0):
        for lam in (0.5, 1.0, 1.25):
            delta = lam / kappa
            rows.append(
                _row(
                    dict(kappa = kappa, sigma = 1.0, delta = delta, lam = lam),
                    mfpt_closed(SteKind.BT, kappa, 1.0, delta),
                    szt.sim.ou_mfpt_bvp(kappa, 1.0, delta),
                    szt_formula = mfpt_closed(SteKind.SZT, kappa, 1.0, delta),
                    ratio_formula = mfpt_ratio(lam),
                )
            )
    return rows


def _tabulate_feedback(config: szt.config.Config, rng: szt.core.RandomSource) -> List[Dict[str, Any]]:
    prior = szt.prior.LaplacePrior(config['prior_scale'])
    delta = prior.std_dev()
    rows = list()
    for s in config['steps']:
        if not s < delta:
            continue
        report = feedback_events(1000, DeterministicStep(s), prior, [delta])
        for name in ('E_F', 'E_R'):
            oracle_func = phi_f if name == 'E_F' else phi_r
            oracle = 1000 * oracle_func(prior, delta, s, method = 'quadrature')
            rows.append(_row(dict(n_steps = 1000, s = s, quantity = name), getattr(report, name), oracle))
    return rows


_TABULATORS = {
    'sensitivity': _tabulate_sensitivity,
    'ratio-mgf': _tabulate_ratio_mgf,
    'thresholds': _tabulate_thresholds,
    'dead-zone-mse': _tabulate_dead_zone_mse,
    'entropy': _tabulate_entropy,
    'pacbayes': _tabulate_pacbayes,
    'kl': _tabulate_kl,
    'mfpt': _tabulate_mfpt,
    'feedback': _tabulate_feedback,
}


def tabulate(
        quantity: AnalyzeQuantity,
        config: Optional[szt.config.Config] = None,
        seed: Seed = 0,
        status: Optional[szt.status.Status] = None,
    ) -> szt.table.Table:
    """
    Tabulate a quantity over a parameter grid: the input columns are followed by the closed form, an independent
    oracle (quadrature, Monte Carlo, or grid search), and the absolute and relative errors.

    Arguments:
        quantity: One of :data:`ANALYZE_QUANTITIES`.
        config: The ``analyze`` section of the configuration (defaults from :data:`szt.config.DEFAULTS`).
        seed: Seeds the Monte Carlo oracles.
        status: Receives progress updates.

    Raises:
        InvalidInputError: If the quantity is unknown.
    """
    if quantity not in _TABULATORS:
        raise szt.core.InvalidInputError(f'Unknown quantity: "{quantity}"')
    if config is None:
        config = szt.config.load_config()['analyze']
    szt.status.update(status, info = 'analyze', quantity = quantity, intermediate = True)
    return szt.table.Table(_TABULATORS[quantity](config, szt.core.RandomSource(seed)))
