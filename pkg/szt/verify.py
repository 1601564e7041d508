"""
Verification suites, which check the closed forms, bounds, and invariants of the toolkit against independent oracles
(quadrature, Monte Carlo, grid search, and plain arithmetic).

Each check yields rows with the outcome ``PASS`` or ``FAIL``. Quantities which are stated as formulas but do not hold
as stated (or only hold in a limit) are reported with the outcome ``FLAG`` instead of ``FAIL``, so that they are
documented without failing the suite.
"""

import dataclasses
import itertools
import math

import numpy as np
import scipy.optimize

import szt.analysis
import szt.config
import szt.core
import szt.grad
import szt.kernel
import szt.prior
import szt.quantizer
import szt.sim
import szt.status
import szt.table
import szt.train
from szt.core import (
    PackedTernaryTensor,
    PerChannel,
    PerLayer,
    TernaryCode,
)
from szt.grad import SteKind
from szt.typing import (
    Any,
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    Optional,
)

PASS = 'PASS'
FAIL = 'FAIL'
FLAG = 'FLAG'

SUITES: List[str] = ['sensitivity', 'entropy', 'mse', 'pacbayes', 'mfpt', 'snr', 'repro']
"""
The suites in the order run by ``all``.
"""

COLUMNS: List[str] = ['suite', 'check', 'anchor', 'status', 'quantity', 'value', 'reference', 'tolerance', 'detail']
"""
The columns of a verification table.
"""

Row = Dict[str, Any]

SQRT2 = math.sqrt(2)
LAPLACE = szt.prior.LaplacePrior(1.0)
STEPS = (0.05, 0.1, 0.2, 0.5, 1.0)
MFPT_GRID = list(itertools.product((0.5, 1.0, 2.0), (0.5, 1.0, 1.25)))


class UnknownSuiteError(szt.core.SztError, ValueError):
    """
    Raised when a verification suite does not exist.
    """

    def __init__(self, suite: str):
        super().__init__(f'Unknown suite: "{suite}" (available: {", ".join(SUITES + ["all"])})')

        self.suite = suite
        """
        The requested suite.
        """


@dataclasses.dataclass
class CheckContext:
    """
    What a check needs to run.
    """

    config: szt.config.Config
    """
    The section of the configuration which belongs to the suite (``verify/<suite>``).
    """

    rng: szt.core.RandomSource
    """
    Random source of the check.
    """

    threads: int = 1

    status: Optional[szt.status.Status] = None

    def seed(self, index: int) -> int:
        """
        Derive a seed for an operation which takes seeds instead of random sources.
        """
        return int(self.rng.derive(index).generator.integers(2 ** 63))


@dataclasses.dataclass(frozen = True)
class Check:
    suite: str
    name: str
    anchor: str
    """
    The property which the check establishes (rows are summarized by anchor).
    """

    func: Callable[[CheckContext], Iterable[Row]]


_REGISTRY: Dict[str, List[Check]] = {suite: list() for suite in SUITES}


def check(suite: str, anchor: str) -> Callable:
    """
    Register the decorated generator of rows as a check of the `suite`. The name of the check is derived from the name
    of the function.
    """
    assert suite in _REGISTRY, f'Unknown suite: {suite}'

    def decorator(func: Callable[[CheckContext], Iterable[Row]]) -> Callable[[CheckContext], Iterable[Row]]:
        _REGISTRY[suite].append(Check(suite, func.__name__.replace('_', '-'), anchor, func))
        return func

    return decorator


def checks(suite: str) -> List[Check]:
    """
    The checks of a suite (``all`` for the checks of all suites).

    Raises:
        UnknownSuiteError: If the suite does not exist.
    """
    if suite == 'all':
        return sum((_REGISTRY[name] for name in SUITES), list())
    if suite not in _REGISTRY:
        raise UnknownSuiteError(suite)
    return list(_REGISTRY[suite])


def _compare(
        quantity: str,
        value: float,
        reference: float,
        tolerance: float,
        relative: bool = False,
        detail: str = '',
    ) -> Row:
    value, reference = float(value), float(reference)
    error = abs(value - reference)
    if relative and reference != 0:
        error /= abs(reference)
    return dict(
        quantity = quantity,
        value = value,
        reference = reference,
        tolerance = float(tolerance),
        status = PASS if error <= tolerance else FAIL,
        detail = detail or f'{"relative" if relative else "absolute"} error {error:.3g}',
    )


def _holds(quantity: str, condition: bool, value: float = math.nan, reference: float = math.nan, detail: str = '') -> Row:
    return dict(
        quantity = quantity,
        value = float(value),
        reference = float(reference),
        tolerance = math.nan,
        status = PASS if condition else FAIL,
        detail = detail,
    )


def _report(quantity: str, value: float, reference: float, holds: bool, detail: str) -> Row:
    """
    A row which is flagged instead of failed if the relation does not hold.
    """
    return dict(
        quantity = quantity,
        value = float(value),
        reference = float(reference),
        tolerance = math.nan,
        status = PASS if holds else FLAG,
        detail = detail,
    )


# Sensitivities and feedback events

@check('sensitivity', 'Per-step sensitivities')
def closed_forms_quadrature(ctx: CheckContext) -> Iterator[Row]:
    for s in STEPS:
        for name, func in (('phi_r', szt.analysis.phi_r), ('phi_f', szt.analysis.phi_f)):
            yield _compare(
                f'{name} laplace s={s:g}',
                func(LAPLACE, SQRT2, s),
                func(LAPLACE, SQRT2, s, method = 'quadrature'),
                1e-8,
                relative = True,
            )
        yield _compare(
            f'ratio laplace s={s:g}',
            szt.analysis.sensitivity_ratio(LAPLACE, SQRT2, s).ratio,
            szt.analysis.sensitivity_ratio(LAPLACE, SQRT2, s, method = 'quadrature').ratio,
            1e-8,
            relative = True,
        )
    gaussian = szt.prior.GaussianPrior(1.0)
    for name, func in (('phi_r', szt.analysis.phi_r), ('phi_f', szt.analysis.phi_f)):
        yield _compare(
            f'{name} gaussian s=0.1',
            func(gaussian, 1.0, 0.1),
            func(gaussian, 1.0, 0.1, method = 'quadrature'),
            1e-8,
            relative = True,
        )


@check('sensitivity', 'Per-step sensitivities')
def reference_values(ctx: CheckContext) -> Iterator[Row]:
    yield _compare('phi_r laplace s=0.1', szt.analysis.phi_r(LAPLACE, SQRT2, 0.1), 0.09516, 1e-5)
    yield _compare('phi_f laplace s=0.1', szt.analysis.phi_f(LAPLACE, SQRT2, 0.1), 0.02557, 1e-5)
    yield _compare('ratio laplace s=0.1', szt.analysis.sensitivity_ratio(LAPLACE, SQRT2, 0.1).ratio, 3.722, 1e-3)
    feedback = szt.analysis.feedback_events(1000, szt.analysis.DeterministicStep(0.1), LAPLACE, [SQRT2])
    yield _compare('E_R N=1000 s=0.1', feedback.E_R, 95.16, 1e-2)
    yield _compare('E_F N=1000 s=0.1', feedback.E_F, 25.57, 1e-2)


@check('sensitivity', 'Per-step sensitivities')
def transition_counting(ctx: CheckContext) -> Iterator[Row]:
    trials = ctx.config.get('trials', 200000)
    s = 0.1
    w = LAPLACE.sample(trials, ctx.rng)
    before = szt.quantizer.encode_szt(w, SQRT2)

    # Steps towards zero flip the stored sign, steps away from zero cross the threshold
    inward = szt.quantizer.encode_szt(w - s * np.sign(w), SQRT2)
    outward = szt.quantizer.encode_szt(w + s * np.sign(w), SQRT2)
    counts = dict(
        phi_f = (szt.train.count_transitions(before, outward)[0], szt.analysis.phi_f),
        phi_r = (szt.train.count_transitions(before, inward)[1], szt.analysis.phi_r),
    )
    for name, (count, func) in counts.items():
        p = func(LAPLACE, SQRT2, s)
        se = math.sqrt(p * (1 - p) / trials)
        yield _compare(f'{name} transition frequency s={s:g}', count / trials, p, 3 * se, detail = f'{trials} weights')


@check('sensitivity', 'Expected ratio via the moment generating function')
def mgf_reduction(ctx: CheckContext) -> Iterator[Row]:
    for s in STEPS:
        yield _compare(
            f'expected ratio deterministic s={s:g}',
            szt.analysis.expected_ratio(szt.analysis.DeterministicStep(s), 1.0, SQRT2),
            szt.analysis.sensitivity_ratio(LAPLACE, SQRT2, s).ratio,
            1e-12,
            relative = True,
        )
    trials = ctx.config.get('trials', 200000)
    deterministic = szt.analysis.DeterministicStep(0.1)
    yield _compare(
        'expected ratio empirical deterministic s=0.1',
        szt.analysis.expected_ratio(szt.analysis.EmpiricalStep(deterministic.sample(trials, ctx.rng)), 1.0, SQRT2),
        szt.analysis.expected_ratio(deterministic, 1.0, SQRT2),
        1e-3,
    )
    exponential = szt.analysis.ExponentialStep(0.05, SQRT2)
    empirical = szt.analysis.EmpiricalStep(exponential.sample(trials, ctx.rng.derive(1)))
    yield _compare(
        'expected ratio exponential mean=0.05',
        szt.analysis.expected_ratio(empirical, 1.0, SQRT2),
        szt.analysis.expected_ratio(exponential, 1.0, SQRT2),
        5e-3,
        relative = True,
        detail = f'Monte Carlo with {trials} steps',
    )


@check('sensitivity', 'Sensitivity ratio bound')
def sandwich_inequalities(ctx: CheckContext) -> Iterator[Row]:
    for kind, prior, delta in (('laplace', LAPLACE, SQRT2), ('gaussian', szt.prior.GaussianPrior(1.0), 1.0)):
        s = np.linspace(0, delta, 21)[1:-1]
        at_zero, at_delta = prior.density_at_zero(), float(prior.pdf(delta))
        representational = szt.analysis.phi_r(prior, delta, s)
        forward = szt.analysis.phi_f(prior, delta, s)
        yield _holds(
            f'phi_r <= 2 s p(0) {kind}',
            np.all(representational <= 2 * s * at_zero * (1 + 1e-12)),
            np.max(representational / (2 * s * at_zero)),
            1.0,
        )
        yield _holds(
            f'phi_f >= 2 s p(delta) {kind}',
            np.all(forward >= 2 * s * at_delta * (1 - 1e-12)),
            np.min(forward / (2 * s * at_delta)),
            1.0,
        )
        yield _holds(f'phi_r >= phi_f {kind}', np.all(representational >= forward), np.min(representational / forward), 1.0)
        yield _report(
            f'phi_f <= 2 s p(delta) {kind}',
            np.max(forward / (2 * s * at_delta)),
            1.0,
            np.all(forward <= 2 * s * at_delta),
            'The density decreases on (delta - s, delta), so phi_f is bounded below (not above) by 2 s p(delta)',
        )


@check('sensitivity', 'Sensitivity ratio bound')
def ratio_bound(ctx: CheckContext) -> Iterator[Row]:
    for s in STEPS:
        report = szt.analysis.sensitivity_ratio(LAPLACE, SQRT2, s)
        yield _report(
            f'ratio >= p(0)/p(delta) s={s:g}',
            report.ratio,
            report.lower_bound,
            not report.violated,
            'The density ratio is the limit of vanishing steps, the Laplace ratio is exp((delta - s)/b)',
        )
    limit = szt.analysis.sensitivity_ratio(LAPLACE, SQRT2, 1e-6)
    yield _compare('ratio s=1e-6', limit.ratio, limit.lower_bound, 1e-5, relative = True)


@check('sensitivity', 'Per-channel feedback events')
def per_channel_bound(ctx: CheckContext) -> Iterator[Row]:
    channels = ctx.config.get('channels', 4)
    scales = 0.5 + 1.5 * ctx.rng.uniform(size = channels)
    priors = [szt.prior.LaplacePrior(b) for b in scales]
    deltas = [SQRT2 * b * (0.5 + u) for b, u in zip(scales, ctx.rng.uniform(size = channels))]
    step = szt.analysis.DeterministicStep(0.05 * min(deltas))
    report = szt.analysis.feedback_events(1000, step, priors, deltas)
    yield _report(
        'E_R/E_F >= min_c p_c(0)/p_c(delta_c)',
        report.ratio,
        report.min_lower_bound,
        report.ratio >= report.min_lower_bound,
        f'{channels} channels, steps of {step.s0:.3g}',
    )
    single = szt.analysis.feedback_events(1000, step, priors[0], [deltas[0]])
    double = szt.analysis.feedback_events(1000, step, [priors[0]] * 2, [deltas[0]] * 2)
    yield _compare('E_F of two identical channels', double.E_F, 2 * single.E_F, 0.0)
    yield _compare('E_R of two identical channels', double.E_R, 2 * single.E_R, 0.0)


# Entropy

@check('entropy', 'Entropy gap')
def entropy_identity(ctx: CheckContext) -> Iterator[Row]:
    grid = np.linspace(0, 1, ctx.config.get('grid', 101))
    errors = [abs(szt.analysis.entropy_szt(p0) - szt.analysis.entropy_bt(p0) - p0) for p0 in grid]
    yield _compare('max |H_szt - H_bt - p0|', max(errors), 0.0, 1e-12, detail = f'{len(grid)} points')
    yield _compare('entropy gap p0=0.25', szt.analysis.entropy_gap(0.25), 0.25, 0.0)
    yield _compare('entropy gap p0=0', szt.analysis.entropy_gap(0.0), 0.0, 0.0)
    yield _compare('H_bt p0=0.5', szt.analysis.entropy_bt(0.5), 1.5, 1e-12)
    yield _compare('H_szt p0=0.5', szt.analysis.entropy_szt(0.5), 2.0, 1e-12)


@check('entropy', 'Dead-zone mass')
def dead_zone_masses(ctx: CheckContext) -> Iterator[Row]:
    yield _compare('P0 laplace delta=sqrt(2)', szt.analysis.dead_zone_mass(LAPLACE, SQRT2), 0.7569, 1e-4)
    yield _compare('P0 gaussian delta=1', szt.analysis.dead_zone_mass(szt.prior.GaussianPrior(1.0), 1.0), 0.6827, 1e-4)
    yield _compare('P0 laplace delta=1000', szt.analysis.dead_zone_mass(LAPLACE, 1e3), 1.0, 1e-12)

    trials = ctx.config.get('trials', 100000)
    codes = szt.quantizer.encode_szt(LAPLACE.sample(trials, ctx.rng), SQRT2)
    p0 = szt.analysis.dead_zone_mass(LAPLACE, SQRT2)
    frequency = np.count_nonzero(szt.core.numeric_value(codes) == 0) / trials
    yield _compare('P0 frequency of zero codes', frequency, p0, 3 * math.sqrt(p0 * (1 - p0) / trials))


# Forward quantization and gradient estimators

@check('mse', 'Optimal threshold')
def threshold_optima(ctx: CheckContext) -> Iterator[Row]:
    yield _compare('optimal threshold laplace b=1', szt.quantizer.optimal_threshold(LAPLACE), SQRT2, 1e-6, relative = True)
    minimizer = scipy.optimize.minimize_scalar(
        lambda delta: szt.quantizer.laplace_mse(1.0, delta),
        bounds = (1e-6, 4 * SQRT2),
        method = 'bounded',
        options = dict(xatol = 1e-10),
    ).x
    yield _compare('minimizer of the laplace MSE', minimizer, SQRT2, 1e-6, relative = True)
    h = 1e-4
    at_optimum = szt.quantizer.laplace_mse(1.0, SQRT2)
    yield _holds(
        'laplace MSE increases on both sides of sqrt(2) b',
        szt.quantizer.laplace_mse(1.0, SQRT2 - h) > at_optimum < szt.quantizer.laplace_mse(1.0, SQRT2 + h),
    )
    yield _compare(
        'optimal threshold laplace b=2',
        szt.quantizer.optimal_threshold(szt.prior.LaplacePrior(2.0)),
        2 * szt.quantizer.optimal_threshold(LAPLACE),
        1e-12,
        relative = True,
    )
    yield _compare('optimal threshold gaussian', szt.quantizer.optimal_threshold(szt.prior.GaussianPrior(1.0)), 0.88, 0.01)
    for kind, expected, tolerance in (('half-laplace', 0.5, 0.005), ('half-gaussian', 0.60, 0.02)):
        optimum = szt.quantizer.optimal_threshold(szt.prior.create_prior(kind, 1.0))
        yield _report(
            f'optimal threshold {kind} (unit scale)',
            optimum,
            expected,
            abs(optimum - expected) <= tolerance,
            'The half prior has the same minimizer as its symmetric counterpart',
        )


@check('mse', 'Optimal threshold')
def optimality_grid(ctx: CheckContext) -> Iterator[Row]:
    for kind in ('laplace', 'gaussian', 'half-laplace', 'half-gaussian'):
        prior = szt.prior.create_prior(kind, 1.0)
        grid = np.linspace(0, 4 * prior.std_dev(), 101)[1:]
        best = min(szt.quantizer.mse_forward(prior, delta) for delta in grid)
        optimum = szt.quantizer.mse_forward(prior, szt.quantizer.optimal_threshold(prior))
        yield _holds(f'MSE at the optimum <= grid minimum {kind}', optimum <= best * (1 + 1e-8), optimum, best)


@check('mse', 'Distribution-independent MSE bound')
def variance_bound(ctx: CheckContext) -> Iterator[Row]:
    for kind in ('laplace', 'gaussian'):
        prior = szt.prior.create_prior(kind, 1.0)
        sigma = prior.std_dev()
        for k in np.arange(1, 13) * 0.25:
            value = szt.quantizer.mse_forward(prior, k * sigma)
            bound = sigma ** 2 / (1 + k ** 2)
            yield _report(
                f'MSE <= sigma^2/(1+k^2) {kind} k={k:g}',
                value,
                bound,
                value <= bound,
                'The MSE approaches sigma^2 for large k, while the bound vanishes',
            )


@check('mse', 'Forward MSE')
def forward_mse(ctx: CheckContext) -> Iterator[Row]:
    value = szt.quantizer.mse_forward(LAPLACE, SQRT2)
    yield _compare('MSE laplace b=1 delta=sqrt(2)', value, 0.8261, 1e-4)
    yield _compare(
        'MSE laplace closed form vs quadrature',
        value,
        szt.quantizer.mse_forward(LAPLACE, SQRT2, method = 'quadrature'),
        1e-8,
        relative = True,
    )
    for kind in ('laplace', 'gaussian'):
        prior = szt.prior.create_prior(kind, 1.0)
        yield _compare(f'MSE delta=1e-6 {kind}', szt.quantizer.mse_forward(prior, 1e-6), prior.second_moment(), 1e-5, relative = True)


@check('mse', 'Forward identity')
def forward_identity(ctx: CheckContext) -> Iterator[Row]:
    trials = ctx.config.get('identity_trials', 10 ** 6)
    delta = 1.0
    boundary = [-delta, 0.0, -0.0, delta, 5e-324, -5e-324]
    boundary += [np.nextafter(-delta, direction) for direction in (-np.inf, np.inf)]
    boundary += [np.nextafter(delta, direction) for direction in (-np.inf, np.inf)]
    w = np.concatenate([ctx.rng.normal(scale = 2 * delta, size = trials), boundary])
    szt_values = szt.core.numeric_value(szt.quantizer.encode_szt(w, delta))
    bt_values = szt.core.numeric_value(szt.quantizer.encode_bt(w, delta))
    yield _holds(
        'numeric value of SZT equals BT',
        np.array_equal(szt_values, bt_values),
        detail = f'{w.size} inputs including the boundary values',
    )


@check('mse', 'Forward MSE')
def mse_equality(ctx: CheckContext) -> Iterator[Row]:
    trials = ctx.config.get('trials', 20000)
    w = LAPLACE.sample(trials, ctx.rng)
    squared = {
        name: (w - SQRT2 * szt.core.numeric_value(encode(w, SQRT2))) ** 2
        for name, encode in (('bt', szt.quantizer.encode_bt), ('szt', szt.quantizer.encode_szt))
    }
    errors = {name: float(np.mean(values)) for name, values in squared.items()}
    yield _holds('MSE through BT equals MSE through SZT', errors['bt'] == errors['szt'], errors['szt'], errors['bt'])
    yield _compare(
        'population MSE vs closed form',
        errors['szt'],
        szt.quantizer.mse_forward(LAPLACE, SQRT2),
        3 * squared['szt'].std() / math.sqrt(trials),
        detail = f'{trials} weights, 3 standard errors',
    )


@check('mse', 'Average MSE inside the dead zone')
def dead_zone_mse_factors(ctx: CheckContext) -> Iterator[Row]:
    for kind, reference in (('laplace', 0.225), ('gaussian', 0.291)):
        prior = szt.prior.create_prior(kind, 1.0)
        value = szt.grad.avg_dead_zone_mse(prior, 1.0)
        yield _compare(f'average dead-zone MSE factor {kind} k=1', value, reference, 1e-3)
        yield _compare(
            f'average dead-zone MSE factor {kind} closed form vs quadrature',
            value,
            szt.grad.avg_dead_zone_mse(prior, 1.0, method = 'quadrature'),
            1e-6,
            relative = True,
        )


@check('mse', 'Ordering of estimator MSE')
def estimator_ordering(ctx: CheckContext) -> Iterator[Row]:
    trials = ctx.config.get('trials', 20000)
    for idx, w in enumerate(np.arange(1, 50, 4) / 100):
        bounds = {kind: szt.grad.bias_bound(kind, w, 1.0, 1.0) ** 2 + szt.grad.variance_bound(kind, 1.0, 1.0) for kind in SteKind}
        yield _holds(
            f'bounds SZT < SR < BT w={w:g}',
            bounds[SteKind.SZT] < bounds[SteKind.SR] < bounds[SteKind.BT],
            detail = ', '.join(f'{kind.value}: {value:.4g}' for kind, value in bounds.items()),
        )
        measured = {
            kind: szt.grad.mse_estimate_mc(kind, w, 1.0, [1.0], trials, ctx.seed(idx), ctx.threads).mse
            for kind in SteKind
        }
        yield _holds(
            f'measured SZT < SR < BT w={w:g}',
            measured[SteKind.SZT] < measured[SteKind.SR] < measured[SteKind.BT],
            detail = ', '.join(f'{kind.value}: {value:.4g}' for kind, value in measured.items()),
        )


@check('mse', 'Bias and variance of the estimators')
def estimator_variance(ctx: CheckContext) -> Iterator[Row]:
    trials = ctx.config.get('trials', 20000)
    for kind in (SteKind.BT, SteKind.SZT):
        report = szt.grad.mse_estimate_mc(kind, 0.4, 1.0, [1.0], trials, ctx.seed(0), ctx.threads)
        yield _compare(f'variance {kind.value} w=0.4', report.variance, 0.0, 0.0)
    yield _compare('MSE bt w=0.4 single trial', szt.grad.mse_estimate_mc(SteKind.BT, 0.4, 1.0, [1.0], 1, 0).mse, 1.0, 0.0)
    report = szt.grad.mse_estimate_mc(SteKind.SR, 0.5, 1.0, [1.0], trials, ctx.seed(1), ctx.threads)
    bound = szt.grad.variance_bound(SteKind.SR, 1.0, 1.0)
    yield _holds(
        'variance sr w=0.5 <= delta^2 |g|^2 / 4',
        report.variance <= bound + 3 * report.se_variance,
        report.variance,
        bound,
        f'{trials} trials, 3 standard errors',
    )
    for idx, w in enumerate((0.25, -0.6)):
        values = szt.core.numeric_value(szt.grad.sr_round(np.full(trials, w), 1.0, ctx.rng.derive(idx)))
        yield _compare(f'mean of stochastic rounding w={w:g}', values.mean(), w, 3 * values.std() / math.sqrt(trials))


@check('mse', 'Momentum retention inside the dead zone')
def momentum_retention(ctx: CheckContext) -> Iterator[Row]:
    steps = ctx.config.get('momentum_steps', 500)
    beta = 0.9
    bt = szt.grad.momentum_simulate(SteKind.BT, beta, 1.0, steps, m0 = 1.0)
    yield _holds(
        'BT momentum decays geometrically',
        np.all(np.diff(bt) < 0) and bt[-1] <= beta ** (2 * steps) * (1 + 1e-9),
        bt[-1],
        beta ** (2 * steps),
    )
    constant = szt.grad.momentum_simulate(SteKind.SZT, beta, 1.0, steps, sign = -1)
    yield _compare('SZT momentum steady state', constant[-1], 1 / (1 - beta) ** 2, 1e-6, relative = True)
    yield _holds(
        'SZT momentum >= |g|^2 / (1 - beta^2)',
        constant[steps // 2:].min() >= 1 / (1 - beta ** 2),
        constant[steps // 2:].min(),
        1 / (1 - beta ** 2),
    )
    g = np.abs(ctx.rng.normal(size = steps))
    random = szt.grad.momentum_simulate(SteKind.SZT, beta, g, steps)
    yield _holds(
        'SZT mean momentum >= E|g|^2 / (1 - beta^2)',
        random[steps // 2:].mean() >= np.mean(g ** 2) / (1 - beta ** 2),
        random[steps // 2:].mean(),
        np.mean(g ** 2) / (1 - beta ** 2),
    )
    vanishing = szt.grad.momentum_simulate(SteKind.SZT, 0.5, 0.0, 200, m0 = 1.0)
    yield _compare('SZT momentum without gradients', vanishing[-1], 0.0, 1e-100)


@check('mse', 'Momentum retention inside the dead zone')
def momentum_in_training(ctx: CheckContext) -> Iterator[Row]:
    dataset = szt.train.synth_dataset('regression', ctx.config.get('training_samples', 256), seed = ctx.seed(10))
    config = szt.train.TrainConfig(ste = SteKind.SZT, epochs = ctx.config.get('training_epochs', 5), seed = ctx.seed(11))
    report = szt.train.train(config, dataset, record_momentum = True)

    def dead_zone(steps):
        records = [step[name] for step in steps for name in szt.train.LAYERS]
        before = np.concatenate([record.before[record.inside] for record in records])
        after = np.concatenate([record.after[record.inside] for record in records])
        g_hat = np.concatenate(
            [szt.core.stored_sign(record.codes[record.inside]) * record.upstream[record.inside] for record in records],
        )
        return before, after, g_hat

    before, after, g_hat = dead_zone(report.momentum)
    yield _compare(
        'SZT momentum recursion with the stored sign inside the dead zone',
        np.abs(after - (config.beta * before + g_hat)).max(initial = 0.0),
        0.0,
        1e-12,
        detail = f'{after.size} coordinate steps in {report.steps} updates',
    )
    yield _holds(
        'SZT momentum stays live inside the dead zone',
        np.all(np.abs(after[g_hat != 0]) > 0),
        np.count_nonzero(g_hat),
        detail = 'Coordinate steps with a non-zero surrogate gradient',
    )
    aligned = before * g_hat >= 0
    yield _holds(
        'SZT momentum m^2 >= beta^2 m^2 + g^2 without opposition',
        np.all(after[aligned] ** 2 >= ((config.beta * before[aligned]) ** 2 + g_hat[aligned] ** 2) * (1 - 1e-12)),
        np.count_nonzero(aligned),
    )

    before, after, g_hat = dead_zone(report.momentum[len(report.momentum) // 2:])
    bound = np.mean(g_hat ** 2) / (1 - config.beta ** 2)
    cross = np.mean(before * g_hat)
    yield _report(
        'SZT mean momentum inside the dead zone >= E|g|^2 / (1 - beta^2)',
        np.mean(after ** 2),
        bound,
        np.mean(after ** 2) >= bound,
        f'Second half of the run, mean m.g {cross:.3g} (the bound requires it to be non-negative)',
    )


# PAC-Bayes

@check('pacbayes', 'PAC-Bayes bound')
def bound_arithmetic(ctx: CheckContext) -> Iterator[Row]:
    n = 10 ** 5
    oracle = math.sqrt((math.log(2) + math.log(n) / 2 - math.log(0.05)) / (2 * (n - 1)))
    yield _compare('bound loss=0 KL=0 N=1e5', szt.analysis.pac_bayes_bound(0.0, 0.0, n, 0.05), oracle, 1e-12, relative = True)
    yield _compare('bound N=1e15', szt.analysis.pac_bayes_bound(0.1, 1.0, 10 ** 15, 0.05), 0.1, 1e-6)


@check('pacbayes', 'PAC-Bayes gap')
def gap_arithmetic(ctx: CheckContext) -> Iterator[Row]:
    yield _compare('gap d=1e6 p0=0.25 N=1e5', szt.analysis.pac_bayes_gap(10 ** 6, 0.25, 10 ** 5), 0.9309, 1e-4)
    yield _compare('gap p0=0', szt.analysis.pac_bayes_gap(10 ** 6, 0.0, 10 ** 5), 0.0, 0.0)
    yield _compare(
        'gap with quadrupled N - 1',
        szt.analysis.pac_bayes_gap(10 ** 6, 0.25, 4 * (10 ** 5 - 1) + 1),
        szt.analysis.pac_bayes_gap(10 ** 6, 0.25, 10 ** 5) / 2,
        1e-12,
        relative = True,
    )
    for d, p0, n in ((10 ** 6, 0.25, 10 ** 5), (10 ** 4, 0.5, 10 ** 3), (100, 0.1, 10 ** 6)):
        exact = (
            szt.analysis.pac_bayes_bound(0.0, szt.analysis.kl_reduction(d, p0), n, 0.05)
            - szt.analysis.pac_bayes_bound(0.0, 0.0, n, 0.05)
        )
        gap = szt.analysis.pac_bayes_gap(d, p0, n)
        yield _holds(f'exact difference <= gap d={d} p0={p0:g} N={n}', 0 <= exact <= gap, exact, gap)


@check('pacbayes', 'KL reduction')
def kl_reductions(ctx: CheckContext) -> Iterator[Row]:
    yield _compare('KL reduction d=100 p0=0.2', szt.analysis.kl_reduction(100, 0.2), 13.863, 1e-3)
    yield _compare('KL reduction p0=0', szt.analysis.kl_reduction(100, 0.0), 0.0, 0.0)
    errors = [
        abs(szt.analysis.kl_codeword_uniform(p0)['difference'] + p0 * math.log(2)) for p0 in np.linspace(0, 1, 101)
    ]
    yield _compare('max |KL_szt - KL_bt + p0 ln 2| code-word uniform reference', max(errors), 0.0, 1e-12)
    yield _compare('KL difference p0=0.5', szt.analysis.kl_codeword_uniform(0.5)['difference'], -0.3466, 1e-4)
    inflated = szt.analysis.kl_noise_inflated(LAPLACE, SQRT2)
    yield _report(
        'KL difference noise-inflated reference',
        inflated['difference'],
        inflated['reference'],
        abs(inflated['difference'] - inflated['reference']) <= 1e-12,
        'The reference splits the dead-zone mass evenly between both zeros, which cancels the reduction',
    )


# First-passage times

@check('mfpt', 'Dead-zone escape time')
def monte_carlo_vs_bvp(ctx: CheckContext) -> Iterator[Row]:
    trials = ctx.config.get('trials', 10000)
    resolution = ctx.config.get('resolution', 10000)
    for idx, (kappa, lam) in enumerate(MFPT_GRID):
        delta = lam / kappa
        params = szt.sim.OuParams(kappa, 1.0, delta, delta ** 2 / resolution, trials, seed = ctx.seed(idx))
        estimate = szt.sim.ou_mfpt_mc(params, threads = ctx.threads, status = ctx.status)
        oracle = szt.sim.ou_mfpt_bvp(kappa, 1.0, delta)
        yield _compare(
            f'MFPT Monte Carlo kappa={kappa:g} lambda={lam:g}',
            estimate.mean,
            oracle,
            0.05,
            relative = True,
            detail = f'{trials} paths, 95% half-width {estimate.ci95_halfwidth:.3g}',
        )


@check('mfpt', 'Dead-zone escape time')
def bvp_limits(ctx: CheckContext) -> Iterator[Row]:
    yield _compare('BVP kappa=1e-6', szt.sim.ou_mfpt_bvp(1e-6, 1.0, 1.0), 1.0, 1e-3, relative = True)
    yield _compare(
        'BVP scale invariance',
        szt.sim.ou_mfpt_bvp(1.0, 3.0, 3.0),
        szt.sim.ou_mfpt_bvp(1.0, 1.0, 1.0),
        1e-7,
        relative = True,
    )

    trials = ctx.config.get('trials', 10000)
    resolution = ctx.config.get('resolution', 10000)
    estimates = [
        szt.sim.ou_mfpt_mc(
            szt.sim.OuParams(1.0, 1.0, delta, delta ** 2 / resolution, trials, seed = ctx.seed(idx)),
            threads = ctx.threads,
        )
        for idx, delta in enumerate((0.7, 1.0))
    ]
    yield _holds(
        'MFPT increases with the threshold',
        estimates[0].mean + estimates[0].ci95_halfwidth < estimates[1].mean - estimates[1].ci95_halfwidth,
        estimates[0].mean,
        estimates[1].mean,
        'Thresholds 0.7 and 1, separated by the 95% confidence intervals',
    )


@check('mfpt', 'Renewal bound on the waiting time')
def renewal_waiting_times(ctx: CheckContext) -> Iterator[Row]:
    trials = ctx.config.get('renewal_trials', 100000)
    step = szt.analysis.DeterministicStep(0.1)
    estimate = szt.sim.renewal_mc(step, LAPLACE, SQRT2, trials, ctx.seed(0), ctx.threads, ctx.status)
    yield _compare('renewal prediction E[T_F]', estimate.expected_T_F, 39.1, 0.1)
    yield _compare('renewal prediction E[T_R]', estimate.expected_T_R, 10.51, 0.01)
    yield _compare('mean T_F', estimate.mean_T_F, estimate.expected_T_F, 3 * estimate.se_T_F)
    yield _compare('mean T_R', estimate.mean_T_R, estimate.expected_T_R, 3 * estimate.se_T_R)
    expected_ratio = estimate.expected_T_F / estimate.expected_T_R
    relative_se = math.hypot(estimate.se_T_F / estimate.mean_T_F, estimate.se_T_R / estimate.mean_T_R)
    yield _compare('mean T_F / mean T_R', estimate.ratio, expected_ratio, 3 * expected_ratio * relative_se)
    for name, func in (('T_F', szt.analysis.phi_f), ('T_R', szt.analysis.phi_r)):
        p = func(LAPLACE, SQRT2, step.s0)
        yield _compare(f'variance {name} (geometric)', getattr(estimate, f'var_{name}'), (1 - p) / p ** 2, 0.1, relative = True)


@check('mfpt', 'Dead-zone escape time formulas')
def escape_time_formulas(ctx: CheckContext) -> Iterator[Row]:
    yield _compare('E[tau_BT] formula kappa=sigma=delta=1', szt.analysis.mfpt_closed(SteKind.BT, 1.0, 1.0, 1.0), 0.4593, 1e-4)
    yield _compare('E[tau_SZT] formula kappa=0.5', szt.analysis.mfpt_closed(SteKind.SZT, 0.5, 1.0, 1.0), 2.0, 0.0)
    yield _compare('ratio formula lambda=1', szt.analysis.mfpt_ratio(1.0), 2.409, 1e-3)
    ratios = [szt.analysis.mfpt_ratio(lam) for lam in np.linspace(1, 3, 41)]
    yield _holds('ratio formula increases for lambda >= 1', np.all(np.diff(ratios) > 0))
    for kappa, lam in MFPT_GRID:
        delta = lam / kappa
        oracle = szt.sim.ou_mfpt_bvp(kappa, 1.0, delta)
        bt = szt.analysis.mfpt_closed(SteKind.BT, kappa, 1.0, delta)
        szt_ = szt.analysis.mfpt_closed(SteKind.SZT, kappa, 1.0, delta)
        suffix = f'kappa={kappa:g} lambda={lam:g}'
        yield _report(
            f'E[tau_BT] formula vs BVP {suffix}',
            bt,
            oracle,
            abs(bt - oracle) <= 0.05 * oracle,
            'Formula evaluated as stated',
        )
        yield _report(
            f'E[tau_SZT] = 1/kappa vs BVP {suffix}',
            szt_,
            oracle,
            abs(szt_ - oracle) <= 0.05 * oracle,
            'The piecewise drift -kappa sgn(W)|W| equals -kappa W, so both escape times solve the same problem',
        )
        yield _report(
            f'ratio formula vs ratio of the formulas {suffix}',
            szt.analysis.mfpt_ratio(lam),
            szt_ / bt,
            abs(szt.analysis.mfpt_ratio(lam) - szt_ / bt) <= 0.05 * abs(szt_ / bt),
            'Formulas evaluated as stated',
        )


# Forward error and packing

@check('snr', 'Ternary matrix multiplication')
def gemm_oracle(ctx: CheckContext) -> Iterator[Row]:
    codes = ctx.rng.choice(4, size = (32, 64)).astype(np.uint8)
    numeric = szt.core.numeric_value(codes).astype(np.int64)
    x = ctx.rng.choice(np.arange(-1000, 1001), size = (64, 8)).astype(np.int64)
    tensor = PackedTernaryTensor.from_codes(codes, PerLayer(), [1.0], [1.0])
    yield _holds('GEMM equals the dense product (vector)', np.array_equal(szt.kernel.ternary_gemm(tensor, x[:, 0]), numeric @ x[:, 0]))
    yield _holds('GEMM equals the dense product (matrix)', np.array_equal(szt.kernel.ternary_gemm(tensor, x), numeric @ x))

    scales = 0.5 + ctx.rng.uniform(size = 32)
    scaled = PackedTernaryTensor.from_codes(codes, PerChannel(0), scales, scales)
    yield _holds(
        'GEMM with per-row scales',
        np.array_equal(szt.kernel.ternary_gemm(scaled, x), (numeric @ x) * scales[:, None]),
    )
    xf = ctx.rng.normal(size = (64, 8))
    yield _holds(
        'GEMM independent of the thread count',
        np.array_equal(szt.kernel.ternary_gemm(tensor, xf, threads = 1), szt.kernel.ternary_gemm(tensor, xf, threads = 4)),
    )
    row = PackedTernaryTensor.from_codes(
        [[TernaryCode.PLUS_ONE, TernaryCode.ZERO_MINUS, TernaryCode.MINUS_ONE]], PerLayer(), [1.0], [1.0],
    )
    yield _compare('GEMM row [+1, 0-, -1] x [2, 3, 4]', szt.kernel.ternary_gemm(row, np.array([2, 3, 4]))[0], -2.0, 0.0)
    zeros = PackedTernaryTensor.from_codes(np.zeros((4, 64), dtype = np.uint8), PerLayer(), [1.0], [1.0])
    yield _holds('GEMM of zero codes', not np.any(szt.kernel.ternary_gemm(zeros, x)))


def _random_stack(rng: szt.core.RandomSource, widths: List[int]) -> szt.kernel.LinearStack:
    weights = [
        rng.derive(idx).normal(scale = 1 / math.sqrt(n_in), size = (n_out, n_in))
        for idx, (n_in, n_out) in enumerate(zip(widths[:-1], widths[1:]))
    ]
    return szt.kernel.LinearStack(weights)


@check('snr', 'Inference-neutral forward error')
def stacked_identity(ctx: CheckContext) -> Iterator[Row]:
    stack = _random_stack(ctx.rng, [16, 32, 24, 8])
    delta = 0.2
    x = ctx.rng.normal(size = (64, 16))
    outputs = {
        name: stack.forward(x, [delta * szt.core.numeric_value(encode(w, delta)) for w in stack.weights])
        for name, encode in (('bt', szt.quantizer.encode_bt), ('szt', szt.quantizer.encode_szt))
    }
    yield _holds('BT and SZT stacks produce identical outputs', np.array_equal(outputs['bt'], outputs['szt']))
    report = szt.kernel.stacked_snr_mc(stack, szt.prior.GaussianPrior(1.0), delta, 256, ctx.seed(0), ctx.threads)
    yield _compare('output error BT vs SZT', report.var_szt, report.var_bt, 0.0)
    zero = szt.kernel.stacked_snr_mc(szt.kernel.LinearStack([np.zeros((4, 4))]), LAPLACE, 1.0, 16, ctx.seed(1))
    yield _compare('output error of a zero stack', zero.var_szt, 0.0, 0.0)


@check('snr', 'Stacked linear layers')
def stacked_error_variance(ctx: CheckContext) -> Iterator[Row]:
    trials = ctx.config.get('trials', 100000)
    identity = szt.kernel.LinearStack([np.eye(2)])
    yield _compare('error variance single identity layer', szt.kernel.stacked_error_variance(identity, 0.1), 0.4, 1e-15)
    stack = _random_stack(ctx.rng, [12, 32, 16, 8])
    formula = szt.kernel.stacked_error_variance(stack, 0.1)
    estimate = szt.kernel.stacked_error_variance_mc(stack, 0.1, trials, ctx.seed(0), ctx.threads)
    yield _compare('error variance formula vs noise injection', estimate, formula, 0.05, relative = True, detail = f'{trials} trials')

    weights = LAPLACE.sample(256 * 256, ctx.rng.derive(1)).reshape(256, 256)
    report = szt.kernel.stacked_snr_mc(szt.kernel.LinearStack([weights]), LAPLACE, SQRT2, 8, ctx.seed(1), ctx.threads)
    yield _compare(
        'per-weight error moment laplace delta=sqrt(2)',
        report.weight_error_moment,
        szt.quantizer.mse_forward(LAPLACE, SQRT2),
        0.05,
        relative = True,
    )


@check('snr', 'Packed layout')
def packing(ctx: CheckContext) -> Iterator[Row]:
    trials = ctx.config.get('packing_trials', 10000)
    mismatches = 0
    for idx in range(trials):
        n = int(ctx.rng.choice(np.arange(1, 65)))
        codes = ctx.rng.choice(4, size = n).astype(np.uint8)
        data = szt.core.pack_codes(codes)
        padded = np.concatenate([codes, np.zeros(-n % 4, dtype = np.uint8)]).reshape(-1, 4).astype(int)
        layout = bytes(int(np.sum(group << np.array([0, 2, 4, 6]))) for group in padded)
        if data != layout or not np.array_equal(szt.core.unpack_codes(data, n), codes):
            mismatches += 1
    yield _compare('mismatched code sequences', mismatches, 0, 0, detail = f'{trials} random sequences')
    reference = szt.core.pack_codes(
        [TernaryCode.ZERO_PLUS, TernaryCode.PLUS_ONE, TernaryCode.ZERO_MINUS, TernaryCode.MINUS_ONE],
    )
    yield _holds('[0+, +1, 0-, -1] packs to 0xE4', reference == b'\xe4', reference[0], 0xE4)


# Reproducibility

def _repro_dataset(ctx: CheckContext) -> szt.train.Dataset:
    return szt.train.synth_dataset('regression', ctx.config.get('samples', 256), seed = ctx.seed(0))


@check('repro', 'Deterministic reproducibility')
def training_digests(ctx: CheckContext) -> Iterator[Row]:
    dataset = _repro_dataset(ctx)
    epochs = ctx.config.get('epochs', 5)
    thread_counts = list(ctx.config.get('threads', [1, 4]))
    reports = dict()
    for kind in (SteKind.BT, SteKind.SZT):
        digests = list()
        for threads in thread_counts:
            for _ in range(2):
                config = szt.train.TrainConfig(ste = kind, epochs = epochs, seed = ctx.seed(1), threads = threads)
                reports[kind] = szt.train.train(config, dataset)
                digests.append(reports[kind].checkpoint_digest)
        yield _holds(
            f'identical digests {kind.value}',
            len(set(digests)) == 1,
            detail = f'{len(digests)} runs with thread counts {thread_counts}',
        )
    yield _holds(
        'representational transitions szt > 0',
        reports[SteKind.SZT].representational_transitions > 0,
        reports[SteKind.SZT].representational_transitions,
    )
    yield _compare('representational transitions bt', reports[SteKind.BT].representational_transitions, 0, 0)


@check('repro', 'Deterministic reproducibility')
def stochastic_rounding_contrast(ctx: CheckContext) -> Iterator[Row]:
    dataset = _repro_dataset(ctx)
    epochs = ctx.config.get('epochs', 5)
    reports = [
        szt.train.train(
            szt.train.TrainConfig(ste = SteKind.SR, epochs = epochs, seed = ctx.seed(1), noise_seed = noise_seed),
            dataset,
        )
        for noise_seed in (1, 1, 2)
    ]
    yield _holds('identical digests sr with the same noise', reports[0].checkpoint_digest == reports[1].checkpoint_digest)
    yield _report(
        'different digests sr with different noise',
        math.nan,
        math.nan,
        reports[0].checkpoint_digest != reports[2].checkpoint_digest,
        'Equal digests are possible, but unlikely',
    )
    yield _compare('representational transitions sr', reports[0].representational_transitions, 0, 0)


@check('repro', 'Transition accounting')
def transition_recount(ctx: CheckContext) -> Iterator[Row]:
    dataset = _repro_dataset(ctx)
    config = szt.train.TrainConfig(ste = SteKind.SZT, epochs = ctx.config.get('epochs', 5), seed = ctx.seed(1))
    report = szt.train.train(config, dataset, snapshots = True)
    numeric, representational = szt.train.recount_transitions(report.snapshots)
    yield _compare('recounted numeric transitions', numeric, report.numeric_transitions, 0)
    yield _compare('recounted representational transitions', representational, report.representational_transitions, 0)

    net = szt.train.ToyNet.create(dataset.inputs, config.hidden, dataset.outputs, ctx.seed(2))
    before = net.copy()
    state = szt.train.OptimizerState.create(net)
    result = szt.train.qat_step(net, dataset, dataclasses.replace(config, lr_schedule = (0.0,)), state)
    yield _holds(
        'zero learning rate leaves the weights unchanged',
        all(np.array_equal(net.params[name], before.params[name]) for name in net.params),
    )
    yield _compare('transitions with zero learning rate', result.numeric_transitions + result.representational_transitions, 0, 0)


@check('repro', 'Forward identity')
def forward_equivalence(ctx: CheckContext) -> Iterator[Row]:
    dataset = _repro_dataset(ctx)
    config = szt.train.TrainConfig(ste = SteKind.SZT, epochs = ctx.config.get('epochs', 5), seed = ctx.seed(1))
    nets = dict(
        initial = szt.train.ToyNet.create(dataset.inputs, config.hidden, dataset.outputs, ctx.seed(2)),
        trained = szt.train.train(config, dataset).net,
    )
    for label, net in nets.items():
        yield _compare(
            f'loss BT vs SZT at identical latent weights ({label})',
            net.loss(dataset, SteKind.SZT),
            net.loss(dataset, SteKind.BT),
            0.0,
        )


@check('repro', 'Seed determinism')
def simulation_determinism(ctx: CheckContext) -> Iterator[Row]:
    params = szt.sim.OuParams(1.0, 1.0, 1.0, 1e-3, 200, seed = ctx.seed(0))
    yield _holds('identical OU estimates', szt.sim.ou_mfpt_mc(params) == szt.sim.ou_mfpt_mc(params))
    step = szt.analysis.DeterministicStep(0.1)
    renewal = [szt.sim.renewal_mc(step, LAPLACE, SQRT2, 1000, ctx.seed(1)) for _ in range(2)]
    yield _holds('identical renewal estimates', renewal[0] == renewal[1])


def _run_check(entry: Check, ctx: CheckContext) -> List[Row]:
    try:
        rows = list(entry.func(ctx))
    except Exception as error:
        rows = [_holds(entry.name, False, detail = f'{type(error).__name__}: {error}')]
    return [dict(suite = entry.suite, check = entry.name, anchor = entry.anchor, **row) for row in rows]


def run_suite(
        suite: str,
        config: Optional[szt.config.Config] = None,
        status: Optional[szt.status.Status] = None,
    ) -> szt.table.Table:
    """
    Run the checks of a suite (or of ``all`` suites).

    A check which raises an error yields a single ``FAIL`` row with the error message.

    Arguments:
        suite: One of :data:`SUITES`, or ``all``.
        config: The full configuration (``seed``, ``threads``, and the sizes in ``verify/<suite>``). Defaults to
            :data:`szt.config.DEFAULTS`.
        status: Receives an update for each suite and check.

    Raises:
        UnknownSuiteError: If the suite does not exist.
    """
    entries = checks(suite)
    if config is None:
        config = szt.config.load_config()
    root = szt.core.RandomSource(config.get('seed', 0))
    threads = config.get('threads', 1)

    table = szt.table.Table(columns = COLUMNS)
    for suite_idx, name in enumerate(SUITES):
        suite_entries = [entry for entry in entries if entry.suite == name]
        if len(suite_entries) == 0:
            continue
        szt.status.update(status, info = 'suite', suite = name, checks = len(suite_entries))
        suite_config = config.get(f'verify/{name}', dict())
        for check_idx, entry in enumerate(suite_entries):
            ctx = CheckContext(
                config = suite_config,
                rng = root.derive(suite_idx).derive(check_idx),
                threads = threads,
                status = status,
            )
            rows = _run_check(entry, ctx)
            outcomes = [row['status'] for row in rows]
            szt.status.update(
                status,
                info = 'check',
                suite = name,
                check = entry.name,
                **{outcome: outcomes.count(outcome) for outcome in (PASS, FAIL, FLAG)},
            )
            table.extend(rows)
    return table


def summarize(table: szt.table.Table) -> Dict[str, Dict[str, int]]:
    """
    Count the outcomes of the rows per anchor.

    .. runblock:: pycon

        >>> import szt.verify
        >>> szt.verify.summarize(szt.verify.run_suite('entropy'))
    """
    summary = dict()
    if len(table) == 0 or 'anchor' not in table.columns:
        return summary
    for row in table.rows:
        # Rows of other tables (e.g., of ``analyze``) have no anchor
        if not isinstance(row['anchor'], str):
            continue
        counts = summary.setdefault(row['anchor'], {PASS: 0, FAIL: 0, FLAG: 0, 'rows': 0})
        if row.get('status') in (PASS, FAIL, FLAG):
            counts[row['status']] += 1
        counts['rows'] += 1
    return dict(sorted(summary.items()))


def failed(table: szt.table.Table) -> bool:
    """
    Whether any row of the table failed.
    """
    return len(table) > 0 and 'status' in table.columns and FAIL in table.column('status')
