import dataclasses

import numpy as np
import scipy.integrate
import scipy.special

import szt.analysis
import szt.core
import szt.parallel
import szt.prior
import szt.status
from szt.typing import (
    Dict,
    Optional,
    RealArray,
    Seed,
)

MAX_STEPS = 10 ** 8
"""
Maximum number of steps per simulated path.
"""


class NonEscapeError(szt.core.SztError):
    """
    Raised when simulated paths do not leave the dead zone within the maximum number of steps.
    """

    def __init__(self, message: str, remaining: int, steps: int, max_abs_state: float):
        super().__init__(message)

        self.remaining = remaining
        """
        Number of paths which have not escaped.
        """

        self.steps = steps
        """
        Number of steps simulated.
        """

        self.max_abs_state = max_abs_state
        """
        Largest magnitude of the remaining paths.
        """


class QuadratureError(szt.core.SztError):
    """
    Raised when adaptive quadrature does not reach the requested tolerance.
    """

    def __init__(self, message: str, abserr: float):
        super().__init__(message)

        self.abserr = abserr
        """
        The error estimate of the quadrature.
        """


@dataclasses.dataclass(frozen = True)
class OuParams:
    """
    Parameters of an Ornstein-Uhlenbeck latent-weight process :math:`dW = -\\kappa W dt + \\sigma dB`, started at zero,
    and of its simulation.

    Raises:
        InvalidInputError: If a parameter is not positive, or the time step is too coarse for the barrier,
            :math:`dt > \\Delta^2 / (100 \\sigma^2)`.
    """

    kappa: float
    """
    Mean-reversion rate.
    """

    sigma: float
    """
    Diffusion scale.
    """

    delta: float
    """
    The barrier (the threshold of the dead zone).
    """

    dt: float
    """
    Time step of the Euler-Maruyama scheme.
    """

    trials: int
    """
    Number of simulated paths.
    """

    seed: Seed = 0

    def __post_init__(self):
        for name in ('kappa', 'sigma', 'delta', 'dt'):
            szt.core.require_positive(getattr(self, name), name)
        if self.trials < 1:
            raise szt.core.InvalidInputError(f'At least one trial is required: {self.trials}')
        if self.dt > self.delta ** 2 / (100 * self.sigma ** 2):
            raise szt.core.InvalidInputError(
                f'Time step {self.dt} is too coarse for the barrier, at most {self.delta ** 2 / (100 * self.sigma ** 2)}'
                ' is required'
            )

    @property
    def lam(self) -> float:
        return szt.analysis.barrier(self.kappa, self.sigma, self.delta)


@dataclasses.dataclass(frozen = True)
class MfptEstimate:
    """
    Monte Carlo estimate of a mean first-passage time.
    """

    mean: float

    ci95_halfwidth: float
    """
    Half-width of the 95% confidence interval of the mean.
    """

    trials_escaped: int

    std: float
    """
    Sample standard deviation of the first-passage times.
    """

    def to_dict(self) -> Dict[str, float]:
        return dataclasses.asdict(self)


def ou_mfpt_mc(
        params: OuParams,
        threads: int = 1,
        status: Optional[szt.status.Status] = None,
        max_steps: int = MAX_STEPS,
    ) -> MfptEstimate:
    """
    Estimate the mean time until the process leaves the dead zone, :math:`\\tau = \\inf\\{t : |W_t| \\geq \\Delta\\}`,
    by simulating Euler-Maruyama paths.

    Raises:
        NonEscapeError: If a path does not escape within `max_steps` steps.
    """
    rng = szt.core.RandomSource(params.seed)
    drift = 1 - params.kappa * params.dt
    diffusion = params.sigma * np.sqrt(params.dt)

    def run_chunk(chunk_idx: int, start: int, stop: int) -> RealArray:
        chunk_rng = rng.derive(chunk_idx)
        state = np.zeros(stop - start)
        steps = np.zeros(stop - start, dtype = np.int64)
        active = np.arange(stop - start)
        step = 0
        while active.size > 0:
            if step >= max_steps:
                raise NonEscapeError(
                    f'{active.size} paths did not escape within {max_steps} steps',
                    remaining = int(active.size),
                    steps = step,
                    max_abs_state = float(np.abs(state[active]).max()),
                )
            step += 1
            state[active] = drift * state[active] + diffusion * chunk_rng.normal(size = active.size)
            escaped = np.abs(state[active]) >= params.delta
            steps[active[escaped]] = step
            active = active[~escaped]
        szt.status.update(status, info = 'simulate', mode = 'ou', paths = int(stop), intermediate = True)
        return steps * params.dt

    times = np.concatenate(szt.parallel.map_chunks(run_chunk, params.trials, chunk_size = 512, threads = threads))
    std = float(times.std(ddof = 1)) if times.size > 1 else 0.0
    return MfptEstimate(
        mean = float(times.mean()),
        ci95_halfwidth = 1.96 * std / np.sqrt(times.size),
        trials_escaped = int(times.size),
        std = std,
    )


def ou_mfpt_bvp(kappa: float, sigma: float, delta: float, epsrel: float = 1e-8) -> float:
    """
    Mean first-passage time from zero, as the solution of the boundary-value problem

    .. math::

        -\\kappa w \\tau'(w) + \\tfrac{1}{2} \\sigma^2 \\tau''(w) = -1, \\quad \\tau(\\pm \\Delta) = 0,

    evaluated at :math:`w = 0` through its representation

    .. math::

        \\tau(0) = \\frac{2}{\\sigma^2} \\int_0^\\Delta e^{\\kappa y^2 / \\sigma^2} \\int_0^y e^{-\\kappa z^2 / \\sigma^2}
        \\, dz \\, dy,

    where the inner integral is expressed through the error function.

    .. runblock:: pycon

        >>> import szt.sim
        >>> print(szt.sim.ou_mfpt_bvp(1.0, 1.0, 1.0))

    Raises:
        QuadratureError: If the outer quadrature does not converge.
    """
    for name, value in (('kappa', kappa), ('sigma', sigma), ('delta', delta)):
        szt.core.require_positive(value, name)
    a = kappa / sigma ** 2
    root = np.sqrt(a)

    def integrand(y: float) -> float:
        # The limit of `inner` for a -> 0 is `y`
        inner = np.sqrt(np.pi) / (2 * root) * scipy.special.erf(root * y)
        return np.exp(a * y ** 2) * inner

    value, abserr = scipy.integrate.quad(integrand, 0, delta, epsabs = 0, epsrel = epsrel, limit = 200)
    if not abserr <= 10 * epsrel * abs(value):
        raise QuadratureError(f'Quadrature did not converge (value: {value}, error: {abserr})', abserr = abserr)
    return float(2 / sigma ** 2 * value)


@dataclasses.dataclass(frozen = True)
class RenewalEstimate:
    """
    Monte Carlo estimate of the waiting times (in steps) until the first numeric and the first representational
    transition.
    """

    mean_T_F: float
    mean_T_R: float
    se_T_F: float
    se_T_R: float
    var_T_F: float
    var_T_R: float
    trials: int

    expected_T_F: float
    """
    The renewal prediction :math:`1 / E[\\Phi_F(S)]`.
    """

    expected_T_R: float
    """
    The renewal prediction :math:`1 / E[\\Phi_R(S)]`.
    """

    @property
    def ratio(self) -> float:
        return self.mean_T_F / self.mean_T_R

    def to_dict(self) -> Dict[str, float]:
        return dict(dataclasses.asdict(self), ratio = self.ratio)


def renewal_mc(
        step: szt.analysis.StepDist,
        prior: szt.prior.Prior,
        delta: float,
        trials: int,
        seed: Seed,
        threads: int = 1,
        status: Optional[szt.status.Status] = None,
        max_steps: int = MAX_STEPS,
    ) -> RenewalEstimate:
    """
    Simulate the event-rate model of transitions: each update draws a magnitude :math:`S`, and independently fires a
    numeric transition with probability :math:`\\Phi_F(S)` and a representational transition with probability
    :math:`\\Phi_R(S)`. The waiting times until the first event of each type are counted in updates.

    Raises:
        OutOfDomainError: If the steps are not within :math:`(0, \\Delta)`.
        NonEscapeError: If an event does not occur within `max_steps` updates.
    """
    step.check_support(delta)
    assert trials >= 1, 'At least one trial is required'
    rng = szt.core.RandomSource(seed)

    def run_chunk(chunk_idx: int, start: int, stop: int) -> Dict[str, RealArray]:
        chunk_rng = rng.derive(chunk_idx)
        waits = dict(F = np.zeros(stop - start, dtype = np.int64), R = np.zeros(stop - start, dtype = np.int64))
        pending = dict(F = np.arange(stop - start), R = np.arange(stop - start))
        count = 0
        while pending['F'].size > 0 or pending['R'].size > 0:
            if count >= max_steps:
                raise NonEscapeError(
                    f'No transition within {max_steps} updates',
                    remaining = int(pending['F'].size + pending['R'].size),
                    steps = count,
                    max_abs_state = float('nan'),
                )
            count += 1
            s = step.sample(stop - start, chunk_rng)
            probabilities = dict(F = szt.analysis.phi_f(prior, delta, s), R = szt.analysis.phi_r(prior, delta, s))
            for kind in ('F', 'R'):
                u = chunk_rng.uniform(size = stop - start)
                fired = pending[kind][u[pending[kind]] < probabilities[kind][pending[kind]]]
                waits[kind][fired] = count
                pending[kind] = np.setdiff1d(pending[kind], fired, assume_unique = True)
        szt.status.update(status, info = 'simulate', mode = 'renewal', paths = int(stop), intermediate = True)
        return waits

    chunks = szt.parallel.map_chunks(run_chunk, trials, threads = threads)
    result = dict()
    for kind in ('F', 'R'):
        waits = np.concatenate([chunk[kind] for chunk in chunks]).astype(float)
        variance = float(waits.var(ddof = 1)) if trials > 1 else 0.0
        result[f'mean_T_{kind}'] = float(waits.mean())
        result[f'var_T_{kind}'] = variance
        result[f'se_T_{kind}'] = float(np.sqrt(variance / trials))
    return RenewalEstimate(
        **result,
        trials = trials,
        expected_T_F = 1 / step.expect(lambda s: szt.analysis.phi_f(prior, delta, s)),
        expected_T_R = 1 / step.expect(lambda s: szt.analysis.phi_r(prior, delta, s)),
    )
