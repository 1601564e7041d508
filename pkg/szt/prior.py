import abc

import numpy as np
import scipy.special
import scipy.stats

import szt.core
from szt.typing import (
    ArrayLike,
    Dict,
    Literal,
    RealArray,
    Union,
)

PriorKind = Literal['laplace', 'gaussian', 'half-laplace', 'half-gaussian', 'empirical']
"""
Names of the supported prior kinds.
"""


class Prior(abc.ABC):
    """
    Distribution of latent weights (or activations).

    Symmetric priors satisfy :math:`p(w) = p(-w)`, and half priors are supported on :math:`[0, \\infty)`. All
    probabilities of the quantizer analysis are expressed through the distribution of the magnitude :math:`|w|`, see
    :meth:`abs_cdf`, so that both families are treated alike.
    """

    kind: PriorKind
    """
    The name of the prior kind.
    """

    symmetric: bool
    """
    `True` for priors which are symmetric around zero, `False` for half priors.
    """

    parametric: bool = True
    """
    `False` only for the empirical prior.
    """

    @abc.abstractmethod
    def pdf(self, w: ArrayLike) -> Union[float, RealArray]:
        """
        The density at `w`.
        """
        raise NotImplementedError()

    @abc.abstractmethod
    def cdf(self, w: ArrayLike) -> Union[float, RealArray]:
        """
        The probability :math:`P(W \\leq w)`.
        """
        raise NotImplementedError()

    def abs_cdf(self, a: ArrayLike) -> Union[float, RealArray]:
        """
        The probability :math:`P(|W| \\leq a)` for :math:`a \\geq 0`.
        """
        a = np.asarray(a, dtype = float)
        if self.symmetric:
            return self.cdf(a) - self.cdf(-a)
        else:
            return self.cdf(a)

    @abc.abstractmethod
    def std_dev(self) -> float:
        """
        The standard deviation.
        """
        raise NotImplementedError()

    @abc.abstractmethod
    def second_moment(self) -> float:
        """
        The second moment :math:`E[W^2]`.
        """
        raise NotImplementedError()

    def density_at_zero(self) -> float:
        """
        The density :math:`p(0)` (the right-hand limit for half priors).
        """
        return float(self.pdf(0.0))

    @abc.abstractmethod
    def sample(self, n: int, rng: szt.core.RandomSource) -> RealArray:
        """
        Draw `n` independent values.
        """
        raise NotImplementedError()

    @abc.abstractmethod
    def describe(self) -> Dict[str, Union[str, float]]:
        """
        JSON-compatible description of the kind and parameters.
        """
        raise NotImplementedError()

    def __repr__(self) -> str:
        params = ', '.join(f'{key}={value}' for key, value in self.describe().items() if key != 'kind')
        return f'<{type(self).__name__} {params}>'

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Prior) and self.describe() == other.describe()

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.describe().items())))


class _ScipyPrior(Prior):

    def __init__(self, dist):
        self.dist = dist

    def pdf(self, w):
        return self.dist.pdf(w)

    def cdf(self, w):
        return self.dist.cdf(w)

    def std_dev(self) -> float:
        return float(self.dist.std())

    def second_moment(self) -> float:
        return float(self.dist.moment(2))

    def sample(self, n: int, rng: szt.core.RandomSource) -> RealArray:
        return self.dist.rvs(size = n, random_state = rng.generator)


class LaplacePrior(_ScipyPrior):
    """
    Laplace prior :math:`p(w) = e^{-|w|/b} / 2b` with standard deviation :math:`\\sqrt{2} b`.
    """

    kind = 'laplace'
    symmetric = True

    b: float
    """
    The scale parameter.
    """

    def __init__(self, b: float):
        self.b = szt.core.require_positive(b, 'Laplace scale')
        super().__init__(scipy.stats.laplace(scale = self.b))

    def abs_cdf(self, a):
        return -np.expm1(-np.asarray(a, dtype = float) / self.b)

    def std_dev(self) -> float:
        return float(np.sqrt(2) * self.b)

    def second_moment(self) -> float:
        return 2 * self.b ** 2

    def describe(self):
        return dict(kind = self.kind, b = self.b)


class GaussianPrior(_ScipyPrior):
    """
    Zero-mean Gaussian prior.
    """

    kind = 'gaussian'
    symmetric = True

    sigma: float
    """
    The standard deviation.
    """

    def __init__(self, sigma: float):
        self.sigma = szt.core.require_positive(sigma, 'Gaussian standard deviation')
        super().__init__(scipy.stats.norm(scale = self.sigma))

    def abs_cdf(self, a):
        return scipy.special.erf(np.asarray(a, dtype = float) / (self.sigma * np.sqrt(2)))

    def std_dev(self) -> float:
        return self.sigma

    def second_moment(self) -> float:
        return self.sigma ** 2

    def describe(self):
        return dict(kind = self.kind, sigma = self.sigma)


class HalfLaplacePrior(_ScipyPrior):
    """
    Half-Laplace (exponential) prior :math:`p(u) = e^{-u/b} / b` on :math:`[0, \\infty)`, with standard deviation
    :math:`b`.
    """

    kind = 'half-laplace'
    symmetric = False

    b: float
    """
    The scale parameter.
    """

    def __init__(self, b: float):
        self.b = szt.core.require_positive(b, 'half-Laplace scale')
        super().__init__(scipy.stats.expon(scale = self.b))

    def describe(self):
        return dict(kind = self.kind, b = self.b)


class HalfGaussianPrior(_ScipyPrior):
    """
    Half-Gaussian prior, the distribution of :math:`|X|` for :math:`X \\sim N(0, \\sigma^2)`.

    Note that :attr:`sigma` is the scale parameter, whereas the standard deviation is
    :math:`\\sigma \\sqrt{1 - 2/\\pi}`.
    """

    kind = 'half-gaussian'
    symmetric = False

    sigma: float
    """
    The scale parameter.
    """

    def __init__(self, sigma: float):
        self.sigma = szt.core.require_positive(sigma, 'half-Gaussian scale')
        super().__init__(scipy.stats.halfnorm(scale = self.sigma))

    def describe(self):
        return dict(kind = self.kind, sigma = self.sigma)


class EmpiricalPrior(Prior):
    """
    Prior given by a sample population.

    Probabilities are fractions of the sample. The density is a histogram estimate with Freedman–Diaconis bin width.

    Raises:
        InvalidInputError: If the population has less than two distinct values, or non-finite values.
    """

    kind = 'empirical'
    parametric = False

    samples: RealArray
    """
    The sorted sample population.
    """

    def __init__(self, samples: ArrayLike):
        samples = szt.core.require_finite(samples, 'samples').ravel()
        if np.unique(samples).size < 2:
            raise szt.core.InvalidInputError('Empirical prior requires at least two distinct samples')
        self.samples = np.sort(samples)
        self.symmetric = bool(self.samples[0] < 0)
        self._density, self._edges = np.histogram(self.samples, bins = 'fd', density = True)

    def pdf(self, w):
        w = np.asarray(w, dtype = float)
        idx = np.clip(np.searchsorted(self._edges, w, side = 'right') - 1, 0, self._density.size - 1)
        inside = (w >= self._edges[0]) & (w <= self._edges[-1])
        density = np.where(inside, self._density[idx], 0.0)
        return density.item() if density.ndim == 0 else density

    def cdf(self, w):
        counts = np.searchsorted(self.samples, np.asarray(w, dtype = float), side = 'right')
        return counts / self.samples.size

    def abs_cdf(self, a):
        magnitudes = np.sort(np.abs(self.samples))
        return np.searchsorted(magnitudes, np.asarray(a, dtype = float), side = 'right') / magnitudes.size

    def std_dev(self) -> float:
        return float(np.std(self.samples, ddof = 1))

    def second_moment(self) -> float:
        return float(np.mean(self.samples ** 2))

    def sample(self, n: int, rng: szt.core.RandomSource) -> RealArray:
        return rng.choice(self.samples, size = n, replace = True)

    def describe(self):
        return dict(kind = self.kind, n = int(self.samples.size), std_dev = self.std_dev())


def create_prior(kind: PriorKind, scale: float) -> Prior:
    """
    Create a parametric prior from its kind and scale parameter (:math:`b` or :math:`\\sigma`).
    """
    factories = {
        'laplace': LaplacePrior,
        'gaussian': GaussianPrior,
        'half-laplace': HalfLaplacePrior,
        'half-gaussian': HalfGaussianPrior,
    }
    if kind not in factories:
        raise szt.core.InvalidInputError(f'Unknown parametric prior kind: "{kind}"')
    return factories[kind](scale)


def fit_prior(kind: PriorKind, samples: ArrayLike) -> Prior:
    """
    Fit a prior of the given kind to a sample population by maximum likelihood.

    The Laplace scale is the mean magnitude, the Gaussian scale the root mean square (both around zero). The empirical
    kind wraps the samples.

    .. runblock:: pycon

        >>> import numpy as np
        >>> from szt.prior import fit_prior
        >>> fit_prior('laplace', np.array([-2.0, -1.0, 1.0, 2.0]))
    """
    if kind == 'empirical':
        return EmpiricalPrior(samples)
    samples = szt.core.require_finite(samples, 'samples').ravel()
    if samples.size == 0:
        raise szt.core.InvalidInputError('Cannot fit a prior to an empty population')
    if kind in ('laplace', 'half-laplace'):
        return create_prior(kind, float(np.mean(np.abs(samples))))
    else:
        return create_prior(kind, float(np.sqrt(np.mean(samples ** 2))))
