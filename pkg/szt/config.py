import copy
import hashlib
import json
import pathlib

import mergedeep
import yaml

import szt.core
from szt.typing import (
    Any,
    Callable,
    Dict,
    Iterator,
    Optional,
    PathLike,
    Self,
    Tuple,
    Union,
)


def _unwrap(value: Any) -> Any:
    return value.entries if isinstance(value, Config) else value


class Config:
    """
    Nested dictionaries of settings, addressed by slash-separated keys.

    .. runblock:: pycon

       >>> import szt.config
       >>> config = szt.config.Config()
       >>> config['simulate/kappa'] = 2.0
       >>> config['train/epochs'] = 5
       >>> print(config.entries)

    Arguments:
        other: A dictionary to be wrapped (without copying), or another :class:`Config` object (deep-copied).
            Defaults to an empty configuration.
    """

    entries: dict
    """
    The nested dictionaries.
    """

    def __init__(self, other: Optional[Union[dict, Self]] = None):
        if other is None:
            self.entries = dict()
        elif isinstance(other, Config):
            self.entries = copy.deepcopy(other.entries)
        elif isinstance(other, dict):
            self.entries = other
        else:
            raise TypeError(f'Cannot create a configuration from {type(other).__name__}')

    def _parent(self, key: str, create: bool) -> Tuple[Optional[dict], str]:
        *path, leaf = key.split('/')
        entries = self.entries
        for name in path:
            child = entries.get(name)
            if not isinstance(child, dict):
                if not create:
                    return None, leaf
                child = entries[name] = dict()
            entries = child
        return entries, leaf

    @staticmethod
    def _wrap(value: Any) -> Any:
        return Config(value) if isinstance(value, dict) else value

    def get(self, key: str, default: Any) -> Any:
        """
        The value of the setting `key`. If it is not set, it is set to `default` first.
        """
        entries, leaf = self._parent(key, create = True)
        if leaf not in entries:
            entries[leaf] = _unwrap(default)
        return self._wrap(entries[leaf])

    def set_default(self, key: str, default: Any, override_none: bool = False) -> Any:
        """
        Set `key` to `default` if it is not set (or set to `None`, if `override_none` is `True`).

        Returns:
            The new or unchanged value.
        """
        entries, leaf = self._parent(key, create = True)
        if leaf not in entries or (override_none and entries[leaf] is None):
            entries[leaf] = _unwrap(default)
        return self._wrap(entries[leaf])

    def __getitem__(self, key: str) -> Any:
        """
        Raises:
            KeyError: If `key` is not set.
        """
        entries, leaf = self._parent(key, create = False)
        if entries is None:
            raise KeyError(key)
        return self._wrap(entries[leaf])

    def __contains__(self, key: str) -> bool:
        entries, leaf = self._parent(key, create = False)
        return entries is not None and leaf in entries

    def update(self, key: str, func: Callable[[Any], Any]) -> Any:
        """
        Map the value of `key` (`None` if not set) to a new value.

        Returns:
            The new value.
        """
        entries, leaf = self._parent(key, create = True)
        entries[leaf] = _unwrap(func(entries.get(leaf)))
        return entries[leaf]

    def __setitem__(self, key: str, value: Any) -> None:
        self.update(key, lambda _: value)

    def pop(self, key: str, default: Any = None) -> Any:
        """
        Remove `key`, and return its value (or `default` if it is not set).
        """
        entries, leaf = self._parent(key, create = False)
        return default if entries is None else entries.pop(leaf, default)

    def merge(self, other: Union[dict, Self]) -> Self:
        """
        Deep-merge the settings of `other` into this configuration, so that the values of `other` take precedence.

        Returns:
            Itself.
        """
        mergedeep.merge(self.entries, copy.deepcopy(_unwrap(other)))
        return self

    def copy(self) -> Self:
        """
        A deep copy.
        """
        return Config(self)

    def items(self, prefix: str = '') -> Iterator[Tuple[str, Any]]:
        """
        Iterate over the settings in depth-first order, yielding slash-separated keys and leaf values.
        """
        for key, value in self.entries.items():
            if isinstance(value, dict):
                yield from Config(value).items(f'{prefix}{key}/')
            else:
                yield f'{prefix}{key}', value

    @property
    def yaml(self) -> str:
        """
        YAML rendering of the settings.

        .. runblock:: pycon

            >>> import szt.config
            >>> config = szt.config.Config()
            >>> config['simulate/kappa'] = 2.0
            >>> config['simulate/mode'] = 'ou'
            >>> print(config.yaml)
        """
        return yaml.safe_dump(self.entries, sort_keys = False).rstrip('\n')

    @property
    def sha(self) -> str:
        """
        SHA-256 digest of the canonical JSON rendering (sorted keys).
        """
        return hashlib.sha256(json.dumps(self.entries, sort_keys = True).encode('utf8')).hexdigest()

    def __str__(self) -> str:
        return json.dumps(self.entries, indent = 2)

    def __repr__(self) -> str:
        return f'<{type(self).__name__}, {self.entries}>'

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Config) and self.entries == other.entries


DEFAULTS: Dict[str, Any] = {
    'seed': 0,
    'threads': 1,
    'calibrate': {
        'rule': 'sigma',
        'k': 1.0,
        'prior': 'laplace',
        'granularity': 'layer',
        'axis': 0,
    },
    'quantize': {
        'rule': 'sigma',
        'k': 1.0,
        'prior': 'laplace',
        'granularity': 'layer',
        'axis': 0,
        'scale': 'threshold',
    },
    'simulate': {
        'mode': 'ou',
        'kappa': 1.0,
        'sigma': 1.0,
        'delta': 1.0,
        'dt': 1e-3,
        'trials': 10000,
        'step': 'exponential',
        'step_mean': 0.1,
        'prior_scale': 1.0,
    },
    'train': {
        'ste': 'szt',
        'epochs': 20,
        'lr': 0.05,
        'beta': 0.9,
        'task': 'regression',
        'batch': 32,
        'hidden': 16,
        'inputs': 4,
        'samples': 256,
        'k': 1.0,
        'delta_refresh': 'never',
    },
    'analyze': {
        'prior_scale': 1.0,
        'steps': [0.05, 0.1, 0.2, 0.5],
        'k_values': [0.25, 0.5, 1.0, 1.5, 2.0],
        'trials': 20000,
    },
    'verify': {
        'sensitivity': {'trials': 200000, 'channels': 4},
        'entropy': {'grid': 101, 'trials': 100000},
        'mse': {
            'trials': 20000,
            'identity_trials': 1000000,
            'momentum_steps': 500,
            'training_epochs': 5,
            'training_samples': 256,
        },
        'pacbayes': {},
        'mfpt': {'trials': 10000, 'resolution': 10000, 'renewal_trials': 100000},
        'snr': {'trials': 100000, 'packing_trials': 10000},
        'repro': {'epochs': 5, 'samples': 256, 'threads': [1, 4]},
    },
}
"""
Built-in defaults for all commands.
"""


def load_config(filepath: Optional[PathLike] = None, overrides: Optional[dict] = None) -> Config:
    """
    Resolve the effective configuration: the :data:`DEFAULTS`, deep-merged with the file at `filepath` (JSON or YAML),
    deep-merged with the `overrides` (e.g., explicit command-line flags).

    Raises:
        InvalidInputError: If the file does not contain a mapping.
    """
    config = Config(copy.deepcopy(DEFAULTS))
    if filepath is not None:
        with pathlib.Path(filepath).open('r') as file:
            entries = yaml.safe_load(file)
        if entries is None:
            entries = dict()
        if not isinstance(entries, dict):
            raise szt.core.InvalidInputError(f'Configuration file "{filepath}" does not contain a mapping')
        config.merge(entries)
    if overrides:
        config.merge(overrides)
    return config


def nested(flat: Dict[str, Any]) -> dict:
    """
    Turn slash-separated keys into nested dictionaries, and drop entries which are `None`.

    .. runblock:: pycon

        >>> import szt.config
        >>> szt.config.nested({'train/epochs': 3, 'train/lr': None, 'seed': 1})
    """
    config = Config()
    for key, value in flat.items():
        if value is not None:
            config[key] = list(value) if isinstance(value, (list, tuple)) else value
    return config.entries
