import hashlib
import pathlib

import frozendict

import szt.core
import szt.status
import szt.table
import szt.version
from szt.typing import (
    Any,
    Dict,
    Iterable,
    List,
    Mapping,
    PathLike,
    Self,
)


def digest_file(filepath: PathLike) -> str:
    """
    SHA-256 digest of a file (hexadecimal).
    """
    with pathlib.Path(filepath).open('rb') as file:
        return szt.status.file_digest(file, hashlib.sha256).hexdigest()


class RunManifest:
    """
    Immutable record of a command run, sufficient to :func:`replay <szt.cli.replay>` it.

    The entries are the `command`, the explicit command-line `flags`, the effective `config`, the `seed`, the tool
    `version`, the SHA-256 digests of the input files (`input_digests`), the written `outputs` (relative to the output
    directory), and the `wall_time` in seconds.
    """

    entries: Mapping[str, Any]
    """
    The (deeply frozen) entries.
    """

    def __init__(self, entries: Mapping[str, Any]):
        self.entries = frozendict.deepfreeze(dict(entries))

    @classmethod
    def create(
            cls,
            command: str,
            flags: Dict[str, Any],
            config: Dict[str, Any],
            seed: int,
            inputs: Iterable[PathLike] = (),
            outputs: Iterable[PathLike] = (),
            wall_time: float = 0.0,
        ) -> Self:
        """
        Create a manifest, computing the digests of the `inputs`.
        """
        return cls(
            dict(
                command = command,
                flags = dict(flags),
                config = dict(config),
                seed = int(seed),
                version = szt.version.VERSION,
                input_digests = {str(path): digest_file(path) for path in inputs},
                outputs = [str(path) for path in outputs],
                wall_time = float(wall_time),
            )
        )

    @property
    def command(self) -> str:
        return self.entries['command']

    @property
    def flags(self) -> Dict[str, Any]:
        return thaw(self.entries['flags'])

    @property
    def config(self) -> Dict[str, Any]:
        return thaw(self.entries['config'])

    @property
    def seed(self) -> int:
        return self.entries['seed']

    @property
    def outputs(self) -> List[str]:
        return list(self.entries['outputs'])

    def filename(self) -> str:
        return f'{self.command}.manifest.json'

    def without_wall_time(self) -> Dict[str, Any]:
        """
        The entries except for the wall time, which is the only entry that differs between identical runs.
        """
        entries = thaw(self.entries)
        entries.pop('wall_time', None)
        return entries

    def changed_inputs(self) -> List[str]:
        """
        The input files which are missing, or whose contents differ from the recorded digests.
        """
        changed = list()
        for path, digest in self.entries['input_digests'].items():
            if not pathlib.Path(path).is_file() or digest_file(path) != digest:
                changed.append(path)
        return changed

    def save(self, out_dir: PathLike) -> pathlib.Path:
        """
        Write the manifest to ``<command>.manifest.json`` in the `out_dir`.
        """
        return szt.table.dump_json(thaw(self.entries), pathlib.Path(out_dir) / self.filename())

    @classmethod
    def load(cls, filepath: PathLike) -> Self:
        entries = szt.table.load_json(filepath)
        missing = {'command', 'flags', 'config', 'seed'} - set(entries.keys())
        if missing:
            raise szt.core.InvalidInputError(f'Manifest "{filepath}" lacks the entries: {", ".join(sorted(missing))}')
        return cls(entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RunManifest) and self.entries == other.entries

    def __repr__(self) -> str:
        return f'<RunManifest {self.command}, seed={self.seed}>'


def thaw(value: Any) -> Any:
    """
    Convert a deeply frozen value back into dictionaries and lists.
    """
    if isinstance(value, Mapping):
        return {key: thaw(item) for key, item in value.items()}
    if isinstance(value, (tuple, list)):
        return [thaw(item) for item in value]
    return value


def find_manifests(root: PathLike) -> List[pathlib.Path]:
    """
    The ``*.manifest.json`` files in `root` (searched recursively, sorted).
    """
    root = pathlib.Path(root)
    if root.is_file():
        return [root] if root.name.endswith('.manifest.json') else []
    return sorted(root.rglob('*.manifest.json'))
