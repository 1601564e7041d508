import json
import math
import pathlib
import re

import numpy as np
import pandas as pd

from szt.typing import (
    Any,
    Dict,
    Iterable,
    List,
    Optional,
    PathLike,
    Self,
    Sequence,
)

FLOAT_FORMAT = '%.17g'
"""
Format of floating-point numbers in result files (enough digits to recover the exact binary value).
"""

_FLOAT_TOKEN = '@float:'
_FLOAT_PATTERN = re.compile(r'"' + re.escape(_FLOAT_TOKEN) + r'([^"]+)"')


def _tokenize_floats(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _tokenize_floats(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_tokenize_floats(item) for item in value]
    if isinstance(value, np.ndarray):
        return _tokenize_floats(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return _FLOAT_TOKEN + FLOAT_FORMAT % value
    return value


def render_json(value: Any) -> str:
    """
    Render `value` as JSON, with sorted keys, floats with 17 significant digits, and the non-finite floats as the
    strings ``"inf"``, ``"-inf"``, and ``"nan"``.

    .. runblock:: pycon

        >>> import szt.table
        >>> print(szt.table.render_json({'b': 0.1, 'a': float('inf')}))
    """
    text = json.dumps(_tokenize_floats(value), indent = 2, sort_keys = True)
    return _FLOAT_PATTERN.sub(lambda match: match.group(1), text)


def dump_json(value: Any, filepath: PathLike) -> pathlib.Path:
    """
    Write `value` to `filepath` using :func:`render_json`.
    """
    filepath = pathlib.Path(filepath)
    filepath.write_text(render_json(value) + '\n')
    return filepath


def load_json(filepath: PathLike) -> Any:
    """
    Read a JSON file written by :func:`dump_json` (the non-finite floats remain strings).
    """
    with pathlib.Path(filepath).open('r') as file:
        return json.load(file)


class Table:
    """
    Rows of named values (e.g., the results of a verification suite), persisted as CSV.

    Example:

        .. runblock:: pycon

            >>> import tempfile
            >>> from szt.table import Table
            >>>
            >>> with tempfile.TemporaryDirectory() as tmp_path:
            ...     table = Table(columns = ['k', 'mse'])
            ...     table.append(k = 1.0, mse = 0.1)
            ...     table.save(tmp_path + '/table.csv')
            ...     print(Table.load(tmp_path + '/table.csv').rows)
    """

    df: pd.DataFrame
    """
    The rows.
    """

    def __init__(self, rows: Optional[Iterable[Dict[str, Any]]] = None, columns: Optional[Sequence[str]] = None):
        rows = list(rows) if rows is not None else list()
        self.df = pd.DataFrame.from_records(rows, columns = list(columns) if columns is not None else None)

    @property
    def columns(self) -> List[str]:
        return [str(column) for column in self.df.columns]

    @property
    def rows(self) -> List[Dict[str, Any]]:
        """
        The rows as dictionaries.
        """
        return self.df.to_dict(orient = 'records')

    def append(self, **row: Any) -> Self:
        """
        Append a row. Columns which are not present yet are added.
        """
        return self.extend([row])

    def extend(self, rows: Iterable[Dict[str, Any]]) -> Self:
        """
        Append rows.
        """
        addition = pd.DataFrame.from_records(list(rows))
        if len(addition) == 0:
            return self
        if len(self.df) == 0:
            columns = self.columns + [column for column in addition.columns if column not in self.df.columns]
            self.df = addition.reindex(columns = columns)
        else:
            self.df = pd.concat([self.df, addition], ignore_index = True)
        return self

    def column(self, name: str) -> List[Any]:
        return self.df[name].tolist()

    def save(self, filepath: PathLike) -> pathlib.Path:
        """
        Write the rows to a CSV file, with floats formatted by :data:`FLOAT_FORMAT`.
        """
        filepath = pathlib.Path(filepath)
        self.df.to_csv(filepath, index = False, float_format = FLOAT_FORMAT)
        return filepath

    @classmethod
    def load(cls, filepath: PathLike) -> Self:
        """
        Read the rows of a CSV file.
        """
        table = cls()
        table.df = pd.read_csv(filepath, float_precision = 'round_trip')
        return table

    @classmethod
    def concat(cls, tables: Sequence[Self], labels: Optional[Sequence[str]] = None, label_column: str = 'source') -> Self:
        """
        Concatenate the rows of several tables. If `labels` are given, the rows are labeled in the `label_column`.
        """
        frames = list()
        for idx, table in enumerate(tables):
            df = table.df.copy()
            if labels is not None:
                df.insert(0, label_column, labels[idx])
            frames.append(df)
        result = cls()
        if len(frames) > 0:
            result.df = pd.concat(frames, ignore_index = True)
        return result

    def __len__(self) -> int:
        return len(self.df)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Table) and self.df.equals(other.df)
