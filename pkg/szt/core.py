import dataclasses
import enum
import hashlib
import pathlib
import struct

import numpy as np

from szt.typing import (
    ArrayLike,
    CodeArray,
    PathLike,
    RealArray,
    Seed,
    Self,
    Sequence,
    Tuple,
    Union,
)


class SztError(Exception):
    """
    Base class of all errors raised by the :mod:`szt` package.
    """
    pass


class InvalidInputError(SztError, ValueError):
    """
    Raised when an input is not acceptable (e.g., non-finite values, non-positive thresholds, or malformed files).
    """
    pass


class LengthMismatchError(SztError, ValueError):
    """
    Raised when a number of elements does not match the capacity of a buffer.

    Arguments:
        message: Description of the mismatch.
        expected: The expected number of elements or bytes.
        actual: The actual number of elements or bytes.
    """

    expected: int
    """
    The expected number of elements or bytes.
    """

    actual: int
    """
    The actual number of elements or bytes.
    """

    def __init__(self, message: str, expected: int, actual: int):
        super().__init__(f'{message} (expected: {expected}, actual: {actual})')
        self.expected = expected
        self.actual = actual


class TernaryCode(enum.IntEnum):
    """
    The four 2-bit code words of the signed-zero ternary alphabet.

    The value of each member is its bit pattern. The high bit is the stored sign, and the low bit is the magnitude:

    .. runblock:: pycon

        >>> from szt.core import TernaryCode
        >>> for code in TernaryCode:
        ...     print(f'{code!s:>2}  {code.value:02b}  value={code.numeric_value:+d}  sign={code.stored_sign:+d}')
    """

    ZERO_PLUS = 0b00
    PLUS_ONE = 0b01
    ZERO_MINUS = 0b10
    MINUS_ONE = 0b11

    @property
    def numeric_value(self) -> int:
        """
        The decoded value in :math:`\\{-1, 0, +1\\}`, which never distinguishes the two zeros.
        """
        return numeric_value(self)

    @property
    def stored_sign(self) -> int:
        """
        The stored sign in :math:`\\{-1, +1\\}`.
        """
        return stored_sign(self)

    def __str__(self) -> str:
        return _SYMBOLS[self]


_SYMBOLS = {
    TernaryCode.ZERO_PLUS: '0+',
    TernaryCode.PLUS_ONE: '+1',
    TernaryCode.ZERO_MINUS: '0-',
    TernaryCode.MINUS_ONE: '-1',
}


def as_code_array(codes: Union[TernaryCode, ArrayLike]) -> CodeArray:
    """
    Convert code words (or their bit patterns) to an array of bit patterns.

    Raises:
        InvalidInputError: If any element is not a valid 2-bit pattern.
    """
    array = np.asarray(codes)
    if array.size == 0:
        return array.astype(np.uint8)
    if not np.issubdtype(array.dtype, np.integer) or array.min() < 0 or array.max() > 0b11:
        raise InvalidInputError(f'Not a sequence of 2-bit code words: {codes}')
    return array.astype(np.uint8)


def _scalar_or_array(value: np.ndarray, like: ArrayLike):
    return value.item() if np.ndim(like) == 0 else value


def numeric_value(code: Union[TernaryCode, ArrayLike]) -> Union[int, np.ndarray]:
    """
    Decode code words to their numeric values :math:`+1, 0, 0, -1` (for :math:`+1, 0^+, 0^-, -1`).

    Accepts a single code word (and then returns an `int`), or an array of code words (and then returns an array of
    the same shape with dtype ``int8``).
    """
    codes = as_code_array(code).astype(np.int8)
    values = (codes & 1) * (1 - 2 * (codes >> 1))
    return _scalar_or_array(values.astype(np.int8), code)


def stored_sign(code: Union[TernaryCode, ArrayLike]) -> Union[int, np.ndarray]:
    """
    The stored sign of code words: :math:`+1` for :math:`\\{0^+, +1\\}` and :math:`-1` for :math:`\\{0^-, -1\\}`.

    This only tests the high bit of the pattern.
    """
    codes = as_code_array(code).astype(np.int8)
    return _scalar_or_array((1 - 2 * (codes >> 1)).astype(np.int8), code)


def pack_codes(codes: Union[Sequence[TernaryCode], ArrayLike]) -> bytes:
    """
    Pack code words into bytes, four per byte, least-significant bits first.

    Element `i` occupies the bits ``2i mod 8`` and ``2i mod 8 + 1`` of byte ``i // 4``. The trailing unused slots of
    the last byte hold the :math:`0^+` pattern.

    .. runblock:: pycon

        >>> from szt.core import TernaryCode, pack_codes
        >>> pack_codes([TernaryCode.ZERO_PLUS, TernaryCode.PLUS_ONE, TernaryCode.ZERO_MINUS, TernaryCode.MINUS_ONE])
    """
    codes = as_code_array(codes).ravel()
    padded = np.zeros(-(-codes.size // 4) * 4, dtype = np.uint8)
    padded[:codes.size] = codes
    quads = padded.reshape(-1, 4)
    packed = quads[:, 0] | (quads[:, 1] << 2) | (quads[:, 2] << 4) | (quads[:, 3] << 6)
    return packed.astype(np.uint8).tobytes()


def unpack_codes(data: bytes, n: int) -> CodeArray:
    """
    Unpack the first `n` code words from bytes written by :func:`pack_codes`.

    Returns:
        Flat array of `n` bit patterns.

    Raises:
        LengthMismatchError: If `n` exceeds the capacity of `data` (four code words per byte).
    """
    buffer = np.frombuffer(bytes(data), dtype = np.uint8)
    if n < 0 or n > 4 * buffer.size:
        raise LengthMismatchError('Cannot unpack code words', expected = 4 * buffer.size, actual = n)
    slots = np.stack([(buffer >> shift) & 0b11 for shift in (0, 2, 4, 6)], axis = 1)
    return slots.ravel()[:n].astype(np.uint8)


def payload_length(numel: int) -> int:
    """
    Number of bytes needed to pack `numel` code words.
    """
    return -(-numel // 4)


class RandomSource:
    """
    Deterministic source of random numbers, based on the counter-based Philox generator.

    The draw sequence depends only on the seed and the derivation path, not on the platform. Random sources are not
    meant to be shared between threads; instead, derive an independent child source for each unit of work:

    .. runblock:: pycon

        >>> from szt.core import RandomSource
        >>> rng = RandomSource(42)
        >>> print(rng.derive(0).uniform(size = 2), rng.derive(1).uniform(size = 2))

    Arguments:
        seed: The 64-bit seed.
        path: The derivation path (sequence of child indices) of this source.
    """

    seed: Seed
    """
    The 64-bit seed.
    """

    path: Tuple[int, ...]
    """
    Sequence of child indices which leads from the root source to this source.
    """

    generator: np.random.Generator
    """
    The underlying generator.
    """

    def __init__(self, seed: Seed, path: Sequence[int] = ()):
        if not 0 <= int(seed) < 2 ** 64:
            raise InvalidInputError(f'Seed must be a 64-bit unsigned integer: {seed}')
        self.seed = int(seed)
        self.path = tuple(int(index) for index in path)
        sequence = np.random.SeedSequence(self.seed, spawn_key = self.path)
        self.generator = np.random.Generator(np.random.Philox(sequence))

    def derive(self, index: int) -> Self:
        """
        Derive the independent child source with the given `index`.

        Deriving the same index twice yields two sources with identical draw sequences.
        """
        return RandomSource(self.seed, self.path + (index,))

    def uniform(self, low: float = 0.0, high: float = 1.0, size = None):
        return self.generator.uniform(low, high, size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size = None):
        return self.generator.normal(loc, scale, size)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)

    def choice(self, a: ArrayLike, size = None, replace: bool = True):
        return self.generator.choice(a, size = size, replace = replace)

    def __repr__(self) -> str:
        return f'<{type(self).__name__} seed={self.seed} path={self.path}>'


@dataclasses.dataclass(frozen = True)
class PerLayer:
    """
    A single threshold (and scale) for the whole tensor.
    """

    def channel_count(self, dims: Sequence[int]) -> int:
        return 1


@dataclasses.dataclass(frozen = True)
class PerChannel:
    """
    One threshold (and scale) per slice along an axis.
    """

    axis: int
    """
    The channel axis.
    """

    def channel_count(self, dims: Sequence[int]) -> int:
        if not 0 <= self.axis < len(dims):
            raise InvalidInputError(f'Invalid channel axis {self.axis} for a tensor of rank {len(dims)}')
        return dims[self.axis]


Granularity = Union[PerLayer, PerChannel]
"""
Granularity of thresholds and scales.
"""


def broadcast_channels(values: ArrayLike, dims: Sequence[int], granularity: Granularity) -> RealArray:
    """
    Expand per-layer or per-channel values to an array of shape `dims`.
    """
    values = np.asarray(values, dtype = float)
    if isinstance(granularity, PerChannel):
        shape = [1] * len(dims)
        shape[granularity.axis] = dims[granularity.axis]
        return np.broadcast_to(values.reshape(shape), tuple(dims))
    else:
        return np.broadcast_to(values.reshape(()), tuple(dims))


MAGIC = b'SZT1'
"""
Magic bytes which start each ``.szt`` file.
"""

FORMAT_VERSION = 1
"""
Version of the ``.szt`` format written by this module.
"""


@dataclasses.dataclass(frozen = True)
class PackedTernaryTensor:
    """
    A tensor of 2-bit code words along with its thresholds and reconstruction scales.

    The payload holds the code words in row-major order, packed by :func:`pack_codes`.

    Raises:
        InvalidInputError: If the dimensions, thresholds, or scales are invalid.
        LengthMismatchError: If the payload length does not match the dimensions.
    """

    dims: Tuple[int, ...]
    """
    The shape of the tensor.
    """

    granularity: Granularity
    """
    Whether the thresholds and scales are per layer or per channel.
    """

    thresholds: Tuple[float, ...]
    """
    Threshold of each channel (or the single threshold of the layer).
    """

    scales: Tuple[float, ...]
    """
    Reconstruction scale of each channel (or the single scale of the layer).
    """

    payload: bytes
    """
    The packed code words.
    """

    def __post_init__(self):
        object.__setattr__(self, 'dims', tuple(int(d) for d in self.dims))
        object.__setattr__(self, 'thresholds', tuple(float(t) for t in self.thresholds))
        object.__setattr__(self, 'scales', tuple(float(s) for s in self.scales))
        object.__setattr__(self, 'payload', bytes(self.payload))

        if len(self.dims) == 0 or any(d <= 0 for d in self.dims):
            raise InvalidInputError(f'Dimensions must be positive: {self.dims}')
        channels = self.granularity.channel_count(self.dims)
        if len(self.thresholds) != channels:
            raise LengthMismatchError('Wrong number of thresholds', expected = channels, actual = len(self.thresholds))
        if len(self.scales) != channels:
            raise LengthMismatchError('Wrong number of scales', expected = channels, actual = len(self.scales))
        for name, values in (('Thresholds', self.thresholds), ('Scales', self.scales)):
            if not all(np.isfinite(v) and v > 0 for v in values):
                raise InvalidInputError(f'{name} must be finite and strictly positive: {values}')
        if len(self.payload) != payload_length(self.numel):
            raise LengthMismatchError(
                'Payload does not match the dimensions',
                expected = payload_length(self.numel),
                actual = len(self.payload),
            )

    @classmethod
    def from_codes(
            cls,
            codes: ArrayLike,
            granularity: Granularity,
            thresholds: Sequence[float],
            scales: Sequence[float],
        ) -> Self:
        """
        Pack an array of code words, taking the dimensions from its shape.
        """
        codes = as_code_array(codes)
        return cls(
            dims = codes.shape,
            granularity = granularity,
            thresholds = thresholds,
            scales = scales,
            payload = pack_codes(codes),
        )

    @property
    def numel(self) -> int:
        """
        The number of elements.
        """
        return int(np.prod(self.dims))

    @property
    def codes(self) -> CodeArray:
        """
        The unpacked code words, shaped according to :attr:`dims`.
        """
        return unpack_codes(self.payload, self.numel).reshape(self.dims)

    def element_thresholds(self) -> RealArray:
        """
        The threshold which applies to each element.
        """
        return broadcast_channels(self.thresholds, self.dims, self.granularity)

    def element_scales(self) -> RealArray:
        """
        The reconstruction scale which applies to each element.
        """
        return broadcast_channels(self.scales, self.dims, self.granularity)

    def decode(self) -> RealArray:
        """
        The reconstructed tensor, i.e. the numeric values of the code words times their scales.
        """
        return numeric_value(self.codes).astype(float) * self.element_scales()

    def to_bytes(self) -> bytes:
        """
        Serialize to the ``.szt`` format.

        The layout is: the :data:`MAGIC` bytes, the format version, the granularity tag, and the rank (one byte
        each), the dimensions (little-endian 64-bit unsigned each), the threshold count (64-bit), the thresholds and
        then the scales (little-endian 64-bit IEEE doubles), and finally the payload. The granularity tag is 0 for
        per-layer thresholds, and ``1 + axis`` for per-channel thresholds.
        """
        if isinstance(self.granularity, PerChannel):
            assert self.granularity.axis < 255, 'Channel axis too large for the granularity tag'
            tag = 1 + self.granularity.axis
        else:
            tag = 0
        return b''.join(
            (
                MAGIC,
                struct.pack('<BBB', FORMAT_VERSION, tag, len(self.dims)),
                struct.pack(f'<{len(self.dims)}Q', *self.dims),
                struct.pack('<Q', len(self.thresholds)),
                np.asarray(self.thresholds, dtype = '<f8').tobytes(),
                np.asarray(self.scales, dtype = '<f8').tobytes(),
                self.payload,
            )
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> Self:
        """
        Deserialize from the ``.szt`` format (see :meth:`to_bytes`).

        Raises:
            InvalidInputError: If the header is malformed.
            LengthMismatchError: If the data is truncated or the payload has the wrong length.
        """
        data = bytes(data)
        if data[:4] != MAGIC:
            raise InvalidInputError(f'Not an SZT file (magic bytes: {data[:4]!r})')
        if len(data) < 7:
            raise LengthMismatchError('Truncated header', expected = 7, actual = len(data))
        version, tag, rank = struct.unpack_from('<BBB', data, 4)
        if version != FORMAT_VERSION:
            raise InvalidInputError(f'Unsupported format version: {version}')
        offset = 7
        header_length = offset + 8 * rank + 8
        if len(data) < header_length:
            raise LengthMismatchError('Truncated header', expected = header_length, actual = len(data))
        dims = struct.unpack_from(f'<{rank}Q', data, offset)
        offset += 8 * rank
        (count,) = struct.unpack_from('<Q', data, offset)
        offset += 8
        if len(data) < offset + 16 * count:
            raise LengthMismatchError('Truncated thresholds or scales', expected = offset + 16 * count, actual = len(data))
        thresholds = np.frombuffer(data, dtype = '<f8', count = count, offset = offset)
        scales = np.frombuffer(data, dtype = '<f8', count = count, offset = offset + 8 * count)
        granularity = PerLayer() if tag == 0 else PerChannel(axis = tag - 1)
        return cls(
            dims = dims,
            granularity = granularity,
            thresholds = thresholds.tolist(),
            scales = scales.tolist(),
            payload = data[offset + 16 * count:],
        )

    def digest(self) -> str:
        """
        The SHA-256 hex digest of the serialized tensor.
        """
        return hashlib.sha256(self.to_bytes()).hexdigest()


def write_szt(tensor: PackedTernaryTensor, filepath: PathLike) -> pathlib.Path:
    """
    Write a tensor to a ``.szt`` file.

    Returns:
        The path of the written file.
    """
    filepath = pathlib.Path(filepath)
    filepath.write_bytes(tensor.to_bytes())
    return filepath


def read_szt(filepath: PathLike) -> PackedTernaryTensor:
    """
    Read a tensor from a ``.szt`` file.
    """
    return PackedTernaryTensor.from_bytes(pathlib.Path(filepath).read_bytes())


def require_finite(values: ArrayLike, name: str = 'input') -> np.ndarray:
    """
    Convert to a float array and reject non-finite values.

    Raises:
        InvalidInputError: If any value is NaN or infinite.
    """
    array = np.asarray(values, dtype = float)
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f'Non-finite {name}: {values}')
    return array


def require_positive(value: float, name: str) -> float:
    """
    Reject non-positive or non-finite scalars.

    Raises:
        InvalidInputError: If the value is not finite and strictly positive.
    """
    value = float(value)
    if not (np.isfinite(value) and value > 0):
        raise InvalidInputError(f'{name} must be finite and strictly positive: {value}')
    return value
