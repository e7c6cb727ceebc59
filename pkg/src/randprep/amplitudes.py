"""Amplitude vectors, threshold partitions, and the state-file format.

An :class:`AmplitudeVector` holds the real signed amplitudes of an n-qubit state in the
computational basis (qubit ``i`` is bit ``i`` of the basis index). A :class:`Partition`
splits the nonzero amplitudes by magnitude into the kept set A (``|alpha_i| >= t``) and
the tail B (``0 < |alpha_j| < t``); exact zeros belong to neither set.
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

import numpy as np
import numpy.typing as npt

from randprep.constants import CSV_SIGNIFICANT_DIGITS, MAX_STATE_QUBITS, NORM_TOL

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IndexArray = npt.NDArray[np.int64]

# Rescaling is skipped when the input norm is already 1 to within a few ulps, so that
# files written by write_state load back bit-for-bit.
_UNIT_NORM_ULPS = 8 * np.finfo(np.float64).eps


def _frozen(array: npt.ArrayLike, dtype: type) -> np.ndarray:  # type: ignore[type-arg]
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def qubits_for_length(length: int) -> int:
    """Return the smallest qubit count n >= 1 with 2^n >= length."""
    if length < 1:
        raise ValueError(f'length must be positive, got {length}')
    return max(1, (length - 1).bit_length())


@dataclass(frozen=True, eq=False)
class AmplitudeVector:
    """Normalized real amplitudes over the 2^n computational basis states.

    Parameters:
        n_qubits: Number of qubits n (>= 1).
        values: Amplitudes of length 2^n; stored as a read-only float64 array.
        label: Provenance text such as ``tfim``, ``synthetic`` or ``file:<path>``.

    Raises:
        ValueError: If the length is not 2^n, an entry is not finite, or the vector is
            not unit-norm within 1e-10.
    """

    n_qubits: int
    values: FloatArray
    label: str = ''

    def __post_init__(self) -> None:
        if not 1 <= self.n_qubits <= MAX_STATE_QUBITS:
            raise ValueError(
                f'n_qubits must be in 1..{MAX_STATE_QUBITS}, got {self.n_qubits}'
            )
        values = _frozen(self.values, np.float64)
        if values.ndim != 1 or values.shape[0] != 1 << self.n_qubits:
            raise ValueError(
                f'dimension mismatch: expected {1 << self.n_qubits} amplitudes, '
                f'got shape {values.shape}'
            )
        if not np.all(np.isfinite(values)):
            raise ValueError('invalid amplitude: non-finite entry')
        norm = float(np.linalg.norm(values))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f'amplitudes are not normalized (norm {norm!r})')
        object.__setattr__(self, 'values', values)

    @property
    def dim(self) -> int:
        """Hilbert-space dimension 2^n."""
        return int(self.values.shape[0])

    @property
    def nonzero_count(self) -> int:
        """Number of nonzero amplitudes."""
        return int(np.count_nonzero(self.values))

    def sorted_magnitudes(self) -> FloatArray:
        """Return the nonzero magnitudes in decreasing order."""
        mags = np.abs(self.values[self.values != 0.0])
        return np.sort(mags)[::-1]

    def kept_vector(self, indices: Sequence[int] | IndexArray) -> AmplitudeVector:
        """Return the renormalized restriction of this state to ``indices``.

        Parameters:
            indices: Basis indices to keep.

        Returns:
            Unit-norm vector equal to the kept amplitudes divided by their norm.

        Raises:
            ValueError: If the restriction is the zero vector.
        """
        idx = np.asarray(indices, dtype=np.int64)
        out = np.zeros(self.dim)
        out[idx] = self.values[idx]
        norm = float(np.linalg.norm(out))
        if norm == 0.0:
            raise ValueError('zero vector: kept indices carry no amplitude')
        return AmplitudeVector(self.n_qubits, out / norm, self.label)


@dataclass(frozen=True, eq=False)
class Partition:
    """Threshold split of a state into kept set A and tail B with tail statistics.

    Parameters:
        threshold: Threshold t > 0.
        set_a: Increasing indices with ``|alpha_i| >= t``.
        set_b: Increasing indices with ``0 < |alpha_j| < t``.
        eps: Tail l2 norm.
        ell1_tail: Tail l1 norm S.
        c_ratio: S / eps, or 0 when B is empty.
        k_kept: K = |A|.
        kept_weight: Sum of squared kept amplitudes (1 - eps^2 up to round-off).
        n_qubits: Qubit count of the partitioned state.
    """

    threshold: float
    set_a: IndexArray
    set_b: IndexArray
    eps: float
    ell1_tail: float
    c_ratio: float
    k_kept: int
    kept_weight: float
    n_qubits: int

    def __post_init__(self) -> None:
        object.__setattr__(self, 'set_a', _frozen(self.set_a, np.int64))
        object.__setattr__(self, 'set_b', _frozen(self.set_b, np.int64))

    @property
    def tail_size(self) -> int:
        """Number of tail indices |B|."""
        return int(self.set_b.shape[0])


def normalize(
    raw: Iterable[float] | npt.ArrayLike, n_qubits: int, label: str = 'synthetic'
) -> AmplitudeVector:
    """Pad raw amplitudes with zeros to 2^n entries and scale to unit l2 norm.

    Order is preserved; entry ``i`` of ``raw`` becomes the amplitude of basis state ``i``.

    Parameters:
        raw: Real amplitudes, at most 2^n_qubits of them.
        n_qubits: Target qubit count.
        label: Provenance label of the result.

    Returns:
        Normalized AmplitudeVector.

    Raises:
        ValueError: ``dimension overflow`` if raw is longer than 2^n, ``invalid amplitude``
            if an entry is not a finite real, ``zero vector`` if every entry is zero.
    """
    if np.iscomplexobj(raw):
        raise ValueError('invalid amplitude: complex amplitudes are not supported')
    try:
        arr = np.asarray(list(raw) if not isinstance(raw, np.ndarray) else raw, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise ValueError(f'invalid amplitude: {e}') from e
    if arr.ndim != 1:
        raise ValueError(f'invalid amplitude: expected a flat sequence, got shape {arr.shape}')
    if not 1 <= n_qubits <= MAX_STATE_QUBITS:
        raise ValueError(f'n_qubits must be in 1..{MAX_STATE_QUBITS}, got {n_qubits}')
    dim = 1 << n_qubits
    if arr.shape[0] > dim:
        raise ValueError(
            f'dimension overflow: {arr.shape[0]} amplitudes do not fit in {n_qubits} qubits '
            f'({dim} slots)'
        )
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ValueError(f'invalid amplitude at position {bad}: {arr[bad]!r}')
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ValueError('zero vector: no nonzero amplitude to normalize')
    values = np.zeros(dim)
    values[: arr.shape[0]] = arr if abs(norm - 1.0) <= _UNIT_NORM_ULPS else arr / norm
    return AmplitudeVector(n_qubits, values, label)


def partition(psi: AmplitudeVector, t: float) -> Partition:
    """Split ``psi`` at threshold ``t`` and compute the tail statistics.

    Ties ``|alpha_i| == t`` go to A.

    Parameters:
        psi: Normalized state.
        t: Threshold, t > 0.

    Returns:
        Partition with eps, S, c and K filled in.

    Raises:
        ValueError: If t is not a positive finite number, or ``empty kept set`` when t
            exceeds the largest magnitude.
    """
    if not math.isfinite(t) or t <= 0.0:
        raise ValueError(f'threshold must be a positive finite number, got {t!r}')
    mags = np.abs(psi.values)
    set_a = np.flatnonzero(mags >= t)
    if set_a.size == 0:
        raise ValueError(
            f'empty kept set: threshold {t!r} exceeds the largest magnitude {mags.max()!r}'
        )
    set_b = np.flatnonzero((mags > 0.0) & (mags < t))
    tail = mags[set_b]
    eps = float(np.linalg.norm(tail))
    ell1 = float(tail.sum())
    c_ratio = ell1 / eps if set_b.size else 0.0
    kept_weight = float(np.dot(psi.values[set_a], psi.values[set_a]))
    return Partition(
        threshold=float(t),
        set_a=set_a,
        set_b=set_b,
        eps=eps,
        ell1_tail=ell1,
        c_ratio=c_ratio,
        k_kept=int(set_a.size),
        kept_weight=kept_weight,
        n_qubits=psi.n_qubits,
    )


def cauchy_schwarz_check(p: Partition) -> float:
    """Return ``sqrt(|B|) * eps - S``, which is nonnegative by Cauchy-Schwarz.

    Raises:
        ValueError: ``empty tail`` if B is empty.
    """
    if p.tail_size == 0:
        raise ValueError('empty tail: the Cauchy-Schwarz check needs a nonempty B')
    return math.sqrt(p.tail_size) * p.eps - p.ell1_tail


def threshold_for_kept(psi: AmplitudeVector, k: int) -> float:
    """Return the threshold that keeps the k largest magnitudes.

    Magnitudes tied with the k-th largest are kept as well, so |A| may exceed k.

    Parameters:
        psi: State.
        k: Number of amplitudes to keep, 1 <= k <= nonzero_count.

    Returns:
        The k-th largest nonzero magnitude.
    """
    mags = psi.sorted_magnitudes()
    if not 1 <= k <= mags.shape[0]:
        raise ValueError(f'k must be in 1..{mags.shape[0]}, got {k}')
    return float(mags[k - 1])


def _format_value(value: float) -> str:
    return f'{value:.{CSV_SIGNIFICANT_DIGITS}g}'


def write_state(target: str | Path | TextIO, psi: AmplitudeVector) -> None:
    """Write ``psi`` in the JSON state-file format with 17 significant digits.

    Parameters:
        target: Output path, or an open text stream.
        psi: State to write.
    """
    lines = [
        '{',
        f'  "n_qubits": {psi.n_qubits},',
        f'  "label": {json.dumps(psi.label)},',
        '  "values": [',
    ]
    body = [f'    {_format_value(float(v))}' for v in psi.values]
    lines.append(',\n'.join(body))
    lines.extend(['  ]', '}'])
    text = '\n'.join(lines) + '\n'
    if isinstance(target, (str, Path)):
        Path(target).write_text(text, encoding='utf-8')
    else:
        target.write(text)


def read_state_file(path: str | Path) -> AmplitudeVector:
    """Read a JSON state file.

    Parameters:
        path: File written by :func:`write_state` or by hand in the same format.

    Returns:
        Normalized AmplitudeVector carrying the stored label.

    Raises:
        OSError: If the file cannot be read.
        ValueError: On JSON syntax errors (with line number) or missing fields.
    """
    text = Path(path).read_text(encoding='utf-8')
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f'{path}: line {e.lineno}: invalid state file: {e.msg}') from e
    return state_from_dict(data, source=str(path))


def state_from_dict(data: object, *, source: str = '<state>') -> AmplitudeVector:
    """Build a state from a parsed state-file object."""
    if not isinstance(data, dict) or 'values' not in data or 'n_qubits' not in data:
        raise ValueError(f'{source}: state file needs "n_qubits" and "values" fields')
    n_qubits = data['n_qubits']
    if not isinstance(n_qubits, int) or isinstance(n_qubits, bool):
        raise ValueError(f'{source}: n_qubits must be an integer, got {n_qubits!r}')
    values = data['values']
    if not isinstance(values, list):
        raise ValueError(f'{source}: values must be an array')
    label = data.get('label', f'file:{source}')
    logger.debug('Read %d amplitudes from %s', len(values), source)
    return normalize(values, n_qubits, str(label))
