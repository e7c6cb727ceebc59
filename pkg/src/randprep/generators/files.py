"""Ingestion of externally computed coefficient vectors.

Accepts the JSON state-file format or a plain text list of decimals (one or more per line,
separated by whitespace or commas; ``#`` starts a comment).
"""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path

from randprep.amplitudes import AmplitudeVector, normalize, qubits_for_length

logger = logging.getLogger(__name__)

_SEPARATORS = re.compile(r'[\s,]+')


def read_coefficients(path: str | Path) -> tuple[list[float], int | None]:
    """Read raw coefficients and, for state files, the stored qubit count.

    Raises:
        OSError: If the file cannot be read.
        ValueError: On malformed content, with the offending line number.
    """
    text = Path(path).read_text(encoding='utf-8')
    if text.lstrip().startswith('{'):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValueError(f'{path}: line {e.lineno}: invalid state file: {e.msg}') from e
        values = data.get('values') if isinstance(data, dict) else None
        if not isinstance(values, list):
            raise ValueError(f'{path}: state file needs a "values" array')
        try:
            floats = [float(v) for v in values]
        except (TypeError, ValueError) as e:
            raise ValueError(f'{path}: invalid amplitude in values: {e}') from e
        n_stored = data.get('n_qubits')
        return floats, n_stored if isinstance(n_stored, int) else None

    floats = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split('#', 1)[0].strip()
        if not body:
            continue
        for token in _SEPARATORS.split(body):
            if not token:
                continue
            try:
                floats.append(float(token))
            except ValueError as e:
                raise ValueError(f'{path}: line {lineno}: invalid amplitude {token!r}') from e
    if not floats:
        raise ValueError(f'{path}: no amplitudes found')
    return floats, None


def load_state(path: str | Path, n_qubits: int | None = None) -> AmplitudeVector:
    """Load, zero-pad and normalize a coefficient vector.

    Parameters:
        path: State file or plain list of decimals.
        n_qubits: Target qubit count; defaults to the stored count for state files and to
            the smallest count that fits for plain lists.

    Returns:
        AmplitudeVector labeled ``file:<path>``.
    """
    floats, n_stored = read_coefficients(path)
    n = n_qubits or n_stored or qubits_for_length(len(floats))
    logger.info('Loaded %d coefficients from %s into %d qubits', len(floats), path, n)
    return normalize(floats, n, f'file:{path}')
