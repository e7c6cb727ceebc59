"""Delimited record formatting for CSV output."""

from __future__ import annotations

import math
from typing import TextIO

from randprep.constants import CSV_SIGNIFICANT_DIGITS


def format_float(value: float) -> str:
    """Format a float with 17 significant digits; NaN becomes an empty field."""
    if math.isnan(value):
        return ''
    return f'{value:.{CSV_SIGNIFICANT_DIGITS}g}'


class Record:
    """Record buffer: append fields joined by a delimiter, then write one line."""

    def __init__(self, delimiter: str = ',') -> None:
        """Allocate an empty record.

        Parameters:
            delimiter: Field separator.
        """
        self._parts: list[str] = []
        self._delimiter = delimiter

    def init(self) -> None:
        """Clear the record."""
        self._parts = []

    def append(self, string: str) -> None:
        """Append a text field.

        Parameters:
            string: Field text; must not contain the delimiter or a newline.
        """
        if self._delimiter in string or '\n' in string:
            raise ValueError(f'field {string!r} contains a delimiter or newline')
        self._parts.append(string)

    def append_float(self, value: float) -> None:
        self._parts.append(format_float(value))

    def append_int(self, value: int) -> None:
        self._parts.append(str(value))

    def write(self, stream: TextIO) -> None:
        """Write the current record to stream and clear it.

        Parameters:
            stream: Output text stream.
        """
        if self._parts:
            stream.write(self.get_line() + '\n')
        self.init()

    def get_line(self) -> str:
        """Return the current record as a string (no write or re-init)."""
        return self._delimiter.join(self._parts)
