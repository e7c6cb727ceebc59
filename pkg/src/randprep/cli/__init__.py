"""Command-line entry points for randprep."""

__all__: list[str] = []
