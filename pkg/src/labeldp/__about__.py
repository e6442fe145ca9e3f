"""The `__about__` module exposes the version of the `labeldp` package."""

__version__ = "0.1.0"
