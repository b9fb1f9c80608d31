"""Command-line interface of the itlp tool."""

from .main import main, cli

__all__ = ["main", "cli"]