"""Command-line front end."""

from .main import build_parser, compute, main

__all__ = ["build_parser", "compute", "main"]
