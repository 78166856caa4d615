# src/nehari/cli/__init__.py
from nehari.cli.main import build_parser, main

__all__ = ["build_parser", "main"]
