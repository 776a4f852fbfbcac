"""
src/dsim/cli/__init__.py
Command line interface of the dsim estimator.
"""
from dsim.cli.commands import Command, Context, build_context, exit_code
from dsim.cli.main import build_parser, main

__all__ = ["Command", "Context", "build_context", "exit_code", "build_parser", "main"]
