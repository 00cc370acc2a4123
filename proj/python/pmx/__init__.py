"""Compiler pipeline and simulated accelerator runtime for pmx programs."""

from ._pmx import PmxRuntimeError, check, cli, dump, merge_intervals, run

__all__ = ["PmxRuntimeError", "check", "cli", "dump", "merge_intervals", "run"]
