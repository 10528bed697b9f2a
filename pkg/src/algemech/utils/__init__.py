"""Utility functions for AlgeMech."""

from algemech.utils.io import format_float, parse_at, write_csv, write_jsonl
from algemech.utils.logging import configure_logging, get_logger

__all__ = [
    "configure_logging",
    "get_logger",
    "format_float",
    "parse_at",
    "write_csv",
    "write_jsonl",
]
