"""CLI module for AlgeMech."""
