"""Tests for AlgeMech."""
