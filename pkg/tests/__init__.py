"""Tests for rtrimimo."""
