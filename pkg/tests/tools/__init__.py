"""
Tests for the run-inspection tools.
"""
