"""
Tests for inference, metrics and result files.
"""
