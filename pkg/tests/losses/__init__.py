"""
Tests for the training objectives.
"""
