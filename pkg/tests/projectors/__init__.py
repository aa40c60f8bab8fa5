"""
Tests for the vision projector.
"""
