"""
Tests for the frozen dual-encoder backbone.
"""
