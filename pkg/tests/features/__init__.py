"""
Tests for content/style features and the FRG layer.
"""
