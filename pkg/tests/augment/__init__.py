"""
Tests for the augmentation views.
"""
