"""
Tests for dataset manifests, images and protocol splits.
"""
