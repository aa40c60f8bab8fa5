"""
Tests for the meta-network and prompt assembly.
"""
