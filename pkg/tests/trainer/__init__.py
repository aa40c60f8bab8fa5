"""
Tests for episodes, the optimization loop and checkpoints.
"""
