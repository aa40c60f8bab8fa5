"""
Test suite for promptssl.
"""
