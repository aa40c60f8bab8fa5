"""
Small helpers shared across promptssl: seeding, checksums and markdown
formatting.
"""
