"""
Main entry point for running promptssl as a module.

This allows running the command line with:
    python -m promptssl train --config configs/toy_b2n.yaml
"""
from promptssl.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
