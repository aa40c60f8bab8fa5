"""
promptssl - self-supervised prompt learning on frozen vision-language
dual encoders.
"""

import importlib.metadata

try:
    __version__ = importlib.metadata.version("promptssl")
except importlib.metadata.PackageNotFoundError:
    __version__ = "0.0.0"
