"""
Seed fan-out and reproducibility helpers.

All randomness in a run derives from one integer seed. Child seeds are
drawn with ``numpy.random.SeedSequence`` so that two different keys never
share a stream.
"""
import contextlib
import hashlib
import zlib
from typing import Iterator, Union

import numpy as np
import torch
from torch import nn

SeedKey = Union[int, str]


def _key_to_int(key: SeedKey) -> int:
    if isinstance(key, int):
        return key & 0xFFFFFFFF
    return zlib.crc32(key.encode("utf-8"))


def derive_seed(seed: int, *keys: SeedKey) -> int:
    """
    Derive a 63-bit child seed from a parent seed and a key path.

    Args:
        seed: Parent seed
        keys: Path components (ints or strings)

    Returns:
        Non-negative child seed
    """
    entropy = [seed & 0xFFFFFFFFFFFFFFFF] + [_key_to_int(k) for k in keys]
    state = np.random.SeedSequence(entropy).generate_state(2, np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1])) & (2**63 - 1)


@contextlib.contextmanager
def torch_seeded(seed: int) -> Iterator[None]:
    """Run a block with the global torch RNG seeded, restoring it after."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        yield


def module_checksum(module: nn.Module) -> str:
    """SHA-256 over every parameter and buffer of a module."""
    digest = hashlib.sha256()
    for name, tensor in sorted(module.state_dict().items()):
        digest.update(name.encode("utf-8"))
        digest.update(
            tensor.detach().cpu().contiguous().numpy().tobytes())
    return digest.hexdigest()


def tensor_checksum(tensor: torch.Tensor) -> str:
    """SHA-256 of a tensor's raw bytes."""
    data = tensor.detach().cpu().contiguous().numpy().tobytes()
    return hashlib.sha256(data).hexdigest()


def set_deterministic(enabled: bool) -> None:
    """Toggle torch's deterministic algorithm mode."""
    torch.use_deterministic_algorithms(enabled, warn_only=True)
