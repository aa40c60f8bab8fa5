"""
Shared fixtures: toy encoders, small configs and image batches.
"""
import pytest
import torch

from promptssl.backbone import ToyTextBackbone, ToyVisionBackbone
from promptssl.config import resolve_config


@pytest.fixture
def toy_vision():
    return ToyVisionBackbone(layer_dims=(8, 16, 32), image_size=32,
                             output_dim=64, seed=0)


@pytest.fixture
def toy_text():
    return ToyTextBackbone(embed_dim=64, output_dim=64,
                           context_capacity=77, seed=0)


@pytest.fixture
def images():
    generator = torch.Generator().manual_seed(0)
    return torch.rand(4, 3, 32, 32, generator=generator)


@pytest.fixture
def tiny_config():
    """A config small enough for several CPU training runs per test."""
    return resolve_config({
        "features": {"d_seed": 32},
        "train": {"epochs": 1, "batch_size": 2, "shots": 2, "runs": 1,
                  "lr": 0.01},
        "data": {"source": "toy2"},
    })


@pytest.fixture
def runs_root(tmp_path, monkeypatch):
    root = tmp_path / "runs"
    monkeypatch.setenv("PROMPTSSL_RUNS_ROOT", str(root))
    monkeypatch.setenv("PROMPTSSL_DATA_ROOT", str(tmp_path / "data"))
    return root


@pytest.fixture
def anyio_backend():
    return "asyncio"
