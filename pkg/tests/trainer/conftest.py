import pytest

from promptssl.config import config_to_dict, resolve_config
from promptssl.dataio import load_manifest
from promptssl.model import build_model
from promptssl.trainer import TripletDataset, build_episode


@pytest.fixture
def configure(tiny_config):
    """Apply ``key.path=value`` overrides on top of the tiny config."""

    def apply(*overrides):
        return resolve_config(config_to_dict(tiny_config), overrides)

    return apply


@pytest.fixture
def setup():
    """Build a fresh model and the toy2 triplet dataset for a seed."""

    def build(config, seed=0):
        model = build_model(config, seed=seed)
        manifest = load_manifest(config.data.source)
        episode = build_episode(manifest, list(range(manifest.num_classes)),
                                config.train.shots, seed)
        dataset = TripletDataset(manifest, episode, model.image_size,
                                 config.augment, model.normalization, seed)
        return model, dataset

    return build
