import logging

import pytest
import torch

from promptssl.config import AugmentConfig
from promptssl.dataio import DatasetError, load_manifest, parse_manifest
from promptssl.trainer import TripletDataset, build_episode


@pytest.fixture
def toy2():
    return load_manifest("toy2")


def test_shots_per_class(toy2):
    """Test that each seen class contributes exactly k samples."""
    episode = build_episode(toy2, [0, 1], shots=3, seed=0)

    assert len(episode) == 6
    assert episode.labels == (0, 0, 0, 1, 1, 1)
    train = set(toy2.indices("train"))
    assert set(episode.sample_ids) <= train


def test_labels_follow_the_seen_order(toy2):
    """Test that labels are positions in the seen class list."""
    episode = build_episode(toy2, [1], shots=2, seed=0)

    assert episode.labels == (0, 0)
    assert all(toy2.samples[i].class_id == 1 for i in episode.sample_ids)


def test_episode_is_seeded(toy2):
    """Test that equal seeds draw equal episodes."""
    first = build_episode(toy2, [0, 1], shots=4, seed=7)

    assert first == build_episode(toy2, [0, 1], shots=4, seed=7)
    draws = {build_episode(toy2, [0, 1], 4, s).sample_ids
             for s in range(5)}
    assert len(draws) > 1


def test_all_samples(toy2):
    """Test that shots=None takes the whole train split."""
    episode = build_episode(toy2, [0, 1], shots=None, seed=0)

    assert len(episode) == 96


def test_too_few_samples_warns(toy2, caplog):
    """Test that a short class uses every sample with a warning."""
    with caplog.at_level(logging.WARNING):
        episode = build_episode(toy2, [0], shots=100, seed=0)

    assert len(episode) == 48
    assert "fewer than 100 shots" in caplog.text


def test_empty_class():
    """Test that a seen class without samples raises DatasetError."""
    manifest = parse_manifest({
        "name": "gap", "classes": ["a", "b"],
        "samples": [{"path": "toy://gap/base/0/0", "class": 0}]})

    with pytest.raises(DatasetError, match="'b'"):
        build_episode(manifest, [0, 1], shots=1, seed=0)


def test_triplet_items(toy2):
    """Test the served items and their epoch-dependent views."""
    episode = build_episode(toy2, [0, 1], shots=2, seed=0)
    dataset = TripletDataset(toy2, episode, 32, AugmentConfig(),
                             ((0.5,) * 3, (0.5,) * 3), seed=0)

    x, x1, x2, label, sample_id = dataset[0]
    again = dataset[0]
    dataset.set_epoch(1)
    later = dataset[0]

    assert len(dataset) == 4
    assert x.shape == x1.shape == x2.shape == (3, 32, 32)
    assert int(label) == 0
    assert sample_id == episode.sample_ids[0]
    assert torch.equal(again[1], x1)
    assert torch.equal(later[0], x)
    assert not torch.equal(later[1], x1)
