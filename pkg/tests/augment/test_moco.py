import pytest
import torch

from promptssl.augment import AugmentError, moco_view
from promptssl.config import AugmentConfig


def test_view_is_reproducible(images):
    """Test that equal seeds give identical views."""
    config = AugmentConfig()

    first = moco_view(images[0], 11, config)
    second = moco_view(images[0], 11, config)

    assert torch.equal(first, second)
    assert first.shape == images[0].shape
    assert first.min() >= 0 and first.max() <= 1


def test_seeds_give_different_views(images):
    """Test that different seeds give different views."""
    config = AugmentConfig()

    views = [moco_view(images[0], seed, config) for seed in range(4)]

    assert any(not torch.equal(views[0], v) for v in views[1:])


def test_view_does_not_touch_global_rng(images):
    """Test that drawing a view leaves the global RNG alone."""
    torch.manual_seed(5)
    expected = torch.rand(2)
    torch.manual_seed(5)
    moco_view(images[0], 3, AugmentConfig())

    torch.testing.assert_close(torch.rand(2), expected)


def test_all_off_is_identity(images):
    """Test that disabling every transform returns the input."""
    config = AugmentConfig(crop_scale=(1.0, 1.0), flip_p=0.0, jitter_p=0.0,
                           grayscale_p=0.0, blur_p=0.0, solarize_p=0.0)

    torch.testing.assert_close(moco_view(images[0], 0, config), images[0])


def test_small_image_rejected():
    """Test that images below the crop minimum raise AugmentError."""
    with pytest.raises(AugmentError):
        moco_view(torch.rand(3, 4, 4), 0, AugmentConfig(min_image_size=8))


def test_wrong_channels_rejected():
    """Test that non-RGB input raises AugmentError."""
    with pytest.raises(AugmentError):
        moco_view(torch.rand(1, 32, 32), 0, AugmentConfig())
