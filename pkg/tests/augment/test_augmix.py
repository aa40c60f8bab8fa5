import numpy as np
import pytest
import torch

from promptssl.augment import (
    KNOWN_OPS,
    AugMixRecipe,
    apply_op,
    augmix_view,
    make_triplet,
    sample_recipe,
)
from promptssl.common import ConfigError
from promptssl.config import AugmentConfig


def test_recipe_draws_are_valid():
    """Test simplex weights, skip range, depths and palette."""
    config = AugmentConfig()
    for seed in range(20):
        recipe = sample_recipe(config, np.random.default_rng(seed))

        assert len(recipe.weights) == config.augmix_width
        assert sum(recipe.weights) == pytest.approx(1.0)
        assert all(w >= 0 for w in recipe.weights)
        assert 0.0 <= recipe.skip <= 1.0
        for chain in recipe.chains:
            assert 1 <= len(chain) <= 3
            assert all(name in config.augmix_ops for name, _ in chain)


def test_recipe_is_a_function_of_the_generator():
    """Test that equal generator seeds give equal recipes."""
    config = AugmentConfig()

    assert sample_recipe(config, np.random.default_rng(3)) == sample_recipe(
        config, np.random.default_rng(3))


def test_empty_palette_rejected():
    """Test that an empty op palette is a configuration error."""
    with pytest.raises(ConfigError):
        sample_recipe(AugmentConfig(augmix_ops=[]),
                      np.random.default_rng(0))


def test_unknown_op_rejected():
    """Test that unknown op names are a configuration error."""
    with pytest.raises(ConfigError):
        sample_recipe(AugmentConfig(augmix_ops=["Identity", "Warp"]),
                      np.random.default_rng(0))


def test_recipe_validation():
    """Test that weights off the simplex are rejected."""
    with pytest.raises(ConfigError):
        AugMixRecipe(width=2, depth=(1, 1), weights=(0.7, 0.7), skip=0.5,
                     palette=("Identity",), severity=3,
                     chains=((("Identity", 0.0),), (("Identity", 0.0),)))


def test_zero_skip_returns_the_image(images):
    """Test that m = 0 leaves the image unchanged."""
    recipe = AugMixRecipe(width=1, depth=(1, 1), weights=(1.0,), skip=0.0,
                          palette=("Rotate",), severity=3,
                          chains=((("Rotate", 25.0),),))

    assert torch.equal(augmix_view(images[0], recipe), images[0])


def test_identity_chains_return_the_image(images):
    """Test that identity-only chains give x2 == x for any m."""
    recipe = AugMixRecipe(width=3, depth=(1, 2), weights=(0.2, 0.3, 0.5),
                          skip=0.8, palette=("Identity",), severity=3,
                          chains=((("Identity", 0.0),),
                                  (("Identity", 0.0),) * 2,
                                  (("Identity", 0.0),)))

    torch.testing.assert_close(augmix_view(images[0], recipe), images[0])


@pytest.mark.parametrize("name", KNOWN_OPS)
def test_every_op_keeps_shape_and_range(images, name):
    """Test each palette op on a float image."""
    out = apply_op(images[0], name, 0.2 if name != "Posterize" else 2.0)

    assert out.shape == images[0].shape
    assert out.dtype == images[0].dtype
    assert out.min() >= 0 and out.max() <= 1


def test_triplets_are_reproducible(images):
    """Test the (x, x1, x2) contract for a batch of four images."""
    config = AugmentConfig()

    triplets = [make_triplet(image, seed, config)
                for seed, image in enumerate(images)]
    again = make_triplet(images[2], 2, config)

    assert len(triplets) == 4
    for triplet, image in zip(triplets, images):
        assert torch.equal(triplet.x, image)
        assert triplet.x1.shape == triplet.x2.shape == image.shape
    assert torch.equal(again.x1, triplets[2].x1)
    assert torch.equal(again.x2, triplets[2].x2)


def test_triplet_normalization(images):
    """Test that the normalizer is applied to all three images."""
    triplet = make_triplet(images[0], 0, AugmentConfig(),
                           normalize=lambda t: t * 2 - 1)

    torch.testing.assert_close(triplet.x, images[0] * 2 - 1)
    assert triplet.x1.min() >= -1 and triplet.x2.max() <= 1


def test_simplex_over_many_draws():
    """Test weights and skip over 10,000 recipe draws."""
    config = AugmentConfig()
    rng = np.random.default_rng(0)

    for _ in range(10_000):
        recipe = sample_recipe(config, rng)

        assert min(recipe.weights) >= 0
        assert abs(sum(recipe.weights) - 1.0) <= 1e-6
        assert 0.0 <= recipe.skip <= 1.0


def test_output_range_over_many_recipes():
    """Test that 1000 mixtures of a small image stay in [0, 1]."""
    config = AugmentConfig(min_image_size=8)
    image = torch.rand(3, 8, 8, generator=torch.Generator().manual_seed(0))
    rng = np.random.default_rng(1)

    for _ in range(1000):
        out = augmix_view(image, sample_recipe(config, rng), config)

        assert out.shape == image.shape
        assert out.min() >= 0 and out.max() <= 1
