import pytest
import torch

from promptssl.backbone import (
    BackboneError,
    ToyTextBackbone,
    ToyVisionBackbone,
    build_backbones,
    embed_class_name,
    encode_image,
)
from promptssl.config import BackboneConfig
from promptssl.utils.seeding import module_checksum


def test_encode_image_returns_every_layer(toy_vision, images):
    """Test that the stack has L maps shaped (B, C_l, N_l)."""
    stack = toy_vision.encode_image(images)

    assert stack.layer_count == 3
    assert [m.shape for m in stack.per_layer] == [
        (4, 8, 1024), (4, 16, 256), (4, 32, 64)]
    assert stack.final_pooled.shape == (4, 64)
    torch.testing.assert_close(stack.pooled[1],
                               stack.per_layer[1].mean(dim=2))


def test_encode_single_image(toy_vision, images):
    """Test that a single (3, S, S) image is batched."""
    stack = encode_image(toy_vision, images[0])

    assert stack.batch_size == 1


def test_wrong_resolution_rejected(toy_vision):
    """Test that a mismatched image size raises BackboneError."""
    with pytest.raises(BackboneError) as excinfo:
        toy_vision.encode_image(torch.rand(2, 3, 16, 16))

    assert "(B, 3, 32, 32)" in str(excinfo.value)


def test_encoders_are_frozen(toy_vision, toy_text):
    """Test that no encoder parameter trains and train() is ignored."""
    for encoder in (toy_vision, toy_text):
        assert encoder.frozen
        encoder.train()
        assert not encoder.training


def test_encoding_does_not_change_weights(toy_vision, images):
    """Test that encoding leaves the weights untouched."""
    before = module_checksum(toy_vision)
    toy_vision.encode_image(images)

    assert module_checksum(toy_vision) == before


def test_same_seed_same_weights():
    """Test that toy encoders are a pure function of their seed."""
    assert module_checksum(ToyVisionBackbone(seed=3)) == module_checksum(
        ToyVisionBackbone(seed=3))
    assert module_checksum(ToyTextBackbone(seed=3)) == module_checksum(
        ToyTextBackbone(seed=3))
    assert module_checksum(ToyVisionBackbone(seed=3)) != module_checksum(
        ToyVisionBackbone(seed=4))


def test_encode_text_shapes(toy_text):
    """Test single and batched text encoding."""
    tokens = toy_text.embed_words("a photo of a cat")

    assert tokens.shape == (5, 64)
    assert toy_text.encode_text(tokens).shape == (64,)
    assert toy_text.encode_text(tokens.unsqueeze(0)).shape == (1, 64)


def test_encode_text_refuses_to_truncate(toy_text):
    """Test that an over-capacity prompt raises BackboneError."""
    tokens = torch.zeros(78, 64)

    with pytest.raises(BackboneError) as excinfo:
        toy_text.encode_text(tokens)

    assert "refusing to truncate" in str(excinfo.value)


def test_encode_text_width_mismatch(toy_text):
    """Test that token embeddings of the wrong width are rejected."""
    with pytest.raises(BackboneError):
        toy_text.encode_text(torch.zeros(4, 32))


def test_text_gradient_reaches_tokens(toy_text):
    """Test that the frozen text encoder still passes gradients."""
    tokens = torch.randn(6, 64, requires_grad=True)
    toy_text.encode_text(tokens).sum().backward()

    assert tokens.grad is not None
    assert tokens.grad.abs().sum() > 0


def test_class_name_embedding(toy_text):
    """Test that underscores split words and empty names fail."""
    tokens = embed_class_name(toy_text, "red_stripes")

    torch.testing.assert_close(tokens,
                               toy_text.embed_words("red stripes"))
    with pytest.raises(BackboneError):
        embed_class_name(toy_text, " _ ")


def test_template_words_have_reserved_rows(toy_text):
    """Test that the template words map to fixed vocabulary rows."""
    assert toy_text.token_ids("a photo of a") == [1, 2, 3, 1]


def test_default_temperature(toy_text):
    """Test the toy softmax temperature."""
    assert toy_text.temperature == pytest.approx(0.07)


def test_build_toy_backbones():
    """Test backbone construction from config."""
    vision, text = build_backbones(BackboneConfig(
        toy_layer_dims=[4, 8], toy_embed_dim=16))

    assert vision.per_layer_dims == [4, 8]
    assert vision.output_dim == text.output_dim == 16
    assert text.embed_dim == 16
