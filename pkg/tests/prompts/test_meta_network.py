import logging

import pytest
import torch

from promptssl.prompts import (
    MetaNetwork,
    PromptError,
    PromptInit,
    default_hidden_width,
    generate_context,
)


def test_context_shape():
    """Test that rho emits M tokens of the text embedding width."""
    rho = MetaNetwork(32, 16, context_length=4, init=PromptInit.RANDOM)

    assert generate_context(rho, torch.randn(3, 32)).shape == (3, 4, 16)
    assert generate_context(rho, torch.randn(32)).shape == (4, 16)


def test_context_length_must_be_positive():
    """Test that M < 1 raises PromptError."""
    with pytest.raises(PromptError):
        MetaNetwork(32, 16, context_length=0)


def test_hidden_width_default():
    """Test the bottleneck width rule."""
    assert default_hidden_width(512) == 32
    assert default_hidden_width(64) == 16


def test_manual_init_starts_at_template(toy_text):
    """Test that manual init emits the template tokens for any seed."""
    template = toy_text.embed_words("a photo of a")
    rho = MetaNetwork(32, 64, context_length=4, template_tokens=template)

    context = rho(torch.randn(5, 32))

    torch.testing.assert_close(context,
                               template.unsqueeze(0).expand(5, -1, -1))


def test_manual_init_length_mismatch_warns(toy_text, caplog):
    """Test the warning when M differs from the template length."""
    template = toy_text.embed_words("a photo of a")

    with caplog.at_level(logging.WARNING):
        rho = MetaNetwork(32, 64, context_length=6,
                          template_tokens=template)

    assert "context length is 6" in caplog.text
    context = rho(torch.zeros(1, 32))
    torch.testing.assert_close(context[0, :4], template)


def test_manual_init_needs_template():
    """Test that manual init without template tokens fails."""
    with pytest.raises(PromptError):
        MetaNetwork(32, 16, context_length=2, init=PromptInit.MANUAL)


def test_no_init_starts_at_zero():
    """Test that 'none' init emits zero tokens."""
    rho = MetaNetwork(32, 16, context_length=3, init=PromptInit.NONE)

    assert torch.equal(rho(torch.randn(2, 32)), torch.zeros(2, 3, 16))


def test_random_init_is_small_gaussian():
    """Test that random init gives non-zero small decoder weights."""
    torch.manual_seed(0)
    rho = MetaNetwork(32, 64, context_length=16, init=PromptInit.RANDOM)
    weights = torch.cat([d.weight.flatten() for d in rho.decoders])

    assert weights.abs().sum() > 0
    assert weights.std().item() == pytest.approx(0.02, rel=0.1)


def test_seed_width_mismatch():
    """Test that a wrong seed width raises PromptError."""
    rho = MetaNetwork(32, 16, context_length=2, init=PromptInit.RANDOM)

    with pytest.raises(PromptError):
        rho(torch.randn(2, 31))


def test_identity_decoders_copy_the_encoding():
    """Test that identity heads all emit the shared encoding."""
    rho = MetaNetwork(32, 16, context_length=3, identity_decoders=True)
    seed = torch.randn(2, 32)

    context = rho(seed)
    base = rho.encoder(seed)

    for m in range(3):
        torch.testing.assert_close(context[:, m], base)


def test_gradients_reach_every_head():
    """Test that every decoder head receives a gradient."""
    rho = MetaNetwork(32, 16, context_length=3, init=PromptInit.RANDOM)
    rho(torch.randn(2, 32)).pow(2).sum().backward()

    for decoder in rho.decoders:
        assert decoder.weight.grad.abs().sum() > 0


@pytest.mark.parametrize("length", range(1, 17))
def test_context_length_sweep(length):
    """Test that M heads emit exactly M tokens."""
    rho = MetaNetwork(32, 16, context_length=length,
                      init=PromptInit.RANDOM)

    assert generate_context(rho, torch.randn(2, 32)).shape == (2, length,
                                                               16)
