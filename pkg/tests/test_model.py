import pytest
import torch

from promptssl.common import ConfigError
from promptssl.config import config_to_dict, resolve_config
from promptssl.losses import LOSS_PRESETS
from promptssl.model import build_model

NAMES = ["red_stripes", "blue_bars"]


@pytest.fixture
def configure(tiny_config):
    def apply(*overrides):
        return resolve_config(config_to_dict(tiny_config), overrides)

    return apply


@pytest.fixture
def batch(images):
    labels = torch.tensor([0, 1, 0, 1])
    return images, images.flip(-1), images.flip(-2), labels


def test_trainable_scope(tiny_config):
    """Test that only rho and P_v are trainable by default."""
    model = build_model(tiny_config)
    trainable = {id(p) for p in model.trainable_parameters()}

    assert trainable == {id(p) for p in model.rho.parameters()} | {
        id(p) for p in model.pv.parameters()}
    assert all(not p.requires_grad for p in model.vision.parameters())
    assert all(not p.requires_grad for p in model.text.parameters())


def test_trainable_frg(configure):
    """Test that a trainable FRG joins the optimized parameters."""
    model = build_model(configure("features.frg_trainable=true"))

    assert any(p is model.frg.weight for p in model.trainable_parameters())


def test_forward_losses(tiny_config, batch):
    """Test every term on one batch of triplets."""
    model = build_model(tiny_config)
    model.train()
    x, x1, x2, labels = (t if t.dtype == torch.long else
                         model.normalize(t) for t in batch)

    report, logits = model.forward_losses(
        x, x1, x2, model.class_tokens(NAMES), labels)

    assert logits.shape == (4, 2)
    assert not logits.requires_grad
    assert report.l_con > 0 and report.l_ce > 0 and report.l_sem >= 0
    assert report.l_total == pytest.approx(
        report.l_con + report.l_ce + report.l_sem, rel=1e-5)
    assert report.total.requires_grad
    assert report.batch_size == 4


def test_preset_disables_terms(tiny_config, batch):
    """Test that a cross-entropy-only preset skips the other terms."""
    model = build_model(tiny_config)
    model.train()
    x, x1, x2, labels = batch
    config = tiny_config.loss.model_copy(update=LOSS_PRESETS["ce"])

    report, _ = model.forward_losses(x, x1, x2, model.class_tokens(NAMES),
                                     labels, loss_config=config)

    assert report.l_con == 0.0 and report.l_sem == 0.0
    assert report.l_total == pytest.approx(report.l_ce)


def test_temperature(configure, toy_text):
    """Test the configured and the backbone default temperatures."""
    assert build_model(configure("loss.temperature=0.5")).temperature == 0.5
    assert build_model(configure()).temperature == toy_text.temperature


def test_joint_width_mismatch(configure):
    """Test that P_v must map into the text encoder's width."""
    with pytest.raises(ConfigError, match="d_joint"):
        build_model(configure("pv.d_joint=32"))


def test_content_layer_out_of_range(configure):
    with pytest.raises(ConfigError, match="content_layers"):
        build_model(configure("features.content_layers=[0, 5]"))


def test_initialization_is_seeded(configure):
    """Test that the init seed fixes the trainable parameters."""
    config = configure("rho.init=random")

    first = build_model(config, seed=1)
    second = build_model(config, seed=1)
    other = build_model(config, seed=2)

    for a, b in zip(first.rho.parameters(), second.rho.parameters()):
        assert torch.equal(a, b)
    assert any(not torch.equal(a, b) for a, b in
               zip(first.rho.parameters(), other.rho.parameters()))


def test_trainable_state_round_trip(configure, images, batch):
    """Test that the trainable state fully determines the logits."""
    config = configure("rho.init=random")
    source = build_model(config, seed=1)
    source.train()
    x, x1, x2, labels = batch
    source.forward_losses(x, x1, x2, source.class_tokens(NAMES), labels)
    target = build_model(config, seed=2)

    target.load_trainable_state(source.trainable_state())

    source.eval()
    target.eval()
    torch.testing.assert_close(
        target.logits(x, target.class_tokens(NAMES)),
        source.logits(x, source.class_tokens(NAMES)))


def test_identity_views_have_no_consistency_loss(configure, images):
    """Test that x1 = x2 = x gives an exactly zero consistency term."""
    model = build_model(configure("rho.init=random"))
    model.train()
    x = model.normalize(images)

    report, _ = model.forward_losses(
        x, x.clone(), x.clone(), model.class_tokens(NAMES),
        torch.tensor([0, 1, 0, 1]))

    assert report.l_sem == 0.0


def test_unchanged_compositional_view_alone_costs_nothing(configure,
                                                          images):
    """Test the x2 term on its own when the mixture left x untouched."""
    model = build_model(configure("rho.init=random",
                                  "loss.sem_use_x1=false"))
    model.train()
    x = model.normalize(images)

    report, _ = model.forward_losses(
        x, x.flip(-1), x.clone(), model.class_tokens(NAMES),
        torch.tensor([0, 1, 0, 1]))

    assert report.l_sem == 0.0


def test_one_meta_network_serves_every_view(configure, batch):
    """Test that all three branches go through the same rho."""
    from promptssl.prompts import MetaNetwork

    model = build_model(configure("rho.init=random"))
    tokens = model.class_tokens(NAMES)
    views = [model.normalize(t) for t in batch[:3]]
    before = [model.prompt_embeddings(model.prompt_seed(v), tokens)
              for v in views]

    rhos = [m for m in model.modules() if isinstance(m, MetaNetwork)]
    with torch.no_grad():
        for decoder in model.rho.decoders:
            decoder.bias.add_(0.5)
    after = [model.prompt_embeddings(model.prompt_seed(v), tokens)
             for v in views]

    assert rhos == [model.rho]
    for old, new in zip(before, after):
        assert not torch.allclose(old, new)


def test_eval_logits_mid_training_keep_train_mode(tiny_config, images):
    """Test that scoring between steps leaves P_v training."""
    model = build_model(tiny_config)
    model.train()

    model.logits(model.normalize(images), model.class_tokens(NAMES))

    assert model.training and model.pv.training
