import pytest
import torch

from promptssl.trainer import (
    CheckpointError,
    fit,
    load_checkpoint,
    load_model_from_checkpoint,
    save_checkpoint,
)


def test_checkpoint_rebuilds_the_model(tiny_config, setup, tmp_path,
                                       images):
    """Test that a checkpoint reproduces the trained model's logits."""
    names = ["red_stripes", "blue_bars"]
    model, dataset = setup(tiny_config)
    result = fit(model, dataset, tiny_config, 0, names,
                 checkpoint_dir=tmp_path)
    model.eval()

    restored, checkpoint = load_model_from_checkpoint(tmp_path / "last.pt")

    assert checkpoint.epoch == 1
    assert checkpoint.class_names == names
    assert result.checkpoint_paths == [str(tmp_path / "last.pt")]
    x = model.normalize(images)
    torch.testing.assert_close(
        restored.logits(x, restored.class_tokens(names)),
        model.logits(x, model.class_tokens(names)))


def test_truncated_file(tmp_path):
    """Test that an empty file raises CheckpointError."""
    path = tmp_path / "empty.pt"
    path.write_bytes(b"")

    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "absent.pt")


def test_wrong_format(tmp_path):
    """Test that a torch file without the format marker is rejected."""
    path = tmp_path / "other.pt"
    torch.save({"weights": torch.zeros(2)}, path)

    with pytest.raises(CheckpointError, match="Not a promptssl"):
        load_checkpoint(path)


def test_wrong_version(tiny_config, setup, tmp_path):
    """Test that an unknown checkpoint version is rejected."""
    model, dataset = setup(tiny_config)
    checkpoint = fit(model, dataset, tiny_config, 0,
                     ["red_stripes", "blue_bars"]).checkpoint
    payload = checkpoint.to_payload()
    payload["version"] = 99
    torch.save(payload, tmp_path / "future.pt")

    with pytest.raises(CheckpointError, match="version"):
        load_checkpoint(tmp_path / "future.pt")

    saved = save_checkpoint(checkpoint, tmp_path / "ok.pt")
    assert load_checkpoint(saved).seed == 0
