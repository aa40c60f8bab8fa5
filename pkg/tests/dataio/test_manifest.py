import json

import pytest
import torch
from PIL import Image

from promptssl.dataio import (
    DatasetError,
    builtin_names,
    import_folder,
    load_image,
    load_manifest,
    manifest_fingerprint,
    parse_manifest,
    save_manifest,
)


def _write_images(directory, count, colour):
    directory.mkdir(parents=True)
    for index in range(count):
        Image.new("RGB", (20, 12), colour).save(directory / f"{index}.png")


def test_builtins():
    """Test the synthetic datasets and their splits."""
    assert builtin_names() == ["toy2", "toy4", "toy4_shifted"]

    manifest = load_manifest("toy4")

    assert manifest.num_classes == 4
    assert len(manifest.samples) == 256
    assert len(manifest.indices("train")) == 192
    assert len(manifest.indices("test")) == 64
    assert not set(manifest.indices("train")) & set(
        manifest.indices("test"))


def test_shifted_domain_keeps_classes():
    """Test that the shifted domain shares class names with toy4."""
    base = load_manifest("toy4")
    shifted = load_manifest("toy4_shifted")

    assert shifted.classes == base.classes
    assert {s.domain for s in shifted.samples} == {"shifted"}


def test_synthetic_images_are_stable():
    """Test that synthetic images are a pure function of the path."""
    manifest = load_manifest("toy2")
    path = manifest.samples[0].path

    first = load_image(path, 32)

    assert first.shape == (3, 32, 32)
    assert torch.equal(first, load_image(path, 32))
    assert first.min() >= 0 and first.max() <= 1


def test_unknown_source(runs_root):
    """Test that unknown datasets name the builtins."""
    with pytest.raises(DatasetError, match="toy2"):
        load_manifest("no-such-dataset")


def test_parse_reports_paths():
    """Test that schema violations are reported by field path."""
    data = {"name": "bad", "classes": ["a"],
            "samples": [{"path": "x.png", "class": 3}]}

    with pytest.raises(DatasetError, match="outside"):
        parse_manifest(data)


def test_duplicate_classes_rejected():
    """Test that duplicate class names are rejected."""
    with pytest.raises(DatasetError, match="duplicate"):
        parse_manifest({"name": "d", "classes": ["a", "a"], "samples": []})


def test_missing_split_means_all():
    """Test that a missing split selects every sample."""
    manifest = parse_manifest({
        "name": "m", "classes": ["a"],
        "samples": [{"path": "1.png", "class": 0},
                    {"path": "2.png", "class": 0}]})

    assert manifest.indices("train") == [0, 1]


def test_import_folder(tmp_path):
    """Test the folder-per-class import with every 5th image as test."""
    _write_images(tmp_path / "cats", 10, (200, 10, 10))
    _write_images(tmp_path / "dogs", 5, (10, 10, 200))

    manifest = import_folder(tmp_path, name="pets")

    assert manifest.classes == ["cats", "dogs"]
    assert len(manifest.samples) == 15
    assert len(manifest.indices("test")) == 3
    image = load_image(manifest.samples[0].path, 16)
    assert image.shape == (3, 16, 16)


def test_import_explicit_splits(tmp_path):
    """Test that train/ and test/ directories define the splits."""
    _write_images(tmp_path / "train" / "a", 3, (0, 0, 0))
    _write_images(tmp_path / "test" / "a", 2, (0, 0, 0))

    manifest = import_folder(tmp_path)

    assert len(manifest.indices("train")) == 3
    assert len(manifest.indices("test")) == 2


def test_empty_folder(tmp_path):
    """Test that a folder without classes is rejected."""
    with pytest.raises(DatasetError):
        import_folder(tmp_path)


def test_save_and_load_relative_paths(tmp_path):
    """Test that relative sample paths resolve next to the manifest."""
    _write_images(tmp_path / "imgs", 1, (5, 5, 5))
    manifest = parse_manifest({
        "name": "rel", "classes": ["only"],
        "samples": [{"path": "imgs/0.png", "class": 0}]})
    path = save_manifest(manifest, tmp_path / "manifest.json")

    assert json.loads(path.read_text())["samples"][0]["class"] == 0
    loaded = load_manifest(str(tmp_path))
    assert loaded.samples[0].path == str(tmp_path / "imgs" / "0.png")


def test_unreadable_image(tmp_path):
    """Test that a corrupt file raises DatasetError."""
    broken = tmp_path / "broken.png"
    broken.write_bytes(b"not an image")

    with pytest.raises(DatasetError):
        load_image(str(broken), 16)


def test_fingerprint_tracks_content():
    """Test that fingerprints differ between datasets and are stable."""
    assert manifest_fingerprint(load_manifest("toy2")) == \
        manifest_fingerprint(load_manifest("toy2"))
    assert manifest_fingerprint(load_manifest("toy2")) != \
        manifest_fingerprint(load_manifest("toy4"))
