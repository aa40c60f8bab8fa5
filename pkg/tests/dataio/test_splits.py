import logging

import pytest

from promptssl.dataio import DatasetError, load_manifest, make_split
from promptssl.dataio import parse_manifest


def _manifest(name, classes):
    return parse_manifest({"name": name, "classes": classes,
                           "samples": []})


@pytest.mark.parametrize("count, seen", [(10, 5), (7, 4), (2, 1)])
def test_base_to_new_sizes(count, seen):
    """Test that base takes ceil(K / 2) classes."""
    manifest = _manifest("d", [f"c{i}" for i in range(count)])

    split = make_split([manifest], "base_to_new", seed=1)

    assert len(split.seen) == seen
    assert len(split.unseen) == count - seen


def test_base_to_new_partition():
    """Test disjointness and coverage over many seeds."""
    classes = [f"c{i}" for i in range(9)]
    manifest = _manifest("d", classes)
    for seed in range(100):
        split = make_split([manifest], "base_to_new", seed=seed)

        assert not set(split.seen) & set(split.unseen)
        assert set(split.seen) | set(split.unseen) == set(classes)


def test_base_to_new_is_seeded():
    """Test that equal seeds give equal splits."""
    manifest = _manifest("d", [f"c{i}" for i in range(12)])

    assert make_split([manifest], "base_to_new", 4) == make_split(
        [manifest], "base_to_new", 4)
    splits = {make_split([manifest], "base_to_new", s).seen
              for s in range(10)}
    assert len(splits) > 1


def test_base_to_new_single_class():
    """Test that one class cannot be split."""
    with pytest.raises(DatasetError):
        make_split([_manifest("d", ["only"])], "base_to_new", 0)


def test_cross_dataset():
    """Test that unseen classes come from the targets."""
    source = load_manifest("toy2")
    target = _manifest("other", ["cars", "planes"])

    split = make_split([source, target], "cross_dataset", 0)

    assert split.seen == tuple(source.classes)
    assert split.unseen == ("cars", "planes")
    assert split.target_classes == {"other": ("cars", "planes")}


def test_domain_generalization():
    """Test that shifted domains share the label set."""
    split = make_split([load_manifest("toy4"),
                        load_manifest("toy4_shifted")],
                       "domain_generalization", 0)

    assert split.seen == split.unseen
    assert len(split.seen) == 4
    assert split.target_classes["toy4_shifted"] == split.seen


def test_domain_generalization_partial_overlap(caplog):
    """Test that unmatched target classes are dropped with a warning."""
    source = _manifest("src", ["Dog", "Cat", "Bird"])
    target = _manifest("tgt", ["dog", "cat", "fish"])

    with caplog.at_level(logging.WARNING):
        split = make_split([source, target], "domain_generalization", 0)

    assert split.seen == ("Dog", "Cat")
    assert split.target_classes["tgt"] == ("dog", "cat")
    assert "fish" in caplog.text


def test_domain_generalization_mapping(tmp_path):
    """Test that a class mapping file matches renamed classes."""
    mapping = tmp_path / "map.yaml"
    mapping.write_text("hound: dog\n")
    source = _manifest("src", ["dog"])
    target = _manifest("tgt", ["hound"])

    split = make_split([source, target], "domain_generalization", 0,
                       class_mapping=str(mapping))

    assert split.target_classes["tgt"] == ("hound",)


def test_domain_generalization_disjoint():
    """Test that disjoint label sets are rejected."""
    with pytest.raises(DatasetError):
        make_split([_manifest("a", ["x"]), _manifest("b", ["y"])],
                   "domain_generalization", 0)


def test_arity_checks():
    """Test that each protocol takes the right number of datasets."""
    toy = load_manifest("toy2")
    with pytest.raises(DatasetError):
        make_split([toy, toy], "base_to_new", 0)
    with pytest.raises(DatasetError):
        make_split([toy], "cross_dataset", 0)
    with pytest.raises(DatasetError):
        make_split([], "none", 0)


def test_no_protocol():
    """Test that the plain protocol sees every class."""
    split = make_split([load_manifest("toy2")], "none", 0)

    assert split.seen == ("red_stripes", "blue_bars")
    assert split.unseen == ()


def test_domain_generalization_rejects_the_source_again():
    """Test that a target equal to the source is not a shifted domain."""
    toy4 = load_manifest("toy4")
    copy = parse_manifest({**toy4.model_dump(mode="json", by_alias=True),
                           "name": "toy4_copy"})

    with pytest.raises(DatasetError, match="source dataset again"):
        make_split([toy4, toy4], "domain_generalization", 0)
    with pytest.raises(DatasetError, match="source dataset again"):
        make_split([toy4, copy], "domain_generalization", 0)


def test_cross_dataset_invariants_over_seeds():
    """Test the cross-dataset set relations for 100 seeds."""
    source = _manifest("src", ["a", "b", "c"])
    targets = [_manifest("t1", ["x", "y"]), _manifest("t2", ["y", "z"])]

    first = make_split([source, *targets], "cross_dataset", 0)
    for seed in range(100):
        split = make_split([source, *targets], "cross_dataset", seed)

        assert split.seen == ("a", "b", "c")
        assert set(split.unseen) == {"x", "y", "z"}
        assert split.targets == ("t1", "t2")
        assert (split.seen, split.unseen) == (first.seen, first.unseen)


def test_domain_generalization_invariants_over_seeds():
    """Test the domain-generalization set relations for 100 seeds."""
    source = _manifest("src", ["Dog", "Cat", "Bird"])
    target = _manifest("tgt", ["bird", "dog", "cow"])

    for seed in range(100):
        split = make_split([source, target], "domain_generalization", seed)

        assert split.seen == split.unseen == ("Dog", "Bird")
        assert split.target_classes["tgt"] == ("dog", "bird")
        assert split.source != split.targets[0]
