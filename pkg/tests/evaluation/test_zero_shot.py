from promptssl.dataio import load_manifest, make_split
from promptssl.evaluation import ZeroShotScorer, run_protocol


def test_zero_shot_logits(toy_vision, toy_text, images):
    """Test that the baseline scores every class for every image."""
    scorer = ZeroShotScorer(toy_vision, toy_text)
    tokens = scorer.class_tokens(["red_stripes", "blue_bars"])

    logits = scorer.logits(scorer.normalize(images), tokens)

    assert logits.shape == (4, 2)
    assert logits.abs().max() <= 1.0 / toy_text.temperature + 1e-4


def test_zero_shot_protocol(toy_vision, toy_text):
    """Test the baseline through the evaluation protocol."""
    toy2 = load_manifest("toy2")
    split = make_split([toy2], "none", seed=0)

    [result] = run_protocol(split, ZeroShotScorer(toy_vision, toy_text),
                            {"toy2": toy2})

    assert 0.0 <= result.top1 <= 100.0
    assert result.num_samples == 32
