import json

import pytest

from promptssl.ablation import PRESETS, load_grid, run_ablation
from promptssl.common import ConfigError, OutputExistsError
from promptssl.config import dump_config_yaml


def test_presets():
    """Test the shape of the builtin grids."""
    assert len(load_grid("loss_table")) == 6
    assert len(load_grid("context_lengths")) == 16
    assert load_grid("shots")["shots_all"] == ["train.shots=null"]
    assert set(load_grid("init")) == {"init_random", "init_none",
                                      "init_manual"}
    assert set(PRESETS) == {"loss_table", "context_lengths", "shots",
                            "init"}


def test_loss_table_overrides():
    """Test that a preset row turns into config overrides."""
    cell = load_grid("loss_table")["ce+sem(x2)"]

    assert "loss.enable_sem=true" in cell
    assert "loss.sem_use_x1=false" in cell
    assert "loss.enable_con=false" in cell


def test_axes_expand_to_a_product(tmp_path):
    """Test cartesian expansion of grid axes."""
    path = tmp_path / "grid.yaml"
    path.write_text("axes:\n  rho.context_length: [2, 4]\n"
                    "  rho.init: [random, manual]\n")

    grid = load_grid(str(path))

    assert len(grid) == 4
    assert grid["rho.context_length=2,rho.init=random"] == [
        "rho.context_length=2", 'rho.init="random"']


def test_empty_grid(tmp_path):
    path = tmp_path / "grid.yaml"
    path.write_text("cells: {}\n")

    with pytest.raises(ConfigError, match="no cells"):
        load_grid(str(path))


def test_unknown_grid():
    with pytest.raises(ConfigError, match="preset"):
        load_grid("no-such-grid")


def test_bad_cell_fails_before_training(tiny_config, tmp_path):
    """Test that every cell resolves before any run starts."""
    base = tmp_path / "base.yaml"
    base.write_text(dump_config_yaml(tiny_config))
    grid = {"ok": ["rho.init=none"], "bad": ["rho.nope=1"]}

    with pytest.raises(ConfigError):
        run_ablation(base, [], grid, tmp_path / "out")
    assert not (tmp_path / "out").exists()


def test_run_ablation(tiny_config, tmp_path, runs_root):
    """Test that each cell trains into its own run directory."""
    base = tmp_path / "base.yaml"
    base.write_text(dump_config_yaml(tiny_config))
    grid = {"m2": ["rho.context_length=2"], "m4": ["rho.context_length=4"]}

    table = run_ablation(base, [], grid, tmp_path / "out")

    assert (tmp_path / "out" / "m2" / "run.json").is_file()
    assert (tmp_path / "out" / "m4" / "run.json").is_file()
    text = table.read_text()
    assert "| m2 |" in text and "| m4 |" in text
    summary = json.loads((tmp_path / "out" / "ablation.json").read_text())
    assert [c["name"] for c in summary["cells"]] == ["m2", "m4"]


def test_earlier_ablation_is_kept(tiny_config, tmp_path):
    """Test that a second ablation into the same directory is refused."""
    base = tmp_path / "base.yaml"
    base.write_text(dump_config_yaml(tiny_config))
    out = tmp_path / "out"
    out.mkdir()
    (out / "ablation.md").write_text("| earlier |\n")

    with pytest.raises(OutputExistsError, match="ablation.md"):
        run_ablation(base, [], {"m2": ["rho.context_length=2"]}, out)

    assert (out / "ablation.md").read_text() == "| earlier |\n"
    assert not (out / "m2").exists()


@pytest.mark.slow
def test_loss_table_runs_every_cell(tiny_config, tmp_path, runs_root):
    """Test that all six loss combinations train and land in the table."""
    base = tmp_path / "base.yaml"
    base.write_text(dump_config_yaml(tiny_config))
    grid = load_grid("loss_table")

    table = run_ablation(base, [], grid, tmp_path / "out")

    text = table.read_text()
    summary = json.loads((tmp_path / "out" / "ablation.json").read_text())
    assert [c["name"] for c in summary["cells"]] == list(grid)
    for name in grid:
        assert (tmp_path / "out" / name / "run.json").is_file()
        assert f"| {name} |" in text
    for cell in summary["cells"]:
        assert 0.0 <= cell["results"][0]["top1"] <= 100.0
