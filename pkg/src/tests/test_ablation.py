from dataclasses import replace

import pytest

from src.persistence.tables import read_table
from src.training.ablation import COLUMNS, ablate, variant_config, variant_label
from src.utils.errors import ContractError


@pytest.fixture
def untrained_cfg(tiny_train_cfg):
    return replace(tiny_train_cfg, max_epochs=0)


def test_resdb_sweep_params_increase(untrained_cfg, small_clip, tmp_path):
    out = tmp_path / "ablation_resdb.csv"
    table = ablate(untrained_cfg, "resdb_count", [3, 5, 7, 9], [small_clip], out_csv=out)

    assert list(table.columns) == COLUMNS
    assert table["variant"].tolist() == [f"resdb_count={n}" for n in (3, 5, 7, 9)]
    params = table["params"].tolist()
    assert all(a < b for a, b in zip(params, params[1:]))
    # untrained variants all reproduce the bicubic baseline
    assert table["stsr_psnr"].max() - table["stsr_psnr"].min() < 1e-6

    text = out.read_text(encoding="utf-8")
    assert text.splitlines()[0] == ",".join(COLUMNS)
    assert "# reference (full-scale Vimeo-90K" in text
    assert len(read_table(out)) == 4


def test_module_sweep_labels(untrained_cfg, small_clip):
    labels = ["MBFE+MBR", "MBFE+MBR+QE", "MBFE+MBR+QE+CFQE"]
    table = ablate(untrained_cfg, "modules", labels, [small_clip])
    assert table["variant"].tolist() == labels
    assert table["params"].is_monotonic_increasing


def test_variant_config_validation(untrained_cfg):
    assert variant_config(untrained_cfg, "conv3d_count", 4).network.conv3d_count == 4
    with pytest.raises(ContractError, match="integers >= 1"):
        variant_config(untrained_cfg, "resdb_count", 0)
    with pytest.raises(ContractError, match="unknown module variant"):
        variant_config(untrained_cfg, "modules", "MBFE")
    with pytest.raises(ContractError, match="unknown ablation axis"):
        variant_config(untrained_cfg, "depth", 3)


def test_variant_labels():
    assert variant_label("modules", "MBFE+MBR") == "MBFE+MBR"
    assert variant_label("conv3d_count", 5) == "conv3d_count=5"


def test_empty_sweep(untrained_cfg, small_clip):
    with pytest.raises(ContractError):
        ablate(untrained_cfg, "resdb_count", [], [small_clip])
