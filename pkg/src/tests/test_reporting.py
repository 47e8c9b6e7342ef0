import hashlib

import pandas as pd
import pytest

from src.persistence.tables import loss_trace_frame, write_loss_trace
from src.reporting.training_charts import TrainingCharts
from src.utils.errors import ContractError
from src.utils.hash_utils import compute_file_hash
from src.utils.run_scripts import StepTimer


@pytest.fixture
def trace_rows():
    return [
        {"step": s, "epoch": (s - 1) // 2, "batch": (s - 1) % 2, "lr": 1e-4, "loss": 100.0 / s}
        for s in range(1, 7)
    ]


def test_loss_trace_csv_format(tmp_path, trace_rows):
    path = write_loss_trace(trace_rows, tmp_path / "loss_trace.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "step,epoch,batch,lr,loss"
    assert lines[1] == "1,0,0,1.000000000000e-04,1.000000000000e+02"
    assert len(lines) == 7


def test_loss_chart_written(tmp_path, trace_rows):
    png = tmp_path / "charts" / "loss.png"
    TrainingCharts(dpi=50).plot_loss_trace(loss_trace_frame(trace_rows), output_path=png)
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_ablation_chart_needs_psnr_columns(tmp_path):
    table = pd.DataFrame({"variant": ["a", "b"], "stsr_psnr": [30.0, 31.0], "ssr_psnr": [31.0, 32.0], "tsr_psnr": [29.0, 30.0]})
    png = tmp_path / "ablation.png"
    TrainingCharts(dpi=50).plot_ablation(table, output_path=png)
    assert png.exists()

    with pytest.raises(ContractError, match="lacks columns"):
        TrainingCharts().plot_ablation(table.drop(columns=["tsr_psnr"]))


def test_empty_trace_rejected():
    with pytest.raises(ContractError, match="empty"):
        TrainingCharts().plot_loss_trace(loss_trace_frame([]))


def test_file_hash(tmp_path):
    path = tmp_path / "blob.bin"
    path.write_bytes(b"cuboid" * 5000)
    assert compute_file_hash(path) == hashlib.sha256(b"cuboid" * 5000).hexdigest()


def test_step_timer_records_failures(capsys):
    timer = StepTimer()
    with timer.step("ok step"):
        pass
    with pytest.raises(RuntimeError):
        with timer.step("bad step"):
            raise RuntimeError("boom")

    assert [(label, status) for label, _, status in timer.timings] == [("ok step", "ok"), ("bad step", "failed")]
    timer.summary()
    assert "TOTAL" in capsys.readouterr().out
