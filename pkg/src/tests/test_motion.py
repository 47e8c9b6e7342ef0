import numpy as np
import pytest

from src.domain.cuboid import VideoCuboid
from src.quality.motion import FAST, MEDIUM, SLOW, SUMMARY_COLUMNS, motion_group, motion_magnitude, summarize_by_group
from src.quality.report import evaluate
from src.utils.errors import ContractError

from src.tests.conftest import moving_pattern


def test_static_clip_is_slow():
    v = VideoCuboid(np.full((5, 8, 8), 30.0))
    assert motion_magnitude(v) == 0.0
    assert motion_group(v) == SLOW


def test_groups_follow_thresholds():
    ramp = VideoCuboid(np.arange(5)[:, None, None] * np.full((5, 4, 4), 4.0))
    assert motion_magnitude(ramp) == pytest.approx(4.0)
    assert motion_group(ramp) == MEDIUM
    assert motion_group(ramp, thresholds=(1.0, 3.0)) == FAST


def test_bad_thresholds():
    with pytest.raises(ContractError):
        motion_group(VideoCuboid(np.zeros((2, 2, 2))), thresholds=(5.0, 1.0))


def test_summary_by_group():
    clip = moving_pattern(5, 16, 16)
    reports = {"a": evaluate(clip, clip), "b": evaluate(clip, clip), "c": evaluate(clip, clip)}
    summary = summarize_by_group(reports, {"a": SLOW, "b": FAST, "c": SLOW})

    assert list(summary.columns) == SUMMARY_COLUMNS
    assert summary["group"].tolist() == [SLOW, FAST]
    assert summary["clips"].tolist() == [2, 1]
    assert summary["stsr_psnr"].tolist() == [100.0, 100.0]


def test_summary_requires_every_group():
    clip = moving_pattern(5, 16, 16)
    with pytest.raises(ContractError, match="no motion group"):
        summarize_by_group({"a": evaluate(clip, clip)}, {})
