# src/quality/motion.py

"""
Fast / medium / slow motion grouping of evaluation clips, by mean
absolute frame-to-frame difference on the 0-255 scale.
"""

from typing import Dict, List, Mapping, Tuple

import numpy as np
import pandas as pd

from src.domain.cuboid import VideoCuboid
from src.domain.frame_kinds import SSR, STSR, TSR
from src.quality.report import QualityReport
from src.utils.errors import ContractError

SLOW = "slow"
MEDIUM = "medium"
FAST = "fast"
GROUP_ORDER = (SLOW, MEDIUM, FAST)

DEFAULT_THRESHOLDS = (2.0, 6.0)

SUMMARY_COLUMNS = ["group", "clips"] + [
    f"{kind.lower()}_{m}" for kind in (STSR, SSR, TSR) for m in ("psnr", "ssim")
]


def motion_magnitude(clip: VideoCuboid) -> float:
    if clip.n_frames < 2:
        return 0.0
    scale = 255.0 / clip.value_max
    return float(np.mean(np.abs(np.diff(clip.values, axis=0))) * scale)


def motion_group(clip: VideoCuboid, thresholds: Tuple[float, float] = DEFAULT_THRESHOLDS) -> str:
    low, high = thresholds
    if not 0 <= low <= high:
        raise ContractError(f"motion thresholds must satisfy 0 <= low <= high, got {thresholds}")
    m = motion_magnitude(clip)
    if m < low:
        return SLOW
    if m < high:
        return MEDIUM
    return FAST


def summarize_by_group(reports: Mapping[str, QualityReport], groups: Mapping[str, str]) -> pd.DataFrame:
    """Per-group means of each clip's aggregates, one row per non-empty group."""
    missing = set(reports) - set(groups)
    if missing:
        raise ContractError(f"no motion group for clips {sorted(missing)}")

    buckets: Dict[str, List[QualityReport]] = {g: [] for g in GROUP_ORDER}
    for clip_id in sorted(reports):
        group = groups[clip_id]
        if group not in buckets:
            raise ContractError(f"unknown motion group {group!r} for clip {clip_id!r}")
        buckets[group].append(reports[clip_id])

    rows = []
    for group in GROUP_ORDER:
        members = buckets[group]
        if not members:
            continue
        row = {"group": group, "clips": len(members)}
        for kind in (STSR, SSR, TSR):
            pairs = [r.aggregate(kind) for r in members]
            row[f"{kind.lower()}_psnr"] = float(np.mean([p for p, _ in pairs]))
            row[f"{kind.lower()}_ssim"] = float(np.mean([s for _, s in pairs]))
        rows.append(row)
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
