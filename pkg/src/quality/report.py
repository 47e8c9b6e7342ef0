# src/quality/report.py

"""
Per-frame quality of a super-resolved cuboid against its ground truth,
split by frame kind (even index = SSR, odd = TSR, all = ST-SR).
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd

from src.domain.cuboid import VideoCuboid
from src.domain.frame_kinds import AGGREGATE_LABELS, SSR, STSR, TSR, frame_kind
from src.persistence.tables import write_table
from src.quality.metrics import psnr, ssim
from src.utils.errors import ContractError

REPORT_COLUMNS = ["frame_index", "kind", "psnr_db", "ssim"]


@dataclass(frozen=True)
class FrameQuality:
    index: int
    kind: str
    psnr_db: float
    ssim: float


@dataclass(frozen=True)
class QualityReport:
    frames: Tuple[FrameQuality, ...]

    def aggregate(self, kind: str = STSR) -> Tuple[float, float]:
        """Unweighted (PSNR, SSIM) means over the frames of `kind`; NaN if none."""
        if kind not in (SSR, TSR, STSR):
            raise ContractError(f"unknown frame kind {kind!r}")
        rows = [f for f in self.frames if kind == STSR or f.kind == kind]
        if not rows:
            return float("nan"), float("nan")
        return (
            float(np.mean([f.psnr_db for f in rows])),
            float(np.mean([f.ssim for f in rows])),
        )

    @property
    def stsr(self) -> Tuple[float, float]:
        return self.aggregate(STSR)

    @property
    def ssr(self) -> Tuple[float, float]:
        return self.aggregate(SSR)

    @property
    def tsr(self) -> Tuple[float, float]:
        return self.aggregate(TSR)

    def to_frame(self) -> pd.DataFrame:
        rows = [[f.index, f.kind, f.psnr_db, f.ssim] for f in self.frames]
        for kind in (SSR, TSR, STSR):
            p, s = self.aggregate(kind)
            rows.append([AGGREGATE_LABELS[kind], kind, p, s])
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)

    def to_csv(self, path: Path) -> Path:
        return write_table(self.to_frame(), path, float_format="%.4f")


def evaluate(ref: VideoCuboid, test: VideoCuboid) -> QualityReport:
    if ref.dims != test.dims:
        raise ContractError(f"evaluate: dims mismatch, ref {ref.dims} vs test {test.dims}")
    if ref.n_frames % 2 == 0:
        raise ContractError(f"evaluate expects an odd frame count, got {ref.n_frames}")

    frames = tuple(
        FrameQuality(
            index=t,
            kind=frame_kind(t),
            psnr_db=psnr(ref.frame(t), test.frame(t), ref.value_max),
            ssim=ssim(ref.frame(t), test.frame(t), ref.value_max),
        )
        for t in range(ref.n_frames)
    )
    return QualityReport(frames)
