# src/reporting/training_charts.py

from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

from src.utils.errors import ContractError


# ------------------------------------------------------------------
# Constants
# ------------------------------------------------------------------

KIND_ORDER = ["stsr", "ssr", "tsr"]

KIND_LABELS = {
    "stsr": "ST-SR",
    "ssr": "SSR",
    "tsr": "TSR",
}

KIND_COLORS = {
    "stsr": "#238b45",
    "ssr": "#74c476",
    "tsr": "#c7e9c0",
}


# ------------------------------------------------------------------
# TrainingCharts
# ------------------------------------------------------------------

class TrainingCharts:
    """
    Read-only reporting layer over loss traces and ablation tables.
    Produces matplotlib figures. Never mutates data.
    """

    def __init__(self, dpi: int = 150):
        self.dpi = dpi

    def _finish(self, fig, output_path: Optional[Path], show: bool) -> None:
        plt.tight_layout()

        if output_path:
            Path(output_path).parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(output_path, dpi=self.dpi, bbox_inches="tight")

        if show:
            plt.show()
        else:
            plt.close(fig)

    # --------------------------------------------------------------
    # Chart 1: loss trace
    # --------------------------------------------------------------

    def plot_loss_trace(
        self,
        trace: pd.DataFrame,
        output_path: Optional[Path] = None,
        show: bool = False,
    ):
        if trace.empty:
            raise ContractError("loss trace is empty, nothing to plot")

        fig, ax = plt.subplots(figsize=(10, 5))
        ax.plot(trace["step"], trace["loss"], linewidth=1, color="#41ab5d", label="batch loss")

        epoch_means = trace.groupby("epoch").agg(step=("step", "max"), loss=("loss", "mean"))
        if len(epoch_means) > 1:
            ax.plot(epoch_means["step"], epoch_means["loss"], marker="o", color="#006d2c", label="epoch mean")

        ax.set_yscale("log")
        ax.set_title("Training loss (L2)")
        ax.set_xlabel("Step")
        ax.set_ylabel("Loss")
        ax.legend(frameon=False)

        self._finish(fig, output_path, show)
        return fig, ax

    # --------------------------------------------------------------
    # Chart 2: ablation PSNR by frame kind
    # --------------------------------------------------------------

    def plot_ablation(
        self,
        table: pd.DataFrame,
        output_path: Optional[Path] = None,
        show: bool = False,
    ):
        columns = [f"{k}_psnr" for k in KIND_ORDER]
        missing = [c for c in ["variant"] + columns if c not in table.columns]
        if missing:
            raise ContractError(f"ablation table lacks columns {missing}")

        pivot = table.set_index("variant")[columns]
        pivot.columns = [KIND_LABELS[k] for k in KIND_ORDER]

        fig, ax = plt.subplots(figsize=(12, 6))
        pivot.plot(kind="bar", ax=ax, color=[KIND_COLORS[k] for k in KIND_ORDER])

        ax.set_title("Ablation: PSNR by frame kind")
        ax.set_xlabel("Variant")
        ax.set_ylabel("PSNR (dB)")
        ax.tick_params(axis="x", rotation=30)

        handles, labels = ax.get_legend_handles_labels()
        ax.legend(
            handles,
            labels,
            title="Frames",
            bbox_to_anchor=(1.02, 1),
            loc="upper left",
            frameon=False,
        )

        self._finish(fig, output_path, show)
        return fig, ax
