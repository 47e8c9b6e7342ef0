# src/domain/frame_kinds.py

SSR = "SSR"      # frame present in the input, spatially reconstructed
TSR = "TSR"      # frame synthesised between two inputs
STSR = "STSR"    # all frames

AGGREGATE_LABELS = {
    SSR: "AGG_SSR",
    TSR: "AGG_TSR",
    STSR: "AGG_STSR",
}


def frame_kind(index: int) -> str:
    """Even zero-based output index -> SSR, odd -> TSR."""
    if index < 0:
        raise ValueError(f"frame index must be >= 0, got {index}")
    return SSR if index % 2 == 0 else TSR
