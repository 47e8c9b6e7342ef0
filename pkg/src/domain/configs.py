# src/domain/configs.py

"""
Architecture and training hyperparameters.

Dataclass defaults are the desk-scale ("toy") values; `full_scale()` presets
carry the published scale where it is known.
"""

from dataclasses import asdict, dataclass, field, replace
from typing import Optional

from src.utils.errors import ContractError

MODULE_VARIANTS = {
    "MBFE+MBR": dict(enable_qe=False, enable_cfqe=False),
    "MBFE+MBR+QE": dict(enable_qe=True, enable_cfqe=False),
    "MBFE+MBR+QE+CFQE": dict(enable_qe=True, enable_cfqe=True),
}


@dataclass(frozen=True)
class NetworkConfig:
    base_channels: int = 16
    resdb_count: int = 2
    resdb_growth: int = 8
    conv3d_count: int = 2
    enable_qe: bool = True
    enable_cfqe: bool = True
    cbam_reduction: int = 4
    cbam_spatial_kernel: int = 7
    spatial_factor: int = 4
    leaky_slope: float = 0.1
    skip_grounded_fusion: bool = True

    def __post_init__(self):
        if self.resdb_count < 1:
            raise ContractError(f"resdb_count must be >= 1, got {self.resdb_count}")
        if self.conv3d_count < 1:
            raise ContractError(f"conv3d_count must be >= 1, got {self.conv3d_count}")
        if self.base_channels < 1 or self.resdb_growth < 1:
            raise ContractError("base_channels and resdb_growth must be >= 1")
        if self.cbam_reduction < 1 or self.base_channels % self.cbam_reduction:
            raise ContractError(
                f"cbam_reduction {self.cbam_reduction} must divide base_channels {self.base_channels}"
            )
        if self.cbam_spatial_kernel % 2 == 0:
            raise ContractError(f"cbam_spatial_kernel must be odd, got {self.cbam_spatial_kernel}")
        if self.spatial_factor < 1:
            raise ContractError(f"spatial_factor must be >= 1, got {self.spatial_factor}")

    @classmethod
    def toy(cls) -> "NetworkConfig":
        return cls()

    @classmethod
    def full_scale(cls, dataset: str = "vimeo") -> "NetworkConfig":
        resdbs = {"vimeo": 9, "vid4": 7}
        if dataset not in resdbs:
            raise ContractError(f"unknown dataset preset {dataset!r}; expected one of {sorted(resdbs)}")
        return cls(
            base_channels=64,
            resdb_count=resdbs[dataset],
            resdb_growth=32,
            conv3d_count=5,
            cbam_reduction=16,
        )

    def with_modules(self, label: str) -> "NetworkConfig":
        if label not in MODULE_VARIANTS:
            raise ContractError(f"unknown module variant {label!r}; expected one of {list(MODULE_VARIANTS)}")
        return replace(self, **MODULE_VARIANTS[label])

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 8
    lr0: float = 1e-4
    lr_decay: float = 0.5
    lr_decay_every: int = 60
    beta1: float = 0.5
    beta2: float = 0.99
    epsilon: float = 1e-8
    max_epochs: int = 1
    seed: int = 0
    patch_size: int = 32
    clip_frames: int = 7
    crops_per_clip: int = 1
    checkpoint_every: int = 0
    grad_clip: Optional[float] = None
    network: NetworkConfig = field(default_factory=NetworkConfig)

    def __post_init__(self):
        if self.batch_size < 1:
            raise ContractError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.lr0 <= 0:
            raise ContractError(f"lr0 must be > 0, got {self.lr0}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ContractError(f"betas must lie in [0, 1), got ({self.beta1}, {self.beta2})")
        if self.lr_decay_every < 1:
            raise ContractError(f"lr_decay_every must be >= 1, got {self.lr_decay_every}")
        if self.clip_frames % 2 == 0:
            raise ContractError(f"clip_frames must be odd, got {self.clip_frames}")
        if self.patch_size < 1 or self.crops_per_clip < 1 or self.max_epochs < 0:
            raise ContractError("patch_size and crops_per_clip must be >= 1, max_epochs >= 0")
        if self.grad_clip is not None and self.grad_clip <= 0:
            raise ContractError(f"grad_clip must be > 0 when set, got {self.grad_clip}")

    def to_dict(self) -> dict:
        return asdict(self)
