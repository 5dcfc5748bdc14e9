"""Python bindings for the glyphsr C++ core."""

from ._glyphsr import (
    ContractError,
    CheckpointError,
    control_t,
    degrade,
    faa_weight,
    fit_shift,
    levenshtein,
    ned,
    psnr,
    render_scene,
    restore,
    run_selftest,
    ssim,
    timestep_to_t,
    toy_ocr,
    train_config_defaults,
)

__all__ = [
    "ContractError",
    "CheckpointError",
    "control_t",
    "degrade",
    "faa_weight",
    "fit_shift",
    "levenshtein",
    "ned",
    "psnr",
    "render_scene",
    "restore",
    "run_selftest",
    "ssim",
    "timestep_to_t",
    "toy_ocr",
    "train_config_defaults",
]
