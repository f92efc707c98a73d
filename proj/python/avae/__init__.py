"""Adversarial VAE with an equilibrium controller.

Thin wrapper over the C++ engine. Images are float32 arrays shaped
[batch, channels, size, size] with values in [0, 1]; latents are float64
arrays shaped [count, N].
"""

from ._core import (
    ControllerState,
    DimensionError,
    FormatError,
    Model,
    NumericError,
    Trainer,
    UsageError,
    apply_attribute,
    build_attribute,
    composite_losses,
    config_keys,
    convergence_measure,
    default_config,
    diversity_ratio,
    inception_score,
    interpolate,
    kl_loss,
    load_images,
    normalize_config,
    train,
    write_synth_dataset,
)

__all__ = [
    "ControllerState",
    "DimensionError",
    "FormatError",
    "Model",
    "NumericError",
    "Trainer",
    "UsageError",
    "apply_attribute",
    "build_attribute",
    "composite_losses",
    "config_keys",
    "convergence_measure",
    "default_config",
    "diversity_ratio",
    "inception_score",
    "interpolate",
    "kl_loss",
    "load_images",
    "normalize_config",
    "train",
    "write_synth_dataset",
]
