"""Feature normalization pipeline: L2 projection, affine rescale, Tukey power.

The full pipeline is ``tukey(scale * l2_normalize(z) + shift)`` and is
applied identically to training features and queries. Centers are
computed from transformed features (transform first, then mean).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class TransformParams:
    """Parameters of the normalization pipeline.

    ``clamp_negative`` selects the policy for components that end up
    negative before the power stage: clamp them to ``eps`` instead of
    rejecting. The default rejects, because silent clamping hides
    ingestion bugs.
    """

    enabled: bool = True
    scale: float = 1.0
    shift: float = 0.0
    tukey_lambda: float = 0.5
    eps: float = 1e-8
    clamp_negative: bool = False

    def __post_init__(self) -> None:
        if self.enabled and self.scale == 0.0:
            raise ConfigError("transform scale must be nonzero when enabled")
        if self.eps <= 0.0:
            raise ConfigError("transform eps must be positive")

    @classmethod
    def disabled(cls) -> "TransformParams":
        return cls(enabled=False)


def l2_normalize(z: np.ndarray) -> np.ndarray:
    """Project feature rows onto the unit sphere."""
    x = np.asarray(z, dtype=np.float64)
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(norms == 0.0):
        if x.ndim == 1:
            raise DataError("cannot L2-normalize a zero vector")
        bad = int(np.argwhere(norms[..., 0] == 0.0)[0][0])
        raise DataError(f"cannot L2-normalize zero vector at row {bad}")
    return x / norms


def linear_transform(z: np.ndarray, scale: float, shift: float) -> np.ndarray:
    """Elementwise ``scale * z + shift``."""
    return scale * np.asarray(z, dtype=np.float64) + shift


def tukey(z: np.ndarray, lam: float, eps: float = 1e-8, clamp_negative: bool = False) -> np.ndarray:
    """Tukey ladder-of-powers: ``z ** lam`` (``log z`` at ``lam = 0``).

    Components must be nonnegative; for ``lam <= 0`` or non-integer
    ``lam`` they are floored at ``eps`` before exponentiation.
    """
    if eps <= 0.0:
        raise ConfigError("tukey eps must be positive")
    x = np.asarray(z, dtype=np.float64)
    negative = x < 0.0
    if np.any(negative):
        if clamp_negative:
            x = np.where(negative, 0.0, x)
        else:
            idx = tuple(int(i) for i in np.argwhere(negative)[0])
            raise DataError(
                f"tukey transform requires nonnegative components; component {idx} is negative"
            )
    if lam == 0.0:
        return np.log(np.maximum(x, eps))
    if lam < 0.0 or not float(lam).is_integer():
        x = np.maximum(x, eps)
    return x ** lam


def compose(z: np.ndarray, params: TransformParams) -> np.ndarray:
    """Apply the full pipeline; identity when ``params.enabled`` is false."""
    x = np.asarray(z, dtype=np.float64)
    if not params.enabled:
        return x
    x = l2_normalize(x)
    x = linear_transform(x, params.scale, params.shift)
    return tukey(x, params.tukey_lambda, params.eps, params.clamp_negative)
