"""Frozen convolutional backbones with named layer taps.

The extractor never trains: weights are fixed at load time. The built-in
``tiny8`` backbone generates its weights deterministically from a pinned
seed, so exports are reproducible without shipping a weights blob; any
torchvision classifier can be used instead by supplying a local weights
file (there is no network download here).
"""

from __future__ import annotations

import torch
from torch import nn

TINY8_SEED = 20240
TINY8_TAPS = ("embedding", "block2")


class Tiny8(nn.Module):
    """Three strided conv blocks; taps are globally average-pooled ReLU maps."""

    def __init__(self) -> None:
        super().__init__()
        self.conv1 = nn.Conv2d(3, 8, 3, stride=2, padding=1)
        self.conv2 = nn.Conv2d(8, 16, 3, stride=2, padding=1)
        self.conv3 = nn.Conv2d(16, 32, 3, stride=2, padding=1)
        self.act = nn.ReLU()

    def forward_taps(self, x: torch.Tensor) -> dict[str, torch.Tensor]:
        h1 = self.act(self.conv1(x))
        h2 = self.act(self.conv2(h1))
        h3 = self.act(self.conv3(h2))
        return {
            "block2": h2.mean(dim=(2, 3)),
            "embedding": h3.mean(dim=(2, 3)),
        }

    forward = forward_taps


def _tiny8() -> Tiny8:
    generator = torch.Generator().manual_seed(TINY8_SEED)
    model = Tiny8()
    with torch.no_grad():
        for p in model.parameters():
            p.copy_(torch.empty_like(p).normal_(std=0.2, generator=generator))
    return model


class _TorchvisionTaps(nn.Module):
    def __init__(self, extractor: nn.Module, rename: dict[str, str]):
        super().__init__()
        self.extractor = extractor
        self.rename = rename

    def forward_taps(self, x: torch.Tensor) -> dict[str, torch.Tensor]:
        raw = self.extractor(x)
        out = {}
        for tap, node in self.rename.items():
            h = raw[node]
            out[tap] = h.mean(dim=(2, 3)) if h.ndim == 4 else h.flatten(1)
        return out

    forward = forward_taps


def _torchvision_backbone(name: str, weights_path: str) -> nn.Module:
    import torchvision.models as models
    from torchvision.models.feature_extraction import create_feature_extractor

    builder = getattr(models, name, None)
    if builder is None:
        raise ValueError(f"unknown torchvision model {name!r}")
    model = builder(weights=None)
    state = torch.load(weights_path, map_location="cpu", weights_only=True)
    model.load_state_dict(state)
    rename = {"embedding": "flatten", "block3": "layer3"}
    extractor = create_feature_extractor(model, return_nodes=list(rename.values()))
    return _TorchvisionTaps(extractor, rename)


def load_backbone(name: str, weights_path: str | None = None, device: str = "cpu") -> nn.Module:
    """Load a frozen backbone in eval mode on the requested device."""
    if name == "tiny8":
        model = _tiny8()
        if weights_path is not None:
            model.load_state_dict(torch.load(weights_path, map_location="cpu", weights_only=True))
    else:
        if weights_path is None:
            raise ValueError(
                f"backbone {name!r} needs a local weights file; downloads are not attempted"
            )
        model = _torchvision_backbone(name, weights_path)
    model.eval()
    for p in model.parameters():
        p.requires_grad_(False)
    return model.to(device)


def available_taps(name: str) -> tuple[str, ...]:
    if name == "tiny8":
        return TINY8_TAPS
    return ("embedding", "block3")
