"""Minimal demonstration that a concat-and-fuse noise input is trained away.

The fusion layer F(x, n) = W_x x + W_n n + b is trained to minimize the
spatial reconstruction loss against target x. Because the optimum is
W_x = I, W_n = 0, b = 0, the weights tied to the noise shrink toward zero:
the network learns to ignore its noise input. The returned ratio curve
||W_n|| / ||W_x|| makes that collapse measurable.

W_n starts as an exact copy of W_x, so the ratio at step 0 is exactly 1 and
any later drop is attributable to training, not initialization.
"""

from __future__ import annotations

from typing import Dict, List

import torch
from torch import nn


class FusionLayer(nn.Module):
    def __init__(self, dim_x: int, dim_n: int, generator: torch.Generator):
        super().__init__()
        if dim_x != dim_n:
            raise ValueError("mirrored init needs dim_x == dim_n")
        w = torch.randn(dim_x, dim_x, generator=generator) / dim_x**0.5
        self.w_x = nn.Parameter(w.clone())
        self.w_n = nn.Parameter(w.clone())
        self.b = nn.Parameter(torch.zeros(dim_x))

    def forward(self, x: torch.Tensor, n: torch.Tensor) -> torch.Tensor:
        return x @ self.w_x.T + n @ self.w_n.T + self.b

    def ratio(self) -> float:
        with torch.no_grad():
            return float(self.w_n.norm() / self.w_x.norm())


def fusion_noise_demo(
    steps: int = 10_000,
    dim: int = 2,
    batch: int = 256,
    lr: float = 0.05,
    seed: int = 0,
) -> Dict[str, object]:
    """Train F against the spatial loss and record the weight-norm ratio.

    Plain SGD, not an adaptive optimizer: near the optimum the gradient
    vanishes and SGD stays put, keeping the smoothed ratio curve monotone,
    whereas adaptive step-size rescaling kicks the weights around the floor.
    Returns ratio_curve and ls_curve, ratio entry 0 being the pre-training
    state.
    """
    if steps < 1:
        raise ValueError(f"steps must be positive, got {steps}")
    gen = torch.Generator().manual_seed(seed)
    layer = FusionLayer(dim, dim, gen)
    opt = torch.optim.SGD(layer.parameters(), lr=lr)

    ratio_curve: List[float] = [layer.ratio()]
    ls_curve: List[float] = []
    for _ in range(steps):
        x = torch.randn(batch, dim, generator=gen)
        n = torch.randn(batch, dim, generator=gen)
        l_s = (layer(x, n) - x).pow(2).mean()
        opt.zero_grad(set_to_none=True)
        l_s.backward()
        opt.step()
        ratio_curve.append(layer.ratio())
        ls_curve.append(float(l_s.detach()))

    return {
        "ratio_curve": ratio_curve,
        "ls_curve": ls_curve,
        "final_ratio": ratio_curve[-1],
        "final_ls": ls_curve[-1],
        "steps": steps,
    }


def smoothed(curve: List[float], window: int) -> List[float]:
    """Trailing moving average, defined from index window-1 on."""
    if window < 1:
        raise ValueError("window must be positive")
    out = []
    acc = 0.0
    for i, v in enumerate(curve):
        acc += v
        if i >= window:
            acc -= curve[i - window]
        if i >= window - 1:
            out.append(acc / window)
    return out
