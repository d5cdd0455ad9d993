"""Per-sample DP-SGD gradient transform.

Each training sample's gradient is clipped to L2 norm at most C, the clipped
gradients are summed, Gaussian noise with standard deviation sigma * C is
added to every coordinate of the sum, and the result is averaged over the
batch. Privacy accounting is delegated to an external accountant; what this
transform guarantees mechanically is the clip bound and the noise scale. The
protected unit is one training sample, so a model trained with one trajectory
per sample gets instance-level protection.
"""

from __future__ import annotations

import math
from typing import List, Optional

import torch
from torch import nn

from refgen.config import DPConfig

UNIT_OF_PRIVACY = "instance"


class DPSGDHook:
    def __init__(self, dp: DPConfig, generator: Optional[torch.Generator] = None):
        self.dp = dp
        self.generator = generator if generator is not None else torch.Generator()
        self.last_per_sample_norms: List[float] = []
        # sigma > 0 with an infinite clip is rejected by DPConfig, so this
        # product is always finite
        self.noise_std = dp.noise_multiplier * dp.clip_norm if dp.noise_multiplier > 0 else 0.0

    def step(
        self,
        model: nn.Module,
        per_sample_losses: torch.Tensor,
    ) -> None:
        """Populate ``param.grad`` with the clipped, noised batch gradient.

        per_sample_losses: (B,) tensor, one loss per training sample, each a
        function of the model parameters. Gradients are taken sample by
        sample so the clip really is per sample, not per batch.
        """
        if per_sample_losses.dim() != 1 or per_sample_losses.shape[0] == 0:
            raise ValueError("per_sample_losses must be a non-empty 1-D tensor")
        params = [p for p in model.parameters() if p.requires_grad]
        batch = per_sample_losses.shape[0]
        summed = [torch.zeros_like(p) for p in params]
        self.last_per_sample_norms = []

        for i in range(batch):
            grads = torch.autograd.grad(
                per_sample_losses[i],
                params,
                retain_graph=i < batch - 1,
                allow_unused=True,
            )
            grads = [
                g if g is not None else torch.zeros_like(p)
                for g, p in zip(grads, params)
            ]
            norm = torch.sqrt(sum(g.pow(2).sum() for g in grads))
            if math.isinf(self.dp.clip_norm):
                factor = 1.0
                clipped_norm = float(norm)
            else:
                factor = min(1.0, self.dp.clip_norm / max(float(norm), 1e-12))
                clipped_norm = float(norm) * factor
            self.last_per_sample_norms.append(clipped_norm)
            for s, g in zip(summed, grads):
                s.add_(g, alpha=factor)

        noise_std = self.noise_std
        for p, s in zip(params, summed):
            if noise_std > 0:
                s = s + noise_std * torch.randn(
                    s.shape, generator=self.generator, dtype=s.dtype
                )
            p.grad = s / batch


def dp_sgd_hook(
    dp: Optional[DPConfig], generator: Optional[torch.Generator] = None
) -> Optional[DPSGDHook]:
    """None stays None: training without a hook runs the ordinary mean-loss
    backward pass."""
    if dp is None:
        return None
    return DPSGDHook(dp, generator)


def apply_grad_step(
    model: nn.Module,
    optimizer: torch.optim.Optimizer,
    per_sample_losses: torch.Tensor,
    hook: Optional[DPSGDHook],
) -> float:
    """One optimizer step from per-sample losses, with or without the DP
    transform. Returns the mean loss value."""
    mean_loss = per_sample_losses.mean()
    optimizer.zero_grad(set_to_none=True)
    if hook is None:
        mean_loss.backward()
    else:
        hook.step(model, per_sample_losses)
    optimizer.step()
    return float(mean_loss.detach())
