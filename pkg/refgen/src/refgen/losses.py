"""WGAN loss with the one-sided Lipschitz penalty.

The critic maximizes E[D(real)] - E[D(fake)]; the penalty term pushes the
gradient norm at interpolated points down to at most 1 (one-sided: staying
below 1 is free, unlike the two-sided gradient penalty).
"""

from __future__ import annotations

from typing import Callable, Tuple

import torch


def lipschitz_penalty(
    critic: Callable[[torch.Tensor], torch.Tensor],
    real: torch.Tensor,
    fake: torch.Tensor,
    generator: torch.Generator,
) -> torch.Tensor:
    """mean(max(0, ||grad D(x_hat)|| - 1)^2) at per-sample interpolates."""
    if real.shape != fake.shape:
        raise ValueError(f"real/fake shapes differ: {tuple(real.shape)} vs {tuple(fake.shape)}")
    alpha_shape = (real.shape[0],) + (1,) * (real.dim() - 1)
    alpha = torch.rand(alpha_shape, generator=generator)
    x_hat = (alpha * real + (1.0 - alpha) * fake).detach().requires_grad_(True)
    scores = critic(x_hat)
    grads = torch.autograd.grad(
        scores.sum(), x_hat, create_graph=True, retain_graph=True
    )[0]
    norms = grads.flatten(start_dim=1).norm(dim=1)
    return torch.clamp(norms - 1.0, min=0.0).pow(2).mean()


def critic_loss(
    critic: Callable[[torch.Tensor], torch.Tensor],
    real: torch.Tensor,
    fake: torch.Tensor,
    penalty_weight: float,
    generator: torch.Generator,
) -> Tuple[torch.Tensor, dict]:
    score_real = critic(real).mean()
    score_fake = critic(fake.detach()).mean()
    penalty = lipschitz_penalty(critic, real, fake.detach(), generator)
    loss = score_fake - score_real + penalty_weight * penalty
    return loss, {
        "score_real": float(score_real.detach()),
        "score_fake": float(score_fake.detach()),
        "penalty": float(penalty.detach()),
    }


def generator_loss(critic: Callable[[torch.Tensor], torch.Tensor], fake: torch.Tensor) -> torch.Tensor:
    return -critic(fake).mean()
