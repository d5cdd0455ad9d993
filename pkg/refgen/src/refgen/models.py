"""The three reference models.

NTG: a GAN whose recurrent generator receives nothing but a Gaussian noise
vector, so generation never touches real trajectories and per-sample DP-SGD
on training applies cleanly.

AR: a teacher-forced recurrent regressor. The first input is Gaussian noise;
afterwards each cell's input is the previous step's real value during
training and the model's own output during generation.

START: the same network as AR; at generation time the rollout is seeded with
a real starting point instead of noise. The start point passes through to the
output verbatim, which is a documented privacy leak of this baseline.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence

import torch
from torch import nn

from refgen.config import embedding_dim
from refgen.data import ChannelSpec


def _split(x: torch.Tensor, channels: Sequence[ChannelSpec]) -> Dict[str, torch.Tensor]:
    out = {}
    offset = 0
    for ch in channels:
        out[ch.name] = x[..., offset : offset + ch.dim]
        offset += ch.dim
    return out


class NTGGenerator(nn.Module):
    """Noise vector in, full sequence out.

    The (batch, noise_dim) draw is repeated across time steps and run through
    an LSTM; per-channel heads emit tanh-bounded continuous values and
    softmax distributions for categorical channels.
    """

    def __init__(self, channels: Sequence[ChannelSpec], noise_dim: int = 100, hidden_size: int = 100):
        super().__init__()
        self.channels = tuple(channels)
        self.noise_dim = noise_dim
        self.lstm = nn.LSTM(noise_dim, hidden_size, batch_first=True)
        self.heads = nn.ModuleDict(
            {ch.name: nn.Linear(hidden_size, ch.dim) for ch in self.channels}
        )

    def forward(self, z: torch.Tensor, seq_len: int) -> Dict[str, torch.Tensor]:
        if z.dim() != 2 or z.shape[1] != self.noise_dim:
            raise ValueError(f"noise must be (batch, {self.noise_dim}), got {tuple(z.shape)}")
        h, _ = self.lstm(z.unsqueeze(1).expand(-1, seq_len, -1))
        out = {}
        for ch in self.channels:
            y = self.heads[ch.name](h)
            out[ch.name] = torch.tanh(y) if ch.kind == "continuous" else torch.softmax(y, dim=-1)
        return out

    def flat(self, z: torch.Tensor, seq_len: int) -> torch.Tensor:
        out = self.forward(z, seq_len)
        return torch.cat([out[ch.name] for ch in self.channels], dim=-1)


class NTGCritic(nn.Module):
    """Per-channel linear embeddings, an LSTM, and a scalar score read from
    each sequence's last valid step. No output squashing: this is a
    Wasserstein critic, not a classifier.
    """

    def __init__(self, channels: Sequence[ChannelSpec], hidden_size: int = 100):
        super().__init__()
        self.channels = tuple(channels)
        self.embeds = nn.ModuleDict(
            {ch.name: nn.Linear(ch.dim, embedding_dim(ch.dim, ch.kind)) for ch in self.channels}
        )
        total = sum(embedding_dim(ch.dim, ch.kind) for ch in self.channels)
        self.lstm = nn.LSTM(total, hidden_size, batch_first=True)
        self.out = nn.Linear(hidden_size, 1)

    def forward(self, x: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        parts = _split(x, self.channels)
        embedded = torch.cat(
            [torch.relu(self.embeds[ch.name](parts[ch.name])) for ch in self.channels],
            dim=-1,
        )
        h, _ = self.lstm(embedded)
        idx = (lengths - 1).view(-1, 1, 1).expand(-1, 1, h.shape[-1])
        last = h.gather(1, idx).squeeze(1)
        return self.out(last).squeeze(-1)


class ARRNN(nn.Module):
    """Step-wise recurrent regressor over a flat feature vector.

    The input projection maps each step input (noise at step 0, otherwise
    the previous value) into the same width before the LSTM; its input size
    equals its output size, the feature dimension.
    """

    def __init__(self, feature_dim: int, hidden_size: int = 100):
        super().__init__()
        self.feature_dim = feature_dim
        self.in_proj = nn.Linear(feature_dim, feature_dim)
        self.lstm = nn.LSTM(feature_dim, hidden_size, batch_first=True)
        self.out = nn.Linear(hidden_size, feature_dim)

    def forward_teacher(self, x: torch.Tensor, noise: torch.Tensor) -> torch.Tensor:
        """Predict every step of ``x`` from its predecessor (real values are
        fed back, not the model's own outputs).

        x: (B, T, D) targets; noise: (B, D) first-step input.
        Returns (B, T, D) predictions aligned with x.
        """
        inputs = torch.cat([noise.unsqueeze(1), x[:, :-1]], dim=1)
        h, _ = self.lstm(self.in_proj(inputs))
        return self.out(h)

    @torch.no_grad()
    def generate(
        self,
        n: int,
        seq_len: int,
        generator: torch.Generator,
        start: Optional[torch.Tensor] = None,
    ) -> torch.Tensor:
        """Roll the model forward on its own outputs.

        start=None draws Gaussian noise as the first input (AR mode); a
        (n, D) start tensor is emitted verbatim as step 0 and used as the
        first input (START mode).
        """
        outputs: List[torch.Tensor] = []
        state = None
        if start is None:
            step_in = torch.randn(n, self.feature_dim, generator=generator)
            remaining = seq_len
        else:
            if start.shape != (n, self.feature_dim):
                raise ValueError(f"start must be (n, {self.feature_dim}), got {tuple(start.shape)}")
            outputs.append(start)
            step_in = start
            remaining = seq_len - 1
        for _ in range(remaining):
            h, state = self.lstm(self.in_proj(step_in).unsqueeze(1), state)
            step_in = self.out(h.squeeze(1))
            outputs.append(step_in)
        return torch.stack(outputs, dim=1)
