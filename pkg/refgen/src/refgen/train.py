"""Training entry points. Each writes a checkpoint plus a loss-curve log."""

from __future__ import annotations

import json
import math
from dataclasses import asdict
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
import torch

from refgen.config import GeneratorConfig
from refgen.data import Corpus, batches, pad_batch
from refgen.dp import apply_grad_step, dp_sgd_hook
from refgen.losses import critic_loss, generator_loss
from refgen.models import ARRNN, NTGCritic, NTGGenerator


class TrainingDiverged(RuntimeError):
    def __init__(self, what: str, step: int, value: float):
        super().__init__(
            f"{what} became non-finite ({value}) at step {step}; "
            "lower the learning rate or inspect the input scaling"
        )


def _check_finite(value: float, what: str, step: int) -> float:
    if not math.isfinite(value):
        raise TrainingDiverged(what, step, value)
    return value


def _save_checkpoint(
    path: Path, kind: str, state_dict: dict, cfg: GeneratorConfig, corpus: Corpus
) -> Path:
    # plain Python scalars only, so the file stays weights_only-loadable
    norm = None
    if corpus.norm is not None:
        norm = {k: (v if isinstance(v, str) else float(v)) for k, v in corpus.norm.items()}
    torch.save(
        {
            "kind": kind,
            "state_dict": state_dict,
            "cfg": asdict(cfg),
            "channels": [(c.name, c.dim, c.kind) for c in corpus.channels],
            "norm": norm,
            "normalized": bool(corpus.normalized),
            "lengths": sorted(int(n) for n in corpus.lengths),
            "start_points": corpus.start_points.tolist(),
            "mnist": bool(corpus.mnist),
        },
        path,
    )
    return path


def _write_log(out_dir: Path, name: str, curves: Dict[str, list]) -> Path:
    log_path = out_dir / f"{name}_training_log.json"
    with log_path.open("w") as f:
        json.dump(curves, f, indent=2, sort_keys=True)
        f.write("\n")
    return log_path


def train_ntg(corpus: Corpus, cfg: GeneratorConfig, out_dir: Union[str, Path]) -> Path:
    """Adversarial training: n_critic critic updates per generator update,
    Lipschitz-penalized Wasserstein loss."""
    if cfg.model != "ntg":
        raise ValueError(f"config is for {cfg.model!r}, expected 'ntg'")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    torch.manual_seed(cfg.seed)
    gen_model = NTGGenerator(corpus.channels, cfg.noise_dim, cfg.hidden_size)
    critic = NTGCritic(corpus.channels, cfg.hidden_size)
    opt_g = torch.optim.AdamW(gen_model.parameters(), lr=cfg.lr_gen, betas=(cfg.beta1, cfg.beta2))
    opt_d = torch.optim.AdamW(critic.parameters(), lr=cfg.lr_dis, betas=(cfg.beta1, cfg.beta2))
    torch_gen = torch.Generator().manual_seed(cfg.seed)
    hook = dp_sgd_hook(cfg.dp, torch.Generator().manual_seed(cfg.seed + 1))

    rng = np.random.default_rng(cfg.seed)
    d_curve: List[float] = []
    g_curve: List[float] = []
    step = 0
    for _ in range(cfg.epochs):
        for idx in batches(len(corpus.sequences), cfg.batch_size, rng):
            real_np, lengths_np = pad_batch([corpus.sequences[i] for i in idx])
            real = torch.from_numpy(real_np)
            lengths = torch.from_numpy(lengths_np)
            seq_len = int(lengths.max())

            def crit(x, _lengths=lengths):
                return critic(x, _lengths)

            z = torch.randn(len(idx), cfg.noise_dim, generator=torch_gen)
            fake = gen_model.flat(z, seq_len)
            if hook is None:
                d_loss, _ = critic_loss(crit, real, fake, cfg.penalty_weight, torch_gen)
                opt_d.zero_grad(set_to_none=True)
                d_loss.backward()
                opt_d.step()
                d_val = float(d_loss.detach())
            else:
                # per-sample critic losses so the clip applies per training
                # sample; the penalty pairs each real sample with one fake
                fake_d = fake.detach()
                per_sample = (
                    crit(fake_d)
                    - crit(real)
                    + cfg.penalty_weight * _per_sample_penalty(crit, real, fake_d, torch_gen)
                )
                d_val = apply_grad_step(critic, opt_d, per_sample, hook)
            _check_finite(d_val, "critic loss", step)
            d_curve.append(d_val)

            if step % cfg.n_critic == 0:
                z = torch.randn(len(idx), cfg.noise_dim, generator=torch_gen)
                g_loss = generator_loss(crit, gen_model.flat(z, seq_len))
                opt_g.zero_grad(set_to_none=True)
                g_loss.backward()
                opt_g.step()
                g_curve.append(_check_finite(float(g_loss.detach()), "generator loss", step))
            step += 1

    _write_log(out_dir, "ntg", {"critic_loss": d_curve, "generator_loss": g_curve})
    return _save_checkpoint(out_dir / "ntg_checkpoint.pt", "ntg", gen_model.state_dict(), cfg, corpus)


def _per_sample_penalty(crit, real: torch.Tensor, fake: torch.Tensor, generator) -> torch.Tensor:
    alpha_shape = (real.shape[0],) + (1,) * (real.dim() - 1)
    alpha = torch.rand(alpha_shape, generator=generator)
    x_hat = (alpha * real + (1.0 - alpha) * fake).detach().requires_grad_(True)
    scores = crit(x_hat)
    grads = torch.autograd.grad(scores.sum(), x_hat, create_graph=True)[0]
    norms = grads.flatten(start_dim=1).norm(dim=1)
    return torch.clamp(norms - 1.0, min=0.0).pow(2)


def _train_regressor(
    corpus: Corpus, cfg: GeneratorConfig, out_dir: Union[str, Path], kind: str
) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if any(ch.kind != "continuous" for ch in corpus.channels):
        raise ValueError("regression baselines train on continuous channels only")
    feature_dim = corpus.feature_dim
    if cfg.noise_dim != feature_dim:
        raise ValueError(
            f"noise_dim must equal the feature dimension {feature_dim}, got {cfg.noise_dim}"
        )
    torch.manual_seed(cfg.seed)
    model = ARRNN(feature_dim, cfg.hidden_size)
    opt = torch.optim.AdamW(model.parameters(), lr=cfg.lr_gen, betas=(cfg.beta1, cfg.beta2))
    torch_gen = torch.Generator().manual_seed(cfg.seed)
    hook = dp_sgd_hook(cfg.dp, torch.Generator().manual_seed(cfg.seed + 1))

    rng = np.random.default_rng(cfg.seed)
    curve: List[float] = []
    step = 0
    for _ in range(cfg.epochs):
        for idx in batches(len(corpus.sequences), cfg.batch_size, rng):
            x_np, lengths_np = pad_batch([corpus.sequences[i] for i in idx])
            x = torch.from_numpy(x_np)
            lengths = torch.from_numpy(lengths_np)
            noise = torch.randn(len(idx), feature_dim, generator=torch_gen)
            pred = model.forward_teacher(x, noise)
            mask = (torch.arange(x.shape[1]).unsqueeze(0) < lengths.unsqueeze(1)).float()
            per_sample = ((pred - x).pow(2).mean(dim=2) * mask).sum(dim=1) / mask.sum(dim=1)
            loss_val = apply_grad_step(model, opt, per_sample, hook)
            _check_finite(loss_val, "loss", step)
            curve.append(loss_val)
            step += 1

    _write_log(out_dir, kind, {"loss": curve})
    return _save_checkpoint(out_dir / f"{kind}_checkpoint.pt", kind, model.state_dict(), cfg, corpus)


def train_ar(corpus: Corpus, cfg: GeneratorConfig, out_dir: Union[str, Path]) -> Path:
    if cfg.model != "ar_rnn":
        raise ValueError(f"config is for {cfg.model!r}, expected 'ar_rnn'")
    return _train_regressor(corpus, cfg, out_dir, "ar_rnn")


def train_start(corpus: Corpus, cfg: GeneratorConfig, out_dir: Union[str, Path]) -> Path:
    if cfg.model != "start_rnn":
        raise ValueError(f"config is for {cfg.model!r}, expected 'start_rnn'")
    return _train_regressor(corpus, cfg, out_dir, "start_rnn")
