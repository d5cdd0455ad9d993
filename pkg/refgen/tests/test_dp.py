"""Per-sample gradient transform: clipping, noise calibration, identity."""

import json
import math
import pathlib

import pytest
import torch
from torch import nn

from refgen.config import DPConfig, default_config
from refgen.dp import UNIT_OF_PRIVACY, DPSGDHook, apply_grad_step, dp_sgd_hook
from refgen.train import train_ar


class OneParam(nn.Module):
    """Loss w per sample: the per-sample gradient is exactly 1."""

    def __init__(self):
        super().__init__()
        self.w = nn.Parameter(torch.zeros(1))

    def losses(self, batch):
        return self.w.expand(batch)


class ScaledLosses(nn.Module):
    """Loss a_i * w per sample: per-sample gradient is a_i."""

    def __init__(self):
        super().__init__()
        self.w = nn.Parameter(torch.zeros(1))

    def losses(self, a):
        return a * self.w


class TestClipping:
    def test_binding_clip_records_exactly_c(self):
        model = OneParam()
        hook = DPSGDHook(DPConfig(clip_norm=0.5))
        hook.step(model, model.losses(6))
        assert hook.last_per_sample_norms == pytest.approx([0.5] * 6)

    def test_slack_clip_keeps_norm(self):
        model = OneParam()
        hook = DPSGDHook(DPConfig(clip_norm=2.0))
        hook.step(model, model.losses(4))
        assert hook.last_per_sample_norms == pytest.approx([1.0] * 4)

    def test_mixed_clip_grad_value(self):
        # grads 3 and -4 clip to +1 and -1; their mean is 0
        model = ScaledLosses()
        hook = DPSGDHook(DPConfig(clip_norm=1.0))
        hook.step(model, model.losses(torch.tensor([3.0, -4.0])))
        assert float(model.w.grad[0]) == pytest.approx(0.0, abs=1e-7)
        assert hook.last_per_sample_norms == pytest.approx([1.0, 1.0])

    def test_infinite_clip_passthrough(self):
        model = ScaledLosses()
        hook = DPSGDHook(DPConfig())
        hook.step(model, model.losses(torch.tensor([3.0, -4.0])))
        # untouched mean gradient: (3 - 4) / 2
        assert float(model.w.grad[0]) == pytest.approx(-0.5, abs=1e-7)
        assert hook.last_per_sample_norms == pytest.approx([3.0, 4.0])

    def test_unused_parameter_contributes_zero(self):
        class TwoParam(nn.Module):
            def __init__(self):
                super().__init__()
                self.used = nn.Parameter(torch.zeros(1))
                self.idle = nn.Parameter(torch.ones(2))

        model = TwoParam()
        hook = DPSGDHook(DPConfig(clip_norm=1.0))
        hook.step(model, model.used.expand(3))
        assert torch.equal(model.idle.grad, torch.zeros(2))

    def test_bad_losses_rejected(self):
        model = OneParam()
        hook = DPSGDHook(DPConfig())
        with pytest.raises(ValueError, match="1-D"):
            hook.step(model, model.losses(4).reshape(2, 2))
        with pytest.raises(ValueError, match="non-empty"):
            hook.step(model, model.w.expand(0))


class TestNoise:
    def test_std_matches_sigma_times_clip(self):
        # constant unit gradients clipped to C turn the observed gradient into
        # C + N(0, (sigma C)^2)/B, so the injected noise can be read back out
        B, C, sigma, steps = 8, 0.5, 2.0, 1000
        model = OneParam()
        hook = DPSGDHook(
            DPConfig(clip_norm=C, noise_multiplier=sigma),
            torch.Generator().manual_seed(4),
        )
        draws = []
        for _ in range(steps):
            hook.step(model, model.losses(B))
            draws.append(float(model.w.grad[0]) * B - B * C)
        t = torch.tensor(draws)
        emp_std = float(t.std(unbiased=True))
        assert abs(emp_std - sigma * C) / (sigma * C) < 0.05
        # mean should sit within a few standard errors of zero
        assert abs(float(t.mean())) < 5 * sigma * C / math.sqrt(steps)

    def test_sigma_zero_adds_nothing(self):
        model = OneParam()
        hook = DPSGDHook(DPConfig(clip_norm=0.5, noise_multiplier=0.0))
        for _ in range(3):
            hook.step(model, model.losses(4))
            assert float(model.w.grad[0]) == pytest.approx(0.5, abs=1e-7)

    def test_noise_std_attribute(self):
        assert DPSGDHook(DPConfig(clip_norm=0.5, noise_multiplier=2.0)).noise_std == 1.0
        assert DPSGDHook(DPConfig()).noise_std == 0.0


class TestIdentityEquivalence:
    def test_hook_with_identity_config_matches_plain_training(
        self, spatial_corpus, tmp_path
    ):
        curves = {}
        for name, dp in [("plain", None), ("identity", DPConfig())]:
            out = tmp_path / name
            train_ar(
                spatial_corpus,
                default_config("ar_rnn", "fs", epochs=5, seed=9, dp=dp),
                out,
            )
            curves[name] = json.loads(
                (out / "ar_rnn_training_log.json").read_text()
            )["loss"]
        assert len(curves["plain"]) == len(curves["identity"])
        for a, b in zip(curves["plain"], curves["identity"]):
            assert abs(a - b) <= 1e-5 * max(abs(a), 1e-12)


class TestPlumbing:
    def test_unit_of_privacy(self):
        assert UNIT_OF_PRIVACY == "instance"

    def test_hook_factory(self):
        assert dp_sgd_hook(None) is None
        assert isinstance(dp_sgd_hook(DPConfig()), DPSGDHook)

    def test_apply_grad_step_paths_agree_without_dp(self):
        results = []
        for hook_cfg in (None, DPConfig()):
            torch.manual_seed(0)
            model = nn.Linear(3, 1)
            opt = torch.optim.SGD(model.parameters(), lr=0.1)
            x = torch.randn(5, 3, generator=torch.Generator().manual_seed(1))
            losses = model(x).squeeze(-1).pow(2)
            val = apply_grad_step(model, opt, losses, dp_sgd_hook(hook_cfg))
            results.append((val, model.weight.detach().clone()))
        assert results[0][0] == pytest.approx(results[1][0], rel=1e-6)
        torch.testing.assert_close(results[0][1], results[1][1], rtol=1e-5, atol=1e-7)
