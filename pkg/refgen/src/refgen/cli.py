"""Command line front end: train, generate, fusion-demo."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from refgen.config import DATASETS, MODELS, DPConfig, default_config
from refgen.data import (
    corpus_from_dataset,
    corpus_from_mnist,
    read_canonical,
    read_idx_images,
    synthetic_mnist_seq,
)
from refgen.fusion_demo import fusion_noise_demo
from refgen.generate import generate
from refgen.train import train_ar, train_ntg, train_start

_TRAINERS = {"ntg": train_ntg, "ar_rnn": train_ar, "start_rnn": train_start}


def _load_corpus(model: str, dataset: str, input_path: str):
    if dataset == "mnist_seq":
        path = Path(input_path)
        if input_path.startswith("synthetic:"):
            n = int(input_path.split(":", 1)[1])
            return corpus_from_mnist(synthetic_mnist_seq(n))
        return corpus_from_mnist(read_idx_images(path))
    ds = read_canonical(input_path)
    # the regression baselines model the coordinate stream only
    return corpus_from_dataset(ds, spatial_only=model in ("ar_rnn", "start_rnn"))


def _cmd_train(args: argparse.Namespace) -> int:
    overrides = {}
    for name in ("epochs", "batch_size", "lr_gen", "lr_dis", "n_critic", "seed"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.dp_noise_multiplier or args.dp_clip_norm:
        overrides["dp"] = DPConfig(
            clip_norm=args.dp_clip_norm if args.dp_clip_norm else float("inf"),
            noise_multiplier=args.dp_noise_multiplier or 0.0,
        )
    cfg = default_config(args.model, args.dataset, **overrides)
    corpus = _load_corpus(args.model, args.dataset, args.input)
    ckpt = _TRAINERS[args.model](corpus, cfg, args.out)
    print(f"checkpoint written to {ckpt}")
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    out = generate(args.checkpoint, args.n, args.seed, args.output, seq_len=args.seq_len)
    print(f"wrote {args.n} sequences to {out}")
    return 0


def _cmd_fusion_demo(args: argparse.Namespace) -> int:
    result = fusion_noise_demo(
        steps=args.steps, dim=args.dim, batch=args.batch, lr=args.lr, seed=args.seed
    )
    summary = {
        "steps": result["steps"],
        "final_ratio": result["final_ratio"],
        "final_ls": result["final_ls"],
    }
    if args.out:
        with Path(args.out).open("w") as f:
            json.dump(
                {**summary, "ratio_curve": result["ratio_curve"], "ls_curve": result["ls_curve"]},
                f,
            )
            f.write("\n")
    print(json.dumps(summary))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="refgen", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model and write a checkpoint")
    p_train.add_argument("--model", required=True, choices=MODELS)
    p_train.add_argument("--dataset", required=True, choices=DATASETS)
    p_train.add_argument(
        "--input",
        required=True,
        help="canonical CSV, idx3 image file, or synthetic:N for a built-in corpus",
    )
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.add_argument("--epochs", type=int, default=None)
    p_train.add_argument("--batch-size", type=int, default=None)
    p_train.add_argument("--lr-gen", type=float, default=None)
    p_train.add_argument("--lr-dis", type=float, default=None)
    p_train.add_argument("--n-critic", type=int, default=None)
    p_train.add_argument("--seed", type=int, default=None)
    p_train.add_argument("--dp-clip-norm", type=float, default=None)
    p_train.add_argument("--dp-noise-multiplier", type=float, default=None)
    p_train.set_defaults(func=_cmd_train)

    p_gen = sub.add_parser("generate", help="sample a checkpoint into a canonical file")
    p_gen.add_argument("--checkpoint", required=True)
    p_gen.add_argument("-n", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--output", required=True)
    p_gen.add_argument("--seq-len", type=int, default=None)
    p_gen.set_defaults(func=_cmd_generate)

    p_fus = sub.add_parser("fusion-demo", help="train the two-input fusion layer demo")
    p_fus.add_argument("--steps", type=int, default=10_000)
    p_fus.add_argument("--dim", type=int, default=2)
    p_fus.add_argument("--batch", type=int, default=256)
    p_fus.add_argument("--lr", type=float, default=0.05)
    p_fus.add_argument("--seed", type=int, default=0)
    p_fus.add_argument("--out", default=None, help="optional JSON file for the full curves")
    p_fus.set_defaults(func=_cmd_fusion_demo)

    return parser


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
