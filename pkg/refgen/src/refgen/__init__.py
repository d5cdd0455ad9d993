"""Reference generative models for sequential location data.

Three baselines (a noise-only LSTM GAN, an autoregressive RNN, and its
start-point-seeded variant) that train on canonical trajectory CSVs and emit
generated datasets in the same format, so an external harness can score them.
Includes a per-sample DP-SGD gradient transform and a minimal demonstration
that a concat-and-fuse noise input is trained away.
"""

__version__ = "0.1.0"
