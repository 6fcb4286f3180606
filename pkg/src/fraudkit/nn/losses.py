"""Binary cross-entropy on sigmoid probabilities."""

import numpy as np

EPS = 1e-7


def bce_loss(p, y):
    """Mean BCE over the batch; p clamped to [EPS, 1 - EPS]."""
    p = np.clip(np.asarray(p, dtype=np.float64), EPS, 1.0 - EPS)
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


def bce_loss_grad(p, y):
    """Gradient of the mean BCE w.r.t. p (zero where the clamp binds)."""
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    pc = np.clip(p, EPS, 1.0 - EPS)
    grad = (pc - y) / (pc * (1.0 - pc)) / p.size
    return np.where((p >= EPS) & (p <= 1.0 - EPS), grad, 0.0)
