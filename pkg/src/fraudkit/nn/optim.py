"""Adaptive-moment optimizer with bias correction."""

import numpy as np


class Adam:
    def __init__(self, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m = {}
        self._v = {}

    def step(self, named_params, named_grads):
        """In-place update; named_params/named_grads map key -> array."""
        self.step_count += 1
        t = self.step_count
        for key, p in named_params.items():
            g = named_grads[key]
            if p.shape != g.shape:
                raise ValueError(f"shape mismatch for {key}: {p.shape} vs {g.shape}")
            m = self._m.setdefault(key, np.zeros_like(p))
            v = self._v.setdefault(key, np.zeros_like(p))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g**2
            m_hat = m / (1.0 - self.beta1**t)
            v_hat = v / (1.0 - self.beta2**t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
