"""Adam optimizer with bias-corrected moment estimates."""

from __future__ import annotations

import numpy as np


class NonFiniteGradient(RuntimeError):
    pass


class Adam:
    """Per-parameter first/second moment tracking.

    Update: m <- b1*m + (1-b1)g; v <- b2*v + (1-b2)g^2;
    with correction m_hat = m/(1-b1^t), v_hat = v/(1-b2^t);
    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
    """

    def __init__(self, params: list[np.ndarray], lr: float = 0.001,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
                 bias_correction: bool = True):
        if lr <= 0:
            raise ValueError("lr must be positive")
        if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
            raise ValueError("betas must be in [0, 1)")
        if eps <= 0:
            raise ValueError("eps must be positive")
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.bias_correction = bias_correction
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, grads: list[np.ndarray]) -> None:
        if len(grads) != len(self.params):
            raise ValueError("grads/params length mismatch")
        for g in grads:
            if not np.all(np.isfinite(g)):
                raise NonFiniteGradient("non-finite gradient")
        self.t += 1
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            if self.bias_correction:
                m_hat = m / (1 - self.beta1 ** self.t)
                v_hat = v / (1 - self.beta2 ** self.t)
            else:
                m_hat, v_hat = m, v
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
