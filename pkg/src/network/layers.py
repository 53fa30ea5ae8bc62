"""
Layer primitives for the 1-D convolutional network

Activations are channels-last: (batch, length, channels). Every forward
returns (output, cache); the matching backward takes the upstream gradient
and that cache.
"""
from typing import Dict, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BN_EPSILON = 1e-5
BN_MOMENTUM = 0.1


def conv1d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, Dict]:
    """
    Valid, stride-1 cross-correlation.

    x: (N, L, C), w: (K, C, F), b: (F,) -> (N, L - K + 1, F)
    """
    k = w.shape[0]
    windows = sliding_window_view(x, k, axis=1)  # (N, L-K+1, C, K)
    out = np.einsum("nlck,kcf->nlf", windows, w, optimize=True) + b
    return out, {"x": x, "windows": windows, "w": w}


def conv1d_backward(dout: np.ndarray, cache: Dict) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x, windows, w = cache["x"], cache["windows"], cache["w"]
    k = w.shape[0]
    out_len = dout.shape[1]
    dw = np.einsum("nlck,nlf->kcf", windows, dout, optimize=True)
    db = dout.sum(axis=(0, 1))
    dx = np.zeros_like(x)
    for offset in range(k):
        dx[:, offset:offset + out_len, :] += dout @ w[offset].T
    return dx, dw, db


def batchnorm_forward(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray,
                      running_mean: np.ndarray, running_var: np.ndarray,
                      train: bool, momentum: float = BN_MOMENTUM,
                      eps: float = BN_EPSILON) -> Tuple[np.ndarray, Dict]:
    """
    Per-channel normalization over batch and length axes.

    Train mode normalizes with batch statistics and returns updated running
    statistics in the cache ("running_mean", "running_var"); eval mode uses
    the stored running statistics and leaves them unchanged.
    """
    if train:
        mean = x.mean(axis=(0, 1))
        var = x.var(axis=(0, 1))
        new_mean = (1.0 - momentum) * running_mean + momentum * mean
        new_var = (1.0 - momentum) * running_var + momentum * var
    else:
        mean, var = running_mean, running_var
        new_mean, new_var = running_mean, running_var
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = (x - mean) * inv_std
    out = gamma * x_hat + beta
    return out, {
        "x_hat": x_hat, "inv_std": inv_std, "gamma": gamma, "train": train,
        "running_mean": new_mean, "running_var": new_var,
    }


def batchnorm_backward(dout: np.ndarray, cache: Dict) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x_hat, inv_std, gamma = cache["x_hat"], cache["inv_std"], cache["gamma"]
    dgamma = (dout * x_hat).sum(axis=(0, 1))
    dbeta = dout.sum(axis=(0, 1))
    dx_hat = dout * gamma
    if not cache["train"]:
        return dx_hat * inv_std, dgamma, dbeta
    m = dout.shape[0] * dout.shape[1]
    dx = (inv_std / m) * (
        m * dx_hat
        - dx_hat.sum(axis=(0, 1))
        - x_hat * (dx_hat * x_hat).sum(axis=(0, 1))
    )
    return dx, dgamma, dbeta


def relu_forward(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mask = x > 0
    return np.where(mask, x, 0.0), mask


def relu_backward(dout: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return dout * mask


def maxpool_forward(x: np.ndarray, width: int = 2) -> Tuple[np.ndarray, Dict]:
    """Non-overlapping max pooling (stride = width); a trailing remainder is dropped."""
    n, length, c = x.shape
    pooled = length // width
    blocks = x[:, :pooled * width, :].reshape(n, pooled, width, c)
    argmax = blocks.argmax(axis=2)
    out = np.take_along_axis(blocks, argmax[:, :, None, :], axis=2)[:, :, 0, :]
    return out, {"shape": x.shape, "argmax": argmax, "width": width}


def maxpool_backward(dout: np.ndarray, cache: Dict) -> np.ndarray:
    n, length, c = cache["shape"]
    width, argmax = cache["width"], cache["argmax"]
    pooled = dout.shape[1]
    hit = np.arange(width)[None, None, :, None] == argmax[:, :, None, :]
    dx = np.zeros((n, length, c))
    dx[:, :pooled * width, :] = (hit * dout[:, :, None, :]).reshape(n, pooled * width, c)
    return dx


def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, Dict]:
    return x @ w + b, {"x": x, "w": w}


def dense_backward(dout: np.ndarray, cache: Dict) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return dout @ cache["w"].T, cache["x"].T @ dout, dout.sum(axis=0)


def dropout_mask(shape: Tuple[int, ...], rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout mask: kept units are scaled by 1 / (1 - rate)."""
    if rate <= 0:
        return np.ones(shape)
    return (rng.random(shape) >= rate) / (1.0 - rate)


def dropout_forward(x: np.ndarray, mask: Optional[np.ndarray]) -> np.ndarray:
    return x if mask is None else x * mask


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def softmax_favorable_backward(d_favorable: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. the two logits given dL/dp for p = softmax(z)[:, 1]."""
    scale = d_favorable * probs[:, 0] * probs[:, 1]
    return np.column_stack([-scale, scale])
