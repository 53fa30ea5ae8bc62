"""
1-D CNN for pain-status classification

Architecture:
1. conv1 (64 filters, width 3, valid) -> batch-norm -> ReLU -> max-pool (2, stride 2)
2. conv2 (32 filters, width 3, valid) -> batch-norm -> ReLU -> max-pool (2, stride 2)
3. flatten -> dense 512 -> ReLU -> dropout (train only)
4. dense 2 -> softmax

Parameters are immutable snapshots; training produces new ones.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from src.config.settings import PARAMETER_FORMAT_VERSION
from src.network import layers
from src.utils.errors import PainFairError, ShapeMismatchError
from src.utils.logger import get_pipeline_logger

logger = get_pipeline_logger()

RUNNING_STATS = ("bn1_mean", "bn1_var", "bn2_mean", "bn2_var")


@dataclass(frozen=True)
class NetworkShape:
    """Layer sizes; ``flatten_width`` is the symbolic shape calculator"""
    input_width: int
    in_channels: int = 1
    filters: Tuple[int, int] = (64, 32)
    kernel: int = 3
    pool: int = 2
    hidden: int = 512
    classes: int = 2

    def __post_init__(self):
        if self.pooled_lengths()[1] < 1:
            raise PainFairError(f"input width {self.input_width} too small for this network")

    @classmethod
    def reduced(cls, input_width: int = 32) -> "NetworkShape":
        """Small network used for gradient checks"""
        return cls(input_width=input_width, filters=(4, 3), hidden=8)

    def conv_lengths(self) -> Tuple[int, int]:
        first = self.input_width - self.kernel + 1
        second = first // self.pool - self.kernel + 1
        return first, second

    def pooled_lengths(self) -> Tuple[int, int]:
        first, second = self.conv_lengths()
        return first // self.pool, max(second, 0) // self.pool

    def flatten_width(self) -> int:
        return self.pooled_lengths()[1] * self.filters[1]

    def parameter_shapes(self) -> Dict[str, Tuple[int, ...]]:
        f1, f2 = self.filters
        return {
            "conv1_w": (self.kernel, self.in_channels, f1), "conv1_b": (f1,),
            "bn1_gamma": (f1,), "bn1_beta": (f1,), "bn1_mean": (f1,), "bn1_var": (f1,),
            "conv2_w": (self.kernel, f1, f2), "conv2_b": (f2,),
            "bn2_gamma": (f2,), "bn2_beta": (f2,), "bn2_mean": (f2,), "bn2_var": (f2,),
            "dense1_w": (self.flatten_width(), self.hidden), "dense1_b": (self.hidden,),
            "out_w": (self.hidden, self.classes), "out_b": (self.classes,),
        }

    def to_dict(self) -> Dict:
        return {
            "input_width": self.input_width, "in_channels": self.in_channels,
            "filters": list(self.filters), "kernel": self.kernel, "pool": self.pool,
            "hidden": self.hidden, "classes": self.classes,
        }

    @classmethod
    def from_dict(cls, payload: Dict) -> "NetworkShape":
        return cls(**{**payload, "filters": tuple(payload["filters"])})


@dataclass(frozen=True, eq=False)
class NetworkParameters:
    shape: NetworkShape
    arrays: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        expected = self.shape.parameter_shapes()
        arrays = {}
        for name, dims in expected.items():
            if name not in self.arrays:
                raise PainFairError(f"missing parameter '{name}'")
            arr = np.array(self.arrays[name], dtype=float, copy=True)
            if arr.shape != dims:
                raise ShapeMismatchError(name, dims, arr.shape)
            if not np.all(np.isfinite(arr)):
                raise PainFairError(f"parameter '{name}' has non-finite entries")
            arr.setflags(write=False)
            arrays[name] = arr
        object.__setattr__(self, "arrays", arrays)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    @property
    def trainable(self) -> Tuple[str, ...]:
        return tuple(n for n in self.arrays if n not in RUNNING_STATS)

    def replace(self, **updates: np.ndarray) -> "NetworkParameters":
        return NetworkParameters(self.shape, {**self.arrays, **updates})

    def parameter_count(self) -> int:
        return int(sum(self.arrays[n].size for n in self.trainable))

    def save(self, path: Union[str, Path]) -> Path:
        """Write ``<path>.npz`` plus a ``<path>.json`` shape manifest"""
        path = Path(path).with_suffix("")
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez(path.with_suffix(".npz"), **self.arrays)
        manifest = {
            "format_version": PARAMETER_FORMAT_VERSION,
            "shape": self.shape.to_dict(),
            "arrays": {name: list(arr.shape) for name, arr in self.arrays.items()},
        }
        path.with_suffix(".json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
        logger.info(f"Saved {self.parameter_count()} network parameters to {path}.npz")
        return path.with_suffix(".npz")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "NetworkParameters":
        path = Path(path).with_suffix("")
        manifest = json.loads(path.with_suffix(".json").read_text())
        if manifest.get("format_version") != PARAMETER_FORMAT_VERSION:
            raise PainFairError(
                f"parameter format {manifest.get('format_version')} != {PARAMETER_FORMAT_VERSION}"
            )
        shape = NetworkShape.from_dict(manifest["shape"])
        with np.load(path.with_suffix(".npz")) as data:
            arrays = {name: data[name] for name in data.files}
        return cls(shape, arrays)


def init_parameters(shape: NetworkShape, seed: Optional[int] = None,
                    rng: Optional[np.random.Generator] = None) -> NetworkParameters:
    """He-normal weights, zero biases, identity batch-norm."""
    rng = rng or np.random.default_rng(seed)
    fan_in = {
        "conv1_w": shape.kernel * shape.in_channels,
        "conv2_w": shape.kernel * shape.filters[0],
        "dense1_w": shape.flatten_width(),
        "out_w": shape.hidden,
    }
    arrays = {}
    for name, dims in shape.parameter_shapes().items():
        if name in fan_in:
            arrays[name] = rng.normal(0.0, np.sqrt(2.0 / fan_in[name]), size=dims)
        elif name.endswith(("_gamma", "_var")):
            arrays[name] = np.ones(dims)
        else:
            arrays[name] = np.zeros(dims)
    return NetworkParameters(shape, arrays)


def _as_batch(params: NetworkParameters, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    shape = params.shape
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim == 2:
        x = x[:, :, None]
    expected = (shape.input_width, shape.in_channels)
    if x.ndim != 3 or x.shape[1:] != expected:
        raise ShapeMismatchError("network input", ("batch",) + expected, x.shape)
    return x


def forward(params: NetworkParameters, x: np.ndarray, mode: str = "eval",
            dropout_rate: float = 0.0, rng: Optional[np.random.Generator] = None,
            dropout_mask: Optional[np.ndarray] = None) -> Tuple[np.ndarray, Dict]:
    """
    Run the network on a batch

    Args:
        params: Network parameters
        x: (N, width) or (N, width, in_channels)
        mode: "train" uses batch statistics and dropout, "eval" neither
        dropout_rate: Hidden-layer dropout rate (train mode)
        rng: Generator for the dropout mask
        dropout_mask: Fixed mask, overrides ``rng``

    Returns:
        (class probabilities (N, 2), cache); the cache holds the updated
        running statistics under "running"
    """
    if mode not in ("train", "eval"):
        raise PainFairError(f"Unknown mode '{mode}'")
    train = mode == "train"
    x = _as_batch(params, x)
    pool = params.shape.pool
    cache: Dict = {}

    h, cache["conv1"] = layers.conv1d_forward(x, params["conv1_w"], params["conv1_b"])
    h, cache["bn1"] = layers.batchnorm_forward(h, params["bn1_gamma"], params["bn1_beta"],
                                               params["bn1_mean"], params["bn1_var"], train)
    h, cache["relu1"] = layers.relu_forward(h)
    h, cache["pool1"] = layers.maxpool_forward(h, pool)

    h, cache["conv2"] = layers.conv1d_forward(h, params["conv2_w"], params["conv2_b"])
    h, cache["bn2"] = layers.batchnorm_forward(h, params["bn2_gamma"], params["bn2_beta"],
                                               params["bn2_mean"], params["bn2_var"], train)
    h, cache["relu2"] = layers.relu_forward(h)
    h, cache["pool2"] = layers.maxpool_forward(h, pool)

    cache["flat_shape"] = h.shape
    h = h.reshape(h.shape[0], -1)
    h, cache["dense1"] = layers.dense_forward(h, params["dense1_w"], params["dense1_b"])
    h, cache["relu3"] = layers.relu_forward(h)

    if train and dropout_mask is None and dropout_rate > 0:
        dropout_mask = layers.dropout_mask(h.shape, dropout_rate, rng or np.random.default_rng())
    if not train:
        dropout_mask = None
    cache["dropout"] = dropout_mask
    h = layers.dropout_forward(h, dropout_mask)

    logits, cache["out"] = layers.dense_forward(h, params["out_w"], params["out_b"])
    probs = layers.softmax(logits)
    cache["probs"] = probs
    cache["running"] = {
        "bn1_mean": cache["bn1"]["running_mean"], "bn1_var": cache["bn1"]["running_var"],
        "bn2_mean": cache["bn2"]["running_mean"], "bn2_var": cache["bn2"]["running_var"],
    }
    return probs, cache


def backward(params: NetworkParameters, cache: Dict, d_favorable: np.ndarray) -> Dict[str, np.ndarray]:
    """
    Gradients of every trainable parameter

    Args:
        params: Parameters used for the forward pass
        cache: Cache returned by ``forward``
        d_favorable: dLoss/dp for p the favorable-class probability, shape (N,)

    Returns:
        name -> gradient, same shapes as the parameters
    """
    grads: Dict[str, np.ndarray] = {}
    dz = layers.softmax_favorable_backward(np.asarray(d_favorable, dtype=float), cache["probs"])

    dh, grads["out_w"], grads["out_b"] = layers.dense_backward(dz, cache["out"])
    if cache["dropout"] is not None:
        dh = dh * cache["dropout"]
    dh = layers.relu_backward(dh, cache["relu3"])
    dh, grads["dense1_w"], grads["dense1_b"] = layers.dense_backward(dh, cache["dense1"])
    dh = dh.reshape(cache["flat_shape"])

    dh = layers.maxpool_backward(dh, cache["pool2"])
    dh = layers.relu_backward(dh, cache["relu2"])
    dh, grads["bn2_gamma"], grads["bn2_beta"] = layers.batchnorm_backward(dh, cache["bn2"])
    dh, grads["conv2_w"], grads["conv2_b"] = layers.conv1d_backward(dh, cache["conv2"])

    dh = layers.maxpool_backward(dh, cache["pool1"])
    dh = layers.relu_backward(dh, cache["relu1"])
    dh, grads["bn1_gamma"], grads["bn1_beta"] = layers.batchnorm_backward(dh, cache["bn1"])
    _, grads["conv1_w"], grads["conv1_b"] = layers.conv1d_backward(dh, cache["conv1"])
    return {name: grads[name] for name in params.trainable}


def activation_pattern(cache: Dict) -> Tuple[bytes, ...]:
    """ReLU and max-pool selections; equal patterns mean the same piecewise-linear region."""
    return tuple(
        np.ascontiguousarray(part).tobytes()
        for part in (cache["relu1"], cache["relu2"], cache["relu3"],
                     cache["pool1"]["argmax"], cache["pool2"]["argmax"])
    )


@dataclass(frozen=True)
class Prediction:
    probabilities: Tuple[float, float]
    predicted_class: int
    favorable_probability: float


def predict_proba(params: NetworkParameters, x: np.ndarray, chunk_size: int = 64) -> np.ndarray:
    """Eval-mode class probabilities (N, 2), computed in chunks to bound memory"""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    parts = [forward(params, x[start:start + chunk_size], mode="eval")[0]
             for start in range(0, x.shape[0], chunk_size)]
    return np.vstack(parts) if parts else np.zeros((0, params.shape.classes))


def predict_classes(params: NetworkParameters, x: np.ndarray) -> np.ndarray:
    # argmax keeps the first maximum, so ties go to class 0
    return predict_proba(params, x).argmax(axis=1).astype(int)


def predict(params: NetworkParameters, instance: np.ndarray) -> Prediction:
    probs = predict_proba(params, np.asarray(instance, dtype=float)[None, ...])[0]
    return Prediction(
        probabilities=(float(probs[0]), float(probs[1])),
        predicted_class=int(np.argmax(probs)),
        favorable_probability=float(probs[1]),
    )
