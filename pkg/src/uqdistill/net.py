"""Minimal feed-forward classifier with explicit forward and backward passes.

Everything is float64 numpy. A model is a list of dense layers; hidden
layers use ReLU, the final layer emits raw logits. Training-mode forward
applies inverted dropout (scale by 1/keep_prob) to hidden activations, so
evaluation needs no rescaling.
"""

from __future__ import annotations

import json
import pathlib
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Layer",
    "Mlp",
    "ForwardTrace",
    "init_mlp",
    "forward",
    "backward",
    "softmax",
    "grad_check",
    "parameters",
    "save_checkpoint",
    "load_checkpoint",
]


@dataclass
class Layer:
    w: np.ndarray  # out x in
    b: np.ndarray  # out
    activation: str  # "relu" | "identity"


@dataclass
class Mlp:
    layers: list[Layer]

    def __post_init__(self):
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if nxt.w.shape[1] != prev.w.shape[0]:
                raise ValueError(
                    f"layer dims do not chain: {prev.w.shape} -> {nxt.w.shape}"
                )
        if self.layers[-1].activation != "identity":
            raise ValueError("final layer must emit raw logits")

    @property
    def input_dim(self) -> int:
        return self.layers[0].w.shape[1]

    @property
    def num_classes(self) -> int:
        return self.layers[-1].w.shape[0]

    @property
    def dims(self) -> list[int]:
        return [self.input_dim] + [layer.w.shape[0] for layer in self.layers]


@dataclass
class ForwardTrace:
    """Backprop bookkeeping for one forward call."""

    inputs: list[np.ndarray]  # input to each layer (after dropout of the previous)
    pre: list[np.ndarray]  # pre-activation of each layer
    masks: list[np.ndarray | None] = field(default_factory=list)  # hidden dropout


def init_mlp(dims, rng: np.random.Generator) -> Mlp:
    """He-uniform fan-in initialisation, zero biases."""
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(dims, dims[1:])):
        limit = np.sqrt(6.0 / fan_in)
        w = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        b = np.zeros(fan_out)
        act = "identity" if i == len(dims) - 2 else "relu"
        layers.append(Layer(w, b, act))
    return Mlp(layers)


def forward(
    model: Mlp,
    batch: np.ndarray,
    *,
    train: bool = False,
    keep_prob: float = 1.0,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, ForwardTrace]:
    """Run the network on a batch (rows are inputs), returning logits and trace."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != model.input_dim:
        raise ValueError(
            f"batch shape {batch.shape} incompatible with input_dim {model.input_dim}"
        )
    if train and not (0.0 < keep_prob <= 1.0):
        raise ValueError("keep_prob must be in (0, 1]")
    if train and keep_prob < 1.0 and rng is None:
        raise ValueError("train-mode dropout requires an rng")

    trace = ForwardTrace(inputs=[], pre=[], masks=[])
    x = batch
    last = len(model.layers) - 1
    for i, layer in enumerate(model.layers):
        trace.inputs.append(x)
        z = x @ layer.w.T + layer.b
        trace.pre.append(z)
        if i == last:
            x = z
        else:
            x = np.maximum(z, 0.0)
            if train and keep_prob < 1.0:
                mask = (rng.random(x.shape) < keep_prob) / keep_prob
                trace.masks.append(mask)
                x = x * mask
            else:
                trace.masks.append(None)
    return x, trace


def backward(model: Mlp, trace: ForwardTrace, d_logits: np.ndarray) -> list[np.ndarray]:
    """Gradients of a scalar loss wrt every parameter, given dL/dlogits.

    The caller owns the batch convention: backward sums exactly what the
    loss summed, so pass dL/dlogits already divided by the batch size for
    a mean-reduced loss. Returns arrays ordered [w0, b0, w1, b1, ...].
    """
    d_logits = np.asarray(d_logits, dtype=np.float64)
    if len(trace.inputs) != len(model.layers):
        raise ValueError("trace does not match model")
    if d_logits.shape != trace.pre[-1].shape:
        raise ValueError(
            f"dL/dlogits shape {d_logits.shape} != logits shape {trace.pre[-1].shape}"
        )

    grads: list[np.ndarray] = [None] * (2 * len(model.layers))
    delta = d_logits
    for i in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[i]
        grads[2 * i] = delta.T @ trace.inputs[i]
        grads[2 * i + 1] = delta.sum(axis=0)
        if i > 0:
            delta = delta @ layer.w
            mask = trace.masks[i - 1]
            if mask is not None:
                delta = delta * mask
            delta = delta * (trace.pre[i - 1] > 0.0)
    return grads


def parameters(model: Mlp) -> list[np.ndarray]:
    """Live parameter arrays in the order backward() reports gradients."""
    out = []
    for layer in model.layers:
        out.append(layer.w)
        out.append(layer.b)
    return out


def softmax(logits: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """Tempered softmax along the last axis, stabilised by max-subtraction."""
    if not temperature > 0.0:
        raise ValueError("temperature must be positive")
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("softmax requires finite logits")
    z = z / temperature
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def grad_check(model: Mlp, loss, batch: np.ndarray, h: float = 1e-5) -> float:
    """Worst relative error of backward() against central finite differences.

    `loss` maps logits to (value, dvalue/dlogits). Evaluation mode only.
    """
    logits, trace = forward(model, batch)
    _, d_logits = loss(logits)
    analytic = backward(model, trace, d_logits)

    worst = 0.0
    for p, g in zip(parameters(model), analytic):
        flat_p = p.reshape(-1)
        flat_g = g.reshape(-1)
        for j in range(flat_p.size):
            orig = flat_p[j]
            flat_p[j] = orig + h
            up, _ = loss(forward(model, batch)[0])
            flat_p[j] = orig - h
            dn, _ = loss(forward(model, batch)[0])
            flat_p[j] = orig
            numeric = (up - dn) / (2.0 * h)
            denom = max(abs(numeric), abs(flat_g[j]), 1e-6)
            worst = max(worst, abs(numeric - flat_g[j]) / denom)
    return worst


def save_checkpoint(model: Mlp, path, *, seed: int, epochs: int, model_kind: str) -> None:
    """Write the JSON checkpoint; floats use shortest round-trip decimals."""
    doc = {
        "arch": {"dims": model.dims, "activation": "relu"},
        "layers": [
            {"w": layer.w.tolist(), "b": layer.b.tolist()} for layer in model.layers
        ],
        "meta": {"seed": int(seed), "epochs": int(epochs), "model_kind": model_kind},
    }
    pathlib.Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_checkpoint(path) -> tuple[Mlp, dict]:
    doc = json.loads(pathlib.Path(path).read_text())
    dims = doc["arch"]["dims"]
    layers = []
    n = len(doc["layers"])
    for i, spec in enumerate(doc["layers"]):
        act = "identity" if i == n - 1 else doc["arch"].get("activation", "relu")
        layers.append(
            Layer(
                np.array(spec["w"], dtype=np.float64),
                np.array(spec["b"], dtype=np.float64),
                act,
            )
        )
    model = Mlp(layers)
    if model.dims != list(dims):
        raise ValueError(f"checkpoint dims {dims} disagree with layer shapes {model.dims}")
    return model, doc["meta"]
