"""Trainers: cross-entropy baseline, ensemble-mean distillation (mode
"end"), and distribution distillation into a Dirichlet network (mode
"end2").

Both students learn from a transfer set of inputs and per-member ensemble
logits. "end" minimises T^2 * KL(mean tempered teacher || tempered
student) at a fixed temperature; "end2" minimises the Dirichlet negative
log-likelihood of the individual tempered member predictions, with the
temperature following the annealing schedule. Students are always
evaluated at temperature 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from . import dirichlet, net
from .optim import (
    AdamState,
    LrSchedule,
    TemperatureSchedule,
    adam_step,
    annealed_temperature,
    one_cycle_lr,
)

if TYPE_CHECKING:
    from .data import Dataset2D
    from .ensemble import TransferSet

__all__ = ["TrainConfig", "DistillConfig", "end_loss", "train_dnn", "train_distilled"]


@dataclass
class TrainConfig:
    """Supervised training hyperparameters (baseline and ensemble members)."""

    epochs: int = 45
    cycle_len: int = 30
    lr0: float = 1e-3
    keep_prob: float = 0.9
    batch_size: int = 128
    hidden: tuple = (64, 64)
    seed: int = 0


@dataclass
class DistillConfig:
    """Distillation hyperparameters. t_fixed applies to mode "end", t0 and
    annealed to mode "end2" (annealed=False holds the temperature at t0,
    used by the temperature ablation)."""

    mode: str = "end2"
    t_fixed: float = 2.5
    t0: float = 10.0
    annealed: bool = True
    gamma: float = 1e-4
    use_aux: bool = True
    epochs: int = 90
    cycle_len: int = 60
    lr0: float = 1e-3
    keep_prob: float = 0.9
    batch_size: int = 128
    hidden: tuple = (64, 64)
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("end", "end2"):
            raise ValueError(f"unknown distillation mode {self.mode!r}")


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def end_loss(student_logits, member_logits, temperature: float):
    """Distillation-to-the-mean loss and its gradient wrt student logits.

    Target q is the member-mean tempered softmax; the loss is
    T^2 * KL(q || tempered student), so the gradient T (p - q) keeps the
    update magnitude comparable across temperatures.
    """
    if not temperature > 0.0:
        raise ValueError("temperature must be positive")
    z = np.asarray(student_logits, dtype=np.float64)
    q = net.softmax(np.asarray(member_logits, dtype=np.float64), temperature).mean(axis=-2)
    logp = _log_softmax(z / temperature)
    p = np.exp(logp)
    qlogq = np.where(q > 0.0, q * np.log(np.where(q > 0.0, q, 1.0)), 0.0)
    loss = temperature**2 * (qlogq - q * logp).sum(axis=-1)
    grad = temperature * (p - q)
    return (float(loss) if np.ndim(loss) == 0 else loss), grad


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    perm = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield perm[start : start + batch_size]


def train_dnn(data: "Dataset2D", cfg: TrainConfig, model_kind: str = "dnn"):
    """Maximum-likelihood (cross-entropy) training under Adam + 1-cycle.

    Returns the trained model and per-epoch log rows (epoch, lr, loss).
    Deterministic given cfg.seed.
    """
    if len(data) == 0:
        raise ValueError("empty dataset")
    rng = np.random.default_rng(cfg.seed)
    dims = (data.points.shape[1], *cfg.hidden, data.num_classes)
    model = net.init_mlp(dims, rng)
    state = AdamState.for_params(net.parameters(model))
    sched = LrSchedule(cfg.lr0, cfg.cycle_len, cfg.epochs)
    batch_size = min(cfg.batch_size, len(data))
    onehot = np.eye(data.num_classes)[data.labels]

    log = []
    for epoch in range(cfg.epochs):
        lr = one_cycle_lr(epoch, sched)
        total, seen = 0.0, 0
        for idx in _batches(len(data), batch_size, rng):
            x, y = data.points[idx], onehot[idx]
            logits, trace = net.forward(
                model, x, train=True, keep_prob=cfg.keep_prob, rng=rng
            )
            logp = _log_softmax(logits)
            loss = -(y * logp).sum() / len(idx)
            d_logits = (np.exp(logp) - y) / len(idx)
            grads = net.backward(model, trace, d_logits)
            adam_step(net.parameters(model), grads, state, lr)
            total += loss * len(idx)
            seen += len(idx)
        log.append({"epoch": epoch, "lr": lr, "mean_loss": total / seen})
    return model, log


def train_distilled(transfer: "TransferSet", cfg: DistillConfig):
    """Train a student on a transfer set; see the module docstring for the
    two modes. Auxiliary rows participate exactly like in-domain rows (drop
    them by setting cfg.use_aux=False). Returns (model, log rows)."""
    inputs = transfer.inputs
    member_logits = transfer.member_logits
    if not cfg.use_aux:
        keep = ~transfer.aux_mask
        inputs, member_logits = inputs[keep], member_logits[keep]
    n = inputs.shape[0]
    if n == 0:
        raise ValueError("empty transfer set")

    rng = np.random.default_rng(cfg.seed)
    num_classes = member_logits.shape[-1]
    dims = (inputs.shape[1], *cfg.hidden, num_classes)
    model = net.init_mlp(dims, rng)
    state = AdamState.for_params(net.parameters(model))
    lr_sched = LrSchedule(cfg.lr0, cfg.cycle_len, cfg.epochs)
    t_sched = TemperatureSchedule(cfg.t0, cfg.cycle_len, cfg.epochs, annealed=cfg.annealed)
    batch_size = min(cfg.batch_size, n)

    log = []
    for epoch in range(cfg.epochs):
        lr = one_cycle_lr(epoch, lr_sched)
        temp = (
            annealed_temperature(epoch, t_sched) if cfg.mode == "end2" else cfg.t_fixed
        )
        total, seen = 0.0, 0
        for idx in _batches(n, batch_size, rng):
            x = inputs[idx]
            teach = member_logits[idx]
            logits, trace = net.forward(
                model, x, train=True, keep_prob=cfg.keep_prob, rng=rng
            )
            b = len(idx)
            if cfg.mode == "end2":
                members = dirichlet.central_smooth(net.softmax(teach, temp), cfg.gamma)
                alpha = dirichlet.alphas_from_logits(logits, temp).alpha
                loss = float(np.mean(dirichlet.end2_nll(alpha, members)))
                d_alpha = dirichlet.end2_nll_grad(alpha, members) / b
                d_logits = d_alpha * alpha / temp
            else:
                losses, grad = end_loss(logits, teach, temp)
                loss = float(np.mean(losses))
                d_logits = grad / b
            grads = net.backward(model, trace, d_logits)
            adam_step(net.parameters(model), grads, state, lr)
            total += loss * b
            seen += b
        log.append({"epoch": epoch, "lr": lr, "T": temp, "mean_loss": total / seen})
    return model, log
