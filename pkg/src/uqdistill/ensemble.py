"""Explicit deep ensembles and the transfer set they produce.

Members share one architecture and training recipe and differ only in
their derived seeds (initialisation, shuffling, dropout). The transfer
set stores raw per-member logits so distillation can re-apply any softmax
temperature.
"""

from __future__ import annotations

import hashlib
import json
import pathlib
from dataclasses import dataclass, replace

import numpy as np

from . import net
from .dirichlet import entropy
from .distill import TrainConfig, train_dnn
from .seeding import derive_seed

__all__ = [
    "Ensemble",
    "TransferSet",
    "train_ensemble",
    "ensemble_predictive",
    "ensemble_uncertainties",
    "member_logits",
    "build_transfer_set",
    "save_transfer",
    "load_transfer",
    "save_ensemble",
    "load_ensemble",
]


@dataclass
class Ensemble:
    members: list
    member_seeds: list[int]
    num_classes: int

    def __post_init__(self):
        if not self.members:
            raise ValueError("an ensemble needs at least one member")
        dims = self.members[0].dims
        for m in self.members:
            if m.dims != dims:
                raise ValueError("ensemble members must share an architecture")
        if dims[-1] != self.num_classes:
            raise ValueError("member output width disagrees with num_classes")

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class TransferSet:
    inputs: np.ndarray  # (N, d)
    member_logits: np.ndarray  # (N, M, K)
    labels: np.ndarray  # (N,), -1 on auxiliary rows
    aux_mask: np.ndarray  # (N,) bool

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.member_logits = np.asarray(self.member_logits, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.aux_mask = np.asarray(self.aux_mask, dtype=bool)
        n = self.inputs.shape[0]
        if self.member_logits.shape[0] != n or self.member_logits.ndim != 3:
            raise ValueError("member_logits must have shape (N, M, K)")
        if self.labels.shape != (n,) or self.aux_mask.shape != (n,):
            raise ValueError("labels and aux_mask must be one per row")
        if np.any(self.labels[~self.aux_mask] < 0):
            raise ValueError("in-domain rows must carry labels")


def train_ensemble(data, cfg: TrainConfig, size: int) -> tuple[Ensemble, list]:
    """Train `size` members, seeded per member from cfg.seed. Returns the
    ensemble and the per-member training logs."""
    if size < 1:
        raise ValueError("ensemble size must be >= 1")
    if len(data) == 0:
        raise ValueError("empty dataset")
    seeds = [derive_seed(cfg.seed, "member", i) for i in range(size)]
    members, logs = [], []
    for s in seeds:
        model, log = train_dnn(data, replace(cfg, seed=s), model_kind="member")
        members.append(model)
        logs.append(log)
    return Ensemble(members, seeds, data.num_classes), logs


def ensemble_predictive(member_probs) -> np.ndarray:
    """Predictive posterior: plain average over the member axis (-2)."""
    p = np.asarray(member_probs, dtype=np.float64)
    if p.ndim < 2:
        raise ValueError("member probabilities must have shape (..., M, K)")
    return p.mean(axis=-2)


def ensemble_uncertainties(member_probs):
    """(total, expected data, knowledge) uncertainty of an ensemble, in nats.

    total is the entropy of the member mean, expected data the mean member
    entropy, and knowledge their difference (the mutual information).
    """
    p = np.asarray(member_probs, dtype=np.float64)
    total = entropy(ensemble_predictive(p))
    data = np.asarray(entropy(p)).mean(axis=-1)
    data = float(data) if np.ndim(total) == 0 else data
    knowledge = total - data
    return total, data, knowledge


def member_logits(ens: Ensemble, inputs) -> np.ndarray:
    """Evaluation-mode logits of every member: (N, M, K)."""
    cols = [net.forward(m, inputs)[0] for m in ens.members]
    return np.stack(cols, axis=1)


def build_transfer_set(ens: Ensemble, inputs, labels, aux_inputs=None) -> TransferSet:
    """Evaluate every member on the (unaugmented) training inputs, storing
    raw logits; auxiliary rows, if given, are appended unlabeled."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.shape[0] == 0:
        raise ValueError("transfer set needs at least one input")
    labels = np.asarray(labels, dtype=np.int64)
    logits = member_logits(ens, inputs)
    aux_mask = np.zeros(inputs.shape[0], dtype=bool)
    if aux_inputs is not None and len(aux_inputs):
        aux_inputs = np.asarray(aux_inputs, dtype=np.float64)
        logits = np.concatenate([logits, member_logits(ens, aux_inputs)])
        inputs = np.concatenate([inputs, aux_inputs])
        labels = np.concatenate([labels, np.full(aux_inputs.shape[0], -1, dtype=np.int64)])
        aux_mask = np.concatenate([aux_mask, np.ones(aux_inputs.shape[0], dtype=bool)])
    return TransferSet(inputs, logits, labels, aux_mask)


def save_transfer(ts: TransferSet, path) -> None:
    doc = {
        "inputs": ts.inputs.tolist(),
        "labels": [None if m else int(v) for v, m in zip(ts.labels, ts.aux_mask)],
        "aux_mask": ts.aux_mask.astype(int).tolist(),
        "member_logits": ts.member_logits.tolist(),
    }
    pathlib.Path(path).write_text(json.dumps(doc) + "\n")


def load_transfer(path) -> TransferSet:
    doc = json.loads(pathlib.Path(path).read_text())
    labels = np.array([-1 if v is None else v for v in doc["labels"]], dtype=np.int64)
    return TransferSet(
        np.array(doc["inputs"], dtype=np.float64),
        np.array(doc["member_logits"], dtype=np.float64),
        labels,
        np.array(doc["aux_mask"], dtype=bool),
    )


def config_fingerprint(doc: dict) -> str:
    """Short stable hash of a JSON-serialisable config."""
    blob = json.dumps(doc, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def save_ensemble(ens: Ensemble, directory, cfg: TrainConfig, epochs: int | None = None) -> None:
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    for i, (model, seed) in enumerate(zip(ens.members, ens.member_seeds)):
        name = f"member_{i:03d}.json"
        net.save_checkpoint(
            model,
            directory / name,
            seed=seed,
            epochs=cfg.epochs if epochs is None else epochs,
            model_kind="member",
        )
        files.append(name)
    cfg_doc = {
        "epochs": cfg.epochs,
        "cycle_len": cfg.cycle_len,
        "lr0": cfg.lr0,
        "keep_prob": cfg.keep_prob,
        "batch_size": cfg.batch_size,
        "hidden": list(cfg.hidden),
        "seed": cfg.seed,
    }
    manifest = {
        "size": ens.size,
        "num_classes": ens.num_classes,
        "member_seeds": [int(s) for s in ens.member_seeds],
        "member_files": files,
        "config": cfg_doc,
        "config_hash": config_fingerprint(cfg_doc),
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")


def load_ensemble(directory) -> Ensemble:
    directory = pathlib.Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    members = []
    for name in manifest["member_files"]:
        model, _ = net.load_checkpoint(directory / name)
        members.append(model)
    return Ensemble(members, manifest["member_seeds"], manifest["num_classes"])
