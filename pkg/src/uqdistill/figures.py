"""Figure rendering for evaluation and ablation reports.

Every report command writes its delimited output first; these helpers
render the companion PNGs from the same in-memory structures. The Agg
backend keeps rendering headless, and PNG metadata is stripped so reruns
produce identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "render_histograms",
    "render_rejection",
    "render_roc",
    "render_sweep",
]

_SAVEFIG = {"dpi": 110, "metadata": {"Software": None}}
_MEASURES = ("total", "data", "knowledge")


def _save(fig, path):
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)


def render_histograms(scored: dict, path) -> None:
    """Per-measure uncertainty histograms, in-domain vs OOD, models overlaid.

    `scored` maps model name -> {"id": ScoredPredictions, "ood": ...}.
    """
    fig, axes = plt.subplots(len(_MEASURES), 2, figsize=(9, 9), sharex="row")
    for row, measure in enumerate(_MEASURES):
        for col, split in enumerate(("id", "ood")):
            ax = axes[row][col]
            for name in sorted(scored):
                sp = scored[name].get(split)
                if sp is None:
                    continue
                values = getattr(sp, measure)
                if values is None:
                    continue
                ax.hist(values, bins=40, density=True, histtype="step", label=name)
            ax.set_title(f"{measure} uncertainty ({split.upper()})", fontsize=10)
            ax.set_xlabel("nats")
            if row == 0 and col == 0:
                ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_rejection(curves: dict, path) -> None:
    """Rejection curves grouped by measure; `curves` maps (model, measure)
    -> RejectionCurve. Oracle and random baselines are drawn per model in
    a muted style."""
    measures = sorted({m for _, m in curves})
    fig, axes = plt.subplots(1, max(len(measures), 1), figsize=(4.5 * max(len(measures), 1), 4))
    axes = np.atleast_1d(axes)
    for ax, measure in zip(axes, measures):
        for model, m in sorted(curves):
            if m != measure:
                continue
            c = curves[(model, m)]
            (line,) = ax.plot(c.fractions, 100 * c.measured, label=model)
            ax.plot(c.fractions, 100 * c.oracle, linestyle=":", color=line.get_color(), alpha=0.5)
            ax.plot(c.fractions, 100 * c.random_baseline, linestyle="--", color=line.get_color(), alpha=0.3)
        ax.set_xlabel("fraction rejected")
        ax.set_ylabel("% error")
        ax.set_title(f"rejection by {measure}", fontsize=10)
        ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_roc(points: dict, path) -> None:
    """ROC curves for OOD detection; `points` maps (model, measure) -> (fpr, tpr)."""
    measures = sorted({m for _, m in points})
    fig, axes = plt.subplots(1, max(len(measures), 1), figsize=(4.5 * max(len(measures), 1), 4))
    axes = np.atleast_1d(axes)
    for ax, measure in zip(axes, measures):
        for model, m in sorted(points):
            if m != measure:
                continue
            fpr, tpr = points[(model, m)]
            ax.plot(fpr, tpr, label=model)
        ax.plot([0, 1], [0, 1], linestyle="--", color="grey", alpha=0.5)
        ax.set_xlabel("false positive rate")
        ax.set_ylabel("true positive rate")
        ax.set_title(f"OOD detection by {measure}", fontsize=10)
        ax.legend(fontsize=8, loc="lower right")
    fig.tight_layout()
    _save(fig, path)


_SWEEP_PANELS = (
    ("error", "% classification error", 100.0),
    ("nll", "negative log-likelihood", 1.0),
    ("ece", "expected calibration error", 1.0),
    ("prr_confidence", "prediction rejection ratio", 1.0),
    ("ood_auroc_knowledge", "OOD AUROC (knowledge)", 1.0),
    ("mean_knowledge_ood", "mean OOD knowledge unc. (nats)", 1.0),
)


def render_sweep(rows: list[dict], arm_kind: str, path) -> None:
    """Ablation panels: mean +/- one standard deviation across seeds versus
    the swept value (ensemble size or initial temperature)."""
    rows = [r for r in rows if r["arm"] == arm_kind]
    if not rows:
        return
    values = sorted({r["value"] for r in rows})
    fig, axes = plt.subplots(2, 3, figsize=(12, 7))
    for ax, (key, title, scale) in zip(axes.ravel(), _SWEEP_PANELS):
        means, stds = [], []
        for v in values:
            ys = np.array([scale * r[key] for r in rows if r["value"] == v])
            means.append(ys.mean())
            stds.append(ys.std())
        ax.errorbar(values, means, yerr=stds, marker="o", capsize=3)
        ax.set_title(title, fontsize=10)
        ax.set_xlabel("ensemble size" if arm_kind == "size" else "initial temperature")
    fig.tight_layout()
    _save(fig, path)
