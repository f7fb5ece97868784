"""Dirichlet output-distribution mathematics.

Concentration parameters come from exponentiated (optionally tempered)
logits. All uncertainty measures have closed forms in terms of digamma,
returned in nats. Functions broadcast: `alpha` may be a single length-K
vector or a batch (N, K); member probabilities correspondingly (M, K) or
(N, M, K). A validated `DirichletParams` container is provided for call
sites that want the invariants checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .specfn import digamma, ln_gamma

__all__ = [
    "DirichletParams",
    "alphas_from_logits",
    "expected_categorical",
    "entropy",
    "total_uncertainty",
    "expected_data_uncertainty",
    "knowledge_uncertainty",
    "central_smooth",
    "end2_nll",
    "end2_nll_grad",
]

_MAX_EXP_ARG = 700.0  # exp overflows float64 just above this
_NEG_CLAMP = 1e-10  # rounding residue tolerated in the MI decomposition


@dataclass
class DirichletParams:
    """Concentration vector alpha (last axis is the class axis) plus its
    precision alpha0 = sum(alpha)."""

    alpha: np.ndarray
    alpha0: np.ndarray | float = None

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        if not np.all(np.isfinite(self.alpha)) or np.any(self.alpha <= 0.0):
            raise ValueError("concentration parameters must be positive and finite")
        total = self.alpha.sum(axis=-1)
        if self.alpha0 is None:
            self.alpha0 = total
        elif not np.allclose(self.alpha0, total, rtol=0.0, atol=1e-9):
            raise ValueError("alpha0 disagrees with sum(alpha)")


def _as_alpha(d) -> np.ndarray:
    alpha = d.alpha if isinstance(d, DirichletParams) else np.asarray(d, dtype=np.float64)
    if np.any(alpha <= 0.0) or not np.all(np.isfinite(alpha)):
        raise ValueError("concentration parameters must be positive and finite")
    return alpha


def alphas_from_logits(logits, temperature: float = 1.0) -> DirichletParams:
    """alpha_c = exp(z_c / T). Raises on arguments that would overflow exp."""
    if not temperature > 0.0:
        raise ValueError("temperature must be positive")
    z = np.asarray(logits, dtype=np.float64) / temperature
    if not np.all(np.isfinite(z)):
        raise ValueError("logits must be finite")
    peak = z.max()
    if peak > _MAX_EXP_ARG:
        raise OverflowError(
            f"logit/temperature ratio {peak:.1f} exceeds {_MAX_EXP_ARG:.0f}; "
            "exp(z/T) would overflow float64"
        )
    return DirichletParams(np.exp(z))


def expected_categorical(d) -> np.ndarray:
    """Mean of the Dirichlet: alpha / alpha0 (the predictive distribution)."""
    alpha = _as_alpha(d)
    return alpha / alpha.sum(axis=-1, keepdims=True)


def entropy(probs) -> np.ndarray | float:
    """Shannon entropy in nats along the last axis, with 0 ln 0 = 0."""
    p = np.asarray(probs, dtype=np.float64)
    terms = np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    out = -terms.sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def total_uncertainty(d) -> np.ndarray | float:
    """Entropy of the expected categorical distribution."""
    return entropy(expected_categorical(d))


def expected_data_uncertainty(d) -> np.ndarray | float:
    """Closed-form expected entropy of categoricals drawn from the Dirichlet:

        psi(alpha0 + 1) - sum_c (alpha_c / alpha0) psi(alpha_c + 1)
    """
    alpha = _as_alpha(d)
    alpha0 = alpha.sum(axis=-1)
    mean = alpha / alpha0[..., None]
    out = digamma(alpha0 + 1.0) - (mean * digamma(alpha + 1.0)).sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def knowledge_uncertainty(d) -> np.ndarray | float:
    """Mutual information between the prediction and the categorical
    parameters: total minus expected data uncertainty, with sub-1e-10
    negative rounding residue clamped to zero."""
    out = np.asarray(total_uncertainty(d) - expected_data_uncertainty(d))
    out = np.where((out < 0.0) & (out > -_NEG_CLAMP), 0.0, out)
    return float(out) if out.ndim == 0 else out


def central_smooth(probs, gamma: float = 1e-4) -> np.ndarray:
    """Mix each categorical with uniform: (1 - gamma) p + gamma / K.

    Keeps rows summing to one while bounding entries away from zero so
    the log-likelihood terms stay finite.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    p = np.asarray(probs, dtype=np.float64)
    return (1.0 - gamma) * p + gamma / p.shape[-1]


def _member_log_mean(member_probs) -> np.ndarray:
    pi = np.asarray(member_probs, dtype=np.float64)
    if pi.ndim < 2:
        raise ValueError("member probabilities must have shape (..., M, K)")
    if np.any(pi <= 0.0):
        raise ValueError(
            "member probabilities must be strictly positive; "
            "apply central_smooth before computing the likelihood"
        )
    return np.log(pi).mean(axis=-2)  # average over members


def end2_nll(d, member_probs) -> np.ndarray | float:
    """Negative log-likelihood of member categoricals under Dir(alpha):

        -[ln G(alpha0) - sum_c ln G(alpha_c) + sum_c (alpha_c - 1) lbar_c]

    where lbar_c is the member-averaged log probability of class c.
    """
    alpha = _as_alpha(d)
    lbar = _member_log_mean(member_probs)
    alpha0 = alpha.sum(axis=-1)
    out = -(
        ln_gamma(alpha0)
        - ln_gamma(alpha).sum(axis=-1)
        + ((alpha - 1.0) * lbar).sum(axis=-1)
    )
    return float(out) if np.ndim(out) == 0 else out


def end2_nll_grad(d, member_probs) -> np.ndarray:
    """Analytic gradient of end2_nll wrt alpha:

        dL/dalpha_c = -[psi(alpha0) - psi(alpha_c) + lbar_c]

    Chain to logits with dalpha_c/dz_c = alpha_c / T.
    """
    alpha = _as_alpha(d)
    lbar = _member_log_mean(member_probs)
    psi0 = np.asarray(digamma(alpha.sum(axis=-1)))
    return -(psi0[..., None] - digamma(alpha) + lbar)
