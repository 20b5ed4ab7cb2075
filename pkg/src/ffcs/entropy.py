"""Shannon entropy helpers, all in bits."""

from __future__ import annotations

import numpy as np


def entropy_bits(pmf) -> float:
    """H(p) = -sum p log2 p with the 0 log 0 = 0 convention."""
    p = np.asarray(pmf, dtype=np.float64)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum()) + 0.0  # normalize -0.0


def h2(p: float) -> float:
    """Binary entropy function."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p))


def kl_bits(p, q) -> float:
    """D(p || q); +inf when p puts mass where q has none."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return float("inf")
    return float((p[mask] * np.log2(p[mask] / q[mask])).sum())


def log2_pmf(pmf) -> np.ndarray:
    """Elementwise log2 with zeros mapped to -inf."""
    p = np.asarray(pmf, dtype=np.float64)
    out = np.full(p.shape, -np.inf)
    np.log2(p, out=out, where=p > 0)
    return out
