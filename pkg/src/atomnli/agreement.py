"""Inter-annotator agreement: Cohen's kappa and Kendall's tau-b.

Kappa serves the binary validity annotations; tau-b (tie-corrected, since
a five-point scale guarantees ties) serves the effect scores.
"""
from __future__ import annotations

from collections import Counter
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError


def cohens_kappa(a: Sequence, b: Sequence) -> float:
    """Chance-corrected agreement between two equal-length label lists.

    kappa = (p_o - p_e) / (1 - p_e), with expected agreement from the
    product of the two annotators' marginals. The degenerate p_e = 1 case
    (both annotators constant on the same label) is defined as 1.0 when
    observed agreement is also perfect, and is an error otherwise.
    """
    if len(a) != len(b):
        raise ValidationError(f"label lists differ in length: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise ValidationError("kappa needs at least one pair of labels")
    n = len(a)
    observed = sum(1 for x, y in zip(a, b) if x == y) / n
    marginal_a = Counter(a)
    marginal_b = Counter(b)
    expected = sum(
        (marginal_a[label] / n) * (marginal_b[label] / n)
        for label in set(marginal_a) | set(marginal_b)
    )
    if expected >= 1.0:
        if observed == 1.0:
            return 1.0
        raise ValidationError("kappa undefined: expected agreement is 1 but observed is not")
    return (observed - expected) / (1.0 - expected)


def kendalls_tau(a: Sequence[float], b: Sequence[float]) -> Optional[float]:
    """Tie-corrected rank correlation (tau-b) between two score lists.

    Returns None when either list is constant, where the statistic is
    undefined and should be reported as absent.
    """
    if len(a) != len(b):
        raise ValidationError(f"score lists differ in length: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise ValidationError("tau needs at least two pairs of scores")
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    upper = np.triu_indices(len(x), k=1)
    products = dx[upper] * dy[upper]
    concordant = int(np.sum(products > 0))
    discordant = int(np.sum(products < 0))
    ties_x = int(np.sum(dx[upper] == 0))
    ties_y = int(np.sum(dy[upper] == 0))
    n0 = len(x) * (len(x) - 1) // 2
    denominator = np.sqrt(float(n0 - ties_x) * float(n0 - ties_y))
    if denominator == 0.0:
        return None
    return float((concordant - discordant) / denominator)
