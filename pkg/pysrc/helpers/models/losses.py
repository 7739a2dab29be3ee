from __future__ import annotations

import numpy as np

from pysrc.helpers.graddiff import ops
from pysrc.helpers.graddiff.tensor import bce_with_logits

LOGIT_CLAMP = 40.0


def loss_bce(logits, target_rows):
    """Mean over items (and rows) of the logit-form binary cross-entropy."""
    return bce_with_logits(logits, np.asarray(target_rows, dtype=np.float64), clamp=LOGIT_CLAMP)


def loss_elbo(logits, target_rows, kl_sample, beta: float = 1.0):
    """bce + β·KL/|items|, with the single-draw KL averaged over rows."""
    n_items = np.shape(ops.values(logits))[-1]
    n_rows = max(1, int(np.prod(np.shape(ops.values(kl_sample)))))
    kl_mean = ops.sum(kl_sample) / n_rows
    return loss_bce(logits, target_rows) + beta * kl_mean / n_items
