from __future__ import annotations

from typing import Any, Dict, List

import numpy as np
import scipy.sparse as sp

from pysrc.errors import DataError
from pysrc.helpers.models.params import ParamTensor


def dense_rows(rows) -> np.ndarray:
    if sp.issparse(rows):
        return rows.toarray().astype(np.float64)
    return np.atleast_2d(np.asarray(rows, dtype=np.float64))


def normalize_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise DataError("Empty input row: a user needs at least one item.")
    return x / norms


class RecModel:
    """
    Common surface of every recommender: named parameters, a tape-friendly loss
    and batch scoring. Gradient-trained families override ``logits``/``loss``.
    """

    family: str = ""
    trainable: bool = True
    needs_noise: bool = False

    def __init__(self, n_items: int, latent_dim: int, c: float, params: Dict[str, ParamTensor]):
        self.n_items = int(n_items)
        self.latent_dim = int(latent_dim)
        self.c = float(c)
        self.params = params

    @property
    def param_names(self) -> List[str]:
        return list(self.params.keys())

    def values(self) -> Dict[str, np.ndarray]:
        return {name: p.values for name, p in self.params.items()}

    def noise_shape(self, batch_size: int):
        return None

    def logits(self, p: Dict[str, Any], x_hat, noise=None):
        raise NotImplementedError

    def loss(self, p: Dict[str, Any], x: np.ndarray, noise=None):
        raise NotImplementedError

    def score(self, rows) -> np.ndarray:
        """Item scores for a batch of input rows; deterministic (no sampling)."""
        x = dense_rows(rows)
        self._check_items(x)
        x_hat = normalize_rows(x)
        return np.asarray(self.logits(self.values(), x_hat, noise=None))

    def header(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "n_items": self.n_items,
            "latent_dim": self.latent_dim,
            "c": self.c,
        }

    def describe(self) -> str:
        if self.c and self.family.startswith(("hae", "hvae")):
            return f"{self.family}(c={self.c:g}, d={self.latent_dim})"
        return f"{self.family}(d={self.latent_dim})"

    def _check_items(self, rows: np.ndarray) -> None:
        if rows.shape[-1] != self.n_items:
            raise DataError(
                f"Input rows have {rows.shape[-1]} items, the model expects {self.n_items}."
            )
