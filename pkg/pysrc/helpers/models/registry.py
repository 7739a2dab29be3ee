from __future__ import annotations

from typing import Optional

from pysrc.errors import UsageError
from pysrc.helpers.models.autoencoders import EuclideanAE, HAEModel
from pysrc.helpers.models.base import RecModel
from pysrc.helpers.models.baselines import Popularity, PureSVD
from pysrc.helpers.models.checkpoint import Checkpoint
from pysrc.helpers.models.hvae import HVAEModel
from pysrc.helpers.models.layers import BIAS_HYP, BIAS_MOEBIUS
from pysrc.helpers.models.params import ParamTensor, Space

MODEL_FAMILIES = ("ae", "hae-h", "hae-m", "hvae", "puresvd", "popularity")
GRADIENT_FAMILIES = ("ae", "hae-h", "hae-m", "hvae")


def build_model(
    family: str,
    n_items: int,
    latent_dim: int,
    c: float,
    seed: Optional[int] = 0,
    beta: float = 1.0,
    hidden_tanh: bool = False,
    train_matrix=None,
) -> RecModel:
    if family == "ae":
        return EuclideanAE.init(n_items, latent_dim, seed=seed, hidden_tanh=hidden_tanh)
    if family in ("hae-h", "hae-m"):
        mode = BIAS_MOEBIUS if family == "hae-m" else BIAS_HYP
        return HAEModel.init(n_items, latent_dim, c, bias_mode=mode, seed=seed, hidden_tanh=hidden_tanh)
    if family == "hvae":
        return HVAEModel.init(n_items, latent_dim, c, beta=beta, seed=seed)
    if family == "puresvd":
        if train_matrix is None:
            raise UsageError("puresvd needs the training matrix to fit.")
        return PureSVD.fit(train_matrix, latent_dim, seed=seed)
    if family == "popularity":
        if train_matrix is None:
            raise UsageError("popularity needs the training matrix to fit.")
        return Popularity.fit(train_matrix)
    raise UsageError(f"Unknown model family '{family}', expected one of {MODEL_FAMILIES}.")


def model_from_checkpoint(ckpt: Checkpoint) -> RecModel:
    head = ckpt.model_header
    family = head["family"]
    params = {
        entry["name"]: ParamTensor(entry["name"], ckpt.params[entry["name"]], Space.from_dict(entry["space"]))
        for entry in ckpt.header["params"]
    }
    n_items, latent_dim, c = head["n_items"], head["latent_dim"], head["c"]
    if family == "ae":
        return EuclideanAE(n_items, latent_dim, params, hidden_tanh=head.get("hidden_tanh", False))
    if family in ("hae-h", "hae-m"):
        return HAEModel(
            n_items,
            latent_dim,
            c,
            params,
            bias_mode=head.get("bias_mode", BIAS_HYP),
            hidden_tanh=head.get("hidden_tanh", False),
        )
    if family == "hvae":
        return HVAEModel(n_items, latent_dim, c, params, beta=head.get("beta", 1.0))
    if family == "puresvd":
        return PureSVD(n_items, latent_dim, 0.0, params)
    if family == "popularity":
        return Popularity(n_items, 0, 0.0, params)
    raise UsageError(f"Checkpoint holds an unknown model family '{family}'.")
