from __future__ import annotations

from typing import Any, Dict, Optional

import numpy as np

from pysrc.helpers.geometry import poincare
from pysrc.helpers.graddiff import ops
from pysrc.helpers.models.base import RecModel, normalize_rows
from pysrc.helpers.models.layers import BIAS_HYP, BIAS_MOEBIUS, hyp_linear, tangent_tanh
from pysrc.helpers.models.losses import loss_bce
from pysrc.helpers.models.params import ParamTensor, euclidean, glorot, manifold_ball


class EuclideanAE(RecModel):
    """logits = W_d(W_e x̂ + b_e) + b_d with the same single hidden layer as the hyperbolic model."""

    family = "ae"

    def __init__(self, n_items: int, latent_dim: int, params: Dict[str, ParamTensor], hidden_tanh: bool = False):
        super().__init__(n_items, latent_dim, 0.0, params)
        self.hidden_tanh = hidden_tanh

    @classmethod
    def init(cls, n_items: int, latent_dim: int, seed: Optional[int] = 0, hidden_tanh: bool = False) -> "EuclideanAE":
        rng = np.random.default_rng(seed)
        params = {
            "W_e": ParamTensor("W_e", glorot(rng, n_items, latent_dim), euclidean()),
            "b_e": ParamTensor("b_e", np.zeros(latent_dim), euclidean()),
            "W_d": ParamTensor("W_d", glorot(rng, latent_dim, n_items), euclidean()),
            "b_d": ParamTensor("b_d", np.zeros(n_items), euclidean()),
        }
        return cls(n_items, latent_dim, params, hidden_tanh)

    def logits(self, p: Dict[str, Any], x_hat, noise=None):
        hidden = ops.matmul(x_hat, p["W_e"]) + p["b_e"]
        if self.hidden_tanh:
            hidden = ops.tanh(hidden)
        return ops.matmul(hidden, p["W_d"]) + p["b_d"]

    def loss(self, p: Dict[str, Any], x: np.ndarray, noise=None):
        return loss_bce(self.logits(p, normalize_rows(x)), x)

    def header(self) -> Dict[str, Any]:
        out = super().header()
        out["hidden_tanh"] = self.hidden_tanh
        return out


class HAEModel(RecModel):
    """
    Single-hidden-layer autoencoder on the Poincaré ball.

    x̂ = x/‖x‖ -> exp_0 -> hyp_linear(W_e, b_e) -> hyp_linear(W_d, b_d) -> log_0 = logits.
    In moebius mode the biases are points of the ball trained with Riemannian Adam.
    """

    def __init__(
        self,
        n_items: int,
        latent_dim: int,
        c: float,
        params: Dict[str, ParamTensor],
        bias_mode: str = BIAS_HYP,
        hidden_tanh: bool = False,
    ):
        super().__init__(n_items, latent_dim, c, params)
        self.bias_mode = bias_mode
        self.hidden_tanh = hidden_tanh
        self.family = "hae-m" if bias_mode == BIAS_MOEBIUS else "hae-h"

    @classmethod
    def init(
        cls,
        n_items: int,
        latent_dim: int,
        c: float,
        bias_mode: str = BIAS_HYP,
        seed: Optional[int] = 0,
        hidden_tanh: bool = False,
    ) -> "HAEModel":
        rng = np.random.default_rng(seed)
        bias_space = manifold_ball(c) if bias_mode == BIAS_MOEBIUS else euclidean()
        params = {
            "W_e": ParamTensor("W_e", glorot(rng, n_items, latent_dim), euclidean()),
            "b_e": ParamTensor("b_e", np.zeros(latent_dim), bias_space),
            "W_d": ParamTensor("W_d", glorot(rng, latent_dim, n_items), euclidean()),
            "b_d": ParamTensor("b_d", np.zeros(n_items), bias_space),
        }
        return cls(n_items, latent_dim, c, params, bias_mode, hidden_tanh)

    def logits(self, p: Dict[str, Any], x_hat, noise=None):
        c = self.c
        h = poincare.project_to_ball(poincare.expmap0(x_hat, c), c)
        z = hyp_linear(p["W_e"], p["b_e"], h, c, self.bias_mode)
        if self.hidden_tanh:
            z = tangent_tanh(z, c)
        y = hyp_linear(p["W_d"], p["b_d"], z, c, self.bias_mode)
        return poincare.logmap0(y, c)

    def loss(self, p: Dict[str, Any], x: np.ndarray, noise=None):
        return loss_bce(self.logits(p, normalize_rows(x)), x)

    def header(self) -> Dict[str, Any]:
        out = super().header()
        out.update(bias_mode=self.bias_mode, hidden_tanh=self.hidden_tanh)
        return out


def hae_forward(model: HAEModel, x_row) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x_row, dtype=np.float64))
    return np.asarray(model.logits(model.values(), normalize_rows(x)))[0]


def euclid_ae_forward(model: EuclideanAE, x_row) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x_row, dtype=np.float64))
    return np.asarray(model.logits(model.values(), normalize_rows(x)))[0]
