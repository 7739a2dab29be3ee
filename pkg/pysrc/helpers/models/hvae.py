from __future__ import annotations

from typing import Any, Dict, Optional, Tuple

import numpy as np

from pysrc.errors import DomainError
from pysrc.helpers.geometry import lorentz
from pysrc.helpers.graddiff import ops
from pysrc.helpers.models.base import RecModel, normalize_rows
from pysrc.helpers.models.losses import loss_elbo
from pysrc.helpers.models.params import ParamTensor, euclidean, glorot
from pysrc.helpers.models.wrapped_normal import logpdf_arrays, sample_arrays

LOG_SIGMA_BOUND = 10.0


class HVAEModel(RecModel):
    """
    Variational autoencoder with a wrapped-normal latent on the Lorentz sheet.

    The encoder and decoder are ordinary affine maps; only the latent lives on
    the hyperboloid. The prior is the wrapped normal at the origin with unit scale.
    """

    family = "hvae"
    needs_noise = True

    def __init__(self, n_items: int, latent_dim: int, c: float, params: Dict[str, ParamTensor], beta: float = 1.0):
        if c <= 0:
            raise DomainError("hvae needs a curvature c > 0.")
        super().__init__(n_items, latent_dim, c, params)
        self.beta = float(beta)

    @classmethod
    def init(cls, n_items: int, latent_dim: int, c: float, beta: float = 1.0, seed: Optional[int] = 0) -> "HVAEModel":
        rng = np.random.default_rng(seed)
        params = {
            "W_enc": ParamTensor("W_enc", glorot(rng, n_items, 2 * latent_dim), euclidean()),
            "b_enc": ParamTensor("b_enc", np.zeros(2 * latent_dim), euclidean()),
            "W_dec": ParamTensor("W_dec", glorot(rng, latent_dim, n_items), euclidean()),
            "b_dec": ParamTensor("b_dec", np.zeros(n_items), euclidean()),
        }
        return cls(n_items, latent_dim, c, params, beta)

    def noise_shape(self, batch_size: int):
        return (batch_size, self.latent_dim)

    def encode(self, p: Dict[str, Any], x_hat):
        d = self.latent_dim
        h = ops.matmul(x_hat, p["W_enc"]) + p["b_enc"]
        mu_t = h[:, :d]
        log_sigma = ops.clip(h[:, d:], -LOG_SIGMA_BOUND, LOG_SIGMA_BOUND)
        return mu_t, log_sigma

    def forward(self, p: Dict[str, Any], x_hat, noise) -> Tuple[Any, Any]:
        """Returns (logits, per-row single-draw KL)."""
        c = self.c
        d = self.latent_dim
        mu_t, log_sigma = self.encode(p, x_hat)
        o = lorentz.origin(d, c)
        mu = lorentz.lorentz_expmap(o, lorentz.lift_to_origin(mu_t), c)
        sigma = ops.exp(log_sigma)
        z, logq = sample_arrays(mu, sigma, noise, c)
        logp0 = logpdf_arrays(o, np.ones(d), z, c)
        kl = logq - logp0
        hidden = lorentz.drop_time(lorentz.lorentz_logmap(o, z, c))
        logits = ops.matmul(hidden, p["W_dec"]) + p["b_dec"]
        return logits, kl

    def logits(self, p: Dict[str, Any], x_hat, noise=None):
        if noise is None:
            noise = np.zeros((np.shape(ops.values(x_hat))[0], self.latent_dim))
        return self.forward(p, x_hat, noise)[0]

    def loss(self, p: Dict[str, Any], x: np.ndarray, noise=None):
        if noise is None:
            noise = np.zeros((x.shape[0], self.latent_dim))
        logits, kl = self.forward(p, normalize_rows(x), noise)
        return loss_elbo(logits, x, kl, self.beta)

    def header(self) -> Dict[str, Any]:
        out = super().header()
        out["beta"] = self.beta
        return out


def hvae_forward(model: HVAEModel, x_row, noise) -> Tuple[np.ndarray, float]:
    x = np.atleast_2d(np.asarray(x_row, dtype=np.float64))
    noise = np.atleast_2d(np.asarray(noise, dtype=np.float64))
    logits, kl = model.forward(model.values(), normalize_rows(x), noise)
    return np.asarray(logits)[0], float(np.asarray(kl)[0, 0])
