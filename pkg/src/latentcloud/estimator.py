"""Scikit-learn style front door for the autoencoder.

``PointCloudAutoencoder`` follows the estimator protocol: constructor
stores hyperparameters untouched (so ``get_params``/``set_params`` and
``clone`` work), ``fit`` trains on a batch of clouds, ``transform`` maps
clouds to latent codes and ``inverse_transform`` decodes codes back to
clouds. Clouds are normalized (centroid-centered, unit max radius) before
they reach the network, matching the rest of the toolchain.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import autoencoder as ae
from .data import normalize
from .errors import DimensionError
from .metrics import chamfer
from .validation import as_cloud_batch, as_latent


class PointCloudAutoencoder(BaseEstimator, TransformerMixin):
    """Permutation-invariant point-cloud autoencoder.

    Parameters mirror AEConfig/TrainConfig; ``fit`` expects a (B, N, 3)
    array or a sequence of (N, 3) clouds sharing one point count.
    """

    def __init__(
        self,
        n_points=2048,
        latent_size=32,
        encoder_widths=(64, 128, 256),
        decoder_widths=(256, 512),
        n_output_points=None,
        epochs=200,
        batch_size=16,
        learning_rate=1e-3,
        beta1=0.9,
        beta2=0.999,
        adam_eps=1e-8,
        seed=0,
        normalize_inputs=True,
    ):
        self.n_points = n_points
        self.latent_size = latent_size
        self.encoder_widths = encoder_widths
        self.decoder_widths = decoder_widths
        self.n_output_points = n_output_points
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.adam_eps = adam_eps
        self.seed = seed
        self.normalize_inputs = normalize_inputs

    def _prepare(self, X):
        clouds = as_cloud_batch(X, n_points=self.n_points)
        if self.normalize_inputs:
            clouds = [normalize(c)[0] for c in clouds]
        return clouds

    def fit(self, X, y=None):
        """Train on a batch of clouds; returns self."""
        clouds = self._prepare(X)
        config = ae.AEConfig(
            n_points=self.n_points,
            latent_size=self.latent_size,
            encoder_widths=tuple(self.encoder_widths),
            decoder_widths=tuple(self.decoder_widths),
            n_output_points=self.n_output_points,
            seed=self.seed,
        )
        train_cfg = ae.TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            adam_eps=self.adam_eps,
            seed=self.seed,
        )
        model = ae.build_model(config)
        _, history = ae.train(model, clouds, train_cfg)
        self.model_ = model
        self.loss_history_ = history
        return self

    def _require_fitted(self):
        if not hasattr(self, "model_"):
            raise DimensionError("estimator is not fitted; call fit first")

    def transform(self, X):
        """Encode clouds to an (B, latent_size) array of latent codes."""
        self._require_fitted()
        clouds = self._prepare(X)
        return np.stack([ae.encode(self.model_, c) for c in clouds])

    def inverse_transform(self, Z):
        """Decode latent codes to a (B, M, 3) array of clouds."""
        self._require_fitted()
        Z = np.asarray(Z, dtype=np.float64)
        if Z.ndim == 1:
            Z = Z[None, :]
        codes = [as_latent(z, size=self.model_.latent_size) for z in Z]
        return np.stack([ae.decode(self.model_, z) for z in codes])

    def score(self, X, y=None):
        """Negative mean Chamfer reconstruction loss (higher is better)."""
        self._require_fitted()
        clouds = self._prepare(X)
        losses = [chamfer(ae.reconstruct(self.model_, c), c) for c in clouds]
        return -float(np.mean(losses))
