"""The generative model: permutation-invariant encoder, dense decoder, training.

Encoder: pointwise-conv blocks with ReLU over the hidden widths, a linear
pointwise projection to the latent width, then a columnwise max-pool over
points, so the latent is bitwise invariant to the input point order.
Decoder: two ReLU dense layers and a linear output layer reshaped to
(M, 3). Training minimizes mean Chamfer reconstruction loss with Adam and
is fully deterministic for a fixed seed.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError, DivergenceError
from .metrics import chamfer, chamfer_grad, chamfer_loss_grad
from .nn import (
    Adam,
    init_dense,
    init_pointwise_conv,
    maxpool_backward,
    maxpool_points,
    relu_backward,
    relu_forward,
)
from .validation import as_latent, as_point_cloud


@dataclass(frozen=True)
class AEConfig:
    """Architecture hyperparameters. Defaults follow the shipped tool
    (2048-point clouds, 32-wide latent); desk-scale runs override them."""

    n_points: int = 2048
    latent_size: int = 32
    encoder_widths: tuple = (64, 128, 256)
    decoder_widths: tuple = (256, 512)
    n_output_points: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "encoder_widths", tuple(int(w) for w in self.encoder_widths))
        object.__setattr__(self, "decoder_widths", tuple(int(w) for w in self.decoder_widths))
        if self.n_output_points is None:
            object.__setattr__(self, "n_output_points", self.n_points)
        if self.n_points < 1 or self.latent_size < 1 or self.n_output_points < 1:
            raise ConfigError("point counts and latent size must be >= 1")
        if not self.encoder_widths or any(w < 1 for w in self.encoder_widths):
            raise ConfigError("encoder widths must be positive")
        if any(b <= a for a, b in zip(self.encoder_widths, self.encoder_widths[1:])):
            raise ConfigError("encoder widths must be strictly increasing")
        if not self.decoder_widths or any(w < 1 for w in self.decoder_widths):
            raise ConfigError("decoder widths must be positive")

    def to_dict(self):
        return {
            "n_points": self.n_points,
            "latent_size": self.latent_size,
            "encoder_widths": list(self.encoder_widths),
            "decoder_widths": list(self.decoder_widths),
            "n_output_points": self.n_output_points,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            n_points=int(d["n_points"]),
            latent_size=int(d["latent_size"]),
            encoder_widths=tuple(d["encoder_widths"]),
            decoder_widths=tuple(d["decoder_widths"]),
            n_output_points=int(d["n_output_points"]),
            seed=int(d["seed"]),
        )


@dataclass
class TrainConfig:
    epochs: int = 200
    batch_size: int = 16
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    loss: str = "chamfer"
    checkpoint_interval: int = 0

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("epochs must be >= 0 and batch size >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning rate must be positive")
        if self.loss != "chamfer":
            raise ConfigError(f"unsupported loss {self.loss!r}; only 'chamfer' in v1")
        if self.checkpoint_interval < 0:
            raise ConfigError("checkpoint interval must be >= 0")


@dataclass
class AEModel:
    """Config plus live layers. Treated as immutable outside training."""

    config: AEConfig
    encoder_layers: list = field(default_factory=list)
    decoder_layers: list = field(default_factory=list)
    epochs_trained: int = 0
    final_loss: float | None = None

    def parameters(self):
        """All parameter arrays in declared (serialization) order."""
        out = []
        for layer in self.encoder_layers:
            out.extend(layer.parameters())
        for layer in self.decoder_layers:
            out.extend(layer.parameters())
        return out

    @property
    def latent_size(self):
        return self.config.latent_size

    @property
    def n_points(self):
        return self.config.n_points

    @property
    def n_output_points(self):
        return self.config.n_output_points


def build_model(config):
    """Seeded Glorot-uniform model; byte-for-byte reproducible per seed."""
    rng = np.random.default_rng(config.seed)
    conv_widths = list(config.encoder_widths) + [config.latent_size]
    encoder_layers = []
    fan_in = 3
    for width in conv_widths:
        encoder_layers.append(init_pointwise_conv(rng, fan_in, width))
        fan_in = width
    decoder_layers = []
    fan_in = config.latent_size
    for width in config.decoder_widths:
        decoder_layers.append(init_dense(rng, fan_in, width))
        fan_in = width
    decoder_layers.append(init_dense(rng, fan_in, 3 * config.n_output_points))
    return AEModel(config=config, encoder_layers=encoder_layers, decoder_layers=decoder_layers)


def _encode_cached(model, cloud):
    """Forward pass keeping pre-activations for the backward pass."""
    pre_acts = []  # conv outputs before ReLU (hidden) / before pool (last)
    h = cloud
    hidden = model.encoder_layers[:-1]
    for layer in hidden:
        a = layer.forward(h)
        pre_acts.append(a)
        h = relu_forward(a)
    last = model.encoder_layers[-1].forward(h)
    pre_acts.append(last)
    z, argmax = maxpool_points(last)
    return z, pre_acts, argmax


def _decode_cached(model, z):
    pre_acts = []
    u = z
    hidden = model.decoder_layers[:-1]
    for layer in hidden:
        b = layer.forward(u)
        pre_acts.append(b)
        u = relu_forward(b)
    y = model.decoder_layers[-1].forward(u)
    m = model.config.n_output_points
    return y.reshape(m, 3), pre_acts


def encode(model, cloud):
    """Latent code of a cloud; bitwise invariant to point order."""
    cloud = as_point_cloud(cloud, name="cloud", n_points=model.config.n_points)
    z, _, _ = _encode_cached(model, cloud)
    return z


def decode(model, z):
    """Decode a latent vector to an (M, 3) cloud; pure and deterministic."""
    z = as_latent(z, name="latent", size=model.config.latent_size)
    cloud, _ = _decode_cached(model, z)
    return cloud


def reconstruct(model, cloud):
    """decode(encode(cloud)) in one step."""
    return decode(model, encode(model, cloud))


def reconstruction_loss_and_grads(model, cloud):
    """Chamfer loss of the reconstruction and gradients for every parameter.

    Returns (loss, grads) with grads aligned to ``model.parameters()``.
    """
    cloud = as_point_cloud(cloud, name="cloud", n_points=model.config.n_points)
    z, enc_pre, argmax = _encode_cached(model, cloud)
    recon, dec_pre = _decode_cached(model, z)
    loss = chamfer(recon, cloud)
    g_recon = chamfer_grad(recon, cloud)

    # decoder backward
    dec_grads = []
    g = g_recon.reshape(-1)
    dec_hidden = model.decoder_layers[:-1]
    last_in = relu_forward(dec_pre[-1]) if dec_hidden else z
    gw, gb, g = model.decoder_layers[-1].backward(last_in, g)
    dec_grads.append((gw, gb))
    for i in range(len(dec_hidden) - 1, -1, -1):
        g = relu_backward(dec_pre[i], g)
        layer_in = relu_forward(dec_pre[i - 1]) if i > 0 else z
        gw, gb, g = dec_hidden[i].backward(layer_in, g)
        dec_grads.append((gw, gb))
    dec_grads.reverse()
    g_z = g

    # encoder backward through the max-pool
    enc_grads = []
    g_mat = maxpool_backward(argmax, g_z, cloud.shape[0])
    enc_hidden = model.encoder_layers[:-1]
    last_in = relu_forward(enc_pre[-2]) if enc_hidden else cloud
    gw, gb, g_mat = model.encoder_layers[-1].backward(last_in, g_mat)
    enc_grads.append((gw, gb))
    for i in range(len(enc_hidden) - 1, -1, -1):
        g_mat = relu_backward(enc_pre[i], g_mat)
        layer_in = relu_forward(enc_pre[i - 1]) if i > 0 else cloud
        gw, gb, g_mat = enc_hidden[i].backward(layer_in, g_mat)
        enc_grads.append((gw, gb))
    enc_grads.reverse()

    grads = []
    for gw, gb in enc_grads:
        grads.extend([gw, gb])
    for gw, gb in dec_grads:
        grads.extend([gw, gb])
    return loss, grads


def _batch_loss_and_grads(model, batch):
    """Sum of per-cloud losses and gradients over a batch, computed with
    batch-stacked matrix products.

    Numerically this reassociates the per-cloud sums (same result to
    rounding; see the equivalence test) but runs the network once per
    batch instead of once per cloud, which is what makes desk-scale
    training fit its time budget.
    """
    nb = len(batch)
    n = model.config.n_points
    m = model.config.n_output_points
    k = model.config.latent_size
    x = np.stack(batch)  # (B, N, 3)

    # encoder forward, flattened over points
    flat = x.reshape(nb * n, 3)
    enc_pre = []
    h = flat
    for layer in model.encoder_layers[:-1]:
        a = h @ layer.weights + layer.bias
        enc_pre.append(a)
        h = np.maximum(a, 0.0)
    last = h @ model.encoder_layers[-1].weights + model.encoder_layers[-1].bias
    enc_pre.append(last)
    pooled = last.reshape(nb, n, k)
    argmax = pooled.argmax(axis=1)  # (B, k), first occurrence
    z = np.take_along_axis(pooled, argmax[:, None, :], axis=1)[:, 0, :]

    # decoder forward
    dec_pre = []
    u = z
    for layer in model.decoder_layers[:-1]:
        b = u @ layer.weights + layer.bias
        dec_pre.append(b)
        u = np.maximum(b, 0.0)
    y = u @ model.decoder_layers[-1].weights + model.decoder_layers[-1].bias
    recons = y.reshape(nb, m, 3)
    if not np.isfinite(recons).all():
        raise DivergenceError("forward pass produced non-finite reconstructions")

    # loss and gradient w.r.t. each reconstruction
    losses = []
    g_recon = np.empty_like(recons)
    for i in range(nb):
        loss_i, grad_i = chamfer_loss_grad(recons[i], batch[i])
        losses.append(loss_i)
        g_recon[i] = grad_i

    # decoder backward
    g = g_recon.reshape(nb, 3 * m)
    dec_grads = []
    dec_hidden = model.decoder_layers[:-1]
    last_in = np.maximum(dec_pre[-1], 0.0) if dec_hidden else z
    dec_grads.append((last_in.T @ g, g.sum(axis=0)))
    g = g @ model.decoder_layers[-1].weights.T
    for i in range(len(dec_hidden) - 1, -1, -1):
        g = np.where(dec_pre[i] > 0.0, g, 0.0)
        layer_in = np.maximum(dec_pre[i - 1], 0.0) if i > 0 else z
        dec_grads.append((layer_in.T @ g, g.sum(axis=0)))
        g = g @ dec_hidden[i].weights.T
    dec_grads.reverse()
    g_z = g  # (B, k)

    # encoder backward through the pool
    g_pool = np.zeros((nb, n, k))
    np.put_along_axis(g_pool, argmax[:, None, :], g_z[:, None, :], axis=1)
    g_mat = g_pool.reshape(nb * n, k)
    enc_grads = []
    enc_hidden = model.encoder_layers[:-1]
    last_in = np.maximum(enc_pre[-2], 0.0) if enc_hidden else flat
    enc_grads.append((last_in.T @ g_mat, g_mat.sum(axis=0)))
    g_mat = g_mat @ model.encoder_layers[-1].weights.T
    for i in range(len(enc_hidden) - 1, -1, -1):
        g_mat = np.where(enc_pre[i] > 0.0, g_mat, 0.0)
        layer_in = np.maximum(enc_pre[i - 1], 0.0) if i > 0 else flat
        enc_grads.append((layer_in.T @ g_mat, g_mat.sum(axis=0)))
        g_mat = g_mat @ enc_hidden[i].weights.T
    enc_grads.reverse()

    grads = []
    for gw, gb in enc_grads:
        grads.extend([gw, gb])
    for gw, gb in dec_grads:
        grads.extend([gw, gb])
    return losses, grads


def train(model, clouds, cfg, checkpoint_fn=None, epoch_fn=None):
    """Train in place on a list of (already normalized) clouds.

    Returns ``(model, history)`` where history[i] is the mean Chamfer
    loss over epoch i, recorded before each batch's update. Shuffling and
    updates are deterministic given ``cfg.seed``. Raises DivergenceError
    naming the epoch if the loss goes non-finite. ``epoch_fn(epoch, loss)``
    runs after every epoch (for validation metrics); ``checkpoint_fn(model,
    epoch)`` runs every ``cfg.checkpoint_interval`` epochs.
    """
    clouds = [as_point_cloud(c, name=f"clouds[{i}]", n_points=model.config.n_points)
              for i, c in enumerate(clouds)]
    if not clouds:
        raise DimensionError("training set must contain at least one cloud")
    params = model.parameters()
    optimizer = Adam(params, lr=cfg.learning_rate, beta1=cfg.beta1,
                     beta2=cfg.beta2, eps=cfg.adam_eps)
    rng = np.random.default_rng(cfg.seed)
    history = []
    n = len(clouds)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch_idx = order[start : start + cfg.batch_size]
            try:
                losses, grads = _batch_loss_and_grads(model, [clouds[i] for i in batch_idx])
            except DivergenceError as exc:
                raise DivergenceError(f"{exc} at epoch {epoch}", epoch=epoch) from exc
            epoch_loss += sum(losses)
            scale = 1.0 / batch_idx.shape[0]
            for g in grads:
                g *= scale
            optimizer.step(grads)
        mean_loss = epoch_loss / n
        if not np.isfinite(mean_loss):
            raise DivergenceError(f"non-finite loss at epoch {epoch}", epoch=epoch)
        history.append(mean_loss)
        model.epochs_trained += 1
        model.final_loss = mean_loss
        if epoch_fn is not None:
            epoch_fn(epoch, mean_loss)
        if checkpoint_fn is not None and cfg.checkpoint_interval > 0:
            if (epoch + 1) % cfg.checkpoint_interval == 0:
                checkpoint_fn(model, epoch)
    return model, history
