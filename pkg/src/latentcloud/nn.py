"""Minimal layer kernel for the point-cloud autoencoder.

Implements exactly the layers the architecture needs: kernel-size-1
("pointwise") 1D convolutions, fully connected layers, ReLU and a
columnwise max-pool, each with a hand-derived backward pass, plus an
adaptive-moment (Adam) optimizer. Everything runs in float64 and is
deterministic: max ties break to the smallest row index and the ReLU
subgradient at 0 is 0.
"""

import numpy as np

from .errors import ConfigError, DimensionError
from .validation import as_feature_matrix


class PointwiseConv:
    """Kernel-size-1 1D convolution: one affine map applied to every row.

    Rows are points, columns are features, so the layer is a plain matrix
    multiply ``x @ W + b`` and is trivially permutation-equivariant in the
    rows.
    """

    def __init__(self, weights, bias):
        weights = np.asarray(weights, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if weights.ndim != 2 or bias.ndim != 1 or bias.shape[0] != weights.shape[1]:
            raise DimensionError(
                f"inconsistent layer shapes: weights {weights.shape}, bias {bias.shape}"
            )
        if not (np.isfinite(weights).all() and np.isfinite(bias).all()):
            raise DimensionError("layer parameters must be finite")
        self.weights = weights
        self.bias = bias

    @property
    def fan_in(self):
        return self.weights.shape[0]

    @property
    def fan_out(self):
        return self.weights.shape[1]

    def forward(self, x):
        x = as_feature_matrix(x)
        if x.shape[1] != self.fan_in:
            raise DimensionError(
                f"input has {x.shape[1]} features, layer expects {self.fan_in}"
            )
        return x @ self.weights + self.bias

    def backward(self, x, grad_out):
        """Gradients for a cached forward input ``x`` and upstream ``grad_out``.

        Returns (grad_weights, grad_bias, grad_x).
        """
        x = np.asarray(x, dtype=np.float64)
        grad_out = np.asarray(grad_out, dtype=np.float64)
        if grad_out.shape != (x.shape[0], self.fan_out):
            raise DimensionError(
                f"upstream gradient shape {grad_out.shape} does not match "
                f"forward output ({x.shape[0]}, {self.fan_out})"
            )
        grad_w = x.T @ grad_out
        grad_b = grad_out.sum(axis=0)
        grad_x = grad_out @ self.weights.T
        return grad_w, grad_b, grad_x

    def parameters(self):
        return [self.weights, self.bias]


class Dense:
    """Fully connected layer on 1-d vectors: ``x @ W + b``."""

    def __init__(self, weights, bias):
        weights = np.asarray(weights, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if weights.ndim != 2 or bias.ndim != 1 or bias.shape[0] != weights.shape[1]:
            raise DimensionError(
                f"inconsistent layer shapes: weights {weights.shape}, bias {bias.shape}"
            )
        if not (np.isfinite(weights).all() and np.isfinite(bias).all()):
            raise DimensionError("layer parameters must be finite")
        self.weights = weights
        self.bias = bias

    @property
    def fan_in(self):
        return self.weights.shape[0]

    @property
    def fan_out(self):
        return self.weights.shape[1]

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] != self.fan_in:
            raise DimensionError(
                f"input has shape {x.shape}, layer expects ({self.fan_in},)"
            )
        return x @ self.weights + self.bias

    def backward(self, x, grad_out):
        x = np.asarray(x, dtype=np.float64)
        grad_out = np.asarray(grad_out, dtype=np.float64)
        if grad_out.shape != (self.fan_out,):
            raise DimensionError(
                f"upstream gradient shape {grad_out.shape} does not match ({self.fan_out},)"
            )
        grad_w = np.outer(x, grad_out)
        grad_b = grad_out.copy()
        grad_x = self.weights @ grad_out
        return grad_w, grad_b, grad_x

    def parameters(self):
        return [self.weights, self.bias]


def relu_forward(x):
    """Elementwise max(0, x)."""
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def relu_backward(x, grad_out):
    """Gate the upstream gradient by the sign of the cached input.

    The subgradient at exactly 0 is 0.
    """
    x = np.asarray(x, dtype=np.float64)
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if grad_out.shape != x.shape:
        raise DimensionError(
            f"upstream gradient shape {grad_out.shape} does not match input {x.shape}"
        )
    return np.where(x > 0.0, grad_out, 0.0)


def maxpool_points(x):
    """Columnwise max over the rows of (N, F), with argmax row indices.

    Returns ``(values, argmax)`` where ``values[j]`` is the maximum of
    column j and ``argmax[j]`` the smallest row index attaining it. The
    values are invariant under any permutation of the rows.
    """
    x = as_feature_matrix(x)
    argmax = np.argmax(x, axis=0)  # first occurrence == smallest row index
    values = x[argmax, np.arange(x.shape[1])]
    return values, argmax


def maxpool_backward(argmax, grad_out, n_rows):
    """Route the pooled gradient back to the argmax rows, zeros elsewhere."""
    argmax = np.asarray(argmax)
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if argmax.shape != grad_out.shape or grad_out.ndim != 1:
        raise DimensionError(
            f"argmax shape {argmax.shape} and gradient shape {grad_out.shape} must be equal 1-d"
        )
    if n_rows < 1:
        raise DimensionError("n_rows must be >= 1")
    grad_x = np.zeros((n_rows, grad_out.shape[0]), dtype=np.float64)
    grad_x[argmax, np.arange(grad_out.shape[0])] = grad_out
    return grad_x


class Adam:
    """Adaptive-moment optimizer over a fixed list of parameter arrays.

    Holds one first- and one second-moment accumulator per parameter and a
    step counter; `step` applies the bias-corrected update in place.
    """

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        if lr <= 0 or not (0 <= beta1 < 1) or not (0 <= beta2 < 1) or eps <= 0:
            raise ConfigError("invalid optimizer hyperparameters")
        self.params = list(params)
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]
        self.t = 0

    def step(self, grads):
        grads = list(grads)
        if len(grads) != len(self.params):
            raise DimensionError(
                f"got {len(grads)} gradients for {len(self.params)} parameters"
            )
        for p, g in zip(self.params, grads):
            if np.shape(g) != p.shape:
                raise DimensionError(
                    f"gradient shape {np.shape(g)} does not match parameter {p.shape}"
                )
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            g = np.asarray(g, dtype=np.float64)
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def glorot_uniform(rng, fan_in, fan_out):
    """Scaled-uniform weight matrix bounded by +/- sqrt(6 / (fan_in + fan_out))."""
    if fan_in < 1 or fan_out < 1:
        raise ConfigError(f"layer widths must be positive, got ({fan_in}, {fan_out})")
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_pointwise_conv(rng, fan_in, fan_out):
    """Freshly initialized pointwise conv: Glorot weights, zero bias."""
    return PointwiseConv(glorot_uniform(rng, fan_in, fan_out), np.zeros(fan_out))


def init_dense(rng, fan_in, fan_out):
    """Freshly initialized dense layer: Glorot weights, zero bias."""
    return Dense(glorot_uniform(rng, fan_in, fan_out), np.zeros(fan_out))
