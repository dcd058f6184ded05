import numpy as np
import pytest

from latentcloud import autoencoder as ae


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_model():
    """Small but non-trivial model: 8-point clouds, 4-wide latent."""
    config = ae.AEConfig(
        n_points=8, latent_size=4, encoder_widths=(8, 16), decoder_widths=(16, 32), seed=7
    )
    return ae.build_model(config)


def central_difference(f, x, i, h=1e-6):
    """Symmetric finite-difference derivative of f along flat index i of x."""
    flat = x.reshape(-1)
    orig = flat[i]
    flat[i] = orig + h
    fp = f()
    flat[i] = orig - h
    fm = f()
    flat[i] = orig
    return (fp - fm) / (2.0 * h)


def relative_error(a, b, floor=1e-8):
    return abs(a - b) / max(abs(a), abs(b), floor)
