"""Model file format: bit-exact save/load round trips.

Layout (all integers little-endian):

    4 bytes   magic ``DCAE``
    u32       format version (currently 1)
    u32       byte length of the UTF-8 JSON header that follows
    ...       JSON header: architecture config plus training metadata
    repeated  per parameter tensor, in declared order (encoder layers
              first, then decoder layers, weights before bias):
                u32      element count
                f64[n]   tensor data, little-endian
    u64       checksum: sum of all tensor payload bytes mod 2**64

Tensor shapes are not stored; they are reconstructed from the config, and
any mismatch is a distinct load error.
"""

import json
import struct

import numpy as np

from .autoencoder import AEConfig, AEModel
from .errors import FormatError
from .nn import Dense, PointwiseConv

MAGIC = b"DCAE"
VERSION = 1


def _expected_shapes(config):
    shapes = []
    fan_in = 3
    for width in list(config.encoder_widths) + [config.latent_size]:
        shapes.append((fan_in, width))
        shapes.append((width,))
        fan_in = width
    fan_in = config.latent_size
    for width in list(config.decoder_widths) + [3 * config.n_output_points]:
        shapes.append((fan_in, width))
        shapes.append((width,))
        fan_in = width
    return shapes


def _byte_sum(payload, acc):
    # uint64 accumulation wraps exactly at 2**64, which is the spec'd modulus
    total = np.frombuffer(payload, dtype=np.uint8).sum(dtype=np.uint64)
    return (acc + int(total)) % (1 << 64)


def save_model(model, path):
    """Write the model; load_model(path) reproduces it bitwise."""
    header = {
        "config": model.config.to_dict(),
        "epochs_trained": model.epochs_trained,
        "final_loss": model.final_loss,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    checksum = 0
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        for tensor in model.parameters():
            payload = np.ascontiguousarray(tensor, dtype="<f8").tobytes()
            fh.write(struct.pack("<I", tensor.size))
            fh.write(payload)
            checksum = _byte_sum(payload, checksum)
        fh.write(struct.pack("<Q", checksum))


def _read_exact(fh, n, what):
    data = fh.read(n)
    if len(data) != n:
        raise FormatError(f"truncated file while reading {what}", offset=fh.tell())
    return data


def load_model(path):
    """Read a model file, validating magic, version, shapes and checksum."""
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
        (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
        if version != VERSION:
            raise FormatError(f"unsupported format version {version}, expected {VERSION}")
        (header_len,) = struct.unpack("<I", _read_exact(fh, 4, "header length"))
        header_bytes = _read_exact(fh, header_len, "header")
        try:
            header = json.loads(header_bytes.decode("utf-8"))
            config = AEConfig.from_dict(header["config"])
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"malformed header: {exc}") from exc

        tensors = []
        checksum = 0
        for shape in _expected_shapes(config):
            count_pos = fh.tell()
            (count,) = struct.unpack("<I", _read_exact(fh, 4, "tensor count"))
            expected = int(np.prod(shape))
            if count != expected:
                raise FormatError(
                    f"tensor has {count} elements, config implies {expected}",
                    offset=count_pos,
                )
            payload = _read_exact(fh, 8 * count, "tensor data")
            checksum = _byte_sum(payload, checksum)
            tensors.append(np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(shape))
        (stored,) = struct.unpack("<Q", _read_exact(fh, 8, "checksum"))
        if stored != checksum:
            raise FormatError(f"checksum mismatch: stored {stored}, computed {checksum}")
        trailing = fh.read(1)
        if trailing:
            raise FormatError("trailing data after checksum", offset=fh.tell() - 1)

    encoder_layers = []
    decoder_layers = []
    n_enc = len(config.encoder_widths) + 1
    it = iter(tensors)
    pairs = list(zip(it, it))
    for i, (w, b) in enumerate(pairs):
        if i < n_enc:
            encoder_layers.append(PointwiseConv(w, b))
        else:
            decoder_layers.append(Dense(w, b))
    return AEModel(
        config=config,
        encoder_layers=encoder_layers,
        decoder_layers=decoder_layers,
        epochs_trained=int(header.get("epochs_trained", 0)),
        final_loss=header.get("final_loss"),
    )
