"""Operator command line: dataset generation, training, evaluation, serving.

Exit codes: 0 success, 2 usage/config/parse errors, 3 numeric failures
(divergence, non-convergence), 4 I/O or bind failures. All commands are
deterministic for fixed seeds and inputs, except ``serve``.
"""

import argparse
import json
import os
import socket
import sys
from pathlib import Path

import numpy as np

from . import autoencoder as ae
from .data import (
    build_dataset,
    load_cloud,
    load_dataset_clouds,
    load_manifest,
    normalize,
    save_cloud,
)
from .emd import emd_approx
from .errors import (
    CapacityError,
    ConfigError,
    ConvergenceError,
    DimensionError,
    DivergenceError,
    FormatError,
)
from .latent import interpolate
from .metrics import chamfer
from .model_io import load_model, save_model
from .shapes import FAMILIES

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

# fixed cap on per-epoch validation EMD computations; EMD is an
# evaluation metric only and a fixed subset keeps epochs cheap
VAL_EMD_SUBSET = 8


def _float_repr(x):
    return repr(float(x))


def save_latent(z, path):
    """Latent text format: one full-precision float per line."""
    Path(path).write_text("".join(_float_repr(v) + "\n" for v in z), encoding="utf-8")


def load_latent(path):
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise FormatError(
                    f"{path}: line {lineno}: non-numeric value: {exc}", line=lineno
                ) from exc
    if not values:
        raise FormatError(f"{path}: latent file contains no values")
    return np.asarray(values, dtype=np.float64)


def _split_indices(n, val_split, seed):
    """Deterministic train/validation split by seeded shuffle."""
    order = np.random.default_rng(seed).permutation(n)
    n_val = int(round(n * val_split))
    if val_split > 0 and n_val == 0 and n > 1:
        n_val = 1
    if n_val >= n:
        n_val = n - 1
    return np.sort(order[n_val:]), np.sort(order[:n_val])


def _approx_emd_cost(a, b):
    # auction tolerance: total slack fixed at 2% of the instance diameter
    bound = float(np.linalg.norm(a, axis=1).max() + np.linalg.norm(b, axis=1).max())
    eps = max(0.02 * bound, 1e-9) / a.shape[0]
    return emd_approx(a, b, eps).cost


def cmd_gen_data(args):
    build_dataset(
        args.out,
        count=args.count,
        families=args.families.split(","),
        n_points=args.points,
        seed=args.seed,
        fmt=args.format,
    )
    print(f"wrote {args.count} clouds and manifest to {args.out}")
    return EXIT_OK


def cmd_train(args):
    if not 0.0 <= args.val_split < 1.0:
        raise ConfigError(f"--val-split must be in [0, 1), got {args.val_split}")
    manifest = load_manifest(args.dataset)
    clouds = load_dataset_clouds(manifest, normalized=True)
    train_idx, val_idx = _split_indices(len(clouds), args.val_split, args.seed)
    train_clouds = [clouds[i] for i in train_idx]
    val_clouds = [clouds[i] for i in val_idx]

    config = ae.AEConfig(
        n_points=manifest.point_count,
        latent_size=args.latent,
        encoder_widths=tuple(int(w) for w in args.encoder_widths.split(",")),
        decoder_widths=tuple(int(w) for w in args.decoder_widths.split(",")),
        seed=args.seed,
    )
    model = ae.build_model(config)
    cfg = ae.TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        seed=args.seed,
    )

    log_rows = []
    emd_subset = val_clouds[:VAL_EMD_SUBSET]

    def epoch_metrics(epoch, train_loss):
        if val_clouds:
            val_ch = float(
                np.mean([chamfer(ae.reconstruct(model, c), c) for c in val_clouds])
            )
            val_emd = float(
                np.mean([_approx_emd_cost(ae.reconstruct(model, c), c) for c in emd_subset])
            )
        else:
            val_ch = float("nan")
            val_emd = float("nan")
        log_rows.append((epoch, train_loss, val_ch, val_emd))

    ae.train(model, train_clouds, cfg, epoch_fn=epoch_metrics)
    save_model(model, args.out_model)
    log_path = args.log if args.log else str(Path(args.out_model).with_suffix(".loss.csv"))
    with open(log_path, "w", encoding="utf-8") as fh:
        fh.write("epoch,train_chamfer,val_chamfer,val_emd_approx\n")
        for epoch, tr, vc, ve in log_rows:
            fh.write(f"{epoch},{_float_repr(tr)},{_float_repr(vc)},{_float_repr(ve)}\n")
    print(f"trained {args.epochs} epochs; model -> {args.out_model}; log -> {log_path}")
    return EXIT_OK


def evaluate_model(model, manifest):
    """Deterministic evaluation report over every manifest entry."""
    clouds = load_dataset_clouds(manifest, normalized=True)
    families = [e.family for e in manifest.entries]
    latents = [ae.encode(model, c) for c in clouds]
    recons = [ae.decode(model, z) for z in latents]
    chamfers = [chamfer(r, c) for r, c in zip(recons, clouds)]
    emds = [_approx_emd_cost(r, c) for r, c in zip(recons, clouds)]

    family_list = sorted(set(families))
    centroid_clouds = {}
    for fam in family_list:
        zs = [z for z, f in zip(latents, families) if f == fam]
        centroid_clouds[fam] = ae.decode(model, np.mean(zs, axis=0))
    correct = 0
    for recon, fam in zip(recons, families):
        best = min(family_list, key=lambda f: chamfer(recon, centroid_clouds[f]))
        correct += int(best == fam)

    return {
        "count": len(clouds),
        "families": family_list,
        "mean_chamfer": float(np.mean(chamfers)),
        "median_chamfer": float(np.median(chamfers)),
        "mean_emd_approx": float(np.mean(emds)),
        "median_emd_approx": float(np.median(emds)),
        "family_accuracy": correct / len(clouds),
    }


def cmd_eval(args):
    model = load_model(args.model)
    manifest = load_manifest(args.dataset)
    if manifest.point_count != model.config.n_points:
        raise DimensionError(
            f"dataset has {manifest.point_count}-point clouds, model expects "
            f"{model.config.n_points}"
        )
    report = evaluate_model(model, manifest)
    print(json.dumps(report, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_encode(args):
    model = load_model(args.model)
    cloud = load_cloud(args.infile)
    normalized, _, _ = normalize(cloud)
    z = ae.encode(model, normalized)
    save_latent(z, args.out)
    print(f"latent -> {args.out}")
    return EXIT_OK


def cmd_decode(args):
    model = load_model(args.model)
    z = load_latent(args.infile)
    cloud = ae.decode(model, z)
    save_cloud(cloud, args.out, fmt=args.format)
    print(f"cloud -> {args.out}")
    return EXIT_OK


def cmd_interp(args):
    model = load_model(args.model)
    latents = [load_latent(p) for p in args.latents]
    weights = np.asarray([float(w) for w in args.weights.split(",")], dtype=np.float64)
    h = interpolate(np.stack(latents), weights)
    cloud = ae.decode(model, h)
    save_cloud(cloud, args.out, fmt=args.format)
    if args.out_latent:
        save_latent(h, args.out_latent)
    print(f"cloud -> {args.out}")
    return EXIT_OK


def cmd_serve(args):
    from .service import build_catalog, create_app

    catalog = build_catalog(args.model, args.dataset)
    ui_dir = args.ui if args.ui and Path(args.ui).is_dir() else None
    app = create_app(catalog, ui_dir=ui_dir)

    host, _, port_str = args.bind.rpartition(":")
    if not host or not port_str:
        raise ConfigError(f"--bind must be addr:port, got {args.bind!r}")
    try:
        port = int(port_str)
    except ValueError as exc:
        raise ConfigError(f"invalid port in --bind: {port_str!r}") from exc

    import uvicorn

    config = uvicorn.Config(app, log_level="warning", lifespan="off")
    server = uvicorn.Server(config)

    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
        sock.listen(128)
    except OSError as exc:
        sock.close()
        print(f"error: cannot bind {args.bind}: {exc}", file=sys.stderr)
        return EXIT_IO
    bound = sock.getsockname()
    try:
        print(f"READY http://{bound[0]}:{bound[1]}", flush=True)
        server.run(sockets=[sock])
    except KeyboardInterrupt:
        # either uvicorn re-raising the captured SIGINT after a graceful
        # shutdown, or an interrupt in the window before its handlers exist;
        # both are a clean stop
        pass
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="latentcloud",
        description="Point-cloud autoencoder studio: generate data, train, "
        "evaluate, encode/decode, and serve the interactive API.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic dataset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--count", type=int, required=True, help="number of clouds")
    p.add_argument("--families", default=",".join(FAMILIES))
    p.add_argument("--points", type=int, default=256, help="points per cloud")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("binary", "text"), default="binary")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train an autoencoder on a dataset")
    p.add_argument("--dataset", required=True, help="path to manifest.json")
    p.add_argument("--out-model", required=True)
    p.add_argument("--latent", type=int, default=16)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--val-split", type=float, default=0.1)
    p.add_argument("--encoder-widths", default="64,128,256")
    p.add_argument("--decoder-widths", default="256,512")
    p.add_argument("--log", default=None, help="loss log CSV path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model over a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("encode", help="encode one cloud file to a latent file")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode a latent file to a cloud file")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("binary", "text"), default="text")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("interp", help="decode a weighted blend of latent files")
    p.add_argument("--model", required=True)
    p.add_argument("--weights", required=True, help="comma-separated weights")
    p.add_argument("--out", required=True)
    p.add_argument("--out-latent", default=None)
    p.add_argument("--format", choices=("binary", "text"), default="text")
    p.add_argument("latents", nargs="+", help="latent files, one per weight")
    p.set_defaults(func=cmd_interp)

    p = sub.add_parser("serve", help="serve the JSON API (and optional UI)")
    p.add_argument("--model", default=os.environ.get("LATENTCLOUD_MODEL"))
    p.add_argument("--dataset", default=os.environ.get("LATENTCLOUD_DATASET"))
    p.add_argument("--bind", default=os.environ.get("LATENTCLOUD_BIND", "127.0.0.1:8080"))
    p.add_argument("--ui", default=None, help="directory of static UI assets")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve" and (not args.model or not args.dataset):
        parser.error("serve requires --model and --dataset (or env vars)")
    try:
        return args.func(args)
    except (ConfigError, DimensionError, FormatError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DivergenceError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
