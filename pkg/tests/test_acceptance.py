"""Acceptance suite: one test per release criterion, at its stated tolerance.

Each test prints one `ACCEPTANCE <name>: PASS` line (visible with
``pytest -s``); a failed assertion both fails the test and marks the
criterion. The desk-scale training experiment is the long pole and runs
once as a session fixture shared by its sub-criteria.
"""

import itertools
import json
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import numpy as np
import pytest
from fastapi.testclient import TestClient

from latentcloud import autoencoder as ae
from latentcloud.cli import main as cli_main
from latentcloud.data import build_dataset, load_dataset_clouds, normalize, save_cloud, load_cloud
from latentcloud.emd import emd_approx, emd_exact
from latentcloud.latent import feature_edit, interpolate, latent_stats, slider_to_t
from latentcloud.metrics import chamfer
from latentcloud.model_io import load_model, save_model
from latentcloud.nn import (
    init_dense,
    init_pointwise_conv,
    maxpool_backward,
    maxpool_points,
    relu_backward,
    relu_forward,
)
from latentcloud.service import build_catalog, create_app
from latentcloud.spatial import KdTree, brute_force_nearest


@contextmanager
def criterion(name, budget_s=None, extra=lambda: ""):
    """Print one ACCEPTANCE pass/fail line for the enclosed checks."""
    started = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - started
        if budget_s is not None:
            assert elapsed < budget_s, f"{name} took {elapsed:.1f}s, budget {budget_s}s"
    except BaseException:
        elapsed = time.perf_counter() - started
        print(f"ACCEPTANCE {name}: FAIL ({elapsed:.1f}s)", flush=True)
        raise
    print(f"ACCEPTANCE {name}: PASS ({elapsed:.1f}s{extra()})", flush=True)


def rel_err(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-10)


def central_diff(f, arr, i, h=1e-6):
    flat = arr.reshape(-1)
    orig = flat[i]
    flat[i] = orig + h
    fp = f()
    flat[i] = orig - h
    fm = f()
    flat[i] = orig
    return (fp - fm) / (2.0 * h)


# --- criterion: gradient correctness -------------------------------------


def test_gradient_correctness():
    with criterion("gradient-correctness", budget_s=30.0):
        _check_gradient_correctness()


def _check_gradient_correctness():
    rng = np.random.default_rng(101)

    # layer backward passes, 25 probes each, tolerance 1e-5
    probes_done = 0
    for _ in range(25):
        layer = init_pointwise_conv(rng, 4, 6)
        x = rng.normal(size=(7, 4))
        upstream = rng.normal(size=(7, 6))
        gw, gb, gx = layer.backward(x, upstream)

        def loss():
            return float(np.sum(layer.forward(x) * upstream))

        for target, grad in ((layer.weights, gw), (x, gx)):
            i = int(rng.integers(target.size))
            assert rel_err(central_diff(loss, target, i), grad.reshape(-1)[i]) < 1e-5
        probes_done += 2
    for _ in range(25):
        layer = init_dense(rng, 5, 4)
        x = rng.normal(size=5)
        upstream = rng.normal(size=4)
        gw, gb, gx = layer.backward(x, upstream)

        def loss():
            return float(np.sum(layer.forward(x) * upstream))

        i = int(rng.integers(layer.weights.size))
        assert rel_err(central_diff(loss, layer.weights, i), gw.reshape(-1)[i]) < 1e-5
        j = int(rng.integers(x.size))
        assert rel_err(central_diff(loss, x, j), gx[j]) < 1e-5
        probes_done += 2
    for _ in range(25):
        x = rng.normal(size=(6, 5))
        x[np.abs(x) < 1e-3] += 0.1  # stay off the ReLU kink
        upstream = rng.normal(size=(6, 5))

        def loss():
            return float(np.sum(relu_forward(x) * upstream))

        grad = relu_backward(x, upstream)
        i = int(rng.integers(x.size))
        assert rel_err(central_diff(loss, x, i), grad.reshape(-1)[i]) < 1e-5
        probes_done += 1
    for _ in range(25):
        x = rng.normal(size=(9, 4))
        sorted_cols = np.sort(x, axis=0)
        if np.any(sorted_cols[-1] - sorted_cols[-2] < 1e-4):
            continue  # skip near-ties; spec excludes them
        upstream = rng.normal(size=4)
        _, argmax = maxpool_points(x)
        grad = maxpool_backward(argmax, upstream, 9)

        def loss():
            v, _ = maxpool_points(x)
            return float(np.sum(v * upstream))

        i = int(rng.integers(x.size))
        assert rel_err(central_diff(loss, x, i), grad.reshape(-1)[i]) < 1e-5
        probes_done += 1
    assert probes_done >= 100

    # end-to-end Chamfer-loss gradient on the tiny model, tolerance 1e-4
    config = ae.AEConfig(
        n_points=8, latent_size=4, encoder_widths=(8, 16), decoder_widths=(16, 32), seed=7
    )
    model = ae.build_model(config)
    cloud = rng.normal(size=(8, 3))
    _, grads = ae.reconstruction_loss_and_grads(model, cloud)
    params = model.parameters()

    def loss():
        return chamfer(ae.reconstruct(model, cloud), cloud)

    checked = 0
    while checked < 100:
        pi = int(rng.integers(len(params)))
        p, g = params[pi], grads[pi]
        i = int(rng.integers(p.size))
        fd = central_diff(loss, p, i)
        assert rel_err(fd, g.reshape(-1)[i]) < 1e-4, (pi, i)
        checked += 1


# --- criterion: permutation invariance ------------------------------------


def test_permutation_invariance():
    with criterion("permutation-invariance", budget_s=5.0):
        rng = np.random.default_rng(202)
        config = ae.AEConfig(
            n_points=32, latent_size=8, encoder_widths=(16, 32), decoder_widths=(16,), seed=1
        )
        model = ae.build_model(config)
        for _ in range(100):
            cloud = rng.normal(size=(32, 3))
            perm = rng.permutation(32)
            z = ae.encode(model, cloud)
            z_perm = ae.encode(model, cloud[perm])
            assert z.tobytes() == z_perm.tobytes()


# --- criterion: metric oracles ---------------------------------------------


def test_metric_oracles():
    with criterion("metric-oracles", budget_s=60.0):
        _check_metric_oracles()


def _check_metric_oracles():
    rng = np.random.default_rng(303)

    # emd_exact == exhaustive-permutation minimum, 50 instances, n <= 7
    for _ in range(50):
        n = int(rng.integers(1, 8))
        a = rng.normal(size=(n, 3))
        b = rng.normal(size=(n, 3))
        cost = np.sqrt(
            np.einsum("ijk,ijk->ij", a[:, None] - b[None, :], a[:, None] - b[None, :])
        )
        oracle = min(
            float(cost[np.arange(n), list(p)].sum())
            for p in itertools.permutations(range(n))
        )
        assert emd_exact(a, b).cost == pytest.approx(oracle, abs=1e-9)

    # emd_approx within 1% of emd_exact for n <= 64
    for n in (2, 5, 9, 17, 33, 48, 64):
        a = rng.normal(size=(n, 3))
        b = rng.normal(size=(n, 3))
        exact = emd_exact(a, b)
        eps = 0.01 * exact.cost / n
        approx = emd_approx(a, b, eps)
        assert exact.cost - 1e-9 <= approx.cost <= exact.cost * 1.01 + 1e-12

    # chamfer vs brute-force double loop, 100 instances, 1e-12
    for _ in range(100):
        a = rng.normal(size=(int(rng.integers(1, 14)), 3))
        b = rng.normal(size=(int(rng.integers(1, 14)), 3))
        brute = sum(min(float(np.sum((p - q) ** 2)) for q in b) for p in a)
        brute += sum(min(float(np.sum((q - p) ** 2)) for p in a) for q in b)
        assert chamfer(a, b) == pytest.approx(brute, abs=1e-12)

    # spatial index vs brute force, 1000 queries, exact
    pts = rng.normal(size=(500, 3))
    pts[123] = pts[45]  # exercise the tie rule
    tree = KdTree(pts)
    for i in range(1000):
        q = pts[int(rng.integers(500))] if i % 5 == 0 else rng.normal(size=3)
        assert tree.query(q) == brute_force_nearest(pts, q)


# --- criterion: latent-operation identities --------------------------------


def test_latent_operation_identities():
    with criterion("latent-operation-identities", budget_s=5.0):
        _check_latent_identities()


def _check_latent_identities():
    rng = np.random.default_rng(404)
    config = ae.AEConfig(
        n_points=16, latent_size=12, encoder_widths=(8, 16), decoder_widths=(16,), seed=2
    )
    model = ae.build_model(config)

    v = rng.normal(size=(5, 12))
    for i in range(5):
        w = np.zeros(5)
        w[i] = 1.0
        h = interpolate(v, w)
        assert h.tobytes() == v[i].tobytes()
        assert ae.decode(model, h).tobytes() == ae.decode(model, v[i]).tobytes()

    pair = rng.normal(size=(2, 12))
    mid = interpolate(pair, [1.0, 1.0])
    np.testing.assert_allclose(mid, (pair[0] + pair[1]) / 2, atol=1e-12)

    f = rng.normal(size=12)
    t = rng.normal(size=12)
    np.testing.assert_array_equal(feature_edit(f, np.zeros(12)), f)
    np.testing.assert_allclose(feature_edit(feature_edit(f, t), -t), f, atol=1e-12)

    stats = latent_stats([rng.normal(size=12) for _ in range(20)])
    t0 = slider_to_t(stats, np.zeros(8), np.zeros(8), 0)
    np.testing.assert_array_equal(t0, np.zeros(12))
    base = rng.normal(size=12)
    edited = feature_edit(base, t0)
    assert ae.decode(model, edited).tobytes() == ae.decode(model, base).tobytes()


# --- criterion: desk-scale training experiment ------------------------------


@pytest.fixture(scope="session")
def desk_experiment(tmp_path_factory):
    """Dataset of 200 clouds (3 families, N=256, seed 7), k=16, 200 epochs."""
    started = time.perf_counter()
    root = tmp_path_factory.mktemp("desk")
    manifest = build_dataset(root / "ds", count=200, n_points=256, seed=7)
    clouds = load_dataset_clouds(manifest, normalized=True)
    families = [e.family for e in manifest.entries]

    order = np.random.default_rng(7).permutation(len(clouds))
    val_idx = sorted(order[:40])
    train_idx = sorted(order[40:])

    config = ae.AEConfig(
        n_points=256, latent_size=16, encoder_widths=(64, 128, 256),
        decoder_widths=(256, 512), seed=7,
    )
    model = ae.build_model(config)
    _, history = ae.train(
        model,
        [clouds[i] for i in train_idx],
        ae.TrainConfig(epochs=200, batch_size=16, learning_rate=1e-3, seed=7),
    )
    elapsed = time.perf_counter() - started
    return {
        "root": root,
        "model": model,
        "history": history,
        "clouds": clouds,
        "families": families,
        "train_idx": train_idx,
        "val_idx": val_idx,
        "elapsed": elapsed,
    }


def test_desk_scale_training_experiment(desk_experiment):
    exp = desk_experiment
    stats = {}

    def extra():
        return (
            f"; total {stats['total']:.0f}s; "
            f"loss {exp['history'][0]:.1f}->{exp['history'][-1]:.1f}, "
            f"memorization {stats['mem']:.3%}, family accuracy {stats['acc']:.0%}"
        )

    with criterion("desk-scale-training", extra=extra):
        started = time.perf_counter()
        model, history = exp["model"], exp["history"]

        # (a) final mean train Chamfer <= 20% of the epoch-0 value
        assert len(history) == 200
        assert history[-1] <= 0.20 * history[0], (history[0], history[-1])

        # (b) single-example memorization reaches < 5% of the initial Chamfer
        mem_config = ae.AEConfig(
            n_points=256, latent_size=16, encoder_widths=(64, 128, 256),
            decoder_widths=(256, 512), seed=7,
        )
        mem_model = ae.build_model(mem_config)
        target = exp["clouds"][0]
        _, mem_history = ae.train(
            mem_model, [target], ae.TrainConfig(epochs=200, batch_size=1, seed=7)
        )
        mem_final = chamfer(ae.reconstruct(mem_model, target), target)
        assert mem_final < 0.05 * mem_history[0], (mem_history[0], mem_final)
        stats["mem"] = mem_final / mem_history[0]

        # (c) held-out reconstructions classified to the correct family by
        # nearest-family-centroid Chamfer on >= 90% of items
        train_latents = {}
        for i in exp["train_idx"]:
            train_latents.setdefault(exp["families"][i], []).append(
                ae.encode(model, exp["clouds"][i])
            )
        centroid_clouds = {
            fam: ae.decode(model, np.mean(zs, axis=0)) for fam, zs in train_latents.items()
        }
        fams = sorted(centroid_clouds)
        correct = 0
        for i in exp["val_idx"]:
            recon = ae.reconstruct(model, exp["clouds"][i])
            best = min(fams, key=lambda f: chamfer(recon, centroid_clouds[f]))
            correct += int(best == exp["families"][i])
        accuracy = correct / len(exp["val_idx"])
        assert accuracy >= 0.90, accuracy
        stats["acc"] = accuracy

        # the 10-minute budget covers dataset build + training + checks
        stats["total"] = exp["elapsed"] + (time.perf_counter() - started)
        assert stats["total"] < 600.0, f"experiment took {stats['total']:.0f}s"


# --- criterion: persistence and wire fidelity -------------------------------


@pytest.fixture(scope="session")
def wire_fixture(tmp_path_factory):
    root = tmp_path_factory.mktemp("wire")
    manifest = build_dataset(root / "ds", count=8, n_points=48, seed=5)
    clouds = load_dataset_clouds(manifest, normalized=True)
    config = ae.AEConfig(
        n_points=48, latent_size=10, encoder_widths=(16, 32), decoder_widths=(32, 64), seed=5
    )
    model = ae.build_model(config)
    ae.train(model, clouds, ae.TrainConfig(epochs=2, batch_size=4, seed=5))
    model_path = root / "model.dcae"
    save_model(model, model_path)
    return root, model, model_path


def test_persistence_and_wire_fidelity(wire_fixture, tmp_path):
    with criterion("persistence-and-wire-fidelity", budget_s=60.0):
        _check_wire_fidelity(wire_fixture, tmp_path)


def _check_wire_fidelity(wire_fixture, tmp_path):
    root, model, model_path = wire_fixture
    rng = np.random.default_rng(505)

    # model round trip is bitwise
    loaded = load_model(model_path)
    assert loaded.config == model.config
    for a, b in zip(model.parameters(), loaded.parameters()):
        assert a.tobytes() == b.tobytes()
    again = tmp_path / "again.dcae"
    save_model(loaded, again)
    assert again.read_bytes() == model_path.read_bytes()

    # cloud binary format round trip is bitwise
    cloud32 = rng.normal(size=(64, 3)).astype(np.float32).astype(np.float64)
    cpath = tmp_path / "c.pcb"
    save_cloud(cloud32, cpath, fmt="binary")
    assert load_cloud(cpath).tobytes() == cloud32.tobytes()
    save_cloud(load_cloud(cpath), tmp_path / "c2.pcb", fmt="binary")
    assert (tmp_path / "c2.pcb").read_bytes() == cpath.read_bytes()

    # every endpoint equals the in-process computation after the decimal
    # round trip
    catalog = build_catalog(model_path, root / "ds" / "manifest.json")
    client = TestClient(create_app(catalog), raise_server_exceptions=False)

    info = client.get("/api/v1/info").json()
    np.testing.assert_array_equal(np.asarray(info["latent_stats"]["min"]), catalog.stats.min)
    np.testing.assert_array_equal(np.asarray(info["latent_stats"]["max"]), catalog.stats.max)

    entry = catalog.entries[3]
    item = client.get(f"/api/v1/items/{entry.id}").json()
    np.testing.assert_array_equal(np.asarray(item["latent"]), catalog.latents[3])
    np.testing.assert_array_equal(
        np.asarray(item["points"]), ae.decode(model, catalog.latents[3])
    )

    z = rng.normal(size=10)
    dec = client.post("/api/v1/decode", json={"latent": list(map(float, z))}).json()
    np.testing.assert_array_equal(np.asarray(dec["points"]), ae.decode(model, z))

    sliders = list(rng.uniform(-1, 1, size=8))
    knobs = list(rng.uniform(-0.1, 0.1, size=8))
    edit = client.post(
        "/api/v1/edit",
        json={"base_id": entry.id, "sliders": sliders, "knobs": knobs, "offset": 1},
    ).json()
    t = slider_to_t(catalog.stats, sliders, knobs, 1)
    x = feature_edit(catalog.latents[3], t)
    np.testing.assert_array_equal(np.asarray(edit["latent"]), x)
    np.testing.assert_array_equal(np.asarray(edit["points"]), ae.decode(model, x))

    ids = [catalog.entries[0].id, catalog.entries[1].id, catalog.entries[2].id]
    weights = [0.5, 0.25, 0.25]
    inter = client.post("/api/v1/interpolate", json={"ids": ids, "weights": weights}).json()
    h = interpolate(catalog.latents[:3], weights)
    np.testing.assert_array_equal(np.asarray(inter["latent"]), h)
    np.testing.assert_array_equal(np.asarray(inter["points"]), ae.decode(model, h))

    # 16 concurrent identical requests return identical bodies
    payload = {"latent": list(map(float, rng.normal(size=10)))}

    def call(_):
        return client.post("/api/v1/decode", json=payload).content

    with ThreadPoolExecutor(max_workers=16) as pool:
        bodies = list(pool.map(call, range(16)))
    assert all(b == bodies[0] for b in bodies)


# --- criterion: determinism --------------------------------------------------


def test_determinism(tmp_path, capsys):
    with criterion("determinism"):
        _check_determinism(tmp_path, capsys)


def _check_determinism(tmp_path, capsys):
    # gen-data twice
    for name in ("d1", "d2"):
        assert cli_main([
            "gen-data", "--out", str(tmp_path / name), "--count", "10",
            "--points", "32", "--seed", "9",
        ]) == 0
    files1 = sorted(p for p in (tmp_path / "d1").rglob("*") if p.is_file())
    for f1 in files1:
        f2 = tmp_path / "d2" / f1.relative_to(tmp_path / "d1")
        assert f1.read_bytes() == f2.read_bytes(), f1.name

    # train twice
    model_bytes, log_bytes = [], []
    for name in ("m1", "m2"):
        out = tmp_path / f"{name}.dcae"
        assert cli_main([
            "train", "--dataset", str(tmp_path / "d1" / "manifest.json"),
            "--out-model", str(out), "--latent", "8", "--epochs", "3", "--seed", "9",
            "--encoder-widths", "16,32", "--decoder-widths", "16,32",
        ]) == 0
        model_bytes.append(out.read_bytes())
        log_bytes.append(out.with_suffix(".loss.csv").read_bytes())
    assert model_bytes[0] == model_bytes[1]
    assert log_bytes[0] == log_bytes[1]

    # eval twice
    capsys.readouterr()
    reports = []
    for _ in range(2):
        assert cli_main([
            "eval", "--model", str(tmp_path / "m1.dcae"),
            "--dataset", str(tmp_path / "d1" / "manifest.json"),
        ]) == 0
        reports.append(capsys.readouterr().out)
    assert reports[0] == reports[1]
    json.loads(reports[0])  # well-formed report
