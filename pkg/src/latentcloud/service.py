"""JSON-over-HTTP inference API for the latent-space studio.

All shared state (model, catalog, stats) is immutable after startup, so
request handling is lock-free and identical requests always return
identical bodies. Floats are serialized with Python's shortest
round-trip repr, which preserves every bit across the wire.

Endpoints (all under ``/api/v1``):

    GET  /info          model config, dataset summary, latent stats
    GET  /items         dataset entries (id, family, point count)
    GET  /items/{id}    one entry with its latent code and decoded cloud
    POST /decode        {"latent": [k floats]} -> {"points": [[x,y,z]...]}
    POST /edit          {"base_id"|"base_latent", "sliders", "knobs",
                         "offset"} -> {"latent", "points"}
    POST /interpolate   {"ids": [...], "weights": [...]} -> {"latent",
                         "points"}

Errors are JSON bodies ``{"error": ...}`` with status 400 (bad request),
404 (unknown id) or 503 (no model loaded).
"""

import math
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import autoencoder as ae
from .data import load_cloud, load_manifest, normalize
from .errors import ConfigError, DimensionError, LatentCloudError
from .latent import SLIDER_COUNT, feature_edit, interpolate, latent_stats, slider_to_t
from .model_io import load_model


@dataclass(frozen=True)
class SessionCatalog:
    """Immutable server state: model, dataset entries, latents, stats."""

    model: object
    entries: tuple  # ManifestEntry, manifest order
    latents: np.ndarray  # (n_entries, k)
    stats: object  # LatentStats
    families: tuple

    def entry_index(self, item_id):
        for i, entry in enumerate(self.entries):
            if entry.id == item_id:
                return i
        return None


def build_catalog(model_path, manifest_path):
    """Load model + dataset and precompute every entry's latent code."""
    model = load_model(model_path)
    manifest = load_manifest(manifest_path)
    if manifest.point_count != model.config.n_points:
        raise DimensionError(
            f"dataset clouds have {manifest.point_count} points but the model "
            f"expects {model.config.n_points}"
        )
    latents = []
    for entry in manifest.entries:
        cloud, _, _ = normalize(load_cloud(manifest.resolve(entry)))
        latents.append(ae.encode(model, cloud))
    latents = np.stack(latents)
    return SessionCatalog(
        model=model,
        entries=manifest.entries,
        latents=latents,
        stats=latent_stats(list(latents)),
        families=tuple(manifest.families),
    )


class _ApiError(Exception):
    def __init__(self, status, message):
        super().__init__(message)
        self.status = status
        self.message = message


def _error_response(status, message):
    return JSONResponse(status_code=status, content={"error": message})


def _require_catalog(app):
    catalog = app.state.catalog
    if catalog is None:
        raise _ApiError(503, "model not loaded")
    return catalog


def _float_list(value, name, length=None):
    if not isinstance(value, (list, tuple)):
        raise _ApiError(400, f"{name} must be an array")
    if length is not None and len(value) != length:
        raise _ApiError(400, f"{name} must have length {length}, got {len(value)}")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise _ApiError(400, f"{name} must contain finite numbers")
        out.append(float(v))
    return out


def _points_payload(cloud):
    return [[float(x), float(y), float(z)] for x, y, z in cloud]


async def _json_body(request):
    try:
        body = await request.json()
    except Exception as exc:
        raise _ApiError(400, f"request body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise _ApiError(400, "request body must be a JSON object")
    return body


def create_app(catalog=None, ui_dir=None):
    """Build the ASGI app around an immutable catalog (None -> 503s)."""
    app = FastAPI(title="latentcloud", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.catalog = catalog

    @app.exception_handler(_ApiError)
    async def _handle_api_error(request, exc):
        return _error_response(exc.status, exc.message)

    @app.exception_handler(LatentCloudError)
    async def _handle_domain_error(request, exc):
        return _error_response(400, str(exc))

    @app.get("/api/v1/info")
    async def info():
        catalog = _require_catalog(app)
        model = catalog.model
        return {
            "model": {
                "n_points": model.config.n_points,
                "latent_size": model.config.latent_size,
                "n_output_points": model.config.n_output_points,
                "encoder_widths": list(model.config.encoder_widths),
                "decoder_widths": list(model.config.decoder_widths),
                "epochs_trained": model.epochs_trained,
            },
            "dataset": {
                "count": len(catalog.entries),
                "families": list(catalog.families),
            },
            "latent_stats": {
                "min": [float(v) for v in catalog.stats.min],
                "max": [float(v) for v in catalog.stats.max],
                "count": catalog.stats.count,
            },
            "controls": {
                "sliders": SLIDER_COUNT,
                "slider_range": [-1.0, 1.0],
                "knob_range": [-0.1, 0.1],
            },
        }

    @app.get("/api/v1/items")
    async def items():
        catalog = _require_catalog(app)
        return {
            "items": [
                {"id": e.id, "family": e.family, "points": e.points}
                for e in catalog.entries
            ]
        }

    @app.get("/api/v1/items/{item_id}")
    async def item(item_id: str):
        catalog = _require_catalog(app)
        idx = catalog.entry_index(item_id)
        if idx is None:
            raise _ApiError(404, f"unknown item id {item_id!r}")
        entry = catalog.entries[idx]
        z = catalog.latents[idx]
        cloud = ae.decode(catalog.model, z)
        return {
            "id": entry.id,
            "family": entry.family,
            "latent": [float(v) for v in z],
            "points": _points_payload(cloud),
        }

    @app.post("/api/v1/decode")
    async def decode_endpoint(request: Request):
        catalog = _require_catalog(app)
        body = await _json_body(request)
        if "latent" not in body:
            raise _ApiError(400, "missing field 'latent'")
        k = catalog.model.config.latent_size
        latent = _float_list(body["latent"], "latent", length=k)
        cloud = ae.decode(catalog.model, np.asarray(latent))
        return {"points": _points_payload(cloud)}

    def _resolve_base(catalog, body):
        if "base_id" in body:
            idx = catalog.entry_index(body["base_id"])
            if idx is None:
                raise _ApiError(404, f"unknown item id {body['base_id']!r}")
            return catalog.latents[idx]
        if "base_latent" in body:
            k = catalog.model.config.latent_size
            return np.asarray(_float_list(body["base_latent"], "base_latent", length=k))
        raise _ApiError(400, "provide either 'base_id' or 'base_latent'")

    @app.post("/api/v1/edit")
    async def edit(request: Request):
        catalog = _require_catalog(app)
        body = await _json_body(request)
        base = _resolve_base(catalog, body)
        sliders = _float_list(body.get("sliders", [0.0] * SLIDER_COUNT), "sliders", SLIDER_COUNT)
        knobs = _float_list(body.get("knobs", [0.0] * SLIDER_COUNT), "knobs", SLIDER_COUNT)
        offset = body.get("offset", 0)
        if isinstance(offset, bool) or not isinstance(offset, int):
            raise _ApiError(400, "offset must be an integer")
        try:
            t = slider_to_t(catalog.stats, sliders, knobs, offset)
            x = feature_edit(base, t)
        except (ConfigError, DimensionError) as exc:
            raise _ApiError(400, str(exc)) from exc
        cloud = ae.decode(catalog.model, x)
        return {"latent": [float(v) for v in x], "points": _points_payload(cloud)}

    @app.post("/api/v1/interpolate")
    async def interpolate_endpoint(request: Request):
        catalog = _require_catalog(app)
        body = await _json_body(request)
        ids = body.get("ids")
        if not isinstance(ids, list) or len(ids) < 2:
            raise _ApiError(400, "'ids' must list at least two item ids")
        rows = []
        for item_id in ids:
            idx = catalog.entry_index(item_id)
            if idx is None:
                raise _ApiError(404, f"unknown item id {item_id!r}")
            rows.append(catalog.latents[idx])
        weights = _float_list(body.get("weights"), "weights", length=len(ids))
        try:
            h = interpolate(np.stack(rows), weights)
        except (ConfigError, DimensionError) as exc:
            raise _ApiError(400, str(exc)) from exc
        cloud = ae.decode(catalog.model, h)
        return {"latent": [float(v) for v in h], "points": _points_payload(cloud)}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
