/** Session state for the studio: one active mode, clamped controls and the
 * last server response. All cloud data in here is a verbatim server
 * payload; the client never computes latents on its own.
 */

import type { CloudResponse, EditRequest, InterpolateRequest, ItemResponse } from "./types.js";

export const SLIDER_COUNT = 8;
export const SLIDER_LIMIT = 1.0;
export const KNOB_LIMIT = 0.1;

export type Mode = "feature-edit" | "interpolate";

export interface Controls {
    sliders: number[];
    knobs: number[];
    offset: number;
}

export interface Session {
    mode: Mode;
    itemIds: string[];
    controls: Controls;
    weights: number[];
    rendered: CloudResponse | null;
    error: string | null;
}

const clamp = (v: number, limit: number) => Math.min(limit, Math.max(-limit, v));

export function neutralControls(): Controls {
    return {
        sliders: new Array<number>(SLIDER_COUNT).fill(0),
        knobs: new Array<number>(SLIDER_COUNT).fill(0),
        offset: 0,
    };
}

/** Clamp every control into its documented range before any request. */
export function clampControls(controls: Controls, latentSize: number): Controls {
    const maxOffset = Math.max(0, latentSize - SLIDER_COUNT);
    return {
        sliders: controls.sliders.slice(0, SLIDER_COUNT).map((v) => clamp(v, SLIDER_LIMIT)),
        knobs: controls.knobs.slice(0, SLIDER_COUNT).map((v) => clamp(v, KNOB_LIMIT)),
        offset: Math.min(maxOffset, Math.max(0, Math.round(controls.offset))),
    };
}

/** Enter feature-edit mode on a base item; the viewer shows the server's
 * decode for it and the controls reset to neutral, so no edit request is
 * needed until something moves. */
export function enterFeatureMode(item: ItemResponse): Session {
    return {
        mode: "feature-edit",
        itemIds: [item.id],
        controls: neutralControls(),
        weights: [],
        rendered: { latent: item.latent, points: item.points },
        error: null,
    };
}

/** Enter interpolation mode on a group; weights start one-hot on the first
 * selection, so the initial render is that item's own decode. */
export function enterInterpolateMode(items: ItemResponse[]): Session {
    if (items.length < 2) {
        throw new Error("interpolation needs at least two items");
    }
    const weights = items.map((_, i) => (i === 0 ? 1 : 0));
    return {
        mode: "interpolate",
        itemIds: items.map((item) => item.id),
        controls: neutralControls(),
        weights,
        rendered: { latent: items[0].latent, points: items[0].points },
        error: null,
    };
}

export function editRequest(session: Session, latentSize: number): EditRequest {
    if (session.mode !== "feature-edit" || session.itemIds.length !== 1) {
        throw new Error("not in feature-edit mode");
    }
    const controls = clampControls(session.controls, latentSize);
    return {
        base_id: session.itemIds[0],
        sliders: controls.sliders,
        knobs: controls.knobs,
        offset: controls.offset,
    };
}

export function interpolateRequest(session: Session): InterpolateRequest {
    if (session.mode !== "interpolate" || session.itemIds.length < 2) {
        throw new Error("not in interpolation mode");
    }
    // negative weights are rejected server-side; clamp to zero client-side
    const weights = session.weights.map((w) => Math.max(0, w));
    return { ids: [...session.itemIds], weights };
}

export function applyResponse(session: Session, response: CloudResponse): Session {
    return { ...session, rendered: response, error: null };
}

export function applyError(session: Session, message: string): Session {
    // the previous render stays on screen; only the banner changes
    return { ...session, error: message };
}
