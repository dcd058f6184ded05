/** Payload shapes of the /api/v1 endpoints. */

export interface InfoResponse {
    model: {
        n_points: number;
        latent_size: number;
        n_output_points: number;
        encoder_widths: number[];
        decoder_widths: number[];
        epochs_trained: number;
    };
    dataset: {
        count: number;
        families: string[];
    };
    latent_stats: {
        min: number[];
        max: number[];
        count: number;
    };
    controls: {
        sliders: number;
        slider_range: [number, number];
        knob_range: [number, number];
    };
}

export interface ItemSummary {
    id: string;
    family: string;
    points: number;
}

export interface ItemsResponse {
    items: ItemSummary[];
}

export interface ItemResponse {
    id: string;
    family: string;
    latent: number[];
    points: number[][];
}

export interface CloudResponse {
    latent: number[];
    points: number[][];
}

export interface EditRequest {
    base_id: string;
    sliders: number[];
    knobs: number[];
    offset: number;
}

export interface InterpolateRequest {
    ids: string[];
    weights: number[];
}
