/** Thin typed client for the /api/v1 JSON endpoints.
 *
 * The UI never does latent arithmetic itself; every displayed cloud comes
 * from one of these calls.
 */

import type {
    CloudResponse,
    EditRequest,
    InfoResponse,
    InterpolateRequest,
    ItemResponse,
    ItemsResponse,
} from "./types.js";

export class ApiError extends Error {
    constructor(
        public readonly status: number,
        message: string,
    ) {
        super(message);
        this.name = "ApiError";
    }

    /** 4xx responses carry a server-side validation message. */
    get isClientError(): boolean {
        return this.status >= 400 && this.status < 500;
    }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseOrThrow<T>(resp: Response): Promise<T> {
    if (resp.ok) {
        return (await resp.json()) as T;
    }
    let message = `HTTP ${resp.status}`;
    try {
        const body = (await resp.json()) as { error?: string };
        if (body && typeof body.error === "string") {
            message = body.error;
        }
    } catch {
        // non-JSON error body; keep the status message
    }
    throw new ApiError(resp.status, message);
}

export class ApiClient {
    constructor(
        private readonly baseUrl: string = "",
        private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
    ) {}

    private get(path: string): Promise<Response> {
        return this.fetchFn(`${this.baseUrl}${path}`);
    }

    private post(path: string, body: unknown): Promise<Response> {
        return this.fetchFn(`${this.baseUrl}${path}`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
    }

    async info(): Promise<InfoResponse> {
        return parseOrThrow(await this.get("/api/v1/info"));
    }

    async items(): Promise<ItemsResponse> {
        return parseOrThrow(await this.get("/api/v1/items"));
    }

    async item(id: string): Promise<ItemResponse> {
        return parseOrThrow(await this.get(`/api/v1/items/${encodeURIComponent(id)}`));
    }

    async decode(latent: number[]): Promise<{ points: number[][] }> {
        return parseOrThrow(await this.post("/api/v1/decode", { latent }));
    }

    async edit(request: EditRequest): Promise<CloudResponse> {
        return parseOrThrow(await this.post("/api/v1/edit", request));
    }

    async interpolate(request: InterpolateRequest): Promise<CloudResponse> {
        return parseOrThrow(await this.post("/api/v1/interpolate", request));
    }
}
