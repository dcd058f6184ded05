/** 3D point rendering on a plain canvas: orbit / zoom / pan camera and a
 * painter's-order projection. The model part (camera + point validation)
 * is DOM-free so it can be tested headlessly; CloudViewer is the thin
 * canvas shell around it.
 */

export interface Camera {
    yaw: number;
    pitch: number;
    dist: number;
    target: [number, number, number];
}

export function defaultCamera(): Camera {
    return { yaw: 0.6, pitch: 0.35, dist: 3.0, target: [0, 0, 0] };
}

/** Validate a points payload: finite (N, 3) numbers, N >= 1. */
export function validatePoints(raw: unknown): number[][] | null {
    if (!Array.isArray(raw) || raw.length === 0) {
        return null;
    }
    const out: number[][] = [];
    for (const row of raw) {
        if (!Array.isArray(row) || row.length !== 3) {
            return null;
        }
        const triple: number[] = [];
        for (const v of row) {
            if (typeof v !== "number" || !Number.isFinite(v)) {
                return null;
            }
            triple.push(v);
        }
        out.push(triple);
    }
    return out;
}

/** World -> screen projection; returns [sx, sy, depth] per point. */
export function projectPoints(
    points: number[][],
    camera: Camera,
    width: number,
    height: number,
): Float64Array {
    const cy = Math.cos(camera.yaw);
    const sy = Math.sin(camera.yaw);
    const cp = Math.cos(camera.pitch);
    const sp = Math.sin(camera.pitch);
    const scale = (Math.min(width, height) * 0.45) / Math.max(camera.dist, 1e-6);
    const out = new Float64Array(points.length * 3);
    for (let i = 0; i < points.length; i++) {
        const x = points[i][0] - camera.target[0];
        const y = points[i][1] - camera.target[1];
        const z = points[i][2] - camera.target[2];
        // yaw about the vertical (z-up data), then pitch
        const rx = cy * x + sy * y;
        const ry = -sy * x + cy * y;
        const rz = z;
        const vy = cp * rz - sp * ry;
        const vz = cp * ry + sp * rz + camera.dist;
        out[i * 3] = width / 2 + rx * scale;
        out[i * 3 + 1] = height / 2 - vy * scale;
        out[i * 3 + 2] = vz;
    }
    return out;
}

export class ViewerModel {
    camera: Camera = defaultCamera();
    points: number[][] = [];

    /** Replace the cloud; a malformed payload keeps the previous frame and
     * never touches the camera. Returns whether the payload was accepted. */
    setPoints(raw: unknown): boolean {
        const valid = validatePoints(raw);
        if (valid === null) {
            return false;
        }
        this.points = valid;
        return true;
    }

    orbit(dx: number, dy: number): void {
        this.camera.yaw += dx * 0.01;
        this.camera.pitch = Math.min(
            Math.PI / 2 - 0.01,
            Math.max(-Math.PI / 2 + 0.01, this.camera.pitch + dy * 0.01),
        );
    }

    zoom(factor: number): void {
        this.camera.dist = Math.min(50, Math.max(0.2, this.camera.dist * factor));
    }

    pan(dx: number, dy: number): void {
        const step = this.camera.dist * 0.002;
        const cy = Math.cos(this.camera.yaw);
        const sy = Math.sin(this.camera.yaw);
        this.camera.target[0] -= (cy * dx) * step;
        this.camera.target[1] -= (-sy * dx) * step;
        this.camera.target[2] += dy * step;
    }
}

export class CloudViewer {
    readonly model = new ViewerModel();
    private dragging: "orbit" | "pan" | null = null;
    private lastX = 0;
    private lastY = 0;

    constructor(private readonly canvas: HTMLCanvasElement) {
        canvas.addEventListener("mousedown", (ev) => {
            this.dragging = ev.shiftKey || ev.button === 2 ? "pan" : "orbit";
            this.lastX = ev.clientX;
            this.lastY = ev.clientY;
        });
        window.addEventListener("mouseup", () => {
            this.dragging = null;
        });
        window.addEventListener("mousemove", (ev) => {
            if (this.dragging === null) {
                return;
            }
            const dx = ev.clientX - this.lastX;
            const dy = ev.clientY - this.lastY;
            this.lastX = ev.clientX;
            this.lastY = ev.clientY;
            if (this.dragging === "orbit") {
                this.model.orbit(dx, dy);
            } else {
                this.model.pan(dx, dy);
            }
            this.render();
        });
        canvas.addEventListener("wheel", (ev) => {
            ev.preventDefault();
            this.model.zoom(ev.deltaY > 0 ? 1.1 : 1 / 1.1);
            this.render();
        });
        canvas.addEventListener("contextmenu", (ev) => ev.preventDefault());
    }

    setPoints(raw: unknown): boolean {
        const ok = this.model.setPoints(raw);
        if (ok) {
            this.render();
        }
        return ok;
    }

    render(): void {
        const ctx = this.canvas.getContext("2d");
        if (ctx === null) {
            return;
        }
        const { width, height } = this.canvas;
        ctx.fillStyle = "#10141c";
        ctx.fillRect(0, 0, width, height);
        const projected = projectPoints(this.model.points, this.model.camera, width, height);
        ctx.fillStyle = "#7fd0ff";
        for (let i = 0; i < this.model.points.length; i++) {
            const depth = projected[i * 3 + 2];
            const r = Math.max(1.2, 3.6 / Math.max(depth, 0.3));
            ctx.beginPath();
            ctx.arc(projected[i * 3], projected[i * 3 + 1], r, 0, Math.PI * 2);
            ctx.fill();
        }
    }
}
