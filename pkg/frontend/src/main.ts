/** DOM wiring for the studio page. */

import { ApiClient, ApiError } from "./api.js";
import { RequestCoalescer } from "./coalesce.js";
import { downloadCloud } from "./exporter.js";
import {
    KNOB_LIMIT,
    SLIDER_COUNT,
    SLIDER_LIMIT,
    Session,
    applyError,
    applyResponse,
    clampControls,
    editRequest,
    enterFeatureMode,
    enterInterpolateMode,
    interpolateRequest,
    neutralControls,
} from "./state.js";
import type { CloudResponse, InfoResponse, ItemSummary } from "./types.js";
import { CloudViewer } from "./viewer.js";

const api = new ApiClient("");

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (node === null) {
        throw new Error(`missing element #${id}`);
    }
    return node as T;
}

class Studio {
    private info: InfoResponse | null = null;
    private session: Session | null = null;
    private items: ItemSummary[] = [];
    private selection = new Set<string>();
    private viewer = new CloudViewer(el<HTMLCanvasElement>("viewer"));
    private coalescer = new RequestCoalescer<CloudResponse>(
        (response) => this.onResponse(response),
        (err) => this.onRequestError(err),
    );

    async start(): Promise<void> {
        try {
            this.info = await api.info();
            this.items = (await api.items()).items;
        } catch (err) {
            this.banner(`cannot reach the model service: ${String(err)}`);
            return;
        }
        this.renderItemList();
        this.buildControlPanel();
        el<HTMLButtonElement>("export").addEventListener("click", () => {
            const rendered = this.session?.rendered;
            if (rendered) {
                downloadCloud(rendered.points);
            }
        });
        el<HTMLButtonElement>("open-selection").addEventListener("click", () => {
            void this.openSelection();
        });
        this.banner(null);
    }

    private banner(message: string | null): void {
        const node = el<HTMLDivElement>("banner");
        node.textContent = message ?? "";
        node.style.display = message === null ? "none" : "block";
    }

    private badge(show: boolean): void {
        el<HTMLSpanElement>("retry-badge").style.display = show ? "inline" : "none";
    }

    private renderItemList(): void {
        const list = el<HTMLUListElement>("items");
        list.innerHTML = "";
        for (const item of this.items) {
            const li = document.createElement("li");
            const checkbox = document.createElement("input");
            checkbox.type = "checkbox";
            checkbox.addEventListener("change", () => {
                if (checkbox.checked) {
                    this.selection.add(item.id);
                } else {
                    this.selection.delete(item.id);
                }
            });
            const label = document.createElement("span");
            label.textContent = `${item.id} (${item.family})`;
            label.addEventListener("click", () => void this.selectBase(item.id));
            li.append(checkbox, label);
            list.append(li);
        }
    }

    private async selectBase(id: string): Promise<void> {
        try {
            const item = await api.item(id);
            this.session = enterFeatureMode(item);
            this.syncControlWidgets();
            this.showMode("feature-edit");
            this.viewer.setPoints(item.points);
            this.banner(null);
        } catch (err) {
            this.banner(`selection failed: ${String(err)}`);
        }
    }

    private async openSelection(): Promise<void> {
        const ids = [...this.selection];
        if (ids.length === 1) {
            await this.selectBase(ids[0]);
            return;
        }
        if (ids.length < 2) {
            this.banner("pick one item for feature editing or several to interpolate");
            return;
        }
        try {
            const items = await Promise.all(ids.map((id) => api.item(id)));
            this.session = enterInterpolateMode(items);
            this.buildWeightSliders(ids);
            this.showMode("interpolate");
            this.viewer.setPoints(items[0].points);
            this.banner(null);
        } catch (err) {
            this.banner(`selection failed: ${String(err)}`);
        }
    }

    private showMode(mode: "feature-edit" | "interpolate"): void {
        el<HTMLDivElement>("feature-panel").style.display =
            mode === "feature-edit" ? "block" : "none";
        el<HTMLDivElement>("interp-panel").style.display =
            mode === "interpolate" ? "block" : "none";
    }

    private buildControlPanel(): void {
        // slider/knob ranges and the dimension count come from /info, so a
        // model with different control semantics reconfigures the panel
        const controls = this.info?.controls;
        const sliderCount = controls?.sliders ?? SLIDER_COUNT;
        const [sliderMin, sliderMax] = controls?.slider_range ?? [-SLIDER_LIMIT, SLIDER_LIMIT];
        const [knobMin, knobMax] = controls?.knob_range ?? [-KNOB_LIMIT, KNOB_LIMIT];
        const panel = el<HTMLDivElement>("slider-rows");
        panel.innerHTML = "";
        for (let j = 0; j < sliderCount; j++) {
            const row = document.createElement("div");
            row.className = "slider-row";
            const slider = document.createElement("input");
            slider.type = "range";
            slider.min = String(sliderMin);
            slider.max = String(sliderMax);
            slider.step = "0.01";
            slider.value = "0";
            slider.id = `slider-${j}`;
            const knob = document.createElement("input");
            knob.type = "range";
            knob.min = String(knobMin);
            knob.max = String(knobMax);
            knob.step = "0.001";
            knob.value = "0";
            knob.id = `knob-${j}`;
            knob.className = "knob";
            const label = document.createElement("span");
            label.textContent = `t${j}`;
            row.append(label, slider, knob);
            panel.append(row);
            slider.addEventListener("input", () => this.onControlChange());
            knob.addEventListener("input", () => this.onControlChange());
        }
        const offset = el<HTMLInputElement>("offset");
        offset.min = "0";
        offset.max = String(Math.max(0, (this.info?.model.latent_size ?? sliderCount) - sliderCount));
        offset.value = "0";
        offset.addEventListener("change", () => this.onControlChange());
        el<HTMLButtonElement>("reset-controls").addEventListener("click", () => {
            if (this.session?.mode === "feature-edit") {
                this.session = { ...this.session, controls: neutralControls() };
                this.syncControlWidgets();
                this.onControlChange();
            }
        });
    }

    private buildWeightSliders(ids: string[]): void {
        const panel = el<HTMLDivElement>("weight-rows");
        panel.innerHTML = "";
        ids.forEach((id, i) => {
            const row = document.createElement("div");
            row.className = "slider-row";
            const slider = document.createElement("input");
            slider.type = "range";
            slider.min = "0";
            slider.max = "1";
            slider.step = "0.01";
            slider.value = i === 0 ? "1" : "0";
            slider.id = `weight-${i}`;
            const label = document.createElement("span");
            label.textContent = id;
            row.append(label, slider);
            panel.append(row);
            slider.addEventListener("input", () => this.onControlChange());
        });
    }

    private syncControlWidgets(): void {
        if (this.session === null) {
            return;
        }
        this.session.controls.sliders.forEach((v, j) => {
            el<HTMLInputElement>(`slider-${j}`).value = String(v);
        });
        this.session.controls.knobs.forEach((v, j) => {
            el<HTMLInputElement>(`knob-${j}`).value = String(v);
        });
        el<HTMLInputElement>("offset").value = String(this.session.controls.offset);
    }

    private readControlWidgets(): void {
        if (this.session === null || this.info === null) {
            return;
        }
        if (this.session.mode === "feature-edit") {
            const controls = {
                sliders: Array.from({ length: SLIDER_COUNT }, (_, j) =>
                    Number(el<HTMLInputElement>(`slider-${j}`).value),
                ),
                knobs: Array.from({ length: SLIDER_COUNT }, (_, j) =>
                    Number(el<HTMLInputElement>(`knob-${j}`).value),
                ),
                offset: Number(el<HTMLInputElement>("offset").value),
            };
            this.session = {
                ...this.session,
                controls: clampControls(controls, this.info.model.latent_size),
            };
        } else {
            this.session = {
                ...this.session,
                weights: this.session.itemIds.map((_, i) =>
                    Number(el<HTMLInputElement>(`weight-${i}`).value),
                ),
            };
        }
    }

    private onControlChange(): void {
        if (this.session === null || this.info === null) {
            return;
        }
        this.readControlWidgets();
        const session = this.session;
        const latentSize = this.info.model.latent_size;
        this.badge(false);
        if (session.mode === "feature-edit") {
            const body = editRequest(session, latentSize);
            this.coalescer.submit(() => api.edit(body));
        } else {
            const body = interpolateRequest(session);
            this.coalescer.submit(() => api.interpolate(body));
        }
    }

    private onResponse(response: CloudResponse): void {
        if (this.session === null) {
            return;
        }
        this.session = applyResponse(this.session, response);
        this.viewer.setPoints(response.points);
        this.banner(null);
    }

    private onRequestError(err: unknown): void {
        if (err instanceof ApiError && err.isClientError) {
            if (this.session !== null) {
                this.session = applyError(this.session, err.message);
            }
            this.banner(err.message);
        } else {
            // server/network trouble: keep controls live, show the badge
            this.badge(true);
        }
    }
}

window.addEventListener("DOMContentLoaded", () => {
    void new Studio().start();
});
