/** UI contract checks against the live service.
 *
 * Spawns the backend CLI (gen-data + train + serve) on an ephemeral port
 * and drives the same session/state/coalescer code the page uses; every
 * assertion compares UI-held state against direct API responses.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { RequestCoalescer } from "../src/coalesce.js";
import { cloudToText } from "../src/exporter.js";
import {
    applyResponse,
    editRequest,
    enterFeatureMode,
    enterInterpolateMode,
    interpolateRequest,
    neutralControls,
    type Session,
} from "../src/state.js";
import type { CloudResponse } from "../src/types.js";

const PYTHON = process.env.LATENTCLOUD_PYTHON ?? "python3";

let workdir: string;
let server: ChildProcess | null = null;
let baseUrl: string;
let api: ApiClient;
let modelPath: string;

function runCli(args: string[]): void {
    const result = spawnSync(PYTHON, ["-m", "latentcloud.cli", ...args], {
        encoding: "utf-8",
    });
    if (result.status !== 0) {
        throw new Error(`CLI ${args[0]} failed (${result.status}): ${result.stderr}`);
    }
}

beforeAll(async () => {
    workdir = mkdtempSync(join(tmpdir(), "latentcloud-ui-"));
    const dataset = join(workdir, "ds");
    modelPath = join(workdir, "model.dcae");
    // desk-scale dimensions (N=256, k=16); one epoch is enough because every
    // check below is an identity, not a quality bar
    runCli(["gen-data", "--out", dataset, "--count", "24", "--points", "256", "--seed", "7"]);
    runCli([
        "train", "--dataset", join(dataset, "manifest.json"), "--out-model", modelPath,
        "--latent", "16", "--epochs", "1", "--seed", "7",
    ]);

    server = spawn(PYTHON, [
        "-m", "latentcloud.cli", "serve",
        "--model", modelPath,
        "--dataset", join(dataset, "manifest.json"),
        "--bind", "127.0.0.1:0",
    ]);
    baseUrl = await new Promise<string>((resolve, reject) => {
        const timer = setTimeout(() => reject(new Error("server never became ready")), 30000);
        let buffer = "";
        server!.stdout!.on("data", (chunk: Buffer) => {
            buffer += chunk.toString();
            const match = buffer.match(/READY (http:\/\/[\d.]+:\d+)/);
            if (match) {
                clearTimeout(timer);
                resolve(match[1]);
            }
        });
        server!.on("exit", (code) => reject(new Error(`server exited early: ${code}`)));
    });
    api = new ApiClient(baseUrl);
}, 120000);

afterAll(async () => {
    if (server !== null && server.exitCode === null) {
        server.kill("SIGINT");
        await new Promise((resolve) => server!.on("exit", resolve));
    }
    rmSync(workdir, { recursive: true, force: true });
});

describe("UI contract against the live service", () => {
    it("(a) selecting an item renders the server's cloud for that item", async () => {
        const { items } = await api.items();
        const detail = await api.item(items[0].id);
        const session = enterFeatureMode(detail);
        // what the viewer draws is exactly the server payload
        const direct = await api.item(items[0].id);
        expect(session.rendered?.points).toEqual(direct.points);
        expect(session.rendered?.latent).toEqual(direct.latent);
    });

    it("(b) centered controls render the base cloud", async () => {
        const { items } = await api.items();
        const detail = await api.item(items[3].id);
        const session = enterFeatureMode(detail);
        expect(session.controls).toEqual(neutralControls());
        const info = await api.info();
        const response = await api.edit(editRequest(session, info.model.latent_size));
        expect(response.points).toEqual(detail.points);
        expect(response.latent).toEqual(detail.latent);
    });

    it("(c) one-hot interpolation weights render the corresponding source model", async () => {
        const { items } = await api.items();
        const ids = items.slice(0, 3).map((i) => i.id);
        const details = await Promise.all(ids.map((id) => api.item(id)));
        const session = enterInterpolateMode(details);
        session.weights = [0, 0, 1];
        const response = await api.interpolate(interpolateRequest(session));
        expect(response.points).toEqual(details[2].points);
    });

    it("(d) after a burst of slider events the render matches the final control state", async () => {
        const { items } = await api.items();
        const detail = await api.item(items[5].id);
        const info = await api.info();
        let session: Session = enterFeatureMode(detail);

        const settled: CloudResponse[] = [];
        const coalescer = new RequestCoalescer<CloudResponse>((resp) => {
            session = applyResponse(session, resp);
            settled.push(resp);
        });

        let finalSliders: number[] = [];
        for (let i = 0; i < 12; i++) {
            const sliders = session.controls.sliders.slice();
            sliders[i % 8] = Math.sin(i * 0.7);
            finalSliders = sliders;
            session = { ...session, controls: { ...session.controls, sliders } };
            const body = editRequest(session, info.model.latent_size);
            coalescer.submit(() => api.edit(body));
            await new Promise((r) => setTimeout(r, 5));
        }
        // wait for the coalescer to drain
        for (let i = 0; i < 200 && coalescer.busy; i++) {
            await new Promise((r) => setTimeout(r, 25));
        }
        expect(coalescer.busy).toBe(false);

        const direct = await api.edit({
            base_id: detail.id,
            sliders: finalSliders,
            knobs: session.controls.knobs,
            offset: session.controls.offset,
        });
        expect(session.rendered?.points).toEqual(direct.points);
        expect(session.rendered?.latent).toEqual(direct.latent);
    });

    it("(e) the export file parses via the primary CLI and matches the rendered points", async () => {
        const { items } = await api.items();
        const detail = await api.item(items[1].id);
        const session = enterFeatureMode(detail);
        const exported = cloudToText(session.rendered!.points);
        const exportPath = join(workdir, "export.xyz");
        writeFileSync(exportPath, exported);

        // the primary CLI parses the exported file (encode reads a cloud)
        runCli([
            "encode", "--model", modelPath, "--in", exportPath,
            "--out", join(workdir, "export-latent.txt"),
        ]);

        // and the text round-trips to exactly the rendered coordinates
        const lines = readFileSync(exportPath, "utf-8").trim().split("\n");
        expect(lines).toHaveLength(session.rendered!.points.length);
        lines.forEach((line, i) => {
            expect(line.split(" ").map(Number)).toEqual(session.rendered!.points[i]);
        });
    });
});
