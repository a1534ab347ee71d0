/** DOM wiring for the voting console.  All logic lives in ConsoleController;
 * this module only renders controller state and forwards user events. */

import { ApiClient } from "./api.js";
import { ConsoleController } from "./controller.js";
import { comparisonKey } from "./model.js";
import {
  heatmapRaster,
  payloadRaster,
  polylinePoints,
  spectrumPolylines,
} from "./render.js";
import type { MapBody, Payload, PendingValidationEntry } from "./types.js";

const POLL_INTERVAL_MS = 1000;
const SPECTRUM_COLORS = ["#1d3ebe", "#be3a23"];

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return fromQuery ?? `${window.location.protocol}//${window.location.hostname}:8000`;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function payloadView(payload: Payload, side = 96): HTMLElement {
  if (payload.kind === "image_patch") {
    const raster = payloadRaster(payload)!;
    const canvas = el("canvas", "payload-canvas");
    canvas.width = raster.width;
    canvas.height = raster.height;
    canvas.style.width = `${side}px`;
    canvas.style.height = `${side}px`;
    const ctx = canvas.getContext("2d")!;
    ctx.putImageData(new ImageData(raster.data, raster.width, raster.height), 0, 0);
    return canvas;
  }
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${side} ${side}`);
  svg.setAttribute("class", "payload-svg");
  svg.style.width = `${side}px`;
  svg.style.height = `${side}px`;
  spectrumPolylines(payload.channels, side, side).forEach((points, i) => {
    const line = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
    line.setAttribute("points", points);
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", SPECTRUM_COLORS[i % SPECTRUM_COLORS.length]);
    line.setAttribute("stroke-width", "1.5");
    svg.appendChild(line);
  });
  return svg as unknown as HTMLElement;
}

function gridCanvas(
  values: number[],
  height: number,
  width: number,
  symmetric: boolean,
  dots: { location: number; strong: boolean }[] = [],
): HTMLCanvasElement {
  const scale = Math.max(4, Math.floor(240 / Math.max(height, width)));
  const raster = heatmapRaster(values, height, width, { symmetric });
  const canvas = el("canvas", "map-canvas");
  canvas.width = width * scale;
  canvas.height = height * scale;
  const off = document.createElement("canvas");
  off.width = width;
  off.height = height;
  off.getContext("2d")!.putImageData(new ImageData(raster.data, width, height), 0, 0);
  const ctx = canvas.getContext("2d")!;
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
  for (const dot of dots) {
    const r = Math.floor(dot.location / width);
    const c = dot.location % width;
    ctx.beginPath();
    ctx.arc((c + 0.5) * scale, (r + 0.5) * scale, scale * 0.3, 0, 2 * Math.PI);
    ctx.fillStyle = dot.strong ? "#111" : "#555";
    ctx.fill();
    ctx.strokeStyle = "#fff";
    ctx.stroke();
  }
  return canvas;
}

function chart(series: number[], title: string, width = 420, height = 120): HTMLElement {
  const wrap = el("div", "chart");
  wrap.appendChild(el("h4", undefined, title));
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "chart-svg");
  const line = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
  line.setAttribute("points", polylinePoints(series, width, height));
  line.setAttribute("fill", "none");
  line.setAttribute("stroke", "#1d3ebe");
  line.setAttribute("stroke-width", "2");
  svg.appendChild(line);
  wrap.appendChild(svg as unknown as Node);
  return wrap;
}

type View = "dashboard" | "vote" | "validate" | "map" | "metrics";

class ConsoleApp {
  private view: View = "dashboard";
  private root: HTMLElement;
  private failedTicks = 0;

  constructor(private controller: ConsoleController) {
    this.root = document.getElementById("app")!;
    controller.onChange(() => this.render());
    window.setInterval(() => void this.tick(), POLL_INTERVAL_MS);
  }

  async start(): Promise<void> {
    await this.controller.refreshDashboard();
    this.render();
  }

  private async tick(): Promise<void> {
    if (this.controller.state.busy) return;
    // simple backoff: after n consecutive failures wait 2^n polls
    if (this.failedTicks > 0) {
      this.failedTicks -= 1;
      return;
    }
    if (this.controller.state.current !== null) {
      await this.controller.poll();
      if (this.view === "map") await this.controller.loadMap();
      if (this.view === "metrics") await this.controller.loadMetrics();
    } else {
      await this.controller.refreshDashboard();
    }
    if (this.controller.state.error !== null) {
      this.failedTicks = Math.min(30, this.controller.pollBackoff);
    }
  }

  private setView(view: View): void {
    this.view = view;
    if (view === "map") void this.controller.loadMap();
    if (view === "metrics") void this.controller.loadMetrics();
    this.render();
  }

  private render(): void {
    const state = this.controller.state;
    this.root.replaceChildren();

    const nav = el("nav");
    (["dashboard", "vote", "validate", "map", "metrics"] as View[]).forEach((v) => {
      const button = el("button", this.view === v ? "active" : "", v);
      button.onclick = () => this.setView(v);
      nav.appendChild(button);
    });
    this.root.appendChild(nav);

    const status = el("div", "status");
    if (state.current) {
      const inc = state.current.incumbent;
      status.textContent =
        `session ${state.current.id.slice(0, 8)} | ${state.current.dataset} | ` +
        `phase ${state.current.phase} | iteration ${state.current.k} | ` +
        `explored ${state.current.explored_count}/${state.current.total_locations}` +
        (inc ? ` | best location ${inc.location} (u=${inc.utility.toFixed(3)})` : "");
    } else {
      status.textContent = "no session selected";
    }
    this.root.appendChild(status);

    if (state.error) {
      this.root.appendChild(el("div", "error", state.error));
    }

    switch (this.view) {
      case "dashboard":
        this.renderDashboard();
        break;
      case "vote":
        this.renderVote();
        break;
      case "validate":
        this.renderValidate();
        break;
      case "map":
        this.renderMap();
        break;
      case "metrics":
        this.renderMetrics();
        break;
    }
  }

  private renderDashboard(): void {
    const state = this.controller.state;
    const panel = el("section", "panel");
    panel.appendChild(el("h3", undefined, "create session"));

    const form = el("div", "form");
    const dataset = el("select") as HTMLSelectElement;
    for (const d of state.datasets) {
      const option = el("option", undefined, `${d.name} (${d.height}x${d.width} ${d.kind})`);
      option.value = d.name;
      dataset.appendChild(option);
    }
    const voter = el("select") as HTMLSelectElement;
    for (const [value, label] of [
      ["interactive", "human votes every iteration"],
      ["proxy-interactive", "proxy agent votes, human validates"],
      ["oracle", "scripted oracle (needs scores)"],
    ]) {
      const option = el("option", undefined, label);
      option.value = value;
      voter.appendChild(option);
    }
    const iters = el("input") as HTMLInputElement;
    iters.type = "number";
    iters.value = "20";
    const seed = el("input") as HTMLInputElement;
    seed.type = "number";
    seed.value = "0";
    const create = el("button", "primary", "create");
    create.onclick = () => {
      const voterConfig =
        voter.value === "proxy-interactive"
          ? { kind: "proxy", validator: "interactive" }
          : { kind: voter.value };
      void this.controller.createSession(dataset.value, {
        max_iterations: Number(iters.value),
        rng_seed: Number(seed.value),
        validation_period: Math.max(1, Math.min(4, Number(iters.value))),
        voter: voterConfig,
      });
    };
    for (const [label, control] of [
      ["dataset", dataset],
      ["voter", voter],
      ["iterations", iters],
      ["seed", seed],
    ] as const) {
      const row = el("label");
      row.appendChild(el("span", undefined, label));
      row.appendChild(control);
      form.appendChild(row);
    }
    form.appendChild(create);
    panel.appendChild(form);

    panel.appendChild(el("h3", undefined, "sessions"));
    const list = el("ul", "sessions");
    for (const session of state.sessions) {
      const item = el("li");
      const pick = el("button", "", `${session.id.slice(0, 8)} | ${session.dataset} | ${session.phase} | k=${session.k}`);
      pick.onclick = () => void this.controller.selectSession(session.id);
      item.appendChild(pick);
      list.appendChild(item);
    }
    panel.appendChild(list);
    this.root.appendChild(panel);
  }

  private renderVote(): void {
    const state = this.controller.state;
    const panel = el("section", "panel");
    if (state.pending?.type !== "votes") {
      panel.appendChild(el("p", "hint", "no votes pending"));
      this.appendStepButton(panel);
      this.root.appendChild(panel);
      return;
    }
    panel.appendChild(
      el(
        "h3",
        undefined,
        state.pending.phase === "awaiting_init_votes"
          ? `initial comparisons (${state.pending.comparisons.length})`
          : "compare the new measurement",
      ),
    );
    for (const comparison of state.pending.comparisons) {
      const key = comparisonKey(comparison);
      const selected = state.selections.get(key);
      const card = el("div", "vote-card");
      for (const [payload, location] of [
        [comparison.new_payload, comparison.new_location],
        [comparison.opponent_payload, comparison.opponent],
      ] as const) {
        const side = el("div", "vote-side" + (selected === location ? " selected" : ""));
        side.appendChild(payloadView(payload));
        side.appendChild(el("div", "loc", `location ${location}`));
        side.onclick = () =>
          this.controller.selectVote(
            comparison.new_location,
            comparison.opponent,
            location,
          );
        card.appendChild(side);
      }
      panel.appendChild(card);
    }
    const submit = el("button", "primary", "submit votes") as HTMLButtonElement;
    submit.disabled = !this.controller.votesComplete || state.busy;
    submit.onclick = () => void this.controller.submitVotes();
    panel.appendChild(submit);
    this.root.appendChild(panel);
  }

  private renderValidate(): void {
    const state = this.controller.state;
    const panel = el("section", "panel");
    if (state.pending?.type !== "validation") {
      panel.appendChild(el("p", "hint", "no proxy votes awaiting review"));
      this.root.appendChild(panel);
      return;
    }
    panel.appendChild(
      el("h3", undefined, `review ${state.pending.entries.length} proxy votes`),
    );
    for (const entry of state.pending.entries) {
      panel.appendChild(this.validationRow(entry));
    }
    const submit = el("button", "primary", `apply (${state.flips.size} flips)`) as HTMLButtonElement;
    submit.disabled = state.busy;
    submit.onclick = () => void this.controller.submitValidation();
    panel.appendChild(submit);
    this.root.appendChild(panel);
  }

  private validationRow(entry: PendingValidationEntry): HTMLElement {
    const row = el("div", "validation-row");
    const left = el("div", "vote-side");
    left.appendChild(payloadView(entry.new_payload));
    left.appendChild(el("div", "loc", `new: ${entry.new_location}`));
    const right = el("div", "vote-side");
    right.appendChild(payloadView(entry.opponent_payload));
    right.appendChild(el("div", "loc", `opponent: ${entry.opponent}`));
    const meta = el("div", "validation-meta");
    meta.appendChild(
      el(
        "div",
        undefined,
        `agent preferred ${entry.new_is_winner ? "the new measurement" : "the opponent"}`,
      ),
    );
    const toggle = el("label", "flip-toggle");
    const box = el("input") as HTMLInputElement;
    box.type = "checkbox";
    box.checked = this.controller.state.flips.has(entry.log_index);
    box.onchange = () => this.controller.toggleFlip(entry.log_index);
    toggle.appendChild(box);
    toggle.appendChild(el("span", undefined, "flip"));
    meta.appendChild(toggle);
    row.appendChild(left);
    row.appendChild(right);
    row.appendChild(meta);
    return row;
  }

  private appendStepButton(panel: HTMLElement): void {
    const state = this.controller.state;
    if (state.current && state.current.phase === "running") {
      const button = el("button", "primary", "run next step") as HTMLButtonElement;
      button.disabled = state.busy;
      button.onclick = () => void this.controller.stepSession();
      panel.appendChild(button);
    }
  }

  private renderMap(): void {
    const state = this.controller.state;
    const panel = el("section", "panel");
    this.appendStepButton(panel);
    const map: MapBody | null = state.map;
    if (!map) {
      panel.appendChild(el("p", "hint", "map not loaded yet"));
      this.root.appendChild(panel);
      return;
    }
    const dots = map.explored.map((p, i) => ({
      location: p.location,
      strong: i >= map.explored.length - 1,
    }));
    const rowEl = el("div", "map-row");
    if (map.mean) {
      const cell = el("div", "map-cell");
      cell.appendChild(el("h4", undefined, "predicted utility"));
      cell.appendChild(gridCanvas(map.mean, map.height, map.width, false, dots));
      rowEl.appendChild(cell);
    }
    if (map.variance) {
      const cell = el("div", "map-cell");
      cell.appendChild(el("h4", undefined, "uncertainty"));
      cell.appendChild(gridCanvas(map.variance, map.height, map.width, false));
      rowEl.appendChild(cell);
    }
    if (map.baseline) {
      const cell = el("div", "map-cell");
      cell.appendChild(el("h4", undefined, "numerical baseline"));
      cell.appendChild(gridCanvas(map.baseline, map.height, map.width, false, dots));
      rowEl.appendChild(cell);
    }
    panel.appendChild(rowEl);
    this.root.appendChild(panel);
  }

  private renderMetrics(): void {
    const state = this.controller.state;
    const panel = el("section", "panel");
    if (!state.metrics) {
      panel.appendChild(el("p", "hint", "metrics not loaded yet"));
      this.root.appendChild(panel);
      return;
    }
    const utilities = state.metrics.iterations.map((r) => r.incumbent_utility);
    panel.appendChild(chart(utilities, "incumbent utility per iteration"));
    if (state.metrics.validations.length > 0) {
      const rates = state.metrics.validations.map((r) => r.rate);
      panel.appendChild(chart(rates, "correction rate per validation"));
    }
    const totals = Object.entries(state.metrics.votes_by_source)
      .map(([k, v]) => `${k}: ${v}`)
      .join(", ");
    panel.appendChild(el("p", "hint", `votes by source: ${totals || "none"}`));
    this.root.appendChild(panel);
  }
}

const controller = new ConsoleController(new ApiClient(apiBase()));
const app = new ConsoleApp(controller);
void app.start();
