/** Browser entry point: wires config, rendering, audio, the session
 * engine and the CSV/meta export together. */

import { TonePlayer } from "./audio.js";
import { configFromUrl, parseConfig } from "./config.js";
import { applyCorrectionFile, renderedWidth } from "./correction.js";
import { toCsv } from "./csv.js";
import { generateLayout, layoutFits, recenter } from "./geometry.js";
import { SceneRenderer } from "./render.js";
import { SessionEngine } from "./session.js";
import type {
  CompletedSession,
  CorrectionJson,
  DesignCondition,
  LayoutJson,
  RunnerConfig,
} from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

interface QueueEntry {
  cond: DesignCondition;
  practice: boolean;
  sessionId: number;
}

class App {
  private config: RunnerConfig | null = null;
  private correction: CorrectionJson | null = null;
  private suppliedLayouts: LayoutJson[] = [];
  private completed: CompletedSession[] = [];
  private queue: QueueEntry[] = [];
  private current: QueueEntry | null = null;
  private engine: SessionEngine | null = null;
  private layout: LayoutJson | null = null;
  private renderer: SceneRenderer;
  private tones = new TonePlayer(true);
  private t0 = 0;
  private cursor: { x: number; y: number } | null = null;

  constructor(private readonly canvas: HTMLCanvasElement) {
    this.renderer = new SceneRenderer(canvas);
    canvas.addEventListener("pointermove", (e) => {
      this.cursor = { x: e.offsetX, y: e.offsetY };
      this.redraw();
    });
    canvas.addEventListener("pointerdown", (e) => this.onClick(e.offsetX, e.offsetY));
  }

  status(text: string): void {
    $("status").textContent = text;
  }

  async loadConfigFile(file: File): Promise<void> {
    this.config = parseConfig(JSON.parse(await file.text()));
    this.status(
      `config loaded: ${this.config.participant}, block ${this.config.block}, ` +
        `${this.config.design.length} conditions`,
    );
  }

  async loadCorrectionFile(file: File): Promise<void> {
    this.correction = JSON.parse(await file.text()) as CorrectionJson;
    this.status("correction file loaded");
  }

  async loadLayoutFile(file: File): Promise<void> {
    this.suppliedLayouts.push(JSON.parse(await file.text()) as LayoutJson);
    this.status(`${this.suppliedLayouts.length} layout file(s) loaded`);
  }

  private layoutFor(cond: DesignCondition, center: { x: number; y: number }): LayoutJson {
    const n = this.config!.nTargets;
    const supplied = this.suppliedLayouts.find(
      (l) => l.n === n && Math.abs(l.A - cond.A) < 1e-9,
    );
    const base = supplied ?? generateLayout(n, cond.A, cond.W, cond.B, center);
    return recenter(base, center);
  }

  start(): void {
    if (!this.config) {
      this.status("load a config first");
      return;
    }
    let design = this.config.design;
    if (this.config.block === "c") {
      if (!this.correction) {
        this.status("block c needs a correction file");
        return;
      }
      design = applyCorrectionFile(design, this.correction);
    }
    this.queue = [];
    if (this.config.practice) {
      this.queue.push({ cond: this.config.practice, practice: true, sessionId: 0 });
    }
    design.forEach((cond, i) => {
      this.queue.push({
        cond,
        practice: false,
        sessionId: (this.config!.practice ? 1 : 0) + i,
      });
    });
    this.completed = [];
    this.tones = new TonePlayer(this.config.audio);
    void document.documentElement.requestFullscreen?.();
    this.nextSession();
  }

  private nextSession(): void {
    const entry = this.queue.shift();
    this.current = entry ?? null;
    if (!entry) {
      this.engine = null;
      this.renderer.applyBlur(1, false);
      this.status(
        `all sessions done (${this.completed.length}); export the CSV below`,
      );
      this.redraw();
      return;
    }
    const width = window.innerWidth;
    const height = window.innerHeight - 90;
    this.renderer.resize(width, height);
    const center = { x: width / 2, y: height / 2 };
    const layout = this.layoutFor(entry.cond, center);
    const renderedW = renderedWidth(entry.cond);
    if (!layoutFits(layout, renderedW, { width, height })) {
      this.engine = null;
      this.status(
        `viewport ${width}x${height} too small for A=${entry.cond.A} ` +
          `(ring ${layout.circle_diameter.toFixed(0)} px + target); ` +
          "enlarge the window and press Start again",
      );
      this.queue.unshift(entry);
      return;
    }
    this.layout = layout;
    this.engine = new SessionEngine({
      participant: this.config!.participant,
      block: this.config!.block,
      condition: { A: entry.cond.A, W: entry.cond.W, B: entry.cond.B },
      renderedW,
      nTargets: this.config!.nTargets,
      sessionId: entry.sessionId,
      layout,
    });
    this.renderer.applyBlur(entry.cond.B, this.config!.blurRendering === "css");
    this.t0 = performance.now();
    this.status(
      `${entry.practice ? "practice " : ""}session ${entry.sessionId}: ` +
        `A=${entry.cond.A} W=${entry.cond.W} B=${entry.cond.B} ` +
        `(rendered ${renderedW} px); click the red circle`,
    );
    this.redraw();
  }

  private onClick(x: number, y: number): void {
    if (!this.engine || this.engine.finished) return;
    const outcome = this.engine.click(x, y, performance.now() - this.t0);
    if (outcome.hit) {
      this.tones.success();
    } else {
      this.tones.failure();
    }
    if (outcome.finished) {
      this.completed.push({
        condition: {
          A: this.engine.rows[0]!.A,
          W: this.engine.rows[0]!.W,
          B: this.engine.rows[0]!.B,
        },
        practice: this.current?.practice ?? false,
        rows: this.engine.rows,
      });
      this.nextSession();
    } else {
      this.redraw();
    }
  }

  private redraw(): void {
    if (!this.engine || !this.layout) return;
    this.renderer.draw(
      this.layout,
      this.engine.renderedW,
      this.engine.currentTrial,
      this.cursor,
    );
  }

  exportCsv(): void {
    download("trials.csv", toCsv(this.completed), "text/csv");
  }

  exportMeta(): void {
    const meta = {
      tool: "blurfitts-task-runner",
      version: "0.1.0",
      config: this.config,
      device_pixel_ratio: this.renderer.dpr,
      viewport: { width: window.innerWidth, height: window.innerHeight },
      sessions_completed: this.completed.length,
      note:
        "pixel quantities are CSS-logical px; physical size depends on the display. " +
        "Blur uses a CSS gaussian filter parameterized by sigma; kernel-exact " +
        "fidelity to image-processing implementations is approximate.",
    };
    download("session_meta.json", JSON.stringify(meta, null, 2) + "\n", "application/json");
  }
}

function download(name: string, text: string, mime: string): void {
  const blob = new Blob([text], { type: mime });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = name;
  a.click();
  URL.revokeObjectURL(a.href);
}

function init(): void {
  const app = new App($("scene") as HTMLCanvasElement);
  const urlConfig = configFromUrl(new URLSearchParams(window.location.search));
  if (urlConfig) {
    (app as unknown as { config: RunnerConfig }).config = urlConfig;
    app.status(`config from URL: ${urlConfig.participant}`);
  }
  $("config-file").addEventListener("change", (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (file) void app.loadConfigFile(file);
  });
  $("correction-file").addEventListener("change", (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (file) void app.loadCorrectionFile(file);
  });
  $("layout-file").addEventListener("change", (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (file) void app.loadLayoutFile(file);
  });
  $("start").addEventListener("click", () => app.start());
  $("export-csv").addEventListener("click", () => app.exportCsv());
  $("export-meta").addEventListener("click", () => app.exportMeta());
}

init();
