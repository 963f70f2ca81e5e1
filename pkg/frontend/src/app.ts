/**
 * Sandbox application: canvas rendering and DOM glue.
 *
 * One render loop at display rate consumes only the newest frame
 * (frame dropping under load); the input timer runs independently so
 * trunk samples are never dropped while connected.
 */

import { SessionClient, connectWebSocket } from "./client.js";
import { DEFAULT_INPUT_OPTIONS, TrunkInput } from "./input.js";
import { RibbonModel, hudState } from "./hud.js";
import type { MetricReport, ServerMessage, SessionFrame, Welcome } from "./protocol.js";
import {
  SceneConfig,
  TraceBuffer,
  Viewport,
  lineOverlay,
  linkagePoints,
  sceneConfigFromWelcome,
} from "./scene.js";
import { summaryCard } from "./summary.js";

const $ = (id: string) => document.getElementById(id)!;

function sliderValue(id: string): number {
  return parseFloat(($(id) as HTMLInputElement).value);
}

class App {
  client = new SessionClient({
    onFrame: (frame) => {
      this.trace.push(frame);
      this.ribbon.push(frame);
      this.lastFrame = frame;
    },
    onMessage: (msg) => this.onMessage(msg),
  });
  input = new TrunkInput(8.0, { ...DEFAULT_INPUT_OPTIONS, sensitivity: 0.1 });
  trace = new TraceBuffer();
  ribbon = new RibbonModel();
  scene: SceneConfig | null = null;
  welcome: Welcome | null = null;
  lastFrame: SessionFrame | null = null;
  cards: Partial<Record<"ceac" | "ccc", MetricReport>> = {};
  socket: WebSocket | null = null;
  dragging = false;

  start(): void {
    this.bindInputs();
    this.connect();
    window.setInterval(() => this.inputTick(), 1000 / this.input.options.emitHz);
    const loop = () => {
      this.render();
      requestAnimationFrame(loop);
    };
    requestAnimationFrame(loop);
  }

  get mode(): "ceac" | "ccc" {
    return ($("mode") as HTMLSelectElement).value === "ccc" ? "ccc" : "ceac";
  }

  connect(): void {
    const url = `ws://${location.hostname}:7466/session`;
    this.banner(`connecting to ${url} ...`);
    this.socket = connectWebSocket(url, this.client, () => {
      this.banner("disconnected — input buffered for 1 s, then dropped; reload or reset to reconnect");
    });
    this.socket.addEventListener("open", () => {
      this.banner("");
      this.resetSession();
    });
    this.socket.addEventListener("error", () => {
      this.banner("connection failed — is `ceac-lab serve` running on port 7466?");
    });
  }

  resetSession(): void {
    this.trace.clear();
    this.ribbon.clear();
    this.lastFrame = null;
    this.client.hello(this.mode, {
      deadzone_zeta: sliderValue("zeta"),
      cutoff_fc: sliderValue("fc"),
      gain_lambda: sliderValue("lambda"),
    });
  }

  bindInputs(): void {
    const canvas = $("scene") as HTMLCanvasElement;
    canvas.addEventListener("pointerdown", (e) => {
      this.dragging = true;
      canvas.setPointerCapture(e.pointerId);
    });
    canvas.addEventListener("pointerup", () => (this.dragging = false));
    canvas.addEventListener("pointermove", (e) => {
      if (this.dragging) this.input.onDrag(e.movementY);
    });
    window.addEventListener("keydown", (e) => {
      if (e.key === "ArrowDown") this.input.setKeyDirection(1);
      if (e.key === "ArrowUp") this.input.setKeyDirection(-1);
    });
    window.addEventListener("keyup", (e) => {
      if (e.key === "ArrowDown" || e.key === "ArrowUp") this.input.setKeyDirection(0);
    });
    $("mode").addEventListener("change", () => this.resetSession());
    $("reset").addEventListener("click", () => this.resetSession());
    $("finish").addEventListener("click", () => this.client.end());
    for (const id of ["zeta", "fc", "lambda"]) {
      $(id).addEventListener("input", () => {
        $(`${id}-value`).textContent = String(sliderValue(id));
      });
    }
  }

  inputTick(): void {
    const sample = this.input.tick(performance.now());
    if (sample) this.client.sendInput(sample.t, sample.phi);
  }

  onMessage(msg: ServerMessage): void {
    if (msg.type === "welcome") {
      this.welcome = msg;
      this.scene = sceneConfigFromWelcome(msg);
      this.input.set(msg.stance_lean);
      this.banner("");
    } else if (msg.type === "metrics") {
      this.cards[this.mode] = msg.report;
      this.renderCards();
    } else if (msg.type === "error") {
      this.banner(`server: ${msg.message}`);
    } else if (msg.type === "paused") {
      this.banner("simulation paused (no input)");
    } else if (msg.type === "resumed") {
      this.banner("");
    }
  }

  banner(text: string): void {
    $("banner").textContent = text;
    ($("banner") as HTMLElement).style.display = text ? "block" : "none";
  }

  render(): void {
    const frame = this.client.latestFrame() ?? this.lastFrame;
    if (!frame || !this.scene || !this.welcome) return;
    this.renderScene(frame);
    this.renderHud(frame);
  }

  renderScene(frame: SessionFrame): void {
    const canvas = $("scene") as HTMLCanvasElement;
    const ctx = canvas.getContext("2d")!;
    const vp = new Viewport(canvas.width, canvas.height);
    ctx.clearRect(0, 0, canvas.width, canvas.height);

    // drawing table seen edge-on, with the line task overlay
    const overlay = lineOverlay(this.scene!);
    const [ay] = vp.toPx(overlay.a);
    const [by] = vp.toPx(overlay.b);
    const [, tableZpx] = vp.toPx([0, this.scene!.tableZ]);
    ctx.strokeStyle = "#888";
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(vp.toPx([-0.1, this.scene!.tableZ])[0], tableZpx);
    ctx.lineTo(vp.toPx([0.7, this.scene!.tableZ])[0], tableZpx);
    ctx.stroke();
    // tolerance band
    const bandPx = overlay.tolerance * vp.scale;
    ctx.fillStyle = frame.in_tolerance ? "rgba(46,158,79,0.25)" : "rgba(120,120,120,0.15)";
    ctx.fillRect(ay, tableZpx - bandPx, by - ay, 2 * bandPx);
    for (const [point, label] of [
      [overlay.a, "A"],
      [overlay.b, "B"],
      [overlay.bPrime, "B'"],
    ] as const) {
      const [x, y] = vp.toPx(point);
      ctx.fillStyle = label === "B'" ? "#bbb" : "#444";
      ctx.beginPath();
      ctx.arc(x, y, 3, 0, 2 * Math.PI);
      ctx.fill();
      ctx.fillText(label, x - 4, y + 16);
    }

    // pen-contact trace
    ctx.strokeStyle = "#3567b5";
    ctx.lineWidth = 2;
    ctx.beginPath();
    this.trace.points.forEach((p, i) => {
      const [x, y] = vp.toPx(p);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();

    // stick figure
    const joints = linkagePoints(frame, this.scene!);
    ctx.strokeStyle = "#222";
    ctx.lineWidth = 4;
    ctx.beginPath();
    joints.forEach((p, i) => {
      const [x, y] = vp.toPx(p);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
    for (const p of joints) {
      const [x, y] = vp.toPx(p);
      ctx.fillStyle = "#222";
      ctx.beginPath();
      ctx.arc(x, y, 5, 0, 2 * Math.PI);
      ctx.fill();
    }
    const [penX, penY] = vp.toPx([frame.pen_y, frame.pen_z]);
    ctx.fillStyle = frame.in_contact ? "#2e9e4f" : "#c24038";
    ctx.beginPath();
    ctx.arc(penX, penY, 6, 0, 2 * Math.PI);
    ctx.fill();
  }

  renderHud(frame: SessionFrame): void {
    const zeta = this.welcome!.deadzone_zeta;
    const hud = hudState(frame, zeta, this.client.paused);
    $("dial-phi").textContent = hud.phi.toFixed(2);
    $("dial-ref").textContent = hud.phiRef.toFixed(2);
    $("dial-eps").textContent = hud.eps.toFixed(2);
    $("freeze-badge").style.display = hud.frozen ? "inline-block" : "none";
    $("done-badge").style.display = hud.taskDone ? "inline-block" : "none";

    // angle strip with the deadzone band around the reference
    const strip = $("angles") as HTMLCanvasElement;
    const sctx = strip.getContext("2d")!;
    sctx.clearRect(0, 0, strip.width, strip.height);
    const toX = (deg: number) => ((deg + 25) / 70) * strip.width;
    sctx.fillStyle = "rgba(53,103,181,0.25)";
    sctx.fillRect(toX(hud.bandLow), 0, toX(hud.bandHigh) - toX(hud.bandLow), strip.height);
    sctx.fillStyle = "#3567b5";
    sctx.fillRect(toX(hud.phiRef) - 1, 0, 2, strip.height);
    sctx.fillStyle = "#222";
    sctx.fillRect(toX(hud.phi) - 2, 0, 4, strip.height);

    // motor-active ribbon
    const ribbon = $("ribbon") as HTMLCanvasElement;
    const rctx = ribbon.getContext("2d")!;
    rctx.clearRect(0, 0, ribbon.width, ribbon.height);
    const segments = this.ribbon.segments;
    const window_s = 12.0;
    const t1 = frame.t;
    for (const seg of segments) {
      if (seg.t < t1 - window_s) continue;
      const x = ((seg.t - (t1 - window_s)) / window_s) * ribbon.width;
      rctx.fillStyle = seg.color;
      rctx.fillRect(x, 0, Math.max(2, ribbon.width / (window_s * this.welcome!.sample_rate)), ribbon.height);
    }
  }

  renderCards(): void {
    for (const mode of ["ceac", "ccc"] as const) {
      const element = $(`card-${mode}`);
      const card = summaryCard(this.cards[mode] ?? null, `${mode.toUpperCase()} trial`);
      element.innerHTML = `<h3>${card.title}</h3>` + card.rows
        .map((row) => `<div class="row"><span>${row.label}</span><span>${row.formatted}</span></div>`)
        .join("");
    }
  }
}

new App().start();
