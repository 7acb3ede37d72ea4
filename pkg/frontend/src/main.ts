/** Page wiring: canvas on the left, config panel on the right, charts
 * below, terminal banner on completion. All numerics live server-side;
 * the client only places points, relays controls, and plots telemetry. */

import { ApiError, DragApi, type SessionInfo } from "./api.js";
import { drawChart } from "./charts.js";
import { PointStore } from "./points.js";
import {
  LAYER_OPTIONS,
  LEARNING_RATES,
  NPCA_OPTIONS,
  SEED_OPTIONS,
  ViewState,
  parseNpca,
} from "./state.js";
import { streamEvents } from "./sse.js";

const SERVICE_URL =
  new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8010";
const DISPLAY_SCALE = 3;

const api = new DragApi(SERVICE_URL);
const view = new ViewState();
let session: SessionInfo | null = null;
let points: PointStore | null = null;
let streamAbort: AbortController | null = null;
let baseImage: HTMLImageElement | null = null;

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

document.querySelector<HTMLDivElement>("#app")!.innerHTML = `
  <header>
    <h1>latentdrag</h1>
    <span id="status" class="status">idle</span>
  </header>
  <main>
    <section class="canvas-pane">
      <canvas id="image-canvas" width="384" height="384"></canvas>
      <div class="hint" id="hint">create a session, then click to place a blue handle and a red target</div>
      <div class="banner hidden" id="banner"></div>
    </section>
    <section class="config-pane">
      <fieldset id="session-box">
        <legend>session</legend>
        <label>seed <input id="seed" list="seed-options" value="42"></label>
        <datalist id="seed-options">${SEED_OPTIONS.map((s) => `<option value="${s}">`).join("")}</datalist>
        <label><input type="checkbox" id="canonical" checked> canonical scenario</label>
        <button id="create">new session</button>
      </fieldset>
      <fieldset id="config-box">
        <legend>config</legend>
        <label>learning rate <input id="lr" list="lr-options" value="0.05"></label>
        <datalist id="lr-options">${LEARNING_RATES.map((v) => `<option value="${v}">`).join("")}</datalist>
        <label>nPCA <input id="npca" list="npca-options" value="regular"></label>
        <datalist id="npca-options">${NPCA_OPTIONS.map((v) => `<option value="${v ?? "regular"}">`).join("")}</datalist>
        <label>layers <input id="layers" list="layer-options" value="3"></label>
        <datalist id="layer-options">${LAYER_OPTIONS.map((v) => `<option value="${v}">`).join("")}</datalist>
        <button id="use-suggested">use suggested pair</button>
        <button id="delete-last">delete last point</button>
      </fieldset>
      <fieldset id="run-box">
        <legend>run</legend>
        <button id="start">start</button>
        <button id="pause">pause</button>
        <button id="step">step</button>
        <button id="cancel">cancel</button>
      </fieldset>
    </section>
  </main>
  <section class="charts">
    <canvas id="loss-chart" width="560" height="180"></canvas>
    <canvas id="distance-chart" width="560" height="180"></canvas>
  </section>
`;

function setStatus(text: string, note = ""): void {
  view.statusNote = note;
  $("status").textContent = note ? `${text} — ${note}` : text;
}

function hint(text: string): void {
  $("hint").textContent = text;
}

function redrawCharts(): void {
  drawChart(
    $<HTMLCanvasElement>("loss-chart"),
    [
      { values: view.motionLoss, color: "#51607a" },
      { values: view.motionLossEma.values, color: "#74b5ff", width: 2 },
    ],
    "motion loss (raw + EMA 0.99)",
  );
  drawChart(
    $<HTMLCanvasElement>("distance-chart"),
    [
      { values: view.maxDistance, color: "#7a5160" },
      { values: view.meanDistance, color: "#51607a" },
      { values: view.meanDistanceEma.values, color: "#ffb36b", width: 2 },
    ],
    "handle-target distance (max, mean, mean-EMA)",
  );
}

function redrawCanvas(): void {
  const canvas = $<HTMLCanvasElement>("image-canvas");
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.fillStyle = "#11151c";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (baseImage) ctx.drawImage(baseImage, 0, 0, canvas.width, canvas.height);
  if (!points) return;
  for (const point of points.points) {
    const [x, y] = point.position;
    ctx.beginPath();
    ctx.arc(x * DISPLAY_SCALE, y * DISPLAY_SCALE, 6, 0, 2 * Math.PI);
    ctx.fillStyle = point.kind === "handle" ? "#2f6bff" : "#ff3b30";
    ctx.fill();
    ctx.strokeStyle = "#ffffff";
    ctx.stroke();
  }
}

function showFrame(pngBase64: string): void {
  const img = new Image();
  img.onload = () => {
    baseImage = img;
    redrawCanvas();
  };
  img.src = `data:image/png;base64,${pngBase64}`;
}

async function createSession(): Promise<void> {
  const seed = Number($<HTMLInputElement>("seed").value) || 42;
  const canonical = $<HTMLInputElement>("canonical").checked;
  try {
    session = await api.createSession(seed, canonical ? "canonical" : undefined);
  } catch (err) {
    setStatus("error", String(err));
    return;
  }
  view.resetSeries();
  view.sessionId = session.session_id;
  view.status = "configuring";
  view.config.seed = seed;
  const [, height, width] = session.image_shape;
  points = new PointStore(width, height, session.feature_resolution);
  points.onChange((event) => {
    if (event.type === "rejected") hint(`click ignored: ${event.reason}`);
    redrawCanvas();
  });
  $("banner").classList.add("hidden");
  showFrame(session.image_png_base64);
  setStatus("configuring", session.session_id.slice(0, 8));
  hint("click to place a blue handle, click again for its red target");
}

async function submitConfigAndRun(startLoop: boolean): Promise<void> {
  if (!session || !points) {
    setStatus("error", "no session");
    return;
  }
  if (view.status === "running") {
    hint("already running; pause first");
    return;
  }
  const pairs = points.pairsForSubmit();
  if (pairs.length === 0) {
    hint("place at least one handle/target pair first");
    return;
  }
  let nPca: number | null;
  try {
    nPca = parseNpca($<HTMLInputElement>("npca").value);
  } catch (err) {
    hint(String(err));
    return;
  }
  const config = {
    learning_rate: Number($<HTMLInputElement>("lr").value) || 0.05,
    n_pca: nPca,
    w_plus_layers: Number($<HTMLInputElement>("layers").value) || 3,
    pairs,
  };
  try {
    if (view.status === "configuring") {
      await api.configure(session.session_id, config);
    }
    if (startLoop) {
      await api.startRun(session.session_id);
      view.status = "running";
      setStatus("running");
      followStream();
    }
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      hint(`rejected: ${err.message}`);
    } else {
      setStatus("error", String(err));
    }
  }
}

function followStream(): void {
  if (!session) return;
  streamAbort?.abort();
  streamAbort = new AbortController();
  streamEvents(
    api.eventsUrl(session.session_id),
    (event) => {
      if (event.event === "step") {
        view.appendStep(event.data.record, event.id);
        if (event.data.frame) showFrame(event.data.frame);
        redrawCharts();
      } else if (event.event === "summary") {
        view.finish(event.data.summary, event.id);
        if (event.data.frame) showFrame(event.data.frame);
        const banner = $("banner");
        banner.textContent = view.bannerText();
        banner.classList.remove("hidden");
        setStatus(view.status);
        refreshPoints();
      }
    },
    { lastId: view.lastEventId, signal: streamAbort.signal },
  ).catch((err) => setStatus("error", String(err)));
}

async function refreshPoints(): Promise<void> {
  if (!session || !points) return;
  try {
    const image = await api.getImage(session.session_id);
    points.clear();
    for (const pair of image.pairs) {
      const h = points.featureToImage(pair.handle);
      const t = points.featureToImage(pair.target);
      points.click(h[0], h[1]);
      points.click(t[0], t[1]);
    }
    showFrame(image.image_png_base64);
  } catch {
    /* session may be gone */
  }
}

$("create").addEventListener("click", () => void createSession());
$("start").addEventListener("click", () => void submitConfigAndRun(true));
$("use-suggested").addEventListener("click", () => {
  if (!session || !points) return;
  if (!session.suggested_pair) {
    hint("no suggested pair (non-canonical session)");
    return;
  }
  points.clear();
  const h = points.featureToImage(session.suggested_pair.handle);
  const t = points.featureToImage(session.suggested_pair.target);
  points.click(h[0], h[1]);
  points.click(t[0], t[1]);
});
$("delete-last").addEventListener("click", () => points?.deleteLast());
$("pause").addEventListener("click", async () => {
  if (!session) return;
  streamAbort?.abort();
  const result = await api.pause(session.session_id);
  view.status = result.state as typeof view.status;
  setStatus(result.state, `iteration ${result.iteration}`);
});
$("cancel").addEventListener("click", async () => {
  // Cancel stops at the next step boundary; the trace stays resumable.
  if (!session) return;
  streamAbort?.abort();
  const result = await api.pause(session.session_id);
  view.status = result.state as typeof view.status;
  setStatus(`${result.state} (cancelled)`, `iteration ${result.iteration}`);
});
$("step").addEventListener("click", async () => {
  if (!session || !points) return;
  if (view.status === "running") {
    hint("pause before stepping");
    return;
  }
  if (view.status === "configuring") {
    await submitConfigAndRun(false);
  }
  try {
    const result = await api.step(session.session_id);
    view.status = result.state as typeof view.status;
    if (result.record) view.appendStep(result.record, view.lastEventId + 1);
    if (result.summary) {
      view.finish(result.summary, view.lastEventId + 1);
      const banner = $("banner");
      banner.textContent = view.bannerText();
      banner.classList.remove("hidden");
    }
    setStatus(result.state);
    redrawCharts();
    void refreshPoints();
  } catch (err) {
    hint(String(err));
  }
});

$<HTMLCanvasElement>("image-canvas").addEventListener("click", (event) => {
  if (!points || !session) return;
  if (view.status === "running") {
    hint("run in progress: points are locked (mirrors the service 409)");
    return;
  }
  if (view.status !== "configuring") {
    hint("session already ran; create a new session to edit points");
    return;
  }
  const rect = (event.target as HTMLCanvasElement).getBoundingClientRect();
  const x = (event.clientX - rect.left) / DISPLAY_SCALE;
  const y = (event.clientY - rect.top) / DISPLAY_SCALE;
  points.click(x, y);
});

setStatus("idle");
redrawCharts();
