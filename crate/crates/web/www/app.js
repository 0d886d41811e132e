import init, { simulate, local_mode, nv_curve, pheno_trajectory } from "./pkg/cca_web.js";

const $ = (id) => document.getElementById(id);

function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 34;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap((s) => s.x);
  const xmin = opts.xmin ?? Math.min(...xs), xmax = opts.xmax ?? Math.max(...xs);
  const ymin = opts.ymin ?? 0;
  const ymax = opts.ymax ?? Math.max(...series.flatMap((s) => s.y), 1e-12);
  const px = (x) => pad + ((x - xmin) / (xmax - xmin || 1)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - ymin) / (ymax - ymin || 1)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad / 2, w - 2 * pad, h - 1.5 * pad);
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText(xmin.toPrecision(3), pad, h - pad / 3);
  ctx.fillText(xmax.toPrecision(3), w - pad - 24, h - pad / 3);
  ctx.fillText(ymax.toPrecision(3), 2, pad / 2 + 8);
  if (opts.title) ctx.fillText(opts.title, pad + 6, pad / 2 + 14);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.4;
    ctx.beginPath();
    s.x.forEach((x, i) => (i ? ctx.lineTo(px(x), py(s.y[i])) : ctx.moveTo(px(x), py(s.y[i]))));
    ctx.stroke();
  }
  if (opts.marker !== undefined) {
    ctx.strokeStyle = "#c00";
    ctx.beginPath();
    ctx.moveTo(px(opts.marker), pad / 2);
    ctx.lineTo(px(opts.marker), h - pad);
    ctx.stroke();
  }
}

function runRealization() {
  const pdf = $("pdf").value;
  const sigma = Number($("sigma").value);
  const seed = Number($("seed").value) >>> 0;
  const n = Number($("nhalf").value);
  const t = Number($("tend").value);
  try {
    const start = performance.now();
    const sim = simulate(pdf, sigma, seed, n, t);
    const elapsed = performance.now() - start;
    const times = sim.times;
    plot($("traj"), [
      { x: times, y: sim.population, color: "#1f5fbf" },
      { x: times, y: sim.pheno, color: "#d9541e" },
    ], { ymin: 0, ymax: 1, title: "|α(t)|² against J·t" });
    $("traj-readout").textContent =
      `N = ${sim.n.toFixed(4)}   N_V = ${sim.nv.toExponential(3)}   ` +
      `model N = ${sim.n_predicted.toFixed(4)} at r = ${sim.r.toFixed(3)}\n` +
      `λ = ${sim.lambda.toFixed(2)}   g_ℓ = ${sim.g_ell.toExponential(3)}   γ = ${sim.gamma.toExponential(3)}   ` +
      `(${elapsed.toFixed(0)} ms)`;
    sim.free();

    const mode = local_mode(pdf, sigma, seed, n);
    const sites = Array.from(mode.profile, (_, i) => i - n);
    plot($("mode"), [{ x: sites, y: mode.profile, color: "#2a8a4a" }],
      { title: "|φ_ℓ(n)|² of the selected local mode", marker: 0 });
    $("mode-readout").textContent =
      `mode ${mode.ell}   ω_ℓ = ${mode.omega.toExponential(3)}   λ = ${mode.lambda.toFixed(2)}`;
    mode.free();
  } catch (e) {
    $("traj-readout").textContent = `error: ${e.message ?? e}`;
  }
}

let curve = null;

function runModel() {
  const r = Number($("r").value);
  $("r-value").textContent = r.toFixed(2);
  if (!curve) {
    const flat = nv_curve(8, 320);
    curve = { r: [], n: [] };
    for (let i = 0; i < flat.length; i += 3) {
      curve.r.push(flat[i]);
      curve.n.push(flat[i + 2]);
    }
  }
  plot($("nv"), [{ x: curve.r, y: curve.n, color: "#6a3d9a" }],
    { xmin: 0, ymin: 0, ymax: 1, title: "N(r) of the resonant single-mode model", marker: r });

  const tEnd = 30, pts = 600;
  const pop = pheno_trajectory(r, tEnd, pts);
  const ts = Array.from(pop, (_, i) => (tEnd * i) / (pts - 1));
  plot($("pheno"), [{ x: ts, y: pop, color: "#d9541e" }],
    { ymin: 0, ymax: 1, title: "|α|² against g_ℓ·t" });
  const k = curve.r.findIndex((x) => x >= r);
  $("pheno-readout").textContent = `N(${r.toFixed(2)}) ≈ ${curve.n[Math.max(k, 0)].toFixed(4)}`;
}

await init();
$("run").addEventListener("click", runRealization);
$("next").addEventListener("click", () => {
  $("seed").value = Number($("seed").value) + 1;
  runRealization();
});
$("r").addEventListener("input", runModel);
runRealization();
runModel();
