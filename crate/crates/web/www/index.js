import init, { phi_surface, coherence_curve, beta_curve } from "./pkg/mimo_mc_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function report(id, f) {
  $(id).textContent = "";
  $(id).className = "";
  try {
    const t0 = performance.now();
    f();
    $(id).textContent = `${(performance.now() - t0).toFixed(0)} ms`;
  } catch (e) {
    $(id).textContent = String(e.message ?? e);
    $(id).className = "err";
  }
}

function heat(v) {
  // dark blue to yellow
  const r = Math.round(255 * Math.min(1, 1.6 * v));
  const g = Math.round(255 * Math.max(0, Math.min(1, 1.6 * v - 0.35)));
  const b = Math.round(255 * Math.max(0, 0.55 - v));
  return [r, g, b];
}

function drawSurface() {
  const n = num("s-res");
  const vals = phi_surface($("s-kind").value, num("s-count"), num("s-size"), num("s-lambda"), n);
  const canvas = $("s-canvas");
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(n, n);
  const logs = Array.from(vals, (v) => Math.log10(v + 1e-3));
  const lo = Math.min(...logs), hi = Math.max(...logs);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      // x runs left to right, y bottom to top
      const [r, g, b] = heat((logs[i * n + j] - lo) / (hi - lo || 1));
      const p = 4 * ((n - 1 - j) * n + i);
      img.data.set([r, g, b, 255], p);
    }
  }
  const off = new OffscreenCanvas(n, n);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}

function plot(canvas, series, { logY = false, xLabel = "", yLabel = "" } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 48;
  ctx.clearRect(0, 0, W, H);
  const tf = (y) => (logY ? Math.log10(y) : y);
  const pts = series.flatMap((s) => s.points.filter((p) => Number.isFinite(p[1])));
  const xs = pts.map((p) => p[0]), ys = pts.map((p) => tf(p[1]));
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (W - 2 * pad);
  const sy = (y) => H - pad - ((tf(y) - y0) / (y1 - y0 || 1)) * (H - 2 * pad);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
  ctx.fillStyle = "#000";
  ctx.fillText(x0.toPrecision(3), pad, H - pad + 14);
  ctx.fillText(x1.toPrecision(3), W - pad - 20, H - pad + 14);
  const fmt = (v) => (logY ? (10 ** v).toPrecision(3) : v.toPrecision(4));
  ctx.fillText(fmt(y1), 4, pad + 4);
  ctx.fillText(fmt(y0), 4, H - pad);
  ctx.fillText(xLabel, W / 2, H - 12);
  ctx.fillText(yLabel, 4, pad - 16);
  series.forEach((s, k) => {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    let pen = false;
    for (const [x, y] of s.points) {
      if (!Number.isFinite(y)) { pen = false; continue; }
      pen ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y));
      pen = true;
    }
    ctx.stroke();
    ctx.fillStyle = s.color;
    ctx.fillText(s.name, W - pad - 150, pad + 16 + 14 * k);
  });
}

function triples(flat) {
  const out = [];
  for (let i = 0; i < flat.length; i += 3) out.push([flat[i], flat[i + 1], flat[i + 2]]);
  return out;
}

function drawCoherence() {
  const angles = $("c-angles").value.split(",").map(Number);
  const rows = triples(coherence_curve(Float64Array.from(angles), num("c-min"), num("c-max")));
  plot($("c-canvas"), [
    { name: "measured", color: "#1f5fbf", points: rows.map((r) => [r[0], r[1]]) },
    { name: "bound (gaps: infeasible)", color: "#c0392b", points: rows.map((r) => [r[0], r[2]]) },
  ], { xLabel: "M", yLabel: "coherence" });
}

function drawBeta() {
  const rows = triples(beta_curve(num("b-m"), num("b-xi"), 200));
  plot($("b-canvas"), [
    { name: "sup for this M", color: "#1f5fbf", points: rows.map((r) => [r[0], r[1]]) },
    { name: "sup over all M", color: "#c0392b", points: rows.map((r) => [r[0], r[2]]) },
  ], { logY: true, xLabel: "separation", yLabel: "supremum" });
}

await init();
$("s-run").onclick = () => report("s-msg", drawSurface);
$("c-run").onclick = () => report("c-msg", drawCoherence);
$("b-run").onclick = () => report("b-msg", drawBeta);
report("s-msg", drawSurface);
report("c-msg", drawCoherence);
report("b-msg", drawBeta);
