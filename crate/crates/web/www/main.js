import init, { pattern_curve, kernel_trace, simulate_mic } from "./pkg/tdw_smir_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const vec = (id) => new Float64Array($(id).value.split(",").map(Number));

function guard(errId, f) {
  try {
    f();
    $(errId).textContent = "";
  } catch (e) {
    $(errId).textContent = String(e);
  }
}

function polar(canvas, values) {
  const g = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, r0 = 0.45 * Math.min(w, h);
  g.clearRect(0, 0, w, h);
  g.strokeStyle = "#ddd";
  for (const f of [0.25, 0.5, 0.75, 1]) {
    g.beginPath();
    g.arc(w / 2, h / 2, f * r0, 0, 2 * Math.PI);
    g.stroke();
  }
  // the sweep covers 0..pi; mirror it for the full circle, axis pointing up
  const n = values.length;
  g.beginPath();
  for (let i = 0; i < 2 * n - 1; i++) {
    const k = i < n ? i : 2 * n - 2 - i;
    const th = (Math.PI * i) / (n - 1);
    const a = Math.abs(values[k]) * r0;
    const x = w / 2 + a * Math.sin(th), y = h / 2 - a * Math.cos(th);
    i === 0 ? g.moveTo(x, y) : g.lineTo(x, y);
  }
  g.strokeStyle = "#06c";
  g.lineWidth = 2;
  g.stroke();
  g.lineWidth = 1;
}

function trace(canvas, values, start, fs, stems) {
  const g = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 30;
  g.clearRect(0, 0, w, h);
  const peak = values.reduce((m, v) => Math.max(m, Math.abs(v)), 0) || 1;
  const x = (i) => pad + ((w - 2 * pad) * i) / Math.max(values.length - 1, 1);
  const y = (v) => h / 2 - ((h / 2 - pad) * v) / peak;
  g.strokeStyle = "#ccc";
  g.beginPath();
  g.moveTo(pad, h / 2);
  g.lineTo(w - pad, h / 2);
  g.stroke();
  g.strokeStyle = "#06c";
  g.beginPath();
  values.forEach((v, i) => {
    if (stems) {
      g.moveTo(x(i), h / 2);
      g.lineTo(x(i), y(v));
    } else {
      i === 0 ? g.moveTo(x(i), y(v)) : g.lineTo(x(i), y(v));
    }
  });
  g.stroke();
  g.fillStyle = "#333";
  const t0 = (1000 * start) / fs, t1 = (1000 * (start + values.length - 1)) / fs;
  g.fillText(`${t0.toFixed(2)} ms`, pad, h - 8);
  g.fillText(`${t1.toFixed(2)} ms`, w - pad - 50, h - 8);
  g.fillText(`peak ${peak.toExponential(3)}`, pad, 14);
}

function drawPattern() {
  guard("p-err", () => polar($("p-canvas"), pattern_curve($("p-kind").value, num("p-order"), 181)));
}

function drawKernel() {
  guard("k-err", () => {
    const t = kernel_trace(num("k-r"), num("k-rs"), num("k-n"), num("k-v"), num("k-fs"));
    trace($("k-canvas"), t.values, t.start, t.fs, true);
  });
}

function runSim() {
  guard("s-err", () => {
    const t0 = performance.now();
    const t = simulate_mic(
      vec("s-dims"), num("s-beta"), vec("s-src"), vec("s-ctr"),
      $("s-kind").value, num("s-images"), num("s-order"), num("s-mic") - 1,
    );
    trace($("s-canvas"), t.values, t.start, t.fs, false);
    $("s-info").textContent = `${t.values.length} samples in ${(performance.now() - t0).toFixed(0)} ms`;
  });
}

await init();
for (const id of ["p-kind", "p-order"]) $(id).addEventListener("input", drawPattern);
for (const id of ["k-r", "k-rs", "k-n", "k-v", "k-fs"]) $(id).addEventListener("input", drawKernel);
$("s-run").addEventListener("click", runSim);
drawPattern();
drawKernel();
runSim();
