import init, { penalty_path_demo, roc_demo, degeneracy_demo } from "./pkg/cscs_wasm.js";

const COLORS = { "cscs": "#1f77b4", "sparse-cholesky": "#d62728", "sparse-dag": "#2ca02c" };
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function call(fn, ...args) {
  try {
    return JSON.parse(fn(...args));
  } catch (e) {
    alert(e.message || String(e));
    return null;
  }
}

// Maps data ranges onto a canvas with a margin for axes.
function frame(ctx, xr, yr, opts = {}) {
  const m = { l: 55, r: opts.right ? 55 : 15, t: 15, b: 35 };
  const w = ctx.canvas.width, h = ctx.canvas.height;
  const logx = !!opts.logx, logy = !!opts.logy;
  const tx = (x) => (logx ? Math.log10(x) : x);
  const ty = (y) => (logy ? Math.log10(y) : y);
  const [x0, x1] = xr.map(tx), [y0, y1] = yr.map(ty);
  return {
    x: (x) => m.l + ((tx(x) - x0) / (x1 - x0 || 1)) * (w - m.l - m.r),
    y: (y) => h - m.b - ((ty(y) - y0) / (y1 - y0 || 1)) * (h - m.t - m.b),
    m, w, h,
  };
}

function axes(ctx, f, xlabel, ylabel) {
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(f.m.l, f.m.t);
  ctx.lineTo(f.m.l, f.h - f.m.b);
  ctx.lineTo(f.w - f.m.r, f.h - f.m.b);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.fillText(xlabel, f.w / 2 - 20, f.h - 8);
  ctx.save();
  ctx.translate(14, f.h / 2 + 20);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(ylabel, 0, 0);
  ctx.restore();
}

function line(ctx, pts, color) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
  ctx.stroke();
  ctx.lineWidth = 1;
}

// penalty path

let pathData = null;

function runPath() {
  pathData = call(penalty_path_demo, num("path-p"), num("path-n"), num("path-z"), BigInt(num("path-seed")), 20);
  if (!pathData) return;
  // steps arrive in grid order (descending λ); show them ascending
  pathData.steps.sort((a, b) => a.lambda - b.lambda);
  $("path-step").max = pathData.steps.length - 1;
  drawPathCurve();
  drawSupport();
}

function drawSupport() {
  if (!pathData) return;
  const step = pathData.steps[num("path-step")];
  const ctx = $("path-support").getContext("2d");
  const p = pathData.p, size = ctx.canvas.width, cell = size / p;
  ctx.clearRect(0, 0, size, size);
  const truth = new Set(pathData.truth.map(([i, j]) => i * p + j));
  const found = new Set(step.support.map(([i, j]) => i * p + j));
  for (let i = 0; i < p; i++) {
    ctx.fillStyle = "#000";
    ctx.fillRect(i * cell, i * cell, cell, cell);
    for (let j = 0; j < i; j++) {
      const k = i * p + j;
      if (found.has(k)) {
        ctx.fillStyle = truth.has(k) ? "#1f77b4" : "#d62728";
        ctx.fillRect(j * cell, i * cell, cell, cell);
      } else if (truth.has(k)) {
        ctx.strokeStyle = "#999";
        ctx.strokeRect(j * cell + 0.5, i * cell + 0.5, cell - 1, cell - 1);
      }
    }
  }
  $("path-info").textContent =
    `λ = ${step.lambda.toExponential(3)}: ${step.edges} edges, ${step.true_positives} of ${pathData.truth.length} true edges, ‖Ω − Ω̂‖F = ${step.frobenius.toFixed(3)}`;
  drawPathCurve(step.lambda);
}

function drawPathCurve(marker) {
  const ctx = $("path-curve").getContext("2d");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  const s = pathData.steps;
  const lams = s.map((d) => d.lambda);
  const fr = s.map((d) => d.frobenius), ed = s.map((d) => d.edges);
  const xr = [Math.min(...lams), Math.max(...lams)];
  const f1 = frame(ctx, xr, [0, Math.max(...fr) * 1.05], { logx: true, right: true });
  const f2 = frame(ctx, xr, [0, Math.max(1, ...ed) * 1.05], { logx: true, right: true });
  axes(ctx, f1, "λ (log scale)", "Frobenius error");
  line(ctx, s.map((d) => [f1.x(d.lambda), f1.y(d.frobenius)]), "#1f77b4");
  line(ctx, s.map((d) => [f2.x(d.lambda), f2.y(d.edges)]), "#ff7f0e");
  ctx.fillStyle = "#ff7f0e";
  ctx.fillText("edges", f1.w - 50, 28);
  ctx.fillStyle = "#1f77b4";
  ctx.fillText("error", f1.w - 50, 44);
  if (marker !== undefined) {
    ctx.strokeStyle = "#888";
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(f1.x(marker), f1.m.t);
    ctx.lineTo(f1.x(marker), f1.h - f1.m.b);
    ctx.stroke();
    ctx.setLineDash([]);
  }
}

// ROC

function runRoc() {
  const data = call(roc_demo, num("roc-p"), num("roc-n"), num("roc-z"), BigInt(num("roc-seed")), 30);
  if (!data) return;
  const ctx = $("roc-canvas").getContext("2d");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  const f = frame(ctx, [0, 1], [0, 1]);
  const [lo, hi] = data.fpr_window;
  ctx.fillStyle = "#f3f3f3";
  ctx.fillRect(f.x(lo), f.y(1), f.x(hi) - f.x(lo), f.y(0) - f.y(1));
  axes(ctx, f, "false positive rate", "true positive rate");
  data.methods.forEach((m, k) => {
    const pts = [[0, 0], ...m.points.map((q) => [q.fpr, q.tpr]), [1, 1]].sort((a, b) => a[0] - b[0]);
    line(ctx, pts.map(([x, y]) => [f.x(x), f.y(y)]), COLORS[m.method]);
    ctx.fillStyle = COLORS[m.method];
    ctx.fillText(`${m.method}: AUC ${m.auc.toFixed(4)}`, f.w - 230, f.h - 90 + 16 * k);
  });
  ctx.fillStyle = "#444";
  ctx.fillText(`${data.true_edges} true edges`, f.w - 230, f.h - 106);
}

// degeneracy

function runDegeneracy() {
  const data = call(degeneracy_demo, num("deg-p"), num("deg-n"), num("deg-lambda"), BigInt(num("deg-seed")));
  if (!data) return;
  const ctx = $("deg-canvas").getContext("2d");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  const tr = data.min_d_trace.map((v) => Math.max(v, 1e-16));
  const f = frame(ctx, [1, Math.max(2, tr.length)], [1e-16, Math.max(10, ...tr)], { logy: true });
  axes(ctx, f, "Sparse Cholesky iteration", "min D_ii (log scale)");
  line(ctx, tr.map((v, i) => [f.x(i + 1), f.y(v)]), "#d62728");
  $("deg-info").textContent =
    `Sparse Cholesky ${data.degenerate ? "collapsed onto the D floor" : "stayed above the floor"}; ` +
    `smallest CSCS diagonal L_ii = ${data.cscs_min_diag.toFixed(4)}.`;
}

await init();
$("path-run").onclick = runPath;
$("path-step").oninput = drawSupport;
$("roc-run").onclick = runRoc;
$("deg-run").onclick = runDegeneracy;
runPath();
runRoc();
runDegeneracy();
