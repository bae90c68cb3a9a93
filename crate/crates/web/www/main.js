import init, { classify, plane, decompose } from "./pkg/qebt_web.js";

const names = ["t1", "t2", "t3", "l1", "l2", "l3"];
const start = [0.4, 0.3, 0.0, 0.3, 0.1, 0.15];
const inputs = {};
const EXTENT = 2;
const RAYS = 360;

function buildControls() {
  const box = document.getElementById("params");
  names.forEach((name, i) => {
    const label = document.createElement("label");
    const input = Object.assign(document.createElement("input"), {
      type: "range", min: -1, max: 1, step: 0.005, value: start[i],
    });
    const out = document.createElement("output");
    label.append(name.replace("l", "λ"), input, out);
    box.append(label);
    inputs[name] = { input, out };
    input.addEventListener("input", refresh);
  });
}

function values() {
  return names.map((n) => {
    const v = Number(inputs[n].input.value);
    inputs[n].out.value = v.toFixed(3);
    return v;
  });
}

function toCanvas(ctx, x, y) {
  const { width, height } = ctx.canvas;
  return [((x + EXTENT) / (2 * EXTENT)) * width, ((EXTENT - y) / (2 * EXTENT)) * height];
}

function fillPolyline(ctx, flat, fill, stroke) {
  ctx.beginPath();
  for (let i = 0; i < flat.length; i += 2) {
    const [x, y] = toCanvas(ctx, flat[i], flat[i + 1]);
    i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
  }
  ctx.closePath();
  ctx.fillStyle = fill;
  ctx.fill();
  ctx.strokeStyle = stroke;
  ctx.stroke();
}

function drawAxes(ctx) {
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  for (const [a, b] of [[[-EXTENT, 0], [EXTENT, 0]], [[0, -EXTENT], [0, EXTENT]]]) {
    ctx.moveTo(...toCanvas(ctx, ...a));
    ctx.lineTo(...toCanvas(ctx, ...b));
  }
  ctx.stroke();
  ctx.setLineDash([4, 4]);
  ctx.strokeRect(...toCanvas(ctx, -1, 1), ctx.canvas.width / 2, ctx.canvas.height / 2);
  ctx.setLineDash([]);
  ctx.fillStyle = "#555";
  ctx.fillText("λ₊", ctx.canvas.width - 18, ctx.canvas.height / 2 - 6);
  ctx.fillText("λ₋", ctx.canvas.width / 2 + 6, 12);
}

function refresh() {
  const [t1, t2, t3, l1, l2, l3] = values();
  const status = document.getElementById("status");
  const ctx = document.getElementById("plane").getContext("2d");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  drawAxes(ctx);
  const result = JSON.parse(classify(t1, t2, t3, l1, l2, l3));
  document.getElementById("classification").textContent = JSON.stringify(result, null, 2);
  try {
    const region = JSON.parse(plane(t1, t2, t3, l3, RAYS));
    fillPolyline(ctx, region.boundary, "rgba(31,95,168,0.2)", "#1f5fa8");
    fillPolyline(ctx, region.lens, "rgba(181,84,28,0.3)", "#b5541c");
    status.className = "";
    status.textContent = `CP: ${result.cp}, entanglement breaking: ${result.ebt}`;
  } catch (e) {
    status.className = "bad";
    status.textContent = `no plane for these t, λ₃: ${e.message ?? e}`;
  }
  const [px, py] = toCanvas(ctx, l1 + l2, l1 - l2);
  ctx.fillStyle = result.cp ? "#111" : "#a00";
  ctx.beginPath();
  ctx.arc(px, py, 4, 0, 2 * Math.PI);
  ctx.fill();
}

function runDecompose() {
  const v = values();
  const out = document.getElementById("decomposition");
  try {
    const d = JSON.parse(decompose(...v));
    const lines = d.weights.map((w, i) => {
      const c = d.components[i];
      const f = (a) => a.map((x) => x.toFixed(4)).join(", ");
      return `${w.toFixed(6)}  t=(${f(c.t)})  d=(${f(c.d)})  axis=(${f(c.axis)})`;
    });
    out.textContent = `${d.method}, ${d.weights.length} components, residual ${d.residual.toExponential(2)}\n` + lines.join("\n");
  } catch (e) {
    out.textContent = `not decomposed: ${e.message ?? e}`;
  }
}

await init();
buildControls();
document.getElementById("decompose").addEventListener("click", runDecompose);
refresh();
