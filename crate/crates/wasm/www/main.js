import init, { distances, cone_extension, solve_disk } from "./pkg/qv_wasm.js";

const $ = (id) => document.getElementById(id);

function toCanvas(canvas, x, y) {
  const s = canvas.width / 2.4;
  return [canvas.width / 2 + x * s, canvas.height / 2 - y * s];
}

function fromCanvas(canvas, px, py) {
  const s = canvas.width / 2.4;
  return [(px - canvas.width / 2) / s, (canvas.height / 2 - py) / s];
}

// Matching demo.

const tuples = { a: [], b: [] };

function dot(ctx, canvas, p, color) {
  const [x, y] = toCanvas(canvas, p[0], p[1]);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(x, y, 5, 0, 2 * Math.PI);
  ctx.fill();
}

function drawMatching() {
  const canvas = $("match");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const kind = document.querySelector("input[name=kind]:checked").value;
  const { a, b } = tuples;
  if (a.length > 0 && a.length === b.length) {
    try {
      const res = JSON.parse(distances(JSON.stringify(a), JSON.stringify(b)));
      ctx.strokeStyle = "#888";
      res[kind].matching.forEach((j, i) => {
        ctx.beginPath();
        ctx.moveTo(...toCanvas(canvas, ...a[i]));
        ctx.lineTo(...toCanvas(canvas, ...b[j]));
        ctx.stroke();
      });
      $("match-out").textContent =
        `Q = ${a.length}\nG1   = ${res.g1.distance.toFixed(6)}\nG2   = ${res.g2.distance.toFixed(6)}\nG∞   = ${res.ginf.distance.toFixed(6)}`;
    } catch (e) {
      $("match-out").textContent = String(e);
    }
  } else {
    $("match-out").textContent = `A has ${a.length} points, B has ${b.length}.`;
  }
  a.forEach((p) => dot(ctx, canvas, p, "#c0392b"));
  b.forEach((p) => dot(ctx, canvas, p, "#2c6fbb"));
}

$("match").addEventListener("click", (ev) => {
  const r = ev.target.getBoundingClientRect();
  const p = fromCanvas(ev.target, ev.clientX - r.left, ev.clientY - r.top);
  (ev.shiftKey ? tuples.b : tuples.a).push(p);
  drawMatching();
});
$("match-clear").addEventListener("click", () => {
  tuples.a = [];
  tuples.b = [];
  drawMatching();
});
document.querySelectorAll("input[name=kind]").forEach((el) => el.addEventListener("change", drawMatching));

// Boundary data shared by the extension and the solver.

function boundarySamples() {
  const q = Math.max(1, Math.min(4, +$("bq").value));
  const k = +$("bk").value;
  const count = Math.max(8, Math.min(512, +$("bs").value));
  const samples = [];
  for (let s = 0; s < count; s++) {
    const t = (2 * Math.PI * s) / count;
    const value = [];
    for (let j = 0; j < q; j++) {
      const phi = (k * t + 2 * Math.PI * j) / q;
      value.push([Math.cos(phi), Math.sin(phi)]);
    }
    samples.push({ location: [Math.cos(t), Math.sin(t)], value });
  }
  return samples;
}

function paintField(canvas, nodes, cell) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const size = (cell * canvas.width) / 2.4 + 1;
  for (const { location, value } of nodes) {
    const [vx, vy] = value[0].length > 1 ? value[0] : [value[0][0], 0];
    const hue = ((Math.atan2(vy, vx) * 180) / Math.PI + 360) % 360;
    const light = 20 + 60 * Math.min(1, Math.hypot(vx, vy));
    ctx.fillStyle = `hsl(${hue}, 75%, ${light}%)`;
    const [x, y] = toCanvas(canvas, location[0], location[1]);
    ctx.fillRect(x - size / 2, y - size / 2, size, size);
  }
  ctx.strokeStyle = "#333";
  ctx.beginPath();
  ctx.arc(canvas.width / 2, canvas.height / 2, canvas.width / 2.4, 0, 2 * Math.PI);
  ctx.stroke();
}

$("cone-run").addEventListener("click", () => {
  const res = Math.max(10, Math.min(200, +$("cres").value));
  try {
    const t0 = performance.now();
    const nodes = JSON.parse(cone_extension(JSON.stringify(boundarySamples()), res));
    paintField($("cone"), nodes, 2 / (res - 1));
    $("cone-out").textContent = `${nodes.length} points in ${(performance.now() - t0).toFixed(0)} ms`;
  } catch (e) {
    $("cone-out").textContent = String(e);
  }
});

function drawHistory(history) {
  const canvas = $("hist");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (history.length < 2) return;
  const lo = Math.min(...history);
  const hi = Math.max(...history);
  ctx.strokeStyle = "#2c6fbb";
  ctx.beginPath();
  history.forEach((e, i) => {
    const x = (i / (history.length - 1)) * (canvas.width - 10) + 5;
    const y = canvas.height - 5 - ((e - lo) / (hi - lo || 1)) * (canvas.height - 10);
    i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
  });
  ctx.stroke();
}

$("solve-run").addEventListener("click", () => {
  $("solve-out").textContent = "solving...";
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const sol = JSON.parse(
        solve_disk(JSON.stringify(boundarySamples()), +$("sgrid").value, +$("sp").value, +$("sruns").value, BigInt(+$("sseed").value)),
      );
      paintField($("solve"), sol.nodes, sol.h);
      drawHistory(sol.history);
      $("solve-out").textContent =
        `energy ${sol.energy.toFixed(8)}\nruns ${sol.runs.map((e) => e.toFixed(6)).join(", ")}\n` +
        `${sol.history.length - 1} iterations (best run), ${(performance.now() - t0).toFixed(0)} ms`;
    } catch (e) {
      $("solve-out").textContent = String(e);
    }
  }, 10);
});

await init();
drawMatching();
