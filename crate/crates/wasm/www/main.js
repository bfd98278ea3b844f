import init, { sample_tail_path, simulate_process, theta_curve } from "./pkg/maxstable_wasm.js";

const $ = (id) => document.getElementById(id);

function model() {
  const family = document.querySelector("input[name=family]:checked").value;
  switch (family) {
    case "brown_resnick":
      return { family, scale: +$("scale").value, exponent: +$("exponent").value };
    case "sequence":
      return { family, coefficients: $("coefficients").value.split(",").map(Number) };
    default:
      return { family };
  }
}

const radius = () => +$("radius").value;
const seed = () => +$("seed").value;

// Axes plus series of {x, y} points; `log` plots log10(y).
function plot(canvas, series, { log = false, ymin, ymax } = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const tf = (y) => (log ? Math.log10(y) : y);
  const all = series.flatMap((s) => s.points);
  const xs = all.map((p) => p.x);
  const ys = all.map((p) => tf(p.y)).filter(Number.isFinite);
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  let y0 = ymin ?? Math.min(...ys), y1 = ymax ?? Math.max(...ys);
  if (y1 === y0) { y0 -= 1; y1 += 1; }
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (y) => h - pad - ((tf(y) - y0) / (y1 - y0)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.font = "12px sans-serif";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad / 2, h - pad);
  ctx.stroke();
  ctx.fillText(x0, pad, h - pad + 15);
  ctx.fillText(x1, w - pad - 10, h - pad + 15);
  const lab = (v) => (log ? "1e" + v.toFixed(1) : v.toFixed(2));
  ctx.fillText(lab(y1), 2, pad / 2 + 10);
  ctx.fillText(lab(y0), 2, h - pad);

  for (const s of series) {
    ctx.strokeStyle = ctx.fillStyle = s.color;
    if (s.bars) {
      for (const p of s.points) {
        ctx.fillRect(px(p.x) - 2, py(p.y), 4, h - pad - py(p.y));
      }
      continue;
    }
    ctx.beginPath();
    s.points.forEach((p, i) => (i ? ctx.lineTo(px(p.x), py(p.y)) : ctx.moveTo(px(p.x), py(p.y))));
    ctx.stroke();
    for (const p of s.points) {
      ctx.fillRect(px(p.x) - 2, py(p.y) - 2, 4, 4);
      if (p.err) {
        ctx.beginPath();
        ctx.moveTo(px(p.x), py(p.y - 2 * p.err));
        ctx.lineTo(px(p.x), py(p.y + 2 * p.err));
        ctx.stroke();
      }
    }
  }
}

function run(fn) {
  $("status").textContent = "";
  try {
    fn();
  } catch (e) {
    $("status").textContent = String(e);
  }
}

const path = (values, r) => Array.from(values, (y, i) => ({ x: i - r, y }));

$("tail").onclick = () =>
  run(() => {
    const r = radius();
    const values = sample_tail_path(JSON.stringify(model()), r, seed());
    plot($("tail-plot"), [{ points: path(values, r), color: "#1f5fa8", bars: true }], { ymin: 0 });
    $("seed").value = seed() + 1;
  });

$("field").onclick = () =>
  run(() => {
    const r = radius();
    const values = simulate_process(JSON.stringify(model()), r, seed());
    plot($("field-plot"), [{ points: path(values, r), color: "#b5461b" }], { log: true });
    $("seed").value = seed() + 1;
  });

$("curve").onclick = () =>
  run(() => {
    const rmax = radius();
    const radii = [...new Set([1, 2, 4, 8, 16, 32, 64, 128].filter((r) => r < rmax).concat(rmax))];
    const pts = JSON.parse(theta_curve(JSON.stringify(model()), Int32Array.from(radii), +$("replicates").value, seed()));
    const series = [{ points: pts.map((p) => ({ x: p.radius, y: p.estimate, err: p.stderr })), color: "#2a7a2a" }];
    if (pts[0].lower_bound !== undefined) {
      series.push({ points: pts.map((p) => ({ x: p.radius, y: p.lower_bound })), color: "#999" });
    }
    plot($("curve-plot"), series, { ymin: 0, ymax: 1 });
    const rows = pts
      .map((p) => `<tr><td>${p.radius}</td><td>${p.estimate.toFixed(4)}</td><td>${p.stderr.toFixed(4)}</td><td>${p.lower_bound?.toFixed(4) ?? ""}</td></tr>`)
      .join("");
    $("curve-table").innerHTML = `<tr><th>radius</th><th>θ</th><th>stderr</th><th>lower bound</th></tr>${rows}`;
  });

await init();
$("tail").click();
