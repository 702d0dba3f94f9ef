import init, { slope_sweep, objective_grid, two_state_choquet } from "./pkg/cap_wasm.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => x.toFixed(3);

function guarded(out, f) {
  try {
    f();
  } catch (e) {
    out.innerHTML = `<p class="err">${e.message ?? e}</p>`;
  }
}

function sweep() {
  const out = $("s-out");
  guarded(out, () => {
    const pts = JSON.parse(slope_sweep(+$("s-from").value, +$("s-to").value, +$("s-steps").value));
    const rows = pts.map((p) =>
      `<tr class="${p.pattern ? "pattern" : ""}"><td>${fmt(p.slope)}</td>` +
      p.values.map((v) => `<td>${fmt(v)}</td>`).join("") +
      `<td>${p.pattern ? "yes" : ""}</td></tr>`).join("");
    out.innerHTML = `<table><tr><th>slope</th><th>U(f1)</th><th>U(f2)</th><th>U(f3)</th><th>U(f4)</th>` +
      `<th>f1≻f2, f4≻f3</th></tr>${rows}</table>`;
  });
}

const ACTS = { reflection: ["f5", "f6", "f7", "f8", "f9", "f10"], "5051": ["f1", "f2", "f3", "f4"] };

function fillActs() {
  $("g-act").innerHTML = ACTS[$("g-ex").value].map((a) => `<option>${a}</option>`).join("");
}

function heatmap() {
  const out = $("g-out");
  $("g-slope-v").textContent = $("g-slope").value;
  guarded(out, () => {
    const g = JSON.parse(objective_grid($("g-ex").value, $("g-act").value, +$("g-slope").value, 41));
    const ctx = $("g-canvas").getContext("2d");
    const cell = ctx.canvas.width / g.n;
    const flat = g.z.flat();
    const lo = Math.min(...flat), hi = Math.max(...flat);
    for (let i = 0; i < g.n; i++) {
      for (let j = 0; j < g.n; j++) {
        const t = hi > lo ? (g.z[i][j] - lo) / (hi - lo) : 1;
        ctx.fillStyle = `hsl(${220 - 180 * t}, 70%, ${30 + 40 * t}%)`;
        // beta to the right, gamma upward
        ctx.fillRect(i * cell, (g.n - 1 - j) * cell, cell + 1, cell + 1);
      }
    }
    const [b, c] = g.best;
    ctx.strokeStyle = "#000";
    ctx.lineWidth = 2;
    ctx.strokeRect(b * (g.n - 1) * cell, (g.n - 1 - c * (g.n - 1)) * cell, cell, cell);
    out.textContent = `value ${fmt(g.value)} at beta = ${fmt(b)}, gamma = ${fmt(c)} (range ${fmt(lo)} to ${fmt(hi)})`;
  });
}

function capacity() {
  const out = $("c-out");
  $("c-red-v").textContent = $("c-red").value;
  $("c-blue-v").textContent = $("c-blue").value;
  guarded(out, () => {
    const r = JSON.parse(two_state_choquet(+$("c-red").value, +$("c-blue").value, +$("c-pr").value, +$("c-pb").value));
    const ctx = $("c-canvas").getContext("2d");
    const w = ctx.canvas.width - 20;
    ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
    ctx.strokeStyle = "#999";
    ctx.beginPath(); ctx.moveTo(10, 30); ctx.lineTo(10 + w, 30); ctx.stroke();
    ctx.fillStyle = "#555";
    ctx.fillText("P(red) = 0", 10, 52);
    ctx.fillText("1", 6 + w, 52);
    if (!r.supermodular) {
      out.textContent = "v(red) + v(blue) > 1: not supermodular, the core is empty";
      return;
    }
    const xs = r.core.map((p) => p[0]);
    const a = Math.min(...xs), b = Math.max(...xs);
    ctx.strokeStyle = "#2a7";
    ctx.lineWidth = 6;
    ctx.beginPath(); ctx.moveTo(10 + a * w, 30); ctx.lineTo(10 + b * w + 1, 30); ctx.stroke();
    ctx.lineWidth = 1;
    out.textContent = `core: P(red) in [${fmt(a)}, ${fmt(b)}]; Choquet integral ${fmt(r.choquet)}, ` +
      `minimum over the core ${fmt(r.core_min)}`;
  });
}

await init();
$("s-run").addEventListener("click", sweep);
$("g-ex").addEventListener("change", () => { fillActs(); heatmap(); });
$("g-act").addEventListener("change", heatmap);
$("g-slope").addEventListener("input", heatmap);
for (const id of ["c-red", "c-blue", "c-pr", "c-pb"]) $(id).addEventListener("input", capacity);
fillActs();
sweep();
heatmap();
capacity();
