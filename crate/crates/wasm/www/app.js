import init, { bob_state, fidelity_curves, fitted_parameters, phase_map } from "./pkg/scissors_wasm.js";

const HARDWARE = ["eta_one", "eta_spd", "eta_hd", "mode_match"];
const $ = (id) => document.getElementById(id);

function showValue(input) {
  input.nextElementSibling.value = Number(input.value).toFixed(2);
}

function hardware() {
  return HARDWARE.map((id) => Number($(id).value));
}

function guarded(fn) {
  try {
    fn();
    $("error").textContent = "";
  } catch (e) {
    $("error").textContent = String(e.message ?? e);
  }
}

function frame(ctx, w, h, pad, xMax, yMax, xLabel) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#444";
  ctx.lineWidth = 1;
  ctx.strokeRect(pad, pad / 2, w - 1.5 * pad, h - 1.5 * pad);
  ctx.font = "12px system-ui";
  for (let i = 0; i <= 4; i++) {
    const y = pad / 2 + (h - 1.5 * pad) * (1 - i / 4);
    ctx.fillText((yMax * i / 4).toFixed(2), 4, y + 4);
    const x = pad + (w - 1.5 * pad) * i / 4;
    ctx.fillText((xMax * i / 4).toFixed(2), x - 10, h - pad / 2 + 4);
  }
  ctx.fillText(xLabel, w / 2, h - 4);
}

function drawCurves() {
  const canvas = $("curves");
  const ctx = canvas.getContext("2d");
  const [w, h, pad] = [canvas.width, canvas.height, 44];
  const points = 81;
  const alphaMax = 2;
  const data = fidelity_curves(...hardware(), alphaMax, points);
  frame(ctx, w, h, pad, alphaMax, 1, "|α|");
  const px = (a) => pad + (w - 1.5 * pad) * a / alphaMax;
  const py = (f) => pad / 2 + (h - 1.5 * pad) * (1 - f);
  const series = [
    [1, "#1f5fbf", []],
    [2, "#1f5fbf", [8, 4]],
    [3, "#c0392b", [2, 3]],
    [4, "#888", []],
  ];
  for (const [col, color, dash] of series) {
    ctx.strokeStyle = color;
    ctx.setLineDash(dash);
    ctx.lineWidth = col === 1 ? 2 : 1.5;
    ctx.beginPath();
    let pen = false;
    for (let i = 0; i < points; i++) {
      const v = data[5 * i + col];
      if (Number.isNaN(v)) {
        pen = false;
        continue;
      }
      const [x, y] = [px(data[5 * i]), py(v)];
      pen ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
      pen = true;
    }
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

function drawPhase() {
  const canvas = $("phase");
  const ctx = canvas.getContext("2d");
  const [w, h, pad] = [canvas.width, canvas.height, 44];
  const [phiSteps, bins, halfWidth] = [72, 60, 3];
  const data = phase_map(Number($("alpha").value), ...hardware(), phiSteps, bins, halfWidth);
  const stride = bins + 1;
  let peak = 0;
  for (let k = 0; k < phiSteps; k++) {
    for (let b = 1; b < stride; b++) peak = Math.max(peak, data[k * stride + b]);
  }
  ctx.clearRect(0, 0, w, h);
  const [cw, ch] = [(w - 1.5 * pad) / phiSteps, (h - 1.5 * pad) / bins];
  for (let k = 0; k < phiSteps; k++) {
    for (let b = 0; b < bins; b++) {
      const v = data[k * stride + 1 + b] / peak;
      const shade = Math.round(255 * (1 - v));
      ctx.fillStyle = `rgb(${shade},${shade},255)`;
      ctx.fillRect(pad + k * cw, pad / 2 + (bins - 1 - b) * ch, cw + 0.5, ch + 0.5);
    }
  }
  ctx.strokeStyle = "#c0392b";
  ctx.lineWidth = 2;
  ctx.beginPath();
  for (let k = 0; k < phiSteps; k++) {
    const y = pad / 2 + (h - 1.5 * pad) * (0.5 - data[k * stride] / (2 * halfWidth));
    const x = pad + (k + 0.5) * cw;
    k === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
  }
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.fillText(`+${halfWidth}`, 8, pad / 2 + 8);
  ctx.fillText("x 0", 8, h / 2 - 8);
  ctx.fillText(`−${halfWidth}`, 8, h - pad);
  ctx.fillText("0", pad, h - pad / 2 + 4);
  ctx.fillText("2π", w - pad / 2 - 14, h - pad / 2 + 4);
  ctx.fillText("source phase φ (red: mean x)", w / 2 - 60, h - 4);
}

function drawQubit() {
  const [abs, phase] = [Number($("q_abs").value), Number($("q_phase").value)];
  const s = bob_state(abs, phase, ...hardware());
  const [p0, p1, cRe, cIm, pTel, f, target] = s;
  const canvas = $("qubit");
  const ctx = canvas.getContext("2d");
  const [w, h] = [canvas.width, canvas.height];
  const r = w / 2 - 20;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  ctx.arc(w / 2, h / 2, r, 0, 2 * Math.PI);
  ctx.moveTo(w / 2 - r, h / 2);
  ctx.lineTo(w / 2 + r, h / 2);
  ctx.moveTo(w / 2, h / 2 - r);
  ctx.lineTo(w / 2, h / 2 + r);
  ctx.stroke();
  // coherence ρ10 on the disc of radius 1/2, next to the pure target
  const norm = 1 + abs * abs;
  const dot = (re, im, color) => {
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(w / 2 + 2 * r * re, h / 2 - 2 * r * im, 6, 0, 2 * Math.PI);
    ctx.fill();
  };
  dot((abs * Math.cos(phase)) / norm, (abs * Math.sin(phase)) / norm, "#bbb");
  dot(cRe, cIm, "#1f5fbf");
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.fillText("ρ₁₀ (blue) vs target (grey)", 8, h - 4);

  const rows = [
    ["ρ₀₀", p0],
    ["ρ₁₁", p1],
    ["|ρ₁₀|", Math.hypot(cRe, cIm)],
    ["arg ρ₁₀", Math.atan2(cIm, cRe)],
    ["herald probability", pTel],
    ["fidelity to |α⟩", f],
    ["overlap with |0⟩+α|1⟩", target],
  ];
  $("qubit_table").innerHTML = rows.map(([k, v]) => `<tr><td>${k}</td><td>${v.toFixed(4)}</td></tr>`).join("");
}

const pending = new Set();

function schedule(...draws) {
  if (pending.size === 0) {
    requestAnimationFrame(() => {
      const draws = [...pending];
      pending.clear();
      draws.forEach(guarded);
    });
  }
  draws.forEach((d) => pending.add(d));
}

function redrawAll() {
  schedule(drawCurves, drawPhase, drawQubit);
}

function setFitted(values) {
  HARDWARE.forEach((id, i) => {
    $(id).value = values[i];
    showValue($(id));
  });
}

await init();
const fitted = Array.from(fitted_parameters());
setFitted(fitted);
for (const id of HARDWARE) {
  $(id).addEventListener("input", (e) => {
    showValue(e.target);
    redrawAll();
  });
}
for (const [id, draw] of [["alpha", drawPhase], ["q_abs", drawQubit], ["q_phase", drawQubit]]) {
  showValue($(id));
  $(id).addEventListener("input", (e) => {
    showValue(e.target);
    schedule(draw);
  });
}
$("reset").addEventListener("click", () => {
  setFitted(fitted);
  redrawAll();
});
redrawAll();
