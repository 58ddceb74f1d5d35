// Expects the wasm-bindgen output (--target web) in ./pkg.
import init, { gbt_basis, pse_curve, texture_names, codec_demo } from "./pkg/pathgbt_wasm.js";

const $ = (id) => document.getElementById(id);
const SIZES = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 4096, 10000];

function fail(where, e) {
  $("status").textContent = `${where}: ${e.message ?? e}`;
  $("status").className = "err";
}

// Basis panel

const weights = [0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1.0];

function buildWeightSliders() {
  const box = $("weights");
  weights.forEach((w, i) => {
    const label = document.createElement("label");
    const input = Object.assign(document.createElement("input"), {
      type: "range", min: "0.01", max: "2", step: "0.01", value: String(w),
    });
    const value = Object.assign(document.createElement("span"), { className: "num", textContent: w.toFixed(2) });
    input.addEventListener("input", () => {
      weights[i] = Number(input.value);
      value.textContent = weights[i].toFixed(2);
      drawBasis();
    });
    label.append(`w${i}–${i + 1} `, input, " ", value);
    box.append(label);
  });
}

function drawBasis() {
  let basis;
  try {
    basis = gbt_basis(new Float64Array(weights));
  } catch (e) {
    return fail("basis", e);
  }
  const n = basis.n;
  const m = basis.matrix();
  const canvas = $("basis");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const cellW = canvas.width / 4;
  const cellH = canvas.height / 2;
  for (let k = 0; k < n; k++) {
    const x0 = (k % 4) * cellW;
    const y0 = Math.floor(k / 4) * cellH;
    const mid = y0 + cellH / 2;
    ctx.strokeStyle = "#ddd";
    ctx.beginPath();
    ctx.moveTo(x0 + 8, mid);
    ctx.lineTo(x0 + cellW - 8, mid);
    ctx.stroke();
    ctx.fillStyle = "#c33";
    const step = (cellW - 16) / n;
    for (let j = 0; j < n; j++) {
      const v = m[j * n + k];
      const h = v * (cellH / 2 - 14);
      ctx.fillRect(x0 + 8 + j * step + 2, Math.min(mid, mid - h), step - 4, Math.abs(h));
    }
    ctx.fillStyle = "#222";
    ctx.fillText(`u${k}`, x0 + 10, y0 + 12);
  }
  $("eigs").textContent = Array.from(basis.eigenvalues(), (v) => v.toFixed(3)).join("  ");
  basis.free();
}

// PSE panel

function drawPse(rows) {
  const canvas = $("pse");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pad = 40;
  const pts = [];
  for (let i = 0; i < rows.length; i += 4) pts.push(rows.slice(i, i + 4));
  const values = pts.flatMap((p) => [p[1], p[2], p[3]]);
  const lo = Math.min(...values) * 0.98;
  const hi = Math.max(...values) * 1.02;
  const lx = (n) => pad + (Math.log10(n) / Math.log10(SIZES.at(-1))) * (canvas.width - 2 * pad);
  const ly = (v) => canvas.height - pad - ((v - lo) / (hi - lo)) * (canvas.height - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, canvas.width - 2 * pad, canvas.height - 2 * pad);
  ctx.fillStyle = "#222";
  ctx.fillText(hi.toFixed(3), 2, pad + 4);
  ctx.fillText(lo.toFixed(3), 2, canvas.height - pad);
  for (const n of [1, 10, 100, 1000, 10000]) ctx.fillText(String(n), lx(n) - 8, canvas.height - pad + 14);
  [[1, "#555"], [2, "#c33"], [3, "#36c"]].forEach(([col, color]) => {
    ctx.strokeStyle = color;
    ctx.beginPath();
    pts.forEach((p, i) => (i ? ctx.lineTo(lx(p[0]), ly(p[col])) : ctx.moveTo(lx(p[0]), ly(p[col]))));
    ctx.stroke();
  });
}

function runPse() {
  try {
    const rows = pse_curve(
      $("model").value === "nonuniform",
      new Uint32Array(SIZES),
      Number($("trials").value),
      Number($("seed").value),
    );
    drawPse(rows);
  } catch (e) {
    fail("pse", e);
  }
}

// Codec panel

function paintGray(canvas, pixels, size) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(size, size);
  for (let i = 0; i < pixels.length; i++) {
    img.data.set([pixels[i], pixels[i], pixels[i], 255], 4 * i);
  }
  canvas.width = size;
  canvas.height = size;
  ctx.putImageData(img, 0, 0);
  return ctx;
}

function runCodec() {
  let demo;
  try {
    demo = codec_demo(Number($("texture").value), 320, Number($("qp").value), $("set").value);
  } catch (e) {
    return fail("codec", e);
  }
  const size = demo.size;
  paintGray($("orig"), demo.original(), size);
  const ctx = paintGray($("recon"), demo.recon(), size);
  if ($("overlay").checked) {
    const n = demo.block_size;
    const perRow = size / n;
    demo.block_map().forEach((code, i) => {
      if (code === 0) return;
      ctx.strokeStyle = code === 2 ? "rgba(204,51,51,.9)" : "rgba(51,102,204,.6)";
      ctx.strokeRect((i % perRow) * n + 0.5, Math.floor(i / perRow) * n + 0.5, n - 1, n - 1);
    });
  }
  $("codec-stats").textContent =
    `${demo.bpp.toFixed(3)} bpp, PSNR ${demo.psnr.toFixed(2)} dB, alternative on ${demo.usage_percent.toFixed(1)}% of candidates`;
  demo.free();
}

async function main() {
  try {
    await init();
  } catch (e) {
    return fail("loading pkg/pathgbt_wasm.js", e);
  }
  $("status").textContent = "";
  buildWeightSliders();
  drawBasis();
  texture_names().forEach((name, i) => $("texture").append(new Option(name, String(i))));
  $("qp").addEventListener("input", () => ($("qp-val").textContent = $("qp").value));
  $("run-pse").addEventListener("click", runPse);
  $("run-codec").addEventListener("click", runCodec);
  runPse();
  runCodec();
}

main();
