import init, { checkIds, familyNames, kroneckerField, scanCheck, rmatrixModuli } from "./pkg/ybx_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const status = (text) => { $("status").textContent = text; };

function fillSelect(select, values) {
  for (const v of values) {
    const opt = document.createElement("option");
    opt.textContent = v;
    select.appendChild(opt);
  }
}

function shade(t) {
  const h = 240 - 240 * Math.min(1, Math.max(0, t));
  return `hsl(${h}, 80%, 45%)`;
}

function drawKronecker() {
  const canvas = $("k-canvas");
  const size = 150;
  const values = kroneckerField($("k-case").value, num("k-tau-re"), num("k-tau-im"),
    num("k-eta-re"), num("k-eta-im"), num("k-width"), size);
  const finite = Array.from(values).filter(Number.isFinite);
  const lo = Math.min(...finite);
  const hi = Math.max(...finite);
  const ctx = canvas.getContext("2d");
  const cell = canvas.width / size;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  values.forEach((v, i) => {
    if (!Number.isFinite(v)) return;
    ctx.fillStyle = shade((v - lo) / (hi - lo || 1));
    ctx.fillRect((i % size) * cell, Math.floor(i / size) * cell, cell, cell);
  });
  status(`log10|φ| ranges over [${lo.toFixed(2)}, ${hi.toFixed(2)}]`);
}

function runScan() {
  const json = scanCheck($("s-check").value, num("s-n"), $("s-case").value,
    num("s-tau-re"), num("s-tau-im"), num("s-seed"), num("s-samples"));
  const rows = JSON.parse(json);
  const out = $("s-out");
  if (rows.length === 0) {
    out.textContent = "This check does not run at the chosen rank and case.";
    return;
  }
  const fmt = (x) => (x === null ? "-" : x.toExponential(2));
  let html = "<table><tr><th>id</th><th>N</th><th>case</th><th>order</th><th>samples</th><th>max</th><th>mean</th><th>tol</th><th>result</th></tr>";
  for (const r of rows) {
    const cls = r.pass ? "pass" : "fail";
    html += `<tr><td>${r.id}</td><td>${r.N}</td><td>${r.case}</td><td>${r.order ?? "-"}</td><td>${r.samples}</td>` +
      `<td>${fmt(r.max_residual)}</td><td>${fmt(r.mean_residual)}</td><td>${r.tolerance.toExponential(0)}</td>` +
      `<td class="${cls}">${r.pass ? "pass" : "FAIL"}</td></tr>`;
  }
  out.innerHTML = html + "</table>";
  status(rows[0].paper_eq);
}

function drawRmatrix() {
  const n = num("r-n");
  const dim = n * n;
  const values = rmatrixModuli($("r-family").value, n, $("r-case").value, 0, 1,
    num("r-h-re"), num("r-h-im"), num("r-z1-re"), num("r-z1-im"), num("r-z2-re"), num("r-z2-im"));
  const logs = Array.from(values, (v) => (v > 0 ? Math.log10(v) : NaN));
  const finite = logs.filter(Number.isFinite);
  const lo = Math.min(...finite);
  const hi = Math.max(...finite);
  const canvas = $("r-canvas");
  const ctx = canvas.getContext("2d");
  const cell = canvas.width / dim;
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  logs.forEach((v, i) => {
    if (!Number.isFinite(v)) return;
    const t = (v - lo) / (hi - lo || 1);
    ctx.fillStyle = `hsl(220, 60%, ${85 - 65 * t}%)`;
    ctx.fillRect((i % dim) * cell, Math.floor(i / dim) * cell, cell - 1, cell - 1);
  });
  status(`${finite.length} nonzero entries of ${dim * dim}`);
}

function guarded(f) {
  return () => {
    try {
      f();
    } catch (e) {
      status(`Error: ${e.message ?? e}`);
    }
  };
}

await init();
fillSelect($("s-check"), checkIds());
fillSelect($("r-family"), familyNames());
$("k-draw").addEventListener("click", guarded(drawKronecker));
$("s-run").addEventListener("click", guarded(runScan));
$("r-draw").addEventListener("click", guarded(drawRmatrix));
guarded(drawKronecker)();
