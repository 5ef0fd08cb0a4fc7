import init, { spectrum, classify, cz } from "./pkg/reeb_spectra_web.js";

const $ = (id) => document.getElementById(id);

function show(id, f) {
  try {
    $(id).innerHTML = f();
  } catch (e) {
    $(id).innerHTML = `<p class="err">${e.message ?? e}</p>`;
  }
}

function table(head, rows) {
  const th = head.map((h) => `<th>${h}</th>`).join("");
  const tr = rows.map((r) => `<tr>${r.map((c) => `<td>${c}</td>`).join("")}</tr>`).join("");
  return `<table><tr>${th}</tr>${tr}</table>`;
}

function num(v) {
  if (typeof v === "number") return v;
  const [p, q] = String(v).split("/");
  return q === undefined ? Number(p) : Number(p) / Number(q);
}

function plot(values, hits) {
  const c = $("cl-plot");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  if (!values.length) return;
  const ys = values.map(num);
  const top = Math.max(...ys) * 1.05;
  const dx = (c.width - 40) / values.length;
  const y = (v) => c.height - 20 - (v / top) * (c.height - 30);
  g.strokeStyle = "#999";
  g.beginPath();
  g.moveTo(30, c.height - 20);
  g.lineTo(c.width, c.height - 20);
  g.stroke();
  const hit = new Set(hits.map((h) => h.i));
  ys.forEach((v, i) => {
    g.fillStyle = hit.has(i) ? "#c30" : "#246";
    g.fillRect(30 + i * dx, y(v) - 2, Math.max(dx - 2, 2), 4);
  });
}

await init();

$("sp-go").onclick = () =>
  show("sp-out", () => {
    const r = JSON.parse(spectrum($("sp-a").value, $("sp-max").value));
    const rows = r.spectrum.entries.map((e) => [e.tau, e.multiplicity, e.morse_index, e.nullity, e.cz_index]);
    const warn = r.spectrum.warnings.map((w) => `<p class="err">${w}</p>`).join("");
    return table(["τ", "multiplicity", "Morse", "nullity", "CZ"], rows) + warn;
  });

$("cl-go").onclick = () =>
  show("cl-out", () => {
    const r = JSON.parse(classify($("cl-a").value, Number($("cl-n").value)));
    plot(r.invariants, r.hits);
    const verdict = `<p><b>${r.verdict}</b>${r.tau0 ? `, common period ${r.tau0}` : ""}${r.heuristic ? " (heuristic)" : ""}</p>`;
    const hits = r.hits.length
      ? table(["i", "τ = c_i = c_{i+n−1}", "μ"], r.hits.map((h) => [h.i, h.tau, h.mu]))
      : "<p>no equality c_i = c_{i+n−1} in range</p>";
    return verdict + `<p>c = ${r.invariants.join(", ")}</p>` + hits;
  });

$("cz-go").onclick = () =>
  show("cz-out", () => {
    const r = JSON.parse(cz($("cz-r").value, Number($("cz-t").value)));
    return `<p>μ_CZ = <b>${r.cz_index}</b></p>`;
  });
