import init, { access_map, ratio_table, erasure_demo } from "./pkg/zigzag_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function el(tag, attrs = {}, ...children) {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  for (const c of children) node.append(c);
  return node;
}

function fraction(f) {
  return `${f.num}/${f.den} (${f.approx.toFixed(3)})`;
}

function show(target, build) {
  const out = $(target);
  out.replaceChildren();
  try {
    build(out);
  } catch (e) {
    out.append(el("p", { class: "error" }, String(e.message ?? e)));
  }
}

function renderAccessMap() {
  show("am-out", (out) => {
    const map = JSON.parse(access_map(num("am-m"), num("am-r"), num("am-s"), num("am-node")));
    out.append(el("p", {}, `${map.code}: reads ${map.cells_read} cells, ratio ${fraction(map.ratio)}`));
    const table = el("table");
    const head = el("tr", {}, el("th", {}, "row"));
    for (const n of map.nodes) head.append(el("th", {}, n.label));
    table.append(head);
    for (let x = 0; x < map.rows; x++) {
      const tr = el("tr", {}, el("th", {}, map.row_labels[x]));
      map.nodes.forEach((n, i) => {
        const cls = i === map.erased ? "lost" : n.read[x] ? "read" : "";
        tr.append(el("td", { class: cls }, i === map.erased ? "?" : n.read[x] ? "read" : ""));
      });
      table.append(tr);
    }
    out.append(table);
  });
}

function renderRatios() {
  show("rt-out", (out) => {
    const rows = JSON.parse(ratio_table(num("rt-m"), num("rt-r"), num("rt-s")));
    const table = el("table");
    table.append(el("tr", {}, ...["m", "k", "field", "predicted", "measured", "lower bound"].map((h) => el("th", {}, h))));
    for (const r of rows) {
      const pred = fraction(r.predicted) + (r.bound ? " (bound)" : "");
      const meas = r.measured ? fraction(r.measured) : "not run";
      table.append(el("tr", {}, ...[r.m, r.k, r.field, pred, meas, fraction(r.lower_bound)].map((c) => el("td", {}, String(c)))));
    }
    out.append(table);
  });
}

function renderErasure() {
  show("ed-out", (out) => {
    const lost = $("ed-lost").value.split(",").map((s) => s.trim()).filter(Boolean).map(Number);
    const demo = JSON.parse(erasure_demo(num("ed-m"), num("ed-r"), 1, $("ed-text").value, lost));
    out.append(el("p", {}, `${demo.code}. Symbols are byte values reduced into ${demo.field}.`));
    const grid = (title, cols, mark) => {
      const table = el("table");
      table.append(el("tr", {}, el("th", {}, title), ...cols.map((_, i) => el("th", {}, `node ${i}`))));
      for (let x = 0; x < cols[0].length; x++) {
        table.append(el("tr", {}, el("th", {}, x), ...cols.map((c, i) => el("td", { class: mark(i) }, String(c[x])))));
      }
      return table;
    };
    const lostSet = new Set(demo.erased);
    out.append(grid("after loss", demo.original.map((c, i) => (lostSet.has(i) ? c.map(() => "-") : c)), (i) => (lostSet.has(i) ? "gone" : "")));
    if (demo.restored) {
      out.append(grid("restored", demo.restored, (i) => (lostSet.has(i) ? "read" : "")));
      out.append(el("p", {}, demo.matches ? "Restored stripe matches the original." : "Mismatch."));
    } else {
      out.append(el("p", { class: "error" }, demo.error));
    }
  });
}

await init();
for (const id of ["am-m", "am-r", "am-s", "am-node"]) $(id).addEventListener("input", renderAccessMap);
for (const id of ["rt-r", "rt-s", "rt-m"]) $(id).addEventListener("input", renderRatios);
for (const id of ["ed-m", "ed-r", "ed-text", "ed-lost"]) $(id).addEventListener("input", renderErasure);
renderAccessMap();
renderRatios();
renderErasure();
