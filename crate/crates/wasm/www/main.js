import init, { windowPlan, score, troughs } from "./pkg/topicseg_wasm.js";

const SAMPLE = [
  "Honey bees live in a hive with one queen. The queen lays eggs in the hive while worker bees gather nectar.",
  "Worker bees turn nectar into honey inside the hive. A beekeeper takes honey from the hive in late summer.",
  "Steam trains ran on iron rails between the towns. The trains carried coal and the rails reached every port.",
  "Signal boxes kept the trains apart on busy rails. Later diesel trains replaced steam on most rails.",
  "Bread dough needs flour, water and yeast. The yeast makes the bread dough rise in a warm kitchen.",
  "Knead the bread dough well before it rises. Bake the bread until the crust of the dough is brown.",
].join(" ");

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function guard(out, f) {
  try {
    f();
  } catch (e) {
    out.innerHTML = `<p class="error">${escape(String(e.message ?? e))}</p>`;
  }
}

function escape(s) {
  return s.replace(/[&<>"]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;" })[c]);
}

function planWindows() {
  const out = $("win-out");
  guard(out, () => {
    const plan = JSON.parse(windowPlan($("win-text").value, num("win-budget"), num("win-overlap")));
    const rows = plan.windows
      .map((w, i) => `<tr><td>${i + 1}</td><td>${w.first_sentence}-${w.last_sentence}</td>` +
        `<td>[${w.tokens[0]}, ${w.tokens[1]})</td><td>[${w.accept[0]}, ${w.accept[1]})</td></tr>`)
      .join("");
    out.innerHTML =
      `<p>${plan.sentences.length} sentences, ${plan.total_tokens} estimated tokens</p>` +
      `<table><tr><th>window</th><th>sentences</th><th>tokens</th><th>accept zone</th></tr>${rows}</table>` +
      plan.windows.map((w, i) => `<h4>window ${i + 1}</h4><pre>${escape(w.enumerated)}</pre>`).join("");
  });
}

function runScore() {
  const out = $("sc-out");
  guard(out, () => {
    const r = JSON.parse(score(num("sc-s"), $("sc-hyp").value, $("sc-ref").value, num("sc-n")));
    const f = (v) => (v === null ? "-" : v.toFixed(4));
    const pairs = r.pairs.map((p) => `${p.hyp}~${p.reference} (d=${p.distance})`).join(", ") || "none";
    out.innerHTML =
      `<table><tr><th>B</th><th>BP</th><th>BR</th><th>Pk</th><th>WD</th></tr>` +
      `<tr><td>${f(r.b)}</td><td>${f(r.bp)}</td><td>${f(r.br)}</td><td>${f(r.pk)}</td><td>${f(r.wd)}</td></tr></table>` +
      `<p>pairs: ${pairs}<br>unmatched hypothesis: ${r.unmatched_hyp.join(", ") || "none"}` +
      `<br>unmatched reference: ${r.unmatched_ref.join(", ") || "none"}</p>`;
  });
}

function seriesSvg(values, threshold, boundaries) {
  const w = 720, h = 200, pad = 24;
  const lo = Math.min(0, threshold, ...values), hi = Math.max(1, threshold, ...values);
  const x = (i) => pad + (values.length > 1 ? (i - 1) / (values.length - 1) : 0.5) * (w - 2 * pad);
  const y = (v) => h - pad - ((v - lo) / (hi - lo)) * (h - 2 * pad);
  const pts = values.map((v, i) => `${x(i + 1).toFixed(1)},${y(v).toFixed(1)}`).join(" ");
  const marks = boundaries
    .map((b) => `<line x1="${x(b)}" x2="${x(b)}" y1="${pad}" y2="${h - pad}" stroke="#b8444a"/>`)
    .join("");
  return `<svg width="${w}" height="${h}" style="background:#fff">${marks}` +
    `<line x1="${pad}" x2="${w - pad}" y1="${y(threshold)}" y2="${y(threshold)}" stroke="#888" stroke-dasharray="5,4"/>` +
    `<polyline fill="none" stroke="#3b6ea5" stroke-width="1.5" points="${pts}"/></svg>`;
}

function runTroughs() {
  const out = $("tr-out");
  guard(out, () => {
    const threshold = num("tr-threshold");
    const r = JSON.parse(troughs($("tr-text").value, threshold, num("tr-window")));
    const cuts = new Set(r.boundaries);
    const text = r.sentences
      .map((s, i) => `<span class="sentence${cuts.has(i + 1) ? " cut" : ""}">${escape(s)}</span>`)
      .join(" ");
    out.innerHTML =
      (r.values.length ? seriesSvg(r.values, threshold, r.boundaries) : "") +
      `<p>boundaries: ${r.boundaries.join(", ") || "none"}</p><p>${text}</p>`;
  });
}

await init();
$("win-text").value = SAMPLE;
$("tr-text").value = SAMPLE;
$("win-run").onclick = planWindows;
$("sc-run").onclick = runScore;
$("tr-run").onclick = runTroughs;
planWindows();
runScore();
runTroughs();
