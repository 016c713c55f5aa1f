import init, { stateBound, channelBound, covpauliSweep } from './pkg/sqz_wasm.js';

const TOL = 1e-8;
const $ = (id) => document.getElementById(id);

function show(el, fn) {
  el.classList.remove('err');
  try {
    el.textContent = fn();
  } catch (e) {
    el.classList.add('err');
    el.textContent = String(e.message ?? e);
  }
}

// CSV rows to a table with one column per bound.
function sweepTable(csv) {
  const rows = csv.trim().split('\n').slice(1).map((l) => l.split(','));
  const bounds = [...new Set(rows.map((r) => r[3]))];
  const byP = new Map();
  for (const r of rows) {
    if (!byP.has(r[2])) byP.set(r[2], {});
    byP.get(r[2])[r[3]] = r[4] === '' ? 'n/a' : Number(r[4]).toFixed(6);
  }
  const head = `<tr><th>p0</th>${bounds.map((b) => `<th>${b}</th>`).join('')}</tr>`;
  const body = [...byP].map(([p, v]) =>
    `<tr><td>${Number(p).toFixed(4)}</td>${bounds.map((b) => `<td>${v[b] ?? ''}</td>`).join('')}</tr>`);
  return `<table>${head}${body.join('')}</table>`;
}

await init();

$('run-state').onclick = () =>
  show($('state-out'), () => stateBound($('state').value, $('state-bound').value, TOL));
$('run-channel').onclick = () =>
  show($('channel-out'), () => channelBound($('channel').value, $('channel-bound').value, TOL));
$('run-sweep').onclick = () => {
  const out = $('sweep-out');
  try {
    out.innerHTML = sweepTable(covpauliSweep(Number($('lo').value), Number($('hi').value), Number($('steps').value)));
  } catch (e) {
    out.innerHTML = `<p class="err">${String(e.message ?? e)}</p>`;
  }
};
