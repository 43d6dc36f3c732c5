import init, { evaluate_rule, simulate, evolve_rules } from "./pkg/dfjss_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(id, fn) {
  const out = $(id);
  out.classList.remove("err");
  try {
    const result = JSON.parse(fn());
    out.textContent = JSON.stringify(result, null, 2);
    return result;
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e);
    return null;
  }
}

function drawGantt(res) {
  const canvas = $("gantt");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!res || res.bars.length === 0) return;
  const t0 = Math.min(...res.bars.map((b) => b.start));
  const t1 = Math.max(...res.bars.map((b) => b.end));
  const left = 40;
  const rowH = (canvas.height - 20) / res.machines;
  const x = (t) => left + ((t - t0) / (t1 - t0 || 1)) * (canvas.width - left - 10);
  ctx.font = "11px sans-serif";
  for (let m = 0; m < res.machines; m++) {
    ctx.fillStyle = "#444";
    ctx.fillText("M" + m, 4, 14 + m * rowH + rowH / 2);
  }
  for (const b of res.bars) {
    ctx.fillStyle = `hsl(${(b.job * 47) % 360} 60% 60%)`;
    ctx.fillRect(x(b.start), 10 + b.machine * rowH, Math.max(1, x(b.end) - x(b.start)), rowH - 3);
  }
  ctx.fillStyle = "#444";
  ctx.fillText(t0.toFixed(0), left, canvas.height - 2);
  ctx.fillText(t1.toFixed(0), canvas.width - 50, canvas.height - 2);
}

await init();

$("eval-btn").onclick = () => show("eval-out", () => evaluate_rule($("expr").value, $("ctx").value));

$("sim-btn").onclick = () => {
  const res = show("sim-out", () =>
    simulate($("routing").value, $("sequencing").value, num("sim-jobs"), num("sim-util"), num("sim-seed"), 120),
  );
  if (res) {
    const { bars, ...summary } = res;
    $("sim-out").textContent = JSON.stringify(summary, null, 2);
  }
  drawGantt(res);
};

$("evo-btn").onclick = () => {
  $("evo-out").textContent = "running...";
  setTimeout(() => {
    const res = show("evo-out", () => evolve_rules(num("evo-pop"), num("evo-gen"), num("evo-jobs"), num("evo-seed")));
    if (res) {
      $("sequencing").value = res.sequencing;
      $("routing").value = res.routing;
    }
  }, 0);
};
