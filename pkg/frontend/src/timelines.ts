import type { TimelinePoint } from './state';
import { userColor } from './topology';

const WIDTH = 320;
const HEIGHT = 160;
const PAD = 28;

const SVG_NS = 'http://www.w3.org/2000/svg';

interface Series {
  label: string;
  color: string;
  dashed: boolean;
  points: { step: number; value: number | null }[];
}

function drawChart(title: string, series: Series[]): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('viewBox', `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute('width', String(WIDTH));
  svg.setAttribute('height', String(HEIGHT));
  svg.classList.add('timeline');

  const caption = document.createElementNS(SVG_NS, 'text');
  caption.setAttribute('x', String(WIDTH / 2));
  caption.setAttribute('y', '12');
  caption.setAttribute('text-anchor', 'middle');
  caption.setAttribute('font-size', '11');
  caption.textContent = title;
  svg.appendChild(caption);

  const steps = series.flatMap((s) => s.points.map((p) => p.step));
  const values = series.flatMap((s) =>
    s.points.map((p) => p.value).filter((v): v is number => v !== null),
  );
  if (steps.length === 0 || values.length === 0) {
    const empty = document.createElementNS(SVG_NS, 'text');
    empty.setAttribute('x', String(WIDTH / 2));
    empty.setAttribute('y', String(HEIGHT / 2));
    empty.setAttribute('text-anchor', 'middle');
    empty.setAttribute('class', 'empty-chart');
    empty.textContent = 'no steps yet';
    svg.appendChild(empty);
    return svg;
  }

  const minStep = Math.min(...steps);
  const maxStep = Math.max(...steps);
  const maxVal = Math.max(...values, 1e-9);
  const sx = (k: number) =>
    maxStep === minStep
      ? WIDTH / 2
      : PAD + ((k - minStep) / (maxStep - minStep)) * (WIDTH - 2 * PAD);
  const sy = (v: number) => HEIGHT - PAD - (v / maxVal) * (HEIGHT - 2 * PAD);

  for (const s of series) {
    const visible = s.points.filter((p) => p.value !== null);
    if (visible.length > 0) {
      const poly = document.createElementNS(SVG_NS, 'polyline');
      poly.setAttribute(
        'points',
        visible.map((p) => `${sx(p.step)},${sy(p.value!)}`).join(' '),
      );
      poly.setAttribute('fill', 'none');
      poly.setAttribute('stroke', s.color);
      poly.setAttribute('stroke-width', '2');
      if (s.dashed) poly.setAttribute('stroke-dasharray', '5,3');
      poly.setAttribute('class', 'series');
      poly.setAttribute('data-label', s.label);
      svg.appendChild(poly);
    }
    for (const p of visible) {
      const dot = document.createElementNS(SVG_NS, 'circle');
      dot.setAttribute('cx', String(sx(p.step)));
      dot.setAttribute('cy', String(sy(p.value!)));
      dot.setAttribute('r', '2.5');
      dot.setAttribute('fill', s.color);
      dot.setAttribute('data-label', s.label);
      dot.setAttribute('data-step', String(p.step));
      dot.setAttribute('data-value', String(p.value));
      svg.appendChild(dot);
    }
  }
  return svg;
}

/**
 * Two charts per user: latency bound vs measured latency, and CPU
 * parameter vs measured CPU, across chat steps. Steps without a
 * measurement (infeasible) leave gaps in the "actual" series.
 */
export function renderTimelines(
  container: HTMLElement,
  seriesByUser: Map<number, TimelinePoint[]>,
): void {
  container.textContent = '';
  const userIds = [...seriesByUser.keys()].sort((a, b) => a - b);
  userIds.forEach((userId, index) => {
    const points = seriesByUser.get(userId)!;
    const color = userColor(index);
    const block = document.createElement('div');
    block.className = 'timeline-user';
    block.dataset.user = String(userId);

    const heading = document.createElement('h3');
    heading.textContent = `user ${userId}`;
    block.appendChild(heading);

    block.appendChild(
      drawChart(`latency bound vs actual [ms]`, [
        {
          label: 'bound',
          color,
          dashed: false,
          points: points.map((p) => ({ step: p.step, value: p.latencyBound })),
        },
        {
          label: 'actual-latency',
          color: '#555555',
          dashed: true,
          points: points.map((p) => ({ step: p.step, value: p.actualLatency })),
        },
      ]),
    );
    block.appendChild(
      drawChart(`cpu parameter vs actual [cores]`, [
        {
          label: 'cpu-param',
          color,
          dashed: false,
          points: points.map((p) => ({ step: p.step, value: p.cpuParam })),
        },
        {
          label: 'actual-cpu',
          color: '#555555',
          dashed: true,
          points: points.map((p) => ({ step: p.step, value: p.actualCpu })),
        },
      ]),
    );
    container.appendChild(block);
  });
  if (userIds.length === 0) {
    const empty = document.createElement('p');
    empty.className = 'empty-chart';
    empty.textContent = 'no steps yet';
    container.appendChild(empty);
  }
}
