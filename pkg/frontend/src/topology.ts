import type { Point } from './layout';
import type { PlacementMove } from './state';
import {
  routerId,
  routerName,
  type StepResultDoc,
  type TopologyDoc,
} from './types';

const WIDTH = 640;
const HEIGHT = 440;
const USER_COLORS = [
  '#1b6ca8',
  '#c2571a',
  '#2a7d4f',
  '#8d3fa8',
  '#a83f55',
  '#5a6b1b',
];

export function userColor(index: number): string {
  return USER_COLORS[index % USER_COLORS.length];
}

const SVG_NS = 'http://www.w3.org/2000/svg';

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, String(v));
  return el;
}

function px(p: Point): { x: number; y: number } {
  return { x: p.x * WIDTH, y: p.y * HEIGHT };
}

/**
 * Render the topology for one step: links in gray, each user's route
 * highlighted in its color, datacenter routers as squares, VM badges at
 * their placement (with a `vm-moved` class when the VM just moved), and
 * an infeasible banner when the step retained the previous allocation.
 */
export function renderTopology(
  container: HTMLElement,
  topology: TopologyDoc,
  result: StepResultDoc,
  positions: Map<number, Point>,
  moves: PlacementMove[] = [],
): void {
  container.textContent = '';

  if (result.status !== 'Optimal') {
    const banner = document.createElement('div');
    banner.className = 'banner banner-infeasible';
    banner.textContent =
      'infeasible request — previous allocation retained';
    container.appendChild(banner);
  }

  const svg = svgEl('svg', {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: WIDTH,
    height: HEIGHT,
    role: 'img',
  });
  svg.classList.add('topology');

  const linkById = new Map(topology.links.map((l) => [l.id, l]));
  const dcByRouter = new Map(topology.datacenters.map((d) => [d.router, d]));
  const dcById = new Map(topology.datacenters.map((d) => [d.id, d]));

  // Base links (one line per undirected pair).
  const drawn = new Set<string>();
  for (const l of topology.links) {
    const key = l.src < l.dst ? `${l.src}:${l.dst}` : `${l.dst}:${l.src}`;
    if (drawn.has(key)) continue;
    drawn.add(key);
    const a = px(positions.get(l.src)!);
    const b = px(positions.get(l.dst)!);
    svg.appendChild(
      svgEl('line', {
        x1: a.x,
        y1: a.y,
        x2: b.x,
        y2: b.y,
        class: 'link',
        stroke: '#c8c8c8',
        'stroke-width': 1.5,
      }),
    );
  }

  // Route highlights.
  if (result.allocation) {
    const userIds = Object.keys(result.allocation.routes).sort(
      (a, b) => Number(a) - Number(b),
    );
    userIds.forEach((user, index) => {
      const route = result.allocation!.routes[user];
      const color = userColor(index);
      for (const linkId of route) {
        const l = linkById.get(linkId);
        if (!l) continue;
        const a = px(positions.get(l.src)!);
        const b = px(positions.get(l.dst)!);
        const line = svgEl('line', {
          x1: a.x,
          y1: a.y,
          x2: b.x,
          y2: b.y,
          class: `route route-user-${user}`,
          stroke: color,
          'stroke-width': 3.5,
          'stroke-opacity': 0.85,
        });
        svg.appendChild(line);
      }
      if (route.length === 0) {
        // VM co-located with the user's router: highlight the node only.
        const dc = dcById.get(result.allocation!.placement[user]);
        if (dc) {
          const p = px(positions.get(dc.router)!);
          svg.appendChild(
            svgEl('circle', {
              cx: p.x,
              cy: p.y,
              r: 16,
              class: `route-colocated route-user-${user}`,
              fill: 'none',
              stroke: color,
              'stroke-width': 2.5,
            }),
          );
        }
      }
    });
  }

  // Routers and datacenters.
  const routers = [...topology.routers].sort(
    (a, b) => routerId(a) - routerId(b),
  );
  for (const router of routers) {
    const r = routerId(router);
    const p = px(positions.get(r)!);
    const dc = dcByRouter.get(r);
    if (dc) {
      svg.appendChild(
        svgEl('rect', {
          x: p.x - 11,
          y: p.y - 11,
          width: 22,
          height: 22,
          class: 'node datacenter',
          'data-dc': dc.id,
          fill: '#e8903a',
          stroke: '#7a4a14',
        }),
      );
    } else {
      svg.appendChild(
        svgEl('circle', {
          cx: p.x,
          cy: p.y,
          r: 9,
          class: 'node router',
          fill: '#8a86c9',
          stroke: '#44406e',
        }),
      );
    }
    const label = svgEl('text', {
      x: p.x,
      y: p.y - 15,
      class: 'node-label',
      'text-anchor': 'middle',
      'font-size': 10,
    });
    label.textContent = dc
      ? `${routerName(router)} / DC${dc.id}`
      : routerName(router);
    svg.appendChild(label);
  }

  // VM badges at their placement.
  if (result.allocation) {
    const movedUsers = new Set(moves.map((m) => String(m.user)));
    const byDc = new Map<number, string[]>();
    for (const [user, dcId] of Object.entries(result.allocation.placement)) {
      const list = byDc.get(dcId) ?? [];
      list.push(user);
      byDc.set(dcId, list);
    }
    for (const [dcId, users] of byDc) {
      const dc = dcById.get(dcId);
      if (!dc) continue;
      const p = px(positions.get(dc.router)!);
      users
        .sort((a, b) => Number(a) - Number(b))
        .forEach((user, slot) => {
          const moved = movedUsers.has(user);
          const badge = svgEl('circle', {
            cx: p.x + 14 + slot * 14,
            cy: p.y + 14,
            r: 6,
            class: moved ? 'vm vm-moved' : 'vm',
            'data-user': user,
            fill: '#ffffff',
            stroke: '#222222',
          });
          if (moved) {
            badge.appendChild(
              svgEl('animate', {
                attributeName: 'r',
                values: '6;10;6',
                dur: '0.8s',
                repeatCount: 3,
              }),
            );
          }
          svg.appendChild(badge);
          const tag = svgEl('text', {
            x: p.x + 14 + slot * 14,
            y: p.y + 17,
            'text-anchor': 'middle',
            'font-size': 8,
            class: 'vm-label',
          });
          tag.textContent = user;
          svg.appendChild(tag);
        });
    }
  }

  container.appendChild(svg);
}
