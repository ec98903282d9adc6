import type {
  StateDoc,
  StepResultDoc,
  TopologyDoc,
  UserDoc,
} from './types';

export interface TimelinePoint {
  step: number;
  cpuParam: number;
  latencyBound: number;
  actualCpu: number | null;
  actualLatency: number | null;
}

export interface PlacementMove {
  user: number;
  from: number;
  to: number;
}

/**
 * Client-side view of one session. Results are keyed by chat step k
 * with last-write-wins semantics, so a stale poll response can never
 * clobber a newer step and a re-fetch of the same step is idempotent.
 */
export class ViewState {
  sessionId: string | null = null;

  topology: TopologyDoc | null = null;

  users: UserDoc[] = [];

  private results = new Map<number, StepResultDoc>();

  applyResult(result: StepResultDoc): void {
    this.results.set(result.step, result);
  }

  applyState(state: StateDoc): void {
    this.sessionId = state.session_id;
    this.users = state.users;
    this.applyResult(state.standing);
    for (const r of state.history) this.applyResult(r);
  }

  ordered(): StepResultDoc[] {
    return [...this.results.values()].sort((a, b) => a.step - b.step);
  }

  latest(): StepResultDoc | null {
    const all = this.ordered();
    return all.length > 0 ? all[all.length - 1] : null;
  }

  get(step: number): StepResultDoc | undefined {
    return this.results.get(step);
  }

  /** Per-user series across steps for the timeline charts. */
  seriesFor(userId: number): TimelinePoint[] {
    const key = String(userId);
    return this.ordered()
      .filter((r) => key in r.params_after)
      .map((r) => ({
        step: r.step,
        cpuParam: r.params_after[key][0],
        latencyBound: r.params_after[key][1],
        actualCpu: r.measurement ? (r.measurement.cpu[key] ?? null) : null,
        actualLatency: r.measurement
          ? (r.measurement.latency[key] ?? null)
          : null,
      }));
  }

  /**
   * VM moves between the two most recent results that carry an
   * allocation (an infeasible step keeps the previous allocation, so
   * it never reports a move).
   */
  placementMoves(): PlacementMove[] {
    const withAlloc = this.ordered().filter((r) => r.allocation !== null);
    if (withAlloc.length < 2) return [];
    const prev = withAlloc[withAlloc.length - 2].allocation!;
    const curr = withAlloc[withAlloc.length - 1].allocation!;
    const moves: PlacementMove[] = [];
    for (const [user, to] of Object.entries(curr.placement)) {
      const from = prev.placement[user];
      if (from !== undefined && from !== to) {
        moves.push({ user: Number(user), from, to });
      }
    }
    return moves.sort((a, b) => a.user - b.user);
  }
}
