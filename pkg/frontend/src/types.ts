// Payload shapes of the gateway API. The console renders these
// verbatim; it never recomputes feasibility or objectives locally.

export interface LinkDoc {
  id: number;
  src: number;
  dst: number;
  bandwidth_gbps: number;
  latency_ms: number;
}

export interface DatacenterDoc {
  id: number;
  router: number;
  cpu_capacity_cores: number;
}

export type RouterDoc = number | { id: number; name?: string };

export interface TopologyDoc {
  routers: RouterDoc[];
  links: LinkDoc[];
  datacenters: DatacenterDoc[];
}

export function routerId(r: RouterDoc): number {
  return typeof r === 'number' ? r : r.id;
}

export function routerName(r: RouterDoc): string {
  return typeof r === 'number' ? String(r) : (r.name ?? String(r.id));
}

export interface UserDoc {
  id: number;
  router: number;
  traffic_gbps: number;
}

export interface MarkerDoc {
  cpu: -1 | 0 | 1;
  latency_bound: -1 | 0 | 1;
}

export interface DiagnosticsDoc {
  extractor: string;
  elapsed: number;
  syntax_error: boolean;
  unavailable: boolean;
  [key: string]: unknown;
}

export interface PromptRecordDoc {
  user: number;
  text: string;
  marker: MarkerDoc;
  accepted: boolean;
  diagnostics: DiagnosticsDoc;
}

export interface AllocationDoc {
  placement: Record<string, number>; // user id -> datacenter id
  routes: Record<string, number[]>; // user id -> directed link ids
}

export interface MeasurementDoc {
  cpu: Record<string, number>;
  latency: Record<string, number>;
}

export interface StepResultDoc {
  step: number;
  prompts: PromptRecordDoc[];
  params_before: Record<string, [number, number]>; // [cpu, latency bound]
  params_after: Record<string, [number, number]>;
  status: 'Optimal' | 'Infeasible';
  allocation: AllocationDoc | null;
  measurement: MeasurementDoc | null;
  objective: number | null;
  terms: number[] | null;
}

export interface CreateSessionResponse {
  session_id: string;
  standing: StepResultDoc;
}

export interface StateDoc {
  session_id: string;
  k: number;
  params: Record<string, [number, number]>;
  allocation: AllocationDoc | null;
  measurement: MeasurementDoc | null;
  standing: StepResultDoc;
  history: StepResultDoc[];
  pending: { user: number; text: string }[];
  users: UserDoc[];
}

export interface InterpretResponse {
  marker: MarkerDoc;
  diagnostics: DiagnosticsDoc;
}
