import type {
  DiagnosticsDoc,
  PromptRecordDoc,
  StepResultDoc,
  TopologyDoc,
  UserDoc,
} from '../src/types';

export const TOPOLOGY: TopologyDoc = {
  routers: [1, 2, 3, 4],
  links: [
    { id: 1, src: 3, dst: 2, bandwidth_gbps: 1.0, latency_ms: 1.0 },
    { id: 2, src: 2, dst: 3, bandwidth_gbps: 1.0, latency_ms: 1.0 },
    { id: 3, src: 2, dst: 4, bandwidth_gbps: 1.0, latency_ms: 1.0 },
    { id: 4, src: 4, dst: 2, bandwidth_gbps: 1.0, latency_ms: 1.0 },
  ],
  datacenters: [
    { id: 1, router: 2, cpu_capacity_cores: 1.5 },
    { id: 2, router: 4, cpu_capacity_cores: 6.0 },
  ],
};

export const USERS: UserDoc[] = [{ id: 1, router: 3, traffic_gbps: 0.5 }];

export function diag(overrides: Partial<DiagnosticsDoc> = {}): DiagnosticsDoc {
  return {
    extractor: 'keyword',
    elapsed: 0.001,
    syntax_error: false,
    unavailable: false,
    ...overrides,
  };
}

export function prompt(
  overrides: Partial<PromptRecordDoc> = {},
): PromptRecordDoc {
  return {
    user: 1,
    text: 'I need more CPU',
    marker: { cpu: 1, latency_bound: 0 },
    accepted: true,
    diagnostics: diag(),
    ...overrides,
  };
}

export function step(overrides: Partial<StepResultDoc> = {}): StepResultDoc {
  return {
    step: 0,
    prompts: [],
    params_before: { '1': [2.0, 3.0] },
    params_after: { '1': [2.0, 3.0] },
    status: 'Optimal',
    allocation: { placement: { '1': 2 }, routes: { '1': [1, 3] } },
    measurement: { cpu: { '1': 2.0 }, latency: { '1': 2.0 } },
    objective: 0.57,
    terms: [0.5, 2.0, 1.0],
    ...overrides,
  };
}

/** Mirrors the bundled single-user replay: bound 3, 3, 4/3; final
 * step infeasible with the previous allocation retained. */
export function singleUserTrajectory(): StepResultDoc[] {
  return [
    step(),
    step({
      step: 1,
      prompts: [
        prompt({ text: 'less cpu please', marker: { cpu: -1, latency_bound: 0 } }),
      ],
      params_after: { '1': [1.0, 3.0] },
      measurement: { cpu: { '1': 1.0 }, latency: { '1': 2.0 } },
    }),
    step({
      step: 2,
      prompts: [
        prompt({
          text: 'lower my latency',
          marker: { cpu: 0, latency_bound: -1 },
        }),
      ],
      params_before: { '1': [1.0, 3.0] },
      params_after: { '1': [1.0, 4.0 / 3.0] },
      allocation: { placement: { '1': 1 }, routes: { '1': [1] } },
      measurement: { cpu: { '1': 1.0 }, latency: { '1': 1.0 } },
    }),
    step({
      step: 3,
      prompts: [
        prompt({ text: 'Get more CPUs, please.', marker: { cpu: 1, latency_bound: 0 } }),
      ],
      params_before: { '1': [1.0, 4.0 / 3.0] },
      params_after: { '1': [2.0, 4.0 / 3.0] },
      status: 'Infeasible',
      allocation: null,
      measurement: null,
      objective: null,
      terms: null,
    }),
  ];
}
