"""Chat-step orchestration: accumulate prompts, interpret, arbitrate,
solve, measure, and record history. One logical writer per session."""

from __future__ import annotations

import json
import math
import secrets
from dataclasses import dataclass, field, replace

from . import fixtures
from .allocator import SolveOutcome, check_feasibility, solve
from .control import (ArbitrationResult, UpdateRates, apply_prompt_batch,
                      arbitrate, measure)
from .intent import (Diagnostics, KeywordExtractor, LlmExtractor, HttpLlmClient,
                     SvmExtractor, UpdateMarker)
from .model import (Allocation, Measurement, ServiceParams, Topology,
                    TopologyError, User, load_topology, serialize_topology,
                    validate_users)

SNAPSHOT_VERSION = "v1"

DEFAULT_WEIGHTS = (1.0, 0.01, 0.05)
DEFAULT_RATES = (2.0, 1.5)


class SessionError(RuntimeError):
    pass


class CorruptSnapshot(ValueError):
    pass


@dataclass(frozen=True)
class SessionConfig:
    weights: tuple[float, float, float] = DEFAULT_WEIGHTS
    rates: tuple[float, float] = DEFAULT_RATES
    extractor: str = "keyword"            # keyword | svm | llm
    mode: str = "arbitrated"              # arbitrated | paper-replay
    llm_shots: int = 30

    def __post_init__(self):
        if self.extractor not in ("keyword", "svm", "llm"):
            raise ValueError(f"unknown extractor {self.extractor!r}")
        if self.mode not in ("arbitrated", "paper-replay"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class PromptRecord:
    user: int
    text: str
    marker: UpdateMarker
    accepted: bool
    diagnostics: dict


@dataclass(frozen=True)
class StepResult:
    step: int
    prompts: tuple[PromptRecord, ...]
    params_before: dict[int, ServiceParams]
    params_after: dict[int, ServiceParams]
    status: str
    allocation: Allocation | None
    measurement: Measurement | None
    objective: float
    terms: tuple[float, float, float]


def _weights_obj(cfg: SessionConfig):
    from .model import Weights
    return Weights(*cfg.weights)


def build_extractor(cfg: SessionConfig, llm_client=None):
    """Construct the configured extractor; svm/llm train or template from
    the bundled fixtures."""
    if cfg.extractor == "keyword":
        return KeywordExtractor()
    samples = fixtures.appendix_dataset()
    if cfg.extractor == "svm":
        return SvmExtractor(samples)
    client = llm_client or HttpLlmClient()
    return LlmExtractor(client, fixtures.llm_template(),
                        examples=samples[:cfg.llm_shots])


@dataclass
class Session:
    id: str
    topology: Topology
    users: list[User]
    params: dict[int, ServiceParams]
    config: SessionConfig
    last_allocation: Allocation | None = None
    standing: StepResult | None = None
    chat_step: int = 0
    pending: list[tuple[int, str]] = field(default_factory=list)
    history: list[StepResult] = field(default_factory=list)
    extractor: object = None

    def _extractor(self):
        if self.extractor is None:
            self.extractor = build_extractor(self.config)
        return self.extractor


def create_session(topology: Topology, users: list[User],
                   params: dict[int, ServiceParams],
                   config: SessionConfig = SessionConfig(),
                   extractor=None) -> Session:
    """Create a session and establish the standing allocation (the k=0
    solve with no prompts). Fails if the service cannot be provisioned."""
    bad = validate_users(topology, users)
    if bad:
        raise TopologyError("invalid users: " + "; ".join(str(v) for v in bad))
    if set(params) != {u.id for u in users}:
        raise TopologyError("params must cover exactly the session users")

    outcome = solve(topology, users, params, {}, _weights_obj(config))
    if not outcome.optimal:
        raise SessionError("service cannot be provisioned: initial solve infeasible")

    meas = measure(topology, users, params, outcome.allocation)
    standing = StepResult(
        step=0, prompts=(), params_before=dict(params), params_after=dict(params),
        status=outcome.status, allocation=outcome.allocation, measurement=meas,
        objective=outcome.objective, terms=outcome.terms)
    return Session(
        id=secrets.token_hex(8), topology=topology, users=list(users),
        params=dict(params), config=config, last_allocation=outcome.allocation,
        standing=standing, extractor=extractor)


def submit_prompt(session: Session, user: int, text: str) -> int:
    """Queue a prompt for the next step; returns its queue position."""
    if user not in {u.id for u in session.users}:
        raise KeyError(f"unknown user {user}")
    session.pending.append((user, text))
    return len(session.pending)


def run_step(session: Session) -> StepResult:
    """Execute one chat step over the accumulated prompts."""
    extractor = session._extractor()
    extracted: list[tuple[int, str, UpdateMarker, Diagnostics]] = []
    for uid, text in session.pending:
        marker, diag = extractor.extract(text)
        extracted.append((uid, text, marker, diag))

    params_before = dict(session.params)
    weights = _weights_obj(session.config)
    rates = UpdateRates(*session.config.rates)
    meas = measure(session.topology, session.users, session.params,
                   session.last_allocation)
    markers = [(uid, marker) for uid, _, marker, _ in extracted]

    if session.config.mode == "paper-replay":
        new_params = apply_prompt_batch(session.params, markers, meas, rates)
        outcome = solve(session.topology, session.users, new_params,
                        session.last_allocation.placement, weights)
        accept = [True] * len(markers)
    else:
        result: ArbitrationResult = arbitrate(
            session.topology, session.users, session.params,
            session.last_allocation.placement, weights, meas, rates, markers)
        new_params = result.params_after
        outcome = result.outcome
        accept = list(result.accept)

    if outcome.optimal:
        session.last_allocation = outcome.allocation
        new_meas = measure(session.topology, session.users, new_params,
                           outcome.allocation)
    else:
        new_meas = None  # previous feasible allocation stays in service

    session.params = new_params
    session.chat_step += 1
    records = tuple(
        PromptRecord(uid, text, marker, acc, diag.to_dict())
        for (uid, text, marker, diag), acc in zip(extracted, accept))
    result = StepResult(
        step=session.chat_step, prompts=records,
        params_before=params_before, params_after=dict(new_params),
        status=outcome.status, allocation=outcome.allocation,
        measurement=new_meas, objective=outcome.objective, terms=outcome.terms)
    session.history.append(result)
    session.pending.clear()

    if outcome.optimal:
        report = check_feasibility(session.topology, session.users,
                                   new_params, outcome.allocation)
        assert report.feasible, f"solver returned an infeasible allocation: {report}"
    return result


# --------------------------------------------------------------------------
# Persistence

def _params_doc(params: dict[int, ServiceParams]) -> dict:
    return {str(uid): [p.cpu_param, p.latency_bound] for uid, p in params.items()}


def _params_from(doc: dict) -> dict[int, ServiceParams]:
    return {int(uid): ServiceParams(*vals) for uid, vals in doc.items()}


def _alloc_doc(a: Allocation | None):
    if a is None:
        return None
    return {"placement": {str(u): d for u, d in a.placement.items()},
            "routes": {str(u): list(r) for u, r in a.routes.items()}}


def _alloc_from(doc) -> Allocation | None:
    if doc is None:
        return None
    return Allocation(placement={int(u): d for u, d in doc["placement"].items()},
                      routes={int(u): tuple(r) for u, r in doc["routes"].items()})


def _meas_doc(m: Measurement | None):
    if m is None:
        return None
    return {"cpu": {str(u): v for u, v in m.actual_cpu.items()},
            "latency": {str(u): v for u, v in m.actual_latency.items()}}


def _meas_from(doc) -> Measurement | None:
    if doc is None:
        return None
    return Measurement(actual_cpu={int(u): v for u, v in doc["cpu"].items()},
                       actual_latency={int(u): v for u, v in doc["latency"].items()})


def step_result_doc(r: StepResult) -> dict:
    return {
        "step": r.step,
        "prompts": [
            {"user": p.user, "text": p.text,
             "marker": {"cpu": p.marker.cpu, "latency_bound": p.marker.latency_bound},
             "accepted": p.accepted, "diagnostics": p.diagnostics}
            for p in r.prompts
        ],
        "params_before": _params_doc(r.params_before),
        "params_after": _params_doc(r.params_after),
        "status": r.status,
        "allocation": _alloc_doc(r.allocation),
        "measurement": _meas_doc(r.measurement),
        # infeasible steps carry an infinite objective; JSON has no
        # representation for it, so the document uses null
        "objective": r.objective if math.isfinite(r.objective) else None,
        "terms": list(r.terms),
    }


def _step_result_from(doc: dict) -> StepResult:
    return StepResult(
        step=doc["step"],
        prompts=tuple(
            PromptRecord(p["user"], p["text"],
                         UpdateMarker(p["marker"]["cpu"], p["marker"]["latency_bound"]),
                         p["accepted"], p["diagnostics"])
            for p in doc["prompts"]),
        params_before=_params_from(doc["params_before"]),
        params_after=_params_from(doc["params_after"]),
        status=doc["status"],
        allocation=_alloc_from(doc["allocation"]),
        measurement=_meas_from(doc["measurement"]),
        objective=(doc["objective"] if doc["objective"] is not None
                   else float("inf")),
        terms=tuple(doc["terms"]),
    )


def snapshot(session: Session) -> bytes:
    doc = {
        "version": SNAPSHOT_VERSION,
        "id": session.id,
        "topology": json.loads(serialize_topology(session.topology)),
        "users": [{"id": u.id, "router": u.router, "traffic_gbps": u.traffic}
                  for u in session.users],
        "params": _params_doc(session.params),
        "config": {"weights": list(session.config.weights),
                   "rates": list(session.config.rates),
                   "extractor": session.config.extractor,
                   "mode": session.config.mode,
                   "llm_shots": session.config.llm_shots},
        "last_allocation": _alloc_doc(session.last_allocation),
        "standing": step_result_doc(session.standing) if session.standing else None,
        "chat_step": session.chat_step,
        "pending": [[u, t] for u, t in session.pending],
        "history": [step_result_doc(r) for r in session.history],
    }
    return json.dumps(doc).encode()


def restore(data: bytes) -> Session:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptSnapshot(f"corrupt payload: {exc}") from exc
    try:
        if doc.get("version") != SNAPSHOT_VERSION:
            raise CorruptSnapshot(f"unsupported snapshot version {doc.get('version')!r}")
        topology = load_topology(json.dumps(doc["topology"]))
        cfg = doc["config"]
        session = Session(
            id=doc["id"],
            topology=topology,
            users=[User(u["id"], u["router"], u["traffic_gbps"]) for u in doc["users"]],
            params=_params_from(doc["params"]),
            config=SessionConfig(weights=tuple(cfg["weights"]),
                                 rates=tuple(cfg["rates"]),
                                 extractor=cfg["extractor"], mode=cfg["mode"],
                                 llm_shots=cfg["llm_shots"]),
            last_allocation=_alloc_from(doc["last_allocation"]),
            standing=_step_result_from(doc["standing"]) if doc["standing"] else None,
            chat_step=doc["chat_step"],
            pending=[(u, t) for u, t in doc["pending"]],
            history=[_step_result_from(r) for r in doc["history"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CorruptSnapshot):
            raise
        raise CorruptSnapshot(f"corrupt payload: {exc}") from exc
    return session
