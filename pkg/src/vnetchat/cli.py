"""Command-line front door.

Exit codes: 0 success, 1 usage/input error, 2 infeasible,
3 upstream (LLM/embedding endpoint) unavailable.
"""

from __future__ import annotations

import json
import sys

import click

from . import fixtures
from .allocator import solve as solve_ilp
from .evaluation import rows_to_json, rows_to_tsv, run_sweep
from .intent import (HttpLlmClient, KeywordExtractor, LlmExtractor, SvmExtractor,
                     load_dataset)
from .model import TopologyError, Weights, load_topology, load_users
from .session import (SessionConfig, SessionError, create_session, run_step,
                      step_result_doc, submit_prompt)


def _fail(message: str, code: int = 1):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _read_file(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as exc:
        _fail(f"cannot read {path}: {exc}")


def _parse_weights(spec: str) -> Weights:
    try:
        w1, w2, w3 = (float(x) for x in spec.split(","))
        return Weights(w1, w2, w3)
    except ValueError as exc:
        _fail(f"bad weights {spec!r}: {exc}")


@click.group()
def main():
    """Chat-driven virtual network management."""


@main.command("solve")
@click.option("--topology", "topology_path", required=True)
@click.option("--users", "users_path", required=True)
@click.option("--weights", default="1,0.01,0.05", show_default=True)
@click.option("--prev", "prev_path", default=None,
              help="JSON file with a previous placement map (user -> DC).")
@click.option("--out", "out_path", default=None)
def solve_cmd(topology_path, users_path, weights, prev_path, out_path):
    """Solve one allocation instance and print the outcome."""
    try:
        t = load_topology(_read_file(topology_path))
        users, params = load_users(_read_file(users_path))
    except TopologyError as exc:
        _fail(str(exc))
    w = _parse_weights(weights)
    prev = {}
    if prev_path:
        prev = {int(k): int(v) for k, v in json.loads(_read_file(prev_path)).items()}

    outcome = solve_ilp(t, users, params, prev, w)
    doc = {
        "status": outcome.status,
        "objective": outcome.objective if outcome.optimal else None,
        "terms": list(outcome.terms) if outcome.optimal else None,
        "placement": ({str(u): d for u, d in outcome.allocation.placement.items()}
                      if outcome.optimal else None),
        "routes": ({str(u): list(r) for u, r in outcome.allocation.routes.items()}
                   if outcome.optimal else None),
    }
    text = json.dumps(doc, indent=2)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    click.echo(text)
    if not outcome.optimal:
        click.echo("error: infeasible", err=True)
        sys.exit(2)


def _make_extractor(kind: str, train_path: str | None, shots: int):
    if kind == "keyword":
        return KeywordExtractor()
    samples = (load_dataset(_read_file(train_path)) if train_path
               else fixtures.appendix_dataset())
    if kind == "svm":
        return SvmExtractor(samples)
    try:
        client = HttpLlmClient()
    except RuntimeError as exc:
        _fail(str(exc), code=3)
    return LlmExtractor(client, fixtures.llm_template(), examples=samples[:shots])


@main.command("interpret")
@click.option("--text", required=True)
@click.option("--extractor", "kind",
              type=click.Choice(["keyword", "svm", "llm"]), default="keyword")
@click.option("--train", "train_path", default=None)
@click.option("--shots", default=30, show_default=True)
def interpret_cmd(text, kind, train_path, shots):
    """Extract an update marker from a prompt."""
    extractor = _make_extractor(kind, train_path, shots)
    marker, diag = extractor.extract(text)
    if diag.unavailable:
        click.echo("error: upstream-unavailable", err=True)
        sys.exit(3)
    click.echo(json.dumps({"cpu": marker.cpu, "latency_bound": marker.latency_bound}))


@main.command("eval")
@click.option("--dataset", "dataset_path", default=None,
              help="TSV dataset; defaults to the bundled one.")
@click.option("--extractor", "kind",
              type=click.Choice(["keyword", "svm", "llm"]), default="keyword")
@click.option("--train-sizes", default="30,20,10,5,3", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["tsv", "json"]), default="tsv")
@click.option("--figures-dir", default=None,
              help="Also render a metrics figure into this directory.")
def eval_cmd(dataset_path, kind, train_sizes, seed, fmt, figures_dir):
    """Run the training-size sweep and print the metrics table."""
    samples = (load_dataset(_read_file(dataset_path)) if dataset_path
               else fixtures.appendix_dataset())
    try:
        sizes = [int(s) for s in train_sizes.split(",")]
    except ValueError as exc:
        _fail(f"bad train sizes {train_sizes!r}: {exc}")
    kwargs = {}
    if kind == "llm":
        try:
            kwargs["llm_client"] = HttpLlmClient()
        except RuntimeError as exc:
            _fail(str(exc), code=3)
        kwargs["llm_template"] = fixtures.llm_template()
    try:
        rows = run_sweep(samples, kind, sizes, seed=seed, **kwargs)
    except ValueError as exc:
        _fail(str(exc))
    click.echo(rows_to_tsv(rows) if fmt == "tsv" else rows_to_json(rows), nl=False)
    if fmt == "tsv":
        click.echo()
    if figures_dir:
        import os

        from .report import plot_metrics
        os.makedirs(figures_dir, exist_ok=True)
        plot_metrics(rows, os.path.join(figures_dir, "metrics.png"))


def _print_step(result) -> None:
    accepted = " ".join(
        f"u{p.user}:{'accepted' if p.accepted else 'rejected'}"
        f"({p.marker.cpu:+d},{p.marker.latency_bound:+d})"
        for p in result.prompts)
    for uid in sorted(result.params_after):
        p = result.params_after[uid]
        if result.measurement is not None:
            lat = f"{result.measurement.actual_latency[uid]:.4g}"
            cpu = f"{result.measurement.actual_cpu[uid]:.4g}"
        else:
            lat, cpu = "(Infeasible)", f"{p.cpu_param:.4g}"
        click.echo(f"k={result.step}\tuser={uid}\tb={p.latency_bound:.4g}\t"
                   f"actual_latency={lat}\tactual_cpu={cpu}")
    if accepted:
        click.echo(f"k={result.step}\tprompts\t{accepted}")


@main.command("replay")
@click.option("--scenario", "scenario_path", required=True)
@click.option("--topology", "topology_path", default=None,
              help="Defaults to the bundled internet2-like fixture.")
@click.option("--users", "users_path", required=True)
@click.option("--mode", type=click.Choice(["arbitrated", "paper-replay"]),
              default="arbitrated", show_default=True)
@click.option("--extractor", "kind",
              type=click.Choice(["keyword", "svm", "llm"]), default="keyword")
@click.option("--figures-dir", default=None,
              help="Render per-step topology figures and timelines here.")
def replay_cmd(scenario_path, topology_path, users_path, mode, kind, figures_dir):
    """Replay a scripted scenario and print the per-step table."""
    try:
        t = (load_topology(_read_file(topology_path)) if topology_path
             else fixtures.topology())
        users, params = load_users(_read_file(users_path))
        script = json.loads(_read_file(scenario_path))
    except (TopologyError, json.JSONDecodeError) as exc:
        _fail(str(exc))

    config = SessionConfig(mode=mode, extractor=kind)
    try:
        session = create_session(t, users, params, config)
    except SessionError as exc:
        _fail(str(exc), code=2)

    _print_step(session.standing)
    steps = sorted({e["step"] for e in script})
    results = [session.standing]
    for step in steps:
        for e in script:
            if e["step"] == step:
                submit_prompt(session, e["user"], e["text"])
        results.append(run_step(session))
        _print_step(results[-1])

    if figures_dir:
        from .report import render_replay_figures
        for path in render_replay_figures(t, results, figures_dir):
            click.echo(f"wrote {path}", err=True)


@main.command("repl")
@click.option("--topology", "topology_path", default=None)
@click.option("--users", "users_path", required=True)
@click.option("--extractor", "kind",
              type=click.Choice(["keyword", "svm", "llm"]), default="keyword")
def repl_cmd(topology_path, users_path, kind):
    """Interactive single-user loop: one prompt per chat step."""
    try:
        t = (load_topology(_read_file(topology_path)) if topology_path
             else fixtures.topology())
        users, params = load_users(_read_file(users_path))
    except TopologyError as exc:
        _fail(str(exc))
    try:
        session = create_session(t, users, params, SessionConfig(extractor=kind))
    except SessionError as exc:
        _fail(str(exc), code=2)
    uid = users[0].id
    _print_step(session.standing)
    while True:
        try:
            line = input("prompt> ")
        except EOFError:
            click.echo("")
            return
        if not line.strip():
            continue
        submit_prompt(session, uid, line)
        _print_step(run_step(session))


@main.command("serve")
@click.option("--addr", default=None, help="host:port (default from env or 127.0.0.1:8080)")
def serve_cmd(addr):
    """Run the HTTP gateway."""
    import os

    import uvicorn

    from .gateway import DEFAULT_ADDR, LISTEN_ADDR_ENV, create_app
    addr = addr or os.environ.get(LISTEN_ADDR_ENV, DEFAULT_ADDR)
    try:
        host, port = addr.rsplit(":", 1)
        port = int(port)
    except ValueError:
        _fail(f"bad address {addr!r}")
    try:
        uvicorn.run(create_app(), host=host, port=port)
    except SystemExit:
        raise
    except OSError as exc:
        _fail(f"cannot bind {addr}: {exc}")


if __name__ == "__main__":
    main()
