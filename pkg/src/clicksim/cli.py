"""Command-line pipeline: raw logs to sessions, graphs, models, reports.

Each stage reads and writes file artifacts so stages can be re-run
independently; identical inputs and seeds produce byte-identical
outputs. Data goes to files or stdout, diagnostics to stderr. Exit
codes: 0 success, 1 runtime failure, 2 usage error. Configuration is
merged from flags, CLICKSIM_<SECTION>__<KEY> environment variables, an
optional YAML file, and built-in defaults, in that precedence order;
see docs/cli.md.
"""

from __future__ import annotations

import copy
import functools
import json
import os
import re
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

import click
import yaml

from . import __version__
from .assess import CampaignSpec
from .assess import assess as run_assessment
from .embedding import EmbeddingConfig, EmbeddingService, make_provider
from .errors import ClicksimError, ConfigError, UnknownField
from .evaluation import evaluate as evaluate_model
from .graph import EventTransitionGraph, build_graph
from .ingest import (
    TemporalSplit,
    adapt_ga360,
    dump_sessions,
    load_sessions,
    parse_log,
    partition,
    sessionize,
)
from .predictor import PredictorConfig, build_dataset, load_model, save_model, train
from .simulate import (
    ConversionRule,
    SimulationConfig,
    conversion_rate,
    session_to_json_dict,
    simulate,
)

__all__ = ["DEFAULTS", "PipelineConfig", "load_config", "main"]

ENV_PREFIX = "CLICKSIM_"
_ENV_PATTERN = re.compile(r"^CLICKSIM_([A-Z0-9]+)__([A-Z0-9_]+)$")

DEFAULTS: dict[str, dict[str, Any]] = {
    "ingest": {
        "format": "jsonl",
        "strict": False,
        "dedupe_consecutive": False,
    },
    "split": {
        "boundaries": None,  # [t0, t1, t2, t3] -> train/validation/test windows
    },
    "graph": {
        "alpha": 5.0,
        "smoothing_support": "observed",
    },
    "embedding": {
        "provider": "hash",
        "dimension": 128,
        "cache_path": None,
        "endpoint": None,
        "model": None,
        "auth_env": "CLICKSIM_EMBED_TOKEN",
        "batch_size": 64,
        "max_retries": 3,
        "backoff_seconds": 0.5,
        "timeout_seconds": 30.0,
    },
    "predictor": {
        "decision_threshold": 0.1,
        "positive_class_weight": 5.0,
        "max_iterations": 1500,
        "early_stopping_rounds": 50,
        "negative_subsample": 1.0,
        "seed": 0,
    },
    "evaluate": {
        "mode": "hybrid",
        "smape_support": "active",
    },
    "simulate": {
        "n_sessions": 10_000,
        "max_length": 100,
        "seed": 0,
        "conversion_field": "actionType",
        "conversion_value": "Completed purchase",
    },
    "assess": {
        "paired": True,
        "n_samples": 20,
    },
    "service": {
        "host": "127.0.0.1",
        "port": 8000,
        "cors_origins": [],
        "report_capacity": 32,
    },
    "runtime": {
        "threads": 1,
    },
}

_CHOICES = {
    ("ingest", "format"): ("jsonl", "ga360"),
    ("graph", "smoothing_support"): ("observed", "all"),
    ("embedding", "provider"): ("hash", "remote"),
    ("evaluate", "mode"): ("hybrid", "cls_only", "reg_only"),
    ("evaluate", "smape_support"): ("active", "all"),
}

# keys whose value may be a string or null
_OPTIONAL_STR = {
    ("embedding", "cache_path"),
    ("embedding", "endpoint"),
    ("embedding", "model"),
}


def _check_value(section: str, key: str, value: Any, source: str) -> Any:
    """Validate one setting against the schema; returns the stored form."""
    where = f"{section}.{key} (from {source})"
    if section not in DEFAULTS or key not in DEFAULTS[section]:
        raise ConfigError(f"unknown configuration key {section}.{key} (from {source})")
    if (section, key) in _OPTIONAL_STR:
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"{where} must be a string or null")
        return value
    if (section, key) == ("split", "boundaries"):
        if value is None:
            return None
        ok = (
            isinstance(value, (list, tuple))
            and len(value) == 4
            and all(isinstance(b, int) and not isinstance(b, bool) for b in value)
            and all(a < b for a, b in zip(value, value[1:]))
        )
        if not ok:
            raise ConfigError(f"{where} must be 4 strictly increasing integers")
        return list(value)
    if (section, key) == ("service", "cors_origins"):
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ConfigError(f"{where} must be a list of strings")
        return list(value)
    default = DEFAULTS[section][key]
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be a boolean")
    elif isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer")
    elif isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number")
        value = float(value)
    elif isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string")
    choices = _CHOICES.get((section, key))
    if choices and value not in choices:
        raise ConfigError(f"{where} must be one of {', '.join(choices)}")
    return value


@dataclass(frozen=True)
class PipelineConfig:
    """Fully merged and validated settings for every pipeline stage."""

    values: Mapping[str, Mapping[str, Any]]

    def get(self, section: str, key: str) -> Any:
        return self.values[section][key]

    def embedding_config(self) -> EmbeddingConfig:
        return EmbeddingConfig(**self.values["embedding"])

    def predictor_config(self) -> PredictorConfig:
        return PredictorConfig(**self.values["predictor"])

    def conversion_rule(self) -> ConversionRule:
        sim = self.values["simulate"]
        return ConversionRule(field=sim["conversion_field"], value=sim["conversion_value"])

    def simulation_config(self) -> SimulationConfig:
        sim = self.values["simulate"]
        return SimulationConfig(
            n_sessions=sim["n_sessions"],
            max_length=sim["max_length"],
            seed=sim["seed"],
            conversion=self.conversion_rule(),
        )

    def temporal_split(self) -> TemporalSplit | None:
        bounds = self.values["split"]["boundaries"]
        if bounds is None:
            return None
        t0, t1, t2, t3 = bounds
        return TemporalSplit(train=(t0, t1), validation=(t1, t2), test=(t2, t3))


def _validate(config: PipelineConfig) -> None:
    try:
        config.embedding_config()
        config.predictor_config()
        config.simulation_config()
        config.temporal_split()
    except (ValueError, ConfigError) as exc:
        raise ConfigError(str(exc)) from exc
    if config.get("graph", "alpha") < 0.0:
        raise ConfigError("graph.alpha must be non-negative")
    if config.get("assess", "n_samples") < 0:
        raise ConfigError("assess.n_samples must be non-negative")
    if config.get("runtime", "threads") < 1:
        raise ConfigError("runtime.threads must be at least 1")
    if not 1 <= config.get("service", "port") <= 65535:
        raise ConfigError("service.port must be in 1..65535")
    if config.get("service", "report_capacity") < 1:
        raise ConfigError("service.report_capacity must be at least 1")


def load_config(
    config_path: str | None = None,
    overrides: Mapping[str, Any] | None = None,
    *,
    environ: Mapping[str, str] | None = None,
) -> PipelineConfig:
    """Merge defaults, YAML file, environment, and flag overrides.

    ``overrides`` maps dotted ``section.key`` paths to values and wins
    over everything; unknown keys are rejected wherever they appear.
    """
    merged = copy.deepcopy(DEFAULTS)

    if config_path is not None:
        try:
            doc = yaml.safe_load(Path(config_path).read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigError(f"config file {config_path}: {exc}") from exc
        if doc is None:
            doc = {}
        if not isinstance(doc, dict):
            raise ConfigError(f"config file {config_path} must be a mapping of sections")
        for section, body in doc.items():
            if section not in DEFAULTS:
                raise ConfigError(f"unknown configuration section {section!r} (from file)")
            if not isinstance(body, dict):
                raise ConfigError(f"section {section!r} must be a mapping (from file)")
            for key, value in body.items():
                merged[section][key] = _check_value(section, key, value, "file")

    env = os.environ if environ is None else environ
    for name in sorted(env):
        match = _ENV_PATTERN.match(name)
        if not match:
            continue
        section, key = match.group(1).lower(), match.group(2).lower()
        try:
            value = yaml.safe_load(env[name])
        except yaml.YAMLError as exc:
            raise ConfigError(f"environment variable {name}: {exc}") from exc
        if section not in DEFAULTS:
            raise ConfigError(f"unknown configuration section {section!r} (from {name})")
        merged[section][key] = _check_value(section, key, value, name)

    for path, value in (overrides or {}).items():
        section, _, key = path.partition(".")
        merged[section][key] = _check_value(section, key, value, "flag")

    config = PipelineConfig(values=merged)
    _validate(config)
    return config


# -- plumbing ----------------------------------------------------------


@contextmanager
def _open_in(path: str):
    if path == "-":
        yield sys.stdin
    else:
        with open(path, "r", encoding="utf-8") as fh:
            yield fh


@contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _write_lines(path: str, lines: Iterable[str]) -> int:
    n = 0
    with _open_out(path) as fh:
        for line in lines:
            fh.write(line + "\n")
            n += 1
    return n


def _note(message: str) -> None:
    click.echo(message, err=True)


def _structured_failure(exc: BaseException) -> None:
    body = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    click.echo(json.dumps(body, ensure_ascii=False, sort_keys=True), err=True)
    sys.exit(1)


def _command(fn):
    """Convert pipeline errors into structured stderr output and exit 1."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ClicksimError, OSError, ValueError) as exc:
            _structured_failure(exc)

    return wrapper


def _load(ctx: click.Context, **flags: Any) -> PipelineConfig:
    overrides = {path.replace("__", "."): v for path, v in flags.items() if v is not None}
    return load_config(ctx.obj.get("config_path"), overrides)


def _service(config: PipelineConfig) -> EmbeddingService:
    emb = config.embedding_config()
    return EmbeddingService(provider=make_provider(emb), cache_path=emb.cache_path)


def _load_graph(path: str) -> EventTransitionGraph:
    try:
        return EventTransitionGraph.load(path)
    except (KeyError, TypeError, ValueError) as exc:  # includes JSONDecodeError
        raise ConfigError(f"graph file {path} is not a valid graph document: {exc}") from exc


def _node_features(service: EmbeddingService, graph: EventTransitionGraph):
    embeddings = service.embed_nodes(graph.nodes.values())
    f_seg = service.embed_segment(graph.segment)
    return embeddings, f_seg


# -- commands ----------------------------------------------------------


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__)
@click.option(
    "--config",
    "config_path",
    envvar="CLICKSIM_CONFIG",
    type=click.Path(exists=True, dir_okay=False),
    help="YAML configuration file; flags and environment override it.",
)
@click.pass_context
def main(ctx, config_path):
    """Event-graph simulation pipeline for clickstream what-if analysis."""
    ctx.obj = {"config_path": config_path}


@main.command()
@click.option("--input", "input_path", default="-", show_default=True, help="Raw log JSONL ('-' for stdin).")
@click.option("--output", "output_path", default="-", show_default=True, help="Sessions artifact ('-' for stdout, or a directory when splitting).")
@click.option("--format", "fmt", type=click.Choice(["jsonl", "ga360"]), default=None, help="Input flavor: flat records or nested analytics visits.")
@click.option("--strict/--lenient", "strict", default=None, help="Fail on the first malformed line instead of skipping.")
@click.option("--dedupe/--keep-duplicates", "dedupe", default=None, help="Collapse consecutive repeats of the same event.")
@click.option("--split-at", default=None, help="Four comma-separated epoch-ms boundaries; writes train/validation/test files into --output as a directory.")
@click.pass_context
@_command
def ingest(ctx, input_path, output_path, fmt, strict, dedupe, split_at):
    """Parse raw click logs into a sessions artifact."""
    boundaries = None
    if split_at is not None:
        try:
            boundaries = [int(b) for b in split_at.split(",")]
        except ValueError:
            raise ConfigError("--split-at must be comma-separated integers") from None
    cfg = _load(
        ctx,
        ingest__format=fmt,
        ingest__strict=strict,
        ingest__dedupe_consecutive=dedupe,
        split__boundaries=boundaries,
    )
    strict = cfg.get("ingest", "strict")
    errors: list = []
    with _open_in(input_path) as fh:
        lines: Iterable[str] = fh
        if cfg.get("ingest", "format") == "ga360":
            rows = adapt_ga360(lines, strict=strict, errors=errors)
            records = parse_log((json.dumps(r) for r in rows), strict=strict)
        else:
            records = parse_log(lines, strict=strict, errors=errors)
        sessions = sessionize(records, dedupe_consecutive=cfg.get("ingest", "dedupe_consecutive"))

    split = cfg.temporal_split()
    if split is None:
        _write_lines(output_path, dump_sessions(sessions))
        _note(f"sessions: {len(sessions)}; malformed lines skipped: {len(errors)}")
    else:
        if output_path == "-":
            raise ConfigError("splitting requires --output to be a directory")
        out_dir = Path(output_path)
        out_dir.mkdir(parents=True, exist_ok=True)
        parts = partition(sessions, split)
        for name, subset in zip(("train", "validation", "test"), parts):
            _write_lines(str(out_dir / f"{name}.jsonl"), dump_sessions(subset))
        _note(
            f"sessions: {len(sessions)} -> train {len(parts.train)}, "
            f"validation {len(parts.validation)}, test {len(parts.test)}, "
            f"dropped {parts.n_dropped}; malformed lines skipped: {len(errors)}"
        )


@main.command("build-graph")
@click.option("--sessions", "sessions_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Sessions artifact from `ingest`.")
@click.option("--output", "output_path", required=True, help="Graph JSON file to write.")
@click.option("--alpha", type=float, default=None, help="Additive smoothing strength.")
@click.option("--smoothing-support", type=click.Choice(["observed", "all"]), default=None, help="Smooth over observed destinations only, or all nodes.")
@click.pass_context
@_command
def build_graph_cmd(ctx, sessions_path, output_path, alpha, smoothing_support):
    """Count session transitions into a smoothed transition graph."""
    cfg = _load(ctx, graph__alpha=alpha, graph__smoothing_support=smoothing_support)
    with _open_in(sessions_path) as fh:
        sessions = load_sessions(fh)
    graph = build_graph(
        sessions,
        alpha=cfg.get("graph", "alpha"),
        smoothing_support=cfg.get("graph", "smoothing_support"),
    )
    graph.save(output_path)
    _note(f"graph: {graph.n_nodes} nodes, {graph.n_edges} edges -> {output_path}")


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--cache", "cache_path", default=None, help="Embedding cache JSONL (also embedding.cache_path).")
@click.option("--provider", type=click.Choice(["hash", "remote"]), default=None)
@click.option("--dimension", type=int, default=None)
@click.pass_context
@_command
def embed(ctx, graph_path, cache_path, provider, dimension):
    """Populate the embedding cache with every node and segment text."""
    cfg = _load(
        ctx,
        embedding__cache_path=cache_path,
        embedding__provider=provider,
        embedding__dimension=dimension,
    )
    if cfg.get("embedding", "cache_path") is None:
        raise ConfigError("embed requires a cache path (--cache or embedding.cache_path)")
    service = _service(cfg)
    graph = _load_graph(graph_path)
    before = service.cache_size()
    _node_features(service, graph)
    summary = {
        "texts": graph.n_nodes + 1,
        "computed": service.cache_size() - before,
        "cache_entries": service.cache_size(),
        "dimension": service.dimension,
    }
    click.echo(json.dumps(summary, sort_keys=True))


@main.command()
@click.option("--train-graph", "train_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--validation-graph", "val_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--model-out", "model_dir", required=True, help="Directory for the trained model artifact.")
@click.option("--cache", "cache_path", default=None)
@click.option("--provider", type=click.Choice(["hash", "remote"]), default=None)
@click.option("--dimension", type=int, default=None)
@click.option("--threads", type=int, default=None)
@click.pass_context
@_command
def train_cmd(ctx, train_path, val_path, model_dir, cache_path, provider, dimension, threads):
    """Fit the link classifier and probability regressor on graph pairs."""
    cfg = _load(
        ctx,
        embedding__cache_path=cache_path,
        embedding__provider=provider,
        embedding__dimension=dimension,
        runtime__threads=threads,
    )
    service = _service(cfg)
    pred_cfg = cfg.predictor_config()
    datasets = []
    for path in (train_path, val_path):
        graph = _load_graph(path)
        embeddings, f_seg = _node_features(service, graph)
        datasets.append(build_dataset(graph, embeddings, f_seg, pred_cfg))
    model = train(datasets[0], datasets[1], pred_cfg, threads=cfg.get("runtime", "threads"))
    save_model(model, model_dir)
    _note(f"model -> {model_dir}")
    click.echo(json.dumps(model.metadata, sort_keys=True))


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Held-out graph to score against.")
@click.option("--model", "model_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--mode", type=click.Choice(["hybrid", "cls_only", "reg_only"]), default=None)
@click.option("--smape-support", type=click.Choice(["active", "all"]), default=None)
@click.option("--cache", "cache_path", default=None)
@click.option("--provider", type=click.Choice(["hash", "remote"]), default=None)
@click.option("--dimension", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json", show_default=True)
@click.pass_context
@_command
def evaluate(ctx, graph_path, model_dir, mode, smape_support, cache_path, provider, dimension, fmt):
    """Score a trained model over all ordered node pairs of a graph."""
    cfg = _load(
        ctx,
        embedding__cache_path=cache_path,
        embedding__provider=provider,
        embedding__dimension=dimension,
        evaluate__mode=mode,
        evaluate__smape_support=smape_support,
    )
    service = _service(cfg)
    model = load_model(model_dir)
    graph = _load_graph(graph_path)
    embeddings, f_seg = _node_features(service, graph)
    report = evaluate_model(
        model,
        graph,
        embeddings,
        f_seg,
        mode=cfg.get("evaluate", "mode"),
        smape_support=cfg.get("evaluate", "smape_support"),
    )
    if fmt == "json":
        click.echo(report.to_json(), nl=False)
    else:
        click.echo(report.to_table())


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_path", default="-", show_default=True, help="Simulated sessions JSONL.")
@click.option("--n", "n_sessions", type=int, default=None, help="Number of walks.")
@click.option("--seed", type=int, default=None)
@click.option("--max-length", type=int, default=None)
@click.option("--texts/--no-texts", default=True, show_default=True, help="Include canonical event texts per step.")
@click.option("--threads", type=int, default=None)
@click.pass_context
@_command
def simulate_cmd(ctx, graph_path, output_path, n_sessions, seed, max_length, texts, threads):
    """Sample user sessions from a graph by Monte-Carlo walk."""
    cfg = _load(
        ctx,
        simulate__n_sessions=n_sessions,
        simulate__seed=seed,
        simulate__max_length=max_length,
        runtime__threads=threads,
    )
    graph = _load_graph(graph_path)
    sim_cfg = cfg.simulation_config()
    walks = simulate(graph, sim_cfg, threads=cfg.get("runtime", "threads"))
    rows = (
        json.dumps(
            session_to_json_dict(w, index=k, graph=graph if texts else None, include_text=texts),
            ensure_ascii=False,
            sort_keys=True,
        )
        for k, w in enumerate(walks)
    )
    _write_lines(output_path, rows)
    try:
        rate = conversion_rate(walks, sim_cfg.conversion, graph)
        _note(f"sessions: {len(walks)}; conversion rate: {rate:.4f}")
    except UnknownField:
        _note(f"sessions: {len(walks)}; conversion field absent from this graph")


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Control graph.")
@click.option("--model", "model_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--campaign", "campaign_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Campaign JSON (descriptor, segment, label).")
@click.option("--output", "output_path", default="-", show_default=True)
@click.option("--n", "n_sessions", type=int, default=None, help="Sessions per group.")
@click.option("--seed", type=int, default=None)
@click.option("--max-length", type=int, default=None)
@click.option("--paired/--unpaired", "paired", default=None, help="Share per-session random streams between groups.")
@click.option("--samples", "n_samples", type=int, default=None, help="Sample sessions kept per group.")
@click.option("--cache", "cache_path", default=None)
@click.option("--provider", type=click.Choice(["hash", "remote"]), default=None)
@click.option("--dimension", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json", show_default=True)
@click.option("--threads", type=int, default=None)
@click.pass_context
@_command
def assess(
    ctx,
    graph_path,
    model_dir,
    campaign_path,
    output_path,
    n_sessions,
    seed,
    max_length,
    paired,
    n_samples,
    cache_path,
    provider,
    dimension,
    fmt,
    threads,
):
    """Compare conversion rates with and without a hypothetical event."""
    cfg = _load(
        ctx,
        simulate__n_sessions=n_sessions,
        simulate__seed=seed,
        simulate__max_length=max_length,
        assess__paired=paired,
        assess__n_samples=n_samples,
        embedding__cache_path=cache_path,
        embedding__provider=provider,
        embedding__dimension=dimension,
        runtime__threads=threads,
    )
    try:
        doc = json.loads(Path(campaign_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"campaign file {campaign_path}: invalid JSON: {exc.msg}") from exc
    campaign = CampaignSpec.from_json_dict(doc)
    service = _service(cfg)
    model = load_model(model_dir)
    graph = _load_graph(graph_path)
    report = run_assessment(
        graph,
        campaign,
        model,
        service,
        cfg.simulation_config(),
        paired=cfg.get("assess", "paired"),
        n_samples=cfg.get("assess", "n_samples"),
        threads=cfg.get("runtime", "threads"),
    )
    with _open_out(output_path) as fh:
        fh.write(report.to_json() if fmt == "json" else report.to_text())
    _note(
        f"control CVR {report.cvr_control:.4f}, treatment CVR {report.cvr_treatment:.4f}, "
        f"uplift {report.uplift:+.4f}"
    )


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--model", "model_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--cache", "cache_path", default=None)
@click.option("--provider", type=click.Choice(["hash", "remote"]), default=None)
@click.option("--dimension", type=int, default=None)
@click.pass_context
@_command
def serve(ctx, graph_path, model_dir, host, port, cache_path, provider, dimension):
    """Serve the assessment HTTP API for the companion UI."""
    import uvicorn

    from .service import create_app

    cfg = _load(
        ctx,
        service__host=host,
        service__port=port,
        embedding__cache_path=cache_path,
        embedding__provider=provider,
        embedding__dimension=dimension,
    )
    app = create_app(
        graph=_load_graph(graph_path),
        model=load_model(model_dir),
        embedder=_service(cfg),
        sim_defaults=cfg.simulation_config(),
        paired=cfg.get("assess", "paired"),
        n_samples=cfg.get("assess", "n_samples"),
        report_capacity=cfg.get("service", "report_capacity"),
        cors_origins=cfg.get("service", "cors_origins"),
        threads=cfg.get("runtime", "threads"),
    )
    _note(f"serving on {cfg.get('service', 'host')}:{cfg.get('service', 'port')}")
    uvicorn.run(app, host=cfg.get("service", "host"), port=cfg.get("service", "port"))


if __name__ == "__main__":
    main()
