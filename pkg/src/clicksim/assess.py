"""Campaign what-if assessment.

Splices a hypothetical event into a copy of the transition graph using
model-predicted edges, simulates the original (control) and expanded
(treatment) graphs, and reports the conversion-rate difference with a
confidence interval.
"""

from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import json

import numpy as np
from scipy.stats import norm

from .embedding import EmbeddingService
from .errors import DimensionMismatch, DuplicateNode
from .events import EventDescriptor, EventNode, SegmentKey
from .graph import EventTransitionGraph, insert_event
from .predictor import HybridModel, predict_new_event_edges
from .simulate import (
    ConversionRule,
    SimulationConfig,
    conversion_rate,
    session_to_json_dict,
    simulate,
)

__all__ = [
    "REPORT_FORMAT",
    "REPORT_VERSION",
    "CONFIDENCE",
    "CampaignSpec",
    "AssessmentReport",
    "build_treatment",
    "assess",
]

REPORT_FORMAT = "clicksim-assessment"
REPORT_VERSION = 1
CONFIDENCE = 0.95


@dataclass(frozen=True)
class CampaignSpec:
    """An untested event to evaluate: descriptor fields, cohort, display name."""

    descriptor: EventDescriptor
    segment: SegmentKey
    label: str

    def __post_init__(self):
        if not isinstance(self.descriptor, EventDescriptor):
            object.__setattr__(self, "descriptor", EventDescriptor(self.descriptor))
        if not isinstance(self.segment, SegmentKey):
            object.__setattr__(self, "segment", SegmentKey(self.segment))
        if len(self.descriptor) == 0:
            raise ValueError("campaign descriptor must not be empty")
        if not isinstance(self.label, str) or not self.label:
            raise ValueError("campaign label must be a non-empty string")

    def node(self) -> EventNode:
        return EventNode.from_descriptor(self.descriptor)

    def to_json_dict(self) -> dict:
        return {
            "descriptor": dict(self.descriptor),
            "segment": dict(self.segment),
            "label": self.label,
        }

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "CampaignSpec":
        if not isinstance(doc, Mapping):
            raise ValueError("campaign document must be a JSON object")
        required = {"descriptor", "segment", "label"}
        if set(doc) != required:
            unexpected = sorted(set(doc) - required)
            missing = sorted(required - set(doc))
            raise ValueError(
                f"campaign document keys wrong: missing {missing}, unexpected {unexpected}"
            )
        for key in ("descriptor", "segment"):
            if not isinstance(doc[key], Mapping):
                raise ValueError(f"campaign {key} must be a JSON object")
        return cls(
            descriptor=EventDescriptor(doc["descriptor"]),
            segment=SegmentKey(doc["segment"]),
            label=doc["label"],
        )


@dataclass(frozen=True)
class AssessmentReport:
    """Outcome of one control-vs-treatment comparison."""

    campaign: CampaignSpec
    cvr_control: float
    cvr_treatment: float
    uplift: float
    ci_low: float
    ci_high: float
    confidence: float
    n_sessions: int
    max_length: int
    seed_control: int
    seed_treatment: int
    paired: bool
    conversion: ConversionRule
    new_edge_summary: dict
    samples_control: tuple
    samples_treatment: tuple

    def __post_init__(self):
        for name in ("cvr_control", "cvr_treatment"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {rate!r}")
        if not -1.0 <= self.uplift <= 1.0:
            raise ValueError(f"uplift must be in [-1, 1], got {self.uplift!r}")
        if self.uplift != self.cvr_treatment - self.cvr_control:
            raise ValueError("uplift must equal cvr_treatment - cvr_control")
        if not self.ci_low <= self.uplift <= self.ci_high:
            raise ValueError("confidence interval must bracket the uplift")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must be in (0, 1), got {self.confidence!r}")
        if self.n_sessions < 1:
            raise ValueError("n_sessions must be at least 1")

    def to_json_dict(self) -> dict:
        return {
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "campaign": {
                "label": self.campaign.label,
                "node_id": self.campaign.node().id,
                "descriptor": dict(self.campaign.descriptor),
                "segment": dict(self.campaign.segment),
            },
            "config": {
                "n_sessions": self.n_sessions,
                "max_length": self.max_length,
                "seed_control": self.seed_control,
                "seed_treatment": self.seed_treatment,
                "paired": self.paired,
                "conversion": {
                    "field": self.conversion.field,
                    "value": self.conversion.value,
                },
            },
            "rates": {"control": self.cvr_control, "treatment": self.cvr_treatment},
            "uplift": {
                "estimate": self.uplift,
                "ci_low": self.ci_low,
                "ci_high": self.ci_high,
                "confidence": self.confidence,
            },
            "new_edges": self.new_edge_summary,
            "samples": {
                "control": list(self.samples_control),
                "treatment": list(self.samples_treatment),
            },
        }

    def to_json(self) -> str:
        return (
            json.dumps(self.to_json_dict(), ensure_ascii=False, sort_keys=True, indent=1)
            + "\n"
        )

    def to_text(self) -> str:
        """Fixed-width summary table for terminals and logs."""
        rows = [
            ("sessions per group", f"{self.n_sessions}"),
            ("control CVR", f"{self.cvr_control:.4f}"),
            ("treatment CVR", f"{self.cvr_treatment:.4f}"),
            ("uplift", f"{self.uplift:+.4f}"),
            (
                f"{self.confidence:.0%} CI",
                f"[{self.ci_low:+.4f}, {self.ci_high:+.4f}]",
            ),
            (
                "new edges in/out",
                f"{self.new_edge_summary['n_in']}/{self.new_edge_summary['n_out']}",
            ),
            ("paired streams", "yes" if self.paired else "no"),
        ]
        width = max(len(name) for name, _ in rows)
        lines = [f"campaign: {self.campaign.label}"]
        lines += [f"  {name.ljust(width)}  {value}" for name, value in rows]
        return "\n".join(lines) + "\n"


def _plan_edges(
    graph_c: EventTransitionGraph,
    campaign: CampaignSpec,
    model: HybridModel,
    embedder: EmbeddingService,
) -> tuple[EventNode, list[tuple[str, float]], list[tuple[str, float]]]:
    """Embed everything and predict the new node's raw-weight edge lists."""
    if model.feature_dim != 3 * embedder.dimension:
        raise DimensionMismatch(
            f"model expects {model.feature_dim} features, "
            f"provider dimension {embedder.dimension} yields {3 * embedder.dimension}"
        )
    v_new = campaign.node()
    if v_new.id in graph_c.nodes:
        raise DuplicateNode(f"campaign resolves to existing node {v_new.id}")
    embeddings = embedder.embed_nodes(graph_c.nodes.values())
    f_new = embedder.embed_node(v_new)
    f_seg = embedder.embed_segment(campaign.segment)
    in_edges, out_edges = predict_new_event_edges(model, graph_c, f_new, f_seg, embeddings)
    return v_new, in_edges, out_edges


def build_treatment(
    graph_c: EventTransitionGraph,
    campaign: CampaignSpec,
    model: HybridModel,
    embedder: EmbeddingService,
) -> EventTransitionGraph:
    """Expanded copy of the control graph with the campaign node spliced in.

    The control graph is never modified. With no predicted out-edges the
    new node routes straight to the end sentinel, and with no predicted
    in-edges it is unreachable, leaving the control dynamics intact.
    """
    v_new, in_edges, out_edges = _plan_edges(graph_c, campaign, model, embedder)
    return insert_event(graph_c, v_new, in_edges, out_edges)


def _derived_seed(seed: int) -> int:
    # deterministic second stream for unpaired runs; the two-element
    # spawn key can never collide with the single-element per-session keys
    state = np.random.SeedSequence(entropy=seed, spawn_key=(1, 0)).generate_state(
        1, dtype=np.uint64
    )
    return int(state[0])


def _edge_summary(in_edges, out_edges) -> dict:
    weights = [q for _, q in in_edges] + [q for _, q in out_edges]
    if weights:
        quantiles = {
            "min": float(np.min(weights)),
            "q25": float(np.quantile(weights, 0.25)),
            "median": float(np.quantile(weights, 0.5)),
            "q75": float(np.quantile(weights, 0.75)),
            "max": float(np.max(weights)),
        }
    else:
        quantiles = None
    return {
        "n_in": len(in_edges),
        "n_out": len(out_edges),
        "weight_quantiles": quantiles,
    }


def _sample_dicts(sessions, graph, n_samples):
    return tuple(
        session_to_json_dict(s, index=k, graph=graph, include_text=True)
        for k, s in enumerate(sessions[:n_samples])
    )


def assess(
    graph_c: EventTransitionGraph,
    campaign: CampaignSpec,
    model: HybridModel,
    embedder: EmbeddingService,
    sim_config: SimulationConfig,
    *,
    paired: bool = True,
    n_samples: int = 20,
    threads: int = 1,
) -> AssessmentReport:
    """Simulate control and treatment groups and report the uplift.

    With paired streams (the default) both groups replay the same
    per-session random substreams, so a treatment that never fires
    yields an uplift of exactly zero and any real effect is measured
    with less noise. Unpaired mode draws the treatment group from an
    independently derived seed instead. The interval is the normal
    approximation for a difference of two proportions, which ignores
    the pairing and is therefore conservative when streams are shared.
    """
    if n_samples < 0:
        raise ValueError("n_samples must be non-negative")
    if threads < 1:
        raise ValueError("threads must be at least 1")

    v_new, in_edges, out_edges = _plan_edges(graph_c, campaign, model, embedder)
    graph_t = insert_event(graph_c, v_new, in_edges, out_edges)

    seed_c = sim_config.seed
    seed_t = seed_c if paired else _derived_seed(seed_c)
    config_t = replace(sim_config, seed=seed_t)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            fut_c = pool.submit(simulate, graph_c, sim_config, threads=max(1, threads // 2))
            fut_t = pool.submit(simulate, graph_t, config_t, threads=max(1, threads - threads // 2))
            control, treatment = fut_c.result(), fut_t.result()
    else:
        control = simulate(graph_c, sim_config)
        treatment = simulate(graph_t, config_t)

    rule = sim_config.conversion
    cvr_c = conversion_rate(control, rule, graph_c)
    cvr_t = conversion_rate(treatment, rule, graph_t)
    uplift = cvr_t - cvr_c

    n = sim_config.n_sessions
    z = float(norm.ppf(0.5 + CONFIDENCE / 2.0))
    stderr = float(np.sqrt(cvr_c * (1.0 - cvr_c) / n + cvr_t * (1.0 - cvr_t) / n))
    ci_low = max(-1.0, uplift - z * stderr)
    ci_high = min(1.0, uplift + z * stderr)

    return AssessmentReport(
        campaign=campaign,
        cvr_control=cvr_c,
        cvr_treatment=cvr_t,
        uplift=uplift,
        ci_low=ci_low,
        ci_high=ci_high,
        confidence=CONFIDENCE,
        n_sessions=n,
        max_length=sim_config.max_length,
        seed_control=seed_c,
        seed_treatment=seed_t,
        paired=paired,
        conversion=rule,
        new_edge_summary=_edge_summary(in_edges, out_edges),
        samples_control=_sample_dicts(control, graph_c, n_samples),
        samples_treatment=_sample_dicts(treatment, graph_t, n_samples),
    )
