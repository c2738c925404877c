"""Task-graph generation, optimal parallel planning and plan evaluation.

Graphs and plans are plain dicts (or JSON strings) in the same shape the
command-line tool reads and writes.
"""

import json

from . import _core
from ._core import ParplanError, correlation

__all__ = [
    "ParplanError",
    "brute_force",
    "build_dataset",
    "correlation",
    "earliest_finish_times",
    "generate",
    "graph_similarity",
    "parse_extracted_graph",
    "parse_plan",
    "prompt_template",
    "render_prompt",
    "solve",
    "validate",
]


def _text(value):
    return value if isinstance(value, str) else json.dumps(value)


def generate(node_count, structure="random", edge_relation="linear", seed=0):
    """Returns {"graph": ..., "meta": ...}."""
    return json.loads(_core.generate(node_count, structure, edge_relation, seed))


def solve(graph, second_best=False):
    return json.loads(_core.solve(_text(graph), second_best))


def brute_force(graph, max_rules=20):
    return json.loads(_core.brute_force(_text(graph), max_rules))


def earliest_finish_times(graph):
    return json.loads(_core.earliest_finish_times(_text(graph)))


def validate(graph, plan):
    return json.loads(_core.validate(_text(graph), _text(plan)))


def render_prompt(kind, graph_or_text):
    """kind: graph_planning | query_planning | extract_graph | generate_query.

    For graph_planning the task is the pretty-printed graph; other kinds take
    text (a query story, or graph JSON for generate_query)."""
    if kind in ("graph_planning", "generate_query") and not isinstance(graph_or_text, str):
        task = _core.pretty_graph(json.dumps(graph_or_text))
    else:
        task = graph_or_text
    return _core.render_prompt(kind, task)


def prompt_template(kind):
    return _core.prompt_template(kind)


def parse_plan(text):
    return json.loads(_core.parse_plan(text))


def parse_extracted_graph(text):
    return json.loads(_core.parse_extracted_graph(text))


def graph_similarity(extracted, gold):
    """Returns (exact_match, similarity)."""
    return _core.graph_similarity(_text(extracted), _text(gold))


def build_dataset(spec, seed, jobs=1):
    """spec: preset name ("train" | "test"), list of rows, or JSON text."""
    if isinstance(spec, str) and not spec.lstrip().startswith(("[", "{", '"')):
        spec = json.dumps(spec)
    return [json.loads(line) for line in _core.build_dataset(_text(spec), seed, jobs)]
