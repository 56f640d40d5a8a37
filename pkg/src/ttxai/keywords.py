"""Graph-based unsupervised keyphrase extraction.

Pipeline per note: token co-occurrence graph -> near-duplicate node merging
-> load centrality -> frequency/centrality blend -> n-gram phrase formation
-> ranked truncation -> distilled string.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .corpus import TokenizedNote
from .errors import ConfigError, KeywordError


@dataclass(frozen=True)
class RakunConfig:
    """Extraction hyperparameters.

    Defaults: up to 1024 candidates, merge threshold 1.1 (a 10% of word
    length edit-distance budget), alpha 0.3 blending frequency against
    centrality, minimum token length 3, and the top 512 retained.
    """

    max_candidates: int = 1024
    merge_threshold: float = 1.1
    alpha: float = 0.3
    min_token_length: int = 3
    retain_top: int = 512
    max_phrase_len: int = 3
    phrase_pool_fraction: float = 0.2

    def __post_init__(self) -> None:
        if self.retain_top > self.max_candidates:
            raise ConfigError("retain_top must not exceed max_candidates")
        if self.merge_threshold < 1.0:
            raise ConfigError("merge_threshold must be >= 1.0")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha must be in [0, 1]")
        if self.max_phrase_len not in (1, 2, 3):
            raise ConfigError("max_phrase_len must be 1, 2, or 3")
        if not 0.0 < self.phrase_pool_fraction <= 1.0:
            raise ConfigError("phrase_pool_fraction must be in (0, 1]")


@dataclass
class TokenGraph:
    """Directed token-transition graph with occurrence counts."""

    nodes: set[str] = field(default_factory=set)
    edges: dict[tuple[str, str], int] = field(default_factory=dict)
    node_freq: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class Keyphrase:
    surface: str
    n: int
    score: float
    member_scores: tuple[float, ...]


def surviving_tokens(note: TokenizedNote, min_token_length: int) -> list[str]:
    return [t for t in note.tokens if len(t) >= min_token_length]


def build_token_graph(note: TokenizedNote, min_token_length: int) -> TokenGraph:
    """Count transitions between successive surviving tokens.

    Tokens below the length floor are skipped and adjacency closes over them,
    so the transition signal bridges stopword-like gaps.
    """
    survivors = surviving_tokens(note, min_token_length)
    if not survivors:
        raise KeywordError(f"{note.note_id}: no token survives the length filter")
    graph = TokenGraph()
    for tok in survivors:
        graph.nodes.add(tok)
        graph.node_freq[tok] = graph.node_freq.get(tok, 0) + 1
    for u, v in zip(survivors, survivors[1:]):
        graph.edges[(u, v)] = graph.edges.get((u, v), 0) + 1
    return graph


def levenshtein_within(a: str, b: str, budget: int) -> bool:
    """True iff edit distance between a and b is <= budget (banded DP)."""
    if abs(len(a) - len(b)) > budget:
        return False
    if a == b:
        return True
    if budget <= 0:
        return False
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        lo = max(1, i - budget)
        hi = min(len(b), i + budget)
        if lo > 1:
            cur[lo - 1] = budget + 1
        for j in range(lo, hi + 1):
            cost = 0 if ca == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        if hi < len(b):
            cur[hi + 1 :] = [budget + 1] * (len(b) - hi)
        if min(cur[lo - 1 : hi + 1]) > budget:
            return False
        prev = cur
    return prev[len(b)] <= budget


def merge_budget(length: int, merge_threshold: float) -> int:
    # Rounded before ceil so float noise in (threshold - 1.0) cannot bump the
    # budget (e.g. 10 * (1.1 - 1.0) must stay 1, not become 2).
    return math.ceil(round(length * (merge_threshold - 1.0), 9))


def merge_meta_vertices(
    graph: TokenGraph, merge_threshold: float, min_token_length: int = 3
) -> tuple[TokenGraph, dict[str, str]]:
    """Collapse near-duplicate word forms into meta vertices.

    A pair merges when its edit distance fits within a budget proportional to
    the longer word's length. Pairs are visited once, ordered by descending
    combined frequency; chains only merge if each pair still qualifies
    against the current survivor. The lower-frequency node is absorbed (ties
    keep the lexicographically smaller), edges re-route with weights summed,
    and self-loops created by the merge are dropped.
    """
    if merge_threshold < 1.0:
        raise ConfigError("merge_threshold must be >= 1.0")
    nodes = sorted(graph.nodes)
    by_length: dict[int, list[str]] = {}
    for tok in nodes:
        if len(tok) >= min_token_length:
            by_length.setdefault(len(tok), []).append(tok)

    candidates: list[tuple[str, str]] = []
    for la, group in sorted(by_length.items()):
        for lb, other in sorted(by_length.items()):
            if lb < la:
                continue
            if lb - la > merge_budget(lb, merge_threshold):
                continue
            for a in group:
                for b in other if lb != la else other:
                    if lb == la and b <= a:
                        continue
                    if levenshtein_within(a, b, merge_budget(max(la, lb), merge_threshold)):
                        candidates.append((a, b))

    freq = dict(graph.node_freq)
    candidates.sort(key=lambda p: (-(freq[p[0]] + freq[p[1]]), p))

    parent: dict[str, str] = {}

    def resolve(tok: str) -> str:
        while tok in parent:
            tok = parent[tok]
        return tok

    for a, b in candidates:
        ra, rb = resolve(a), resolve(b)
        if ra == rb:
            continue
        if len(ra) < min_token_length or len(rb) < min_token_length:
            continue
        if not levenshtein_within(ra, rb, merge_budget(max(len(ra), len(rb)), merge_threshold)):
            continue
        if (freq[ra], rb) < (freq[rb], ra):
            absorbed, survivor = ra, rb
        else:
            absorbed, survivor = rb, ra
        parent[absorbed] = survivor
        freq[survivor] += freq.pop(absorbed)

    merge_map = {tok: resolve(tok) for tok in parent}

    merged = TokenGraph()
    merged.nodes = {resolve(tok) for tok in graph.nodes}
    merged.node_freq = {tok: freq[tok] for tok in sorted(merged.nodes)}
    for (u, v), w in sorted(graph.edges.items()):
        ru, rv = resolve(u), resolve(v)
        if ru == rv and u != v:
            continue  # self-loop created by merging
        key = (ru, rv)
        merged.edges[key] = merged.edges.get(key, 0) + w
    return merged, merge_map


def load_centrality(graph: TokenGraph) -> dict[str, float]:
    """Load centrality on the directed graph with unit hop distances.

    For every ordered pair (s, t) with t reachable from s, one unit of load
    leaves s and splits equally among shortest-path successors at every
    branching node; a node's raw centrality is the total load crossing it as
    an interior vertex. The split factor at a node toward a fixed target is
    the same for every source, so all sources are accumulated in one sweep
    per target. Scores are normalized by (n-1)(n-2).
    """
    if not graph.nodes:
        raise KeywordError("centrality of an empty graph")
    nodes = sorted(graph.nodes)
    n = len(nodes)
    load = {v: 0.0 for v in nodes}
    if n < 3:
        return load

    index = {v: i for i, v in enumerate(nodes)}
    succ: list[list[int]] = [[] for _ in nodes]
    pred: list[list[int]] = [[] for _ in nodes]
    for (u, v) in sorted(graph.edges):
        if u == v:
            continue  # self-loops never lie on shortest paths
        succ[index[u]].append(index[v])
        pred[index[v]].append(index[u])

    raw = [0.0] * n
    dist = [0] * n
    inflow = [0.0] * n
    for t in range(n):
        # BFS on reversed edges: dist[v] = hop count from v to t.
        for i in range(n):
            dist[i] = -1
            inflow[i] = 0.0
        dist[t] = 0
        frontier = [t]
        order: list[int] = []
        while frontier:
            nxt: list[int] = []
            for v in frontier:
                for u in pred[v]:
                    if dist[u] < 0:
                        dist[u] = dist[v] + 1
                        nxt.append(u)
            order.extend(nxt)
            frontier = nxt
        # Farthest nodes first: every node forwards its own unit plus
        # whatever arrived from farther sources, split equally among its
        # shortest-path successors toward t.
        for v in reversed(order):
            total = inflow[v] + 1.0
            dv = dist[v]
            branches = [w for w in succ[v] if dist[w] == dv - 1]
            share = total / len(branches)
            for w in branches:
                if w != t:
                    inflow[w] += share
        for v in range(n):
            if v != t:
                raw[v] += inflow[v]

    scale = 1.0 / ((n - 1) * (n - 2))
    return {v: raw[index[v]] * scale for v in nodes}


def score_tokens(
    graph: TokenGraph, centrality: Mapping[str, float], alpha: float
) -> dict[str, float]:
    """Convex blend of max-normalized frequency and centrality."""
    nodes = sorted(graph.nodes)
    missing = [v for v in nodes if v not in centrality]
    if missing:
        raise KeywordError(f"centrality missing for node(s): {missing[:3]}")
    max_freq = max((graph.node_freq[v] for v in nodes), default=0)
    max_cent = max((centrality[v] for v in nodes), default=0.0)
    scores = {}
    for v in nodes:
        f = graph.node_freq[v] / max_freq if max_freq > 0 else 0.0
        c = centrality[v] / max_cent if max_cent > 0 else 0.0
        scores[v] = alpha * f + (1.0 - alpha) * c
    return scores


def form_keyphrases(
    note: TokenizedNote,
    scores: Mapping[str, float],
    merge_map: Mapping[str, str],
    config: RakunConfig,
) -> list[Keyphrase]:
    """Emit all unigrams plus 2..max_phrase_len-grams of pooled tokens.

    The pool holds the top ceil(phrase_pool_fraction * |nodes|) tokens by
    score; phrases are adjacent windows of pooled tokens in the merged
    surviving sequence, scored by the mean of member scores. Ranking is by
    score, then earlier first occurrence, then surface.
    """
    if not scores:
        raise KeywordError(f"{note.note_id}: no scored tokens")
    sequence = [
        merge_map.get(t, t) for t in note.tokens if len(t) >= config.min_token_length
    ]

    pool_size = math.ceil(config.phrase_pool_fraction * len(scores))
    pool = set(sorted(scores, key=lambda v: (-scores[v], v))[:pool_size])

    first_pos: dict[str, int] = {}
    for i, tok in enumerate(sequence):
        first_pos.setdefault(tok, i)

    candidates: dict[str, Keyphrase] = {}
    order: dict[str, int] = {}
    for tok in scores:
        surface = tok
        candidates[surface] = Keyphrase(surface, 1, scores[tok], (scores[tok],))
        order[surface] = first_pos.get(tok, len(sequence))

    if config.max_phrase_len >= 2:
        for width in range(2, config.max_phrase_len + 1):
            for start in range(len(sequence) - width + 1):
                window = sequence[start : start + width]
                if any(tok not in pool for tok in window):
                    continue
                surface = " ".join(window)
                if surface in candidates:
                    continue
                member = tuple(scores[tok] for tok in window)
                candidates[surface] = Keyphrase(surface, width, sum(member) / width, member)
                order[surface] = start

    ranked = sorted(
        candidates.values(), key=lambda kp: (-kp.score, order[kp.surface], kp.surface)
    )
    return ranked[: config.max_candidates]


def extract_keywords(note: TokenizedNote, config: RakunConfig | None = None) -> list[Keyphrase]:
    """Full per-note pipeline; deterministic for a fixed (note, config)."""
    config = config or RakunConfig()
    graph = build_token_graph(note, config.min_token_length)
    merged, merge_map = merge_meta_vertices(graph, config.merge_threshold, config.min_token_length)
    centrality = load_centrality(merged)
    scores = score_tokens(merged, centrality, config.alpha)
    phrases = form_keyphrases(note, scores, merge_map, config)
    return phrases[: config.retain_top]


def distill_note(keyphrases: Sequence[Keyphrase]) -> str:
    """Concatenate keyphrase surfaces in rank order."""
    return " ".join(kp.surface for kp in keyphrases)
