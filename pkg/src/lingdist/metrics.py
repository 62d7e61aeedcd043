"""Pairwise language similarity and distance functions, and the matrix builder."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import (
    BothEmpty,
    LengthMismatch,
    LingDistError,
    NoSharedConcepts,
    NotComparable,
    NullVector,
    PairError,
    UnknownMetric,
)
from .model import (
    ConceptVectorSet,
    DistanceMatrix,
    FeatureTable,
    Kind,
    LanguageProfile,
    LineagePath,
    WordListTable,
    binarize,
    concatenate_language_vector,
)
from .parallel import parallel_map

INFINITE = math.inf


# -- vector metrics ----------------------------------------------------------

def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise LengthMismatch(f"vector lengths differ: {u.shape} vs {v.shape}")
    uu, vv = float(np.dot(u, u)), float(np.dot(v, v))
    if uu == 0 or vv == 0:
        raise NullVector("cosine similarity undefined for an all-zero vector")
    # sqrt(uu * uu) == uu exactly, so identical inputs give exactly 1.0
    sim = float(np.dot(u, v)) / math.sqrt(uu * vv)
    return min(1.0, max(0.0, sim))


def hamming_distance(u, v) -> int:
    u, v = np.asarray(u), np.asarray(v)
    if u.shape != v.shape:
        raise LengthMismatch(f"vector lengths differ: {u.shape} vs {v.shape}")
    return int(np.count_nonzero(u != v))


# -- string metrics ----------------------------------------------------------

def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over Unicode code points."""
    if a == b:
        return 0
    # shared prefix/suffix never changes the distance
    start = 0
    limit = min(len(a), len(b))
    while start < limit and a[start] == b[start]:
        start += 1
    end_a, end_b = len(a), len(b)
    while end_a > start and end_b > start and a[end_a - 1] == b[end_b - 1]:
        end_a -= 1
        end_b -= 1
    a, b = a[start:end_a], b[start:end_b]
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


def ldn(a: str, b: str) -> float:
    """Levenshtein distance normalized by the longer string's length."""
    longest = max(len(a), len(b))
    if longest == 0:
        raise BothEmpty("ldn of two empty strings")
    return levenshtein(a, b) / longest


def longest_common_substring(a: str, b: str) -> int:
    """Length of the longest contiguous substring shared by ``a`` and ``b``."""
    if not a or not b:
        return 0
    best = 0
    previous = [0] * (len(b) + 1)
    for ca in a:
        current = [0] * (len(b) + 1)
        for j, cb in enumerate(b, 1):
            if ca == cb:
                run = previous[j - 1] + 1
                current[j] = run
                if run > best:
                    best = run
        previous = current
    return best


def lcs_similarity(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        raise BothEmpty("lcs similarity of two empty strings")
    return longest_common_substring(a, b) / longest


def _shared_concepts(table: WordListTable, x: str, y: str, min_shared: int):
    fx, fy = table.forms(x), table.forms(y)
    shared = [c for c in table.concepts if c in fx and c in fy]
    if len(shared) < max(1, min_shared):
        raise NoSharedConcepts(x, y)
    return [(fx[c], fy[c]) for c in shared]


def ldn_mean(table: WordListTable, x: str, y: str, min_shared: int = 1) -> float:
    """Mean LDN over the concepts attested in both languages."""
    pairs = _shared_concepts(table, x, y, min_shared)
    return math.fsum(ldn(a, b) for a, b in pairs) / len(pairs)


def lcs_mean(table: WordListTable, x: str, y: str, min_shared: int = 1) -> float:
    pairs = _shared_concepts(table, x, y, min_shared)
    return math.fsum(lcs_similarity(a, b) for a, b in pairs) / len(pairs)


# -- genealogical metrics ----------------------------------------------------

def _nodes(path) -> tuple[str, ...]:
    if isinstance(path, LanguageProfile):
        return path.lineage.nodes
    if isinstance(path, LineagePath):
        return path.nodes
    return tuple(path)


def path_jaccard(p, q) -> float:
    """Jaccard index of the node-name sets of two lineage paths."""
    a, b = set(_nodes(p)), set(_nodes(q))
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


def lca_edge_distance(p, q) -> float:
    """Leaf-to-LCA edge counts of both paths, summed; ``inf`` with no common node.

    Returns an int-valued float so that ``inf`` fits the same type.
    """
    a, b = _nodes(p), _nodes(q)
    pos_b = {name: i for i, name in enumerate(b)}
    for i in range(len(a) - 1, -1, -1):
        j = pos_b.get(a[i])
        if j is not None:
            return float((len(a) - 1 - i) + (len(b) - 1 - j))
    return INFINITE


# -- typological metrics -----------------------------------------------------

def feature_hamming(table: FeatureTable, x: str, y: str, features: Sequence[str] | None = None) -> float:
    """Share of features with different coded values; both rows must be coded."""
    features = table.features if features is None else tuple(features)
    if not features:
        raise NotComparable(x, y, ())
    missing = [f for f in features if not (table.is_coded(x, f) and table.is_coded(y, f))]
    if missing:
        raise NotComparable(x, y, missing)
    diff = sum(table.cells[x, f] != table.cells[y, f] for f in features)
    return diff / len(features)


# -- matrix builder ----------------------------------------------------------

METRIC_KINDS = {
    "cosine_conceptual": Kind.SIMILARITY,
    "hamming_conceptual": Kind.DISTANCE,
    "ldn_mean": Kind.DISTANCE,
    "lcs_mean": Kind.SIMILARITY,
    "path_jaccard": Kind.SIMILARITY,
    "lca_edges": Kind.DISTANCE,
    "feature_hamming": Kind.DISTANCE,
}


@dataclass(frozen=True)
class MetricSpec:
    """A metric name plus its parameters.

    Recognised parameters: ``concepts`` (conceptual metrics), ``features``
    (feature_hamming), ``min_shared`` (word-list metrics).
    """

    name: str
    parameters: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in METRIC_KINDS:
            raise UnknownMetric(
                f"unknown metric {self.name!r}; expected one of {', '.join(METRIC_KINDS)}"
            )

    @property
    def kind(self) -> Kind:
        return METRIC_KINDS[self.name]


def _prepare(spec: MetricSpec, data, languages):
    """Return (per-language items, pair function) for a metric."""
    params = spec.parameters
    name = spec.name
    if name in ("cosine_conceptual", "hamming_conceptual"):
        if not isinstance(data, ConceptVectorSet):
            raise LingDistError(f"{name} needs a ConceptVectorSet")
        concepts = params.get("concepts")
        vecs = [concatenate_language_vector(data, lang, concepts) for lang in languages]
        if name == "cosine_conceptual":
            return vecs, cosine_similarity
        return [binarize(v) for v in vecs], hamming_distance
    if name in ("ldn_mean", "lcs_mean"):
        if not isinstance(data, WordListTable):
            raise LingDistError(f"{name} needs a WordListTable")
        min_shared = int(params.get("min_shared", 1))
        items = [(data, lang, min_shared) for lang in languages]
        return items, (_ldn_pair if name == "ldn_mean" else _lcs_pair)
    if name in ("path_jaccard", "lca_edges"):
        lookup = data
        missing = [lang for lang in languages if lang not in lookup]
        if missing:
            raise LingDistError(f"no lineage for {missing[0]}")
        items = [_nodes(lookup[lang]) for lang in languages]
        return items, (path_jaccard if name == "path_jaccard" else lca_edge_distance)
    if not isinstance(data, FeatureTable):
        raise LingDistError("feature_hamming needs a FeatureTable")
    features = tuple(params.get("features") or data.features)
    items = [(data, lang, features) for lang in languages]
    return items, _feature_pair


def _ldn_pair(a, b):
    return ldn_mean(a[0], a[1], b[1], a[2])


def _lcs_pair(a, b):
    return lcs_mean(a[0], a[1], b[1], a[2])


def _feature_pair(a, b):
    return feature_hamming(a[0], a[1], b[1], a[2])


def _row_task(shared, i):
    """Values of row ``i`` for columns i..n-1 (diagonal included)."""
    items, pair, with_diagonal, langs = shared
    out = []
    for j in range(i if with_diagonal else i + 1, len(items)):
        try:
            out.append(float(pair(items[i], items[j])))
        except LingDistError as exc:
            return ("error", langs[i], langs[j], str(exc))
    return ("ok", out)


def build_distance_matrix(spec: MetricSpec, data, languages: Sequence[str], jobs: int = 1) -> DistanceMatrix:
    """Compute every unordered pair once and mirror it.

    Similarity metrics also score each language against itself for the
    diagonal; distances get a zero diagonal. Any per-pair failure aborts
    with :class:`PairError` naming the pair.
    """
    languages = tuple(languages)
    if len(set(languages)) != len(languages):
        raise LingDistError("duplicate languages in matrix request")
    items, pair = _prepare(spec, data, languages)
    n = len(languages)
    similarity = spec.kind is Kind.SIMILARITY
    rows = parallel_map(_row_task, range(n), shared=(items, pair, similarity, languages), jobs=jobs)
    values = np.zeros((n, n))
    for i, result in enumerate(rows):
        if result[0] == "error":
            _, x, y, message = result
            raise PairError(x, y, message)
        start = i if similarity else i + 1
        values[i, start:] = result[1]
    return DistanceMatrix(languages, values, spec.name, spec.kind)
