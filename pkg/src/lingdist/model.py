"""Core data types shared across the package.

All containers are immutable after construction; numpy arrays handed out
are read-only views so they can be shared with worker processes safely.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidValue, MissingConcept

DEFAULT_DIMS_PER_CONCEPT = 100


def check_language_id(code: str) -> str:
    """Validate a language code: nonempty, no whitespace."""
    if not isinstance(code, str) or not code or any(ch.isspace() for ch in code):
        raise InvalidValue(f"invalid language id {code!r}")
    return code


@dataclass(frozen=True)
class LineagePath:
    """Genealogical path from the top-level family down to the language leaf."""

    nodes: tuple[str, ...]

    def __post_init__(self):
        nodes = tuple(self.nodes)
        object.__setattr__(self, "nodes", nodes)
        if not nodes:
            raise InvalidValue("lineage path must have at least one node")
        if any(not n for n in nodes):
            raise InvalidValue("lineage node names must be nonempty")
        if len(set(nodes)) != len(nodes):
            raise InvalidValue(f"duplicate node names in lineage {nodes}")

    def __len__(self):
        return len(self.nodes)

    @property
    def family(self) -> str:
        return self.nodes[0]

    @property
    def leaf(self) -> str:
        return self.nodes[-1]


@dataclass(frozen=True)
class LanguageProfile:
    id: str
    lineage: LineagePath

    def __post_init__(self):
        check_language_id(self.id)


def top_level_family(profile: LanguageProfile) -> str:
    return profile.lineage.nodes[0]


@dataclass(frozen=True)
class WordListTable:
    """Sparse (language, concept) -> form mapping with one form per cell."""

    entries: Mapping[tuple[str, str], str]
    concepts: tuple[str, ...]

    def __post_init__(self):
        concepts = tuple(self.concepts)
        if len(set(concepts)) != len(concepts):
            raise InvalidValue("duplicate concept names")
        known = set(concepts)
        entries = {}
        for (lang, concept), form in self.entries.items():
            check_language_id(lang)
            if concept not in known:
                raise InvalidValue(f"concept {concept!r} not in concept list")
            if form != form.strip() or not form:
                raise InvalidValue(f"form for ({lang}, {concept}) must be stripped and nonempty")
            entries[lang, concept] = form
        object.__setattr__(self, "concepts", concepts)
        object.__setattr__(self, "entries", MappingProxyType(entries))
        by_lang: dict[str, dict[str, str]] = {}
        for (lang, concept), form in entries.items():
            by_lang.setdefault(lang, {})[concept] = form
        object.__setattr__(self, "_by_lang", by_lang)

    def __reduce__(self):
        return (WordListTable, (dict(self.entries), self.concepts))

    @property
    def languages(self) -> tuple[str, ...]:
        return tuple(self._by_lang)

    def forms(self, lang: str) -> Mapping[str, str]:
        """concept -> form for one language (empty if the language is absent)."""
        return MappingProxyType(self._by_lang.get(lang, {}))


class _Unknown:
    """Singleton marking an explicit ``?`` feature cell."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNKNOWN"

    def __reduce__(self):
        return (_Unknown, ())


UNKNOWN = _Unknown()


class CellState(enum.Enum):
    CODED = "coded"
    UNKNOWN = "unknown"
    MISSING = "missing"


@dataclass(frozen=True)
class FeatureTable:
    """Categorical feature table.

    ``cells`` maps (language, feature) to either a small nonnegative int
    (a coded value) or :data:`UNKNOWN`. Absent keys are missing cells.
    ``languages`` keeps row order, ``features`` column order.
    """

    features: tuple[str, ...]
    languages: tuple[str, ...]
    cells: Mapping[tuple[str, str], object]

    def __post_init__(self):
        features = tuple(self.features)
        languages = tuple(self.languages)
        if len(set(features)) != len(features):
            raise InvalidValue("duplicate feature names")
        if len(set(languages)) != len(languages):
            raise InvalidValue("duplicate languages")
        for lang in languages:
            check_language_id(lang)
        fset, lset = set(features), set(languages)
        cells = {}
        symbols: dict[str, set[int]] = {f: set() for f in features}
        for (lang, feat), value in self.cells.items():
            if lang not in lset or feat not in fset:
                raise InvalidValue(f"cell ({lang}, {feat}) outside table axes")
            if value is not UNKNOWN:
                if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                    raise InvalidValue(f"bad coded value {value!r} at ({lang}, {feat})")
                symbols[feat].add(value)
            cells[lang, feat] = value
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "languages", languages)
        object.__setattr__(self, "cells", MappingProxyType(cells))
        object.__setattr__(
            self, "symbols", MappingProxyType({f: frozenset(s) for f, s in symbols.items()})
        )

    def __reduce__(self):
        return (FeatureTable, (self.features, self.languages, dict(self.cells)))

    def state(self, lang: str, feature: str) -> CellState:
        value = self.cells.get((lang, feature))
        if value is None:
            return CellState.MISSING
        if value is UNKNOWN:
            return CellState.UNKNOWN
        return CellState.CODED

    def is_coded(self, lang: str, feature: str) -> bool:
        value = self.cells.get((lang, feature))
        return value is not None and value is not UNKNOWN

    def arity(self, feature: str) -> int:
        return len(self.symbols[feature])


@dataclass(frozen=True)
class ConceptVectorSet:
    """Per-language, per-concept association vectors with shared dimension labels."""

    concept_set: tuple[str, ...]
    dims_per_concept: int
    vectors: Mapping[tuple[str, str], np.ndarray]
    dimension_labels: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        concepts = tuple(self.concept_set)
        d = self.dims_per_concept
        if len(set(concepts)) != len(concepts):
            raise InvalidValue("duplicate concepts in concept set")
        if not isinstance(d, int) or d < 1:
            raise InvalidValue(f"dims_per_concept must be a positive integer, got {d!r}")
        labels = {}
        for concept in concepts:
            if concept not in self.dimension_labels:
                raise InvalidValue(f"no dimension labels for concept {concept!r}")
            row = tuple(self.dimension_labels[concept])
            if len(row) != d:
                raise InvalidValue(f"concept {concept!r} has {len(row)} labels, expected {d}")
            if row[0] != concept:
                raise InvalidValue(f"first label of {concept!r} must be the concept itself")
            labels[concept] = row
        if set(self.dimension_labels) - set(concepts):
            raise InvalidValue("labels given for concepts outside the concept set")
        known = set(concepts)
        vectors = {}
        for (lang, concept), vec in self.vectors.items():
            check_language_id(lang)
            if concept not in known:
                raise InvalidValue(f"vector for unknown concept {concept!r}")
            arr = np.array(vec, dtype=np.float64)
            if arr.shape != (d,):
                raise InvalidValue(f"vector ({lang}, {concept}) has shape {arr.shape}, expected ({d},)")
            if not np.all((arr >= 0.0) & (arr <= 1.0)):
                raise InvalidValue(f"vector ({lang}, {concept}) has entries outside [0, 1]")
            arr.setflags(write=False)
            vectors[lang, concept] = arr
        object.__setattr__(self, "concept_set", concepts)
        object.__setattr__(self, "vectors", MappingProxyType(vectors))
        object.__setattr__(self, "dimension_labels", MappingProxyType(labels))

    def __reduce__(self):
        return (
            ConceptVectorSet,
            (self.concept_set, self.dims_per_concept, dict(self.vectors), dict(self.dimension_labels)),
        )

    @property
    def languages(self) -> tuple[str, ...]:
        seen = {}
        for lang, _ in self.vectors:
            seen.setdefault(lang, None)
        return tuple(seen)


def concatenate_language_vector(
    vector_set: ConceptVectorSet, lang: str, concepts: Iterable[str] | None = None
) -> np.ndarray:
    """Concatenate one language's concept blocks in ``concept_set`` order.

    ``concepts`` selects a subset (its own order is ignored); None means all.
    """
    if concepts is None:
        wanted = vector_set.concept_set
    else:
        subset = set(concepts)
        unknown = subset - set(vector_set.concept_set)
        if unknown:
            raise MissingConcept(lang, sorted(unknown)[0])
        wanted = [c for c in vector_set.concept_set if c in subset]
    blocks = []
    for concept in wanted:
        vec = vector_set.vectors.get((lang, concept))
        if vec is None:
            raise MissingConcept(lang, concept)
        blocks.append(vec)
    if not blocks:
        return np.zeros(0)
    return np.concatenate(blocks)


def binarize(v) -> np.ndarray:
    """1 where an association was found (value > 0), else 0."""
    return (np.asarray(v) > 0).astype(np.uint8)


class Kind(enum.Enum):
    DISTANCE = "distance"
    SIMILARITY = "similarity"


@dataclass(frozen=True)
class DistanceMatrix:
    """Dense symmetric pairwise matrix over an ordered language index.

    Only the upper triangle of ``values`` is trusted; it is mirrored to the
    lower triangle at construction. Distance values may be ``inf``.
    """

    index: tuple[str, ...]
    values: np.ndarray
    metric_tag: str
    kind: Kind = Kind.DISTANCE
    _pos: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = tuple(self.index)
        for lang in index:
            check_language_id(lang)
        if len(set(index)) != len(index):
            raise InvalidValue("duplicate languages in matrix index")
        n = len(index)
        vals = np.array(self.values, dtype=np.float64)
        if vals.shape != (n, n):
            raise InvalidValue(f"matrix shape {vals.shape} does not match index of {n}")
        if np.isnan(vals).any() or (vals < 0).any():
            raise InvalidValue("matrix values must be nonnegative numbers")
        upper = np.triu(vals, 1)
        vals = upper + upper.T + np.diag(np.diag(vals))
        if self.kind is Kind.DISTANCE and np.any(np.diag(vals) != 0):
            raise InvalidValue("distance matrix must have a zero diagonal")
        if not isinstance(self.kind, Kind):
            raise InvalidValue(f"bad matrix kind {self.kind!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_pos", MappingProxyType({l: i for i, l in enumerate(index)}))

    def __eq__(self, other):
        if not isinstance(other, DistanceMatrix):
            return NotImplemented
        return (
            self.index == other.index
            and self.metric_tag == other.metric_tag
            and self.kind is other.kind
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __reduce__(self):
        return (DistanceMatrix, (self.index, np.array(self.values), self.metric_tag, self.kind))

    def __len__(self):
        return len(self.index)

    def position(self, lang: str) -> int:
        return self._pos[lang]

    def __contains__(self, lang):
        return lang in self._pos

    def get(self, x: str, y: str) -> float:
        return float(self.values[self._pos[x], self._pos[y]])

    def is_close(self, other: DistanceMatrix, rel: float = 1e-9, abs_tol: float = 0.0) -> bool:
        if self.index != other.index or self.kind is not other.kind:
            return False
        a, b = self.values, other.values
        for u, v in zip(a.ravel(), b.ravel()):
            if math.isinf(u) or math.isinf(v):
                if u != v:
                    return False
            elif not math.isclose(u, v, rel_tol=rel, abs_tol=abs_tol):
                return False
        return True
