"""Two-pass concept alignment over a verse-aligned corpus.

The forward pass looks for target-language strings that co-occur with a
source concept; the backward pass looks for source strings that co-occur
with what the forward pass found. Both are the same greedy loop: score
every candidate character n-gram against the current verse set, accept
the best one, drop the verses it covers, and repeat.

Co-occurrence is scored with Pearson's chi-square on the 2x2 verse
presence table (no continuity correction). Only positive association
counts; anything at or below independence scores 0. Candidates are
n-grams inside whitespace tokens wrapped in boundary marks, so ``·ab·``
is the whole word ``ab`` while ``ab`` also matches inside longer words.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import ConceptNotInSource, InvalidValue, LingDistError
from .ingest import VerseAlignedCorpus
from .model import DEFAULT_DIMS_PER_CONCEPT, ConceptVectorSet, check_language_id
from .parallel import parallel_map

log = logging.getLogger(__name__)

BOUNDARY = "·"
PAD_LABEL = ""
CHI2_95 = 3.84


@dataclass(frozen=True)
class ConceptualizerConfig:
    min_n: int = 1
    max_n: int = 10
    min_count: int = 2
    min_score: float = CHI2_95
    max_targets: int = 5
    dims_per_concept: int = DEFAULT_DIMS_PER_CONCEPT

    def __post_init__(self):
        if not 1 <= self.min_n <= self.max_n:
            raise InvalidValue(f"need 1 <= min_n <= max_n, got {self.min_n}..{self.max_n}")
        if self.min_count < 1 or self.max_targets < 1 or self.dims_per_concept < 1:
            raise InvalidValue("min_count, max_targets and dims_per_concept must be positive")
        if self.min_score < 0:
            raise InvalidValue("min_score must be nonnegative")


@dataclass(frozen=True)
class ConceptQuery:
    concept_name: str
    source_strings: tuple[str, ...]
    source_lang: str

    def __post_init__(self):
        strings = tuple(sorted({s.strip() for s in self.source_strings}))
        if not strings or any(not s for s in strings):
            raise InvalidValue(f"query strings for {self.concept_name!r} must be nonempty")
        if not self.concept_name:
            raise InvalidValue("empty concept name")
        check_language_id(self.source_lang)
        object.__setattr__(self, "source_strings", strings)


@dataclass(frozen=True)
class AssociationResult:
    target_strings: tuple[tuple[str, float], ...] = ()
    backward_concepts: tuple[tuple[str, float], ...] = ()


# -- the statistic -----------------------------------------------------------

def chi_square_counts(n11: int, na: int, nb: int, n: int) -> float:
    """Positive-association chi-square from 2x2 marginals.

    ``n11`` verses contain both strings, ``na``/``nb`` contain each one,
    ``n`` is the universe size.
    """
    if na <= 0 or nb <= 0 or na >= n or nb >= n:
        return 0.0
    if n11 * n <= na * nb:
        return 0.0
    d = n11 * (n - na - nb + n11) - (na - n11) * (nb - n11)
    fd = float(d)
    return float(n) * fd * fd / (float(na * (n - na)) * float(nb * (n - nb)))


def _chi_square_vector(n11: np.ndarray, na: np.ndarray, nb: int, n: int) -> np.ndarray:
    """Vectorized :func:`chi_square_counts` with the same float operation order."""
    n11 = n11.astype(np.int64)
    na = na.astype(np.int64)
    valid = (na > 0) & (na < n) & (nb > 0) & (nb < n) & (n11 * n > na * nb)
    d = (n11 * (n - na - nb + n11) - (na - n11) * (nb - n11)).astype(np.float64)
    den = (na * (n - na)).astype(np.float64) * float(nb * (n - nb))
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = float(n) * d * d / den
    return np.where(valid, scores, 0.0)


def association_score(a_verses, b_verses, universe) -> float:
    """Chi-square association of two verse sets within ``universe``."""
    universe = set(universe)
    if not universe:
        return 0.0
    a = set(a_verses) & universe
    b = set(b_verses) & universe
    return chi_square_counts(len(a & b), len(a), len(b), len(universe))


# -- n-grams and the corpus index ---------------------------------------------

def mark(text: str) -> str:
    """Wrap each whitespace token in boundary marks: ``a bc`` -> ``·a· ·bc·``."""
    return " ".join(BOUNDARY + tok + BOUNDARY for tok in text.split())


def char_ngrams(text: str, min_n: int, max_n: int) -> set[str]:
    """All n-grams (min_n <= n <= max_n) inside the marked tokens of ``text``."""
    grams = set()
    for tok in text.split():
        tok = BOUNDARY + tok + BOUNDARY
        for n in range(min_n, min(max_n, len(tok)) + 1):
            for i in range(len(tok) - n + 1):
                grams.add(tok[i:i + n])
    return grams


class _LanguageIndex:
    def __init__(self, texts: dict[int, str], min_n: int, max_n: int, n_verses: int):
        self.present = np.zeros(n_verses, dtype=bool)
        self.marked: dict[int, str] = {}
        postings: dict[str, list[int]] = {}
        for pos in sorted(texts):
            self.present[pos] = True
            self.marked[pos] = mark(texts[pos])
            for gram in char_ngrams(texts[pos], min_n, max_n):
                postings.setdefault(gram, []).append(pos)
        self.grams = sorted(postings)
        self.postings = [np.array(postings[g], dtype=np.int64) for g in self.grams]

    def containing(self, strings: Iterable[str], within: np.ndarray) -> np.ndarray:
        """Mask of verses in ``within`` whose marked text contains any string."""
        strings = list(strings)
        out = np.zeros_like(within)
        for pos in np.flatnonzero(within):
            text = self.marked.get(int(pos))
            if text is not None and any(s in text for s in strings):
                out[pos] = True
        return out


class CorpusIndex:
    """Lazily built per-language n-gram postings over a fixed verse order."""

    def __init__(self, corpus: VerseAlignedCorpus, config: ConceptualizerConfig | None = None):
        self.corpus = corpus
        self.config = config or ConceptualizerConfig()
        self.verse_ids = tuple(sorted(corpus.verses))
        self._languages: dict[str, _LanguageIndex] = {}

    def __getstate__(self):
        return {"corpus": self.corpus, "config": self.config, "verse_ids": self.verse_ids}

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._languages = {}

    def language(self, lang: str) -> _LanguageIndex:
        idx = self._languages.get(lang)
        if idx is None:
            if lang not in self.corpus.languages:
                raise LingDistError(f"language {lang} not in corpus")
            texts = {}
            for pos, verse in enumerate(self.verse_ids):
                text = self.corpus.verses[verse].get(lang)
                if text is not None:
                    texts[pos] = text
            idx = _LanguageIndex(texts, self.config.min_n, self.config.max_n, len(self.verse_ids))
            self._languages[lang] = idx
        return idx

    def universe(self, lang_a: str, lang_b: str) -> np.ndarray:
        """Verses where both languages have text."""
        return self.language(lang_a).present & self.language(lang_b).present

    def candidates(self, lang: str, universe: np.ndarray, min_count: int):
        """(sorted n-grams, verse-mask rows) for n-grams in >= min_count universe verses."""
        idx = self.language(lang)
        names, rows = [], []
        for gram, posting in zip(idx.grams, idx.postings):
            inside = posting[universe[posting]]
            if len(inside) >= min_count:
                names.append(gram)
                rows.append(inside)
        return names, rows


def _index_for(corpus, config, index):
    if index is not None:
        return index
    return CorpusIndex(corpus, config)


# -- greedy search -----------------------------------------------------------

def greedy_search(names: Sequence[str], rows: Sequence[np.ndarray], seed: np.ndarray,
                  universe: np.ndarray, max_iter: int, min_score: float) -> list[tuple[str, float]]:
    """Repeatedly accept the candidate most associated with the seed verses.

    ``names`` must be sorted; ``rows[i]`` lists the verse positions of
    candidate i inside ``universe``. The first maximal score wins ties, so
    ties go to the lexicographically smallest name. Returns picks in the
    order they were made.
    """
    cols = np.flatnonzero(universe)
    n = len(cols)
    if not names or n == 0:
        return []
    col_of = np.full(len(universe), -1, dtype=np.int64)
    col_of[cols] = np.arange(n)
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows])
    indices = col_of[np.concatenate(rows)] if rows else np.zeros(0, dtype=np.int64)
    matrix = sparse.csr_matrix(
        (np.ones(len(indices), dtype=np.int64), indices, indptr), shape=(len(rows), n)
    )
    na = np.diff(indptr)
    remaining = seed[cols].astype(np.int64)
    picks = []
    for _ in range(max_iter):
        nb = int(remaining.sum())
        if nb == 0:
            break
        n11 = matrix @ remaining
        scores = _chi_square_vector(n11, na, nb, n)
        best = int(np.argmax(scores))
        if scores[best] < min_score or n11[best] == 0:
            break
        picks.append((names[best], float(scores[best])))
        remaining[indices[indptr[best]:indptr[best + 1]]] = 0
    return picks


def _ranked(picks) -> tuple[tuple[str, float], ...]:
    return tuple(sorted(picks, key=lambda p: (-p[1], p[0])))


def forward_pass(corpus: VerseAlignedCorpus, query: ConceptQuery, target: str,
                 config: ConceptualizerConfig | None = None, index: CorpusIndex | None = None):
    """Target-language n-grams most associated with the query, best first."""
    config = config or ConceptualizerConfig()
    index = _index_for(corpus, config, index)
    if target not in corpus.languages:
        raise LingDistError(f"target {target} not in corpus")
    universe = index.universe(query.source_lang, target)
    seed = index.language(query.source_lang).containing(query.source_strings, universe)
    if not seed.any():
        raise ConceptNotInSource(query.concept_name, target)
    names, rows = index.candidates(target, universe, config.min_count)
    picks = greedy_search(names, rows, seed, universe, config.max_targets, config.min_score)
    return _ranked(picks)


def backward_pass(corpus: VerseAlignedCorpus, target_strings: Sequence[str], target: str,
                  source_lang: str, config: ConceptualizerConfig | None = None,
                  index: CorpusIndex | None = None):
    """Source-language n-grams most associated with the accepted target strings."""
    config = config or ConceptualizerConfig()
    index = _index_for(corpus, config, index)
    strings = [s for s in target_strings if s]
    if not strings:
        return ()
    universe = index.universe(source_lang, target)
    seed = index.language(target).containing(strings, universe)
    if not seed.any():
        return ()
    names, rows = index.candidates(source_lang, universe, config.min_count)
    picks = greedy_search(
        names, rows, seed, universe, config.dims_per_concept - 1, config.min_score
    )
    return _ranked(picks)


def align(corpus, query, target, config=None, index=None) -> AssociationResult:
    """Forward then backward pass for one (concept, target) cell."""
    config = config or ConceptualizerConfig()
    index = _index_for(corpus, config, index)
    forward = forward_pass(corpus, query, target, config, index)
    backward = ()
    if forward:
        backward = backward_pass(
            corpus, [g for g, _ in forward], target, query.source_lang, config, index
        )
    return AssociationResult(forward, backward)


# -- concept vectors ---------------------------------------------------------

def is_self_gram(gram: str, query: ConceptQuery) -> bool:
    """True when ``gram`` is a piece of the query's own realization."""
    return any(gram in mark(s) or gram in s for s in query.source_strings)


def fix_dimension_labels(corpus, query: ConceptQuery, reference_langs: Iterable[str],
                         config: ConceptualizerConfig | None = None,
                         index: CorpusIndex | None = None) -> tuple[str, ...]:
    """Shared dimension labels for one concept.

    Label 1 is the concept name; the rest are the source n-grams with the
    highest backward score summed over the reference languages, padded
    with :data:`PAD_LABEL`. Pieces of the query itself are skipped since
    the first dimension already stands for them.
    """
    config = config or ConceptualizerConfig()
    index = _index_for(corpus, config, index)
    totals: dict[str, float] = {}
    for lang in sorted(set(reference_langs)):
        try:
            result = align(corpus, query, lang, config, index)
        except ConceptNotInSource:
            continue
        for gram, score in result.backward_concepts:
            if not is_self_gram(gram, query):
                totals[gram] = totals.get(gram, 0.0) + score
    ranked = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    labels = [g for g, _ in ranked[: config.dims_per_concept - 1]]
    labels += [PAD_LABEL] * (config.dims_per_concept - 1 - len(labels))
    return (query.concept_name, *labels)


def build_concept_vector(corpus, query: ConceptQuery, target: str,
                         dimension_labels: Sequence[str],
                         config: ConceptualizerConfig | None = None,
                         index: CorpusIndex | None = None) -> np.ndarray:
    """Block-max normalized association vector for one concept in one language."""
    config = config or ConceptualizerConfig()
    if len(dimension_labels) != config.dims_per_concept:
        raise InvalidValue(
            f"expected {config.dims_per_concept} labels, got {len(dimension_labels)}"
        )
    index = _index_for(corpus, config, index)
    result = align(corpus, query, target, config, index)
    raw = np.zeros(config.dims_per_concept)
    if result.target_strings:
        raw[0] = max(score for _, score in result.target_strings)
    backward = dict(result.backward_concepts)
    for i, label in enumerate(dimension_labels[1:], 1):
        if label != PAD_LABEL and label in backward:
            raw[i] = backward[label]
    top = raw.max()
    if top > 0:
        raw = raw / top
    return raw


def _labels_task(shared, qi):
    corpus, config, index, queries, references = shared
    query = queries[qi]
    if not references:
        return ("ok", (query.concept_name, *[PAD_LABEL] * (config.dims_per_concept - 1)))
    try:
        return ("ok", fix_dimension_labels(corpus, query, references, config, index))
    except LingDistError as exc:
        return ("error", str(exc))


def _vector_task(shared, task):
    corpus, config, index, queries, labels = shared
    qi, target = task
    try:
        vec = build_concept_vector(corpus, queries[qi], target, labels[qi], config, index)
    except LingDistError as exc:
        return ("error", str(exc))
    return ("ok", vec)


@dataclass
class ConceptualizeRun:
    vectors: ConceptVectorSet
    failures: list[tuple[str, str | None, str]] = field(default_factory=list)


def conceptualize(corpus: VerseAlignedCorpus, queries: Sequence[ConceptQuery],
                  targets: Sequence[str], reference_langs: Sequence[str] | None = None,
                  config: ConceptualizerConfig | None = None, jobs: int = 1) -> ConceptualizeRun:
    """Build a :class:`ConceptVectorSet` for every (concept, target) cell.

    Labels are fixed per concept over ``reference_langs`` (default: the
    targets). Failed cells are recorded in ``failures`` as
    (concept, target or None, message) and left out of the vector set; a
    concept whose labels cannot be fixed is dropped entirely.
    """
    config = config or ConceptualizerConfig()
    queries = list(queries)
    targets = list(targets)
    references = sorted(set(targets if reference_langs is None else reference_langs))
    index = CorpusIndex(corpus, config)
    failures = []
    label_results = parallel_map(
        _labels_task, range(len(queries)),
        shared=(corpus, config, index, queries, references), jobs=jobs,
    )
    kept, labels = [], []
    for query, result in zip(queries, label_results):
        if result[0] == "error":
            failures.append((query.concept_name, None, result[1]))
            log.warning("event=concept_failed concept=%s reason=%s", query.concept_name, result[1])
            continue
        kept.append(query)
        labels.append(result[1])
    tasks = [(qi, t) for qi in range(len(kept)) for t in targets]
    results = parallel_map(
        _vector_task, tasks, shared=(corpus, config, index, kept, labels), jobs=jobs,
    )
    vectors = {}
    for (qi, target), result in zip(tasks, results):
        name = kept[qi].concept_name
        if result[0] == "error":
            failures.append((name, target, result[1]))
            log.warning("event=cell_failed concept=%s target=%s reason=%s", name, target, result[1])
        else:
            vectors[target, name] = result[1]
    vector_set = ConceptVectorSet(
        tuple(q.concept_name for q in kept),
        config.dims_per_concept,
        vectors,
        {q.concept_name: lab for q, lab in zip(kept, labels)},
    )
    return ConceptualizeRun(vector_set, failures)
