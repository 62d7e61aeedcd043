"""Readers and writers for the line-oriented exchange formats.

All readers take a text stream (or a string holding the whole file),
accept ``\\n`` and ``\\r\\n`` line endings and NFC-normalize every field.
Writers always emit ``\\n``. Line numbers in errors are 1-based.

Formats::

    word list       lang<TAB>concept<TAB>form          (header required)
    feature table   lang,F1,...,Fn                     (CSV, header required)
    lineages        lang<TAB>Node1>Node2>...>Leaf      (no header)
    concept vectors #label<TAB>concept<TAB>dim<TAB>text  (label preamble)
                    lang<TAB>concept<TAB>dim<TAB>value   (sparse values)
    corpus          verse_id<TAB>lang<TAB>text         (no header)
    matrix          tag:kind,L1,...,Ln / Li,v_i1,...,v_in  (CSV)
"""

from __future__ import annotations

import csv
import io
import math
import re
import unicodedata
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import IO, Iterator, Mapping, Union

import numpy as np

from .errors import (
    AsymmetryDetected,
    BadCell,
    DimOutOfRange,
    DuplicateEntry,
    DuplicateLanguage,
    DuplicateLanguageRow,
    DuplicateVerseText,
    EmptyForm,
    EmptyPath,
    InvalidValue,
    LabelConflict,
    MalformedHeader,
    MalformedRow,
    MissingLabelBlock,
    NonzeroDiagonal,
    ParseError,
    ValueOutOfRange,
)
from .model import (
    DEFAULT_DIMS_PER_CONCEPT,
    UNKNOWN,
    ConceptVectorSet,
    DistanceMatrix,
    FeatureTable,
    Kind,
    LanguageProfile,
    LineagePath,
    WordListTable,
    check_language_id,
)

Source = Union[str, IO[str]]

WORDLIST_HEADER = ("lang", "concept", "form")
LABEL_MARK = "#label"
SYMMETRY_TOLERANCE = 1e-9
_CODED = re.compile(r"[0-9]")
_DIGITS = re.compile(r"[0-9]+")


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def _read_lines(source: Source) -> list[str]:
    text = source if isinstance(source, str) else source.read()
    if text.startswith("\ufeff"):
        text = text[1:]
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [nfc(line[:-1] if line.endswith("\r") else line) for line in lines]


def _numbered(lines, start=1) -> Iterator[tuple[int, str]]:
    return enumerate(lines, start)


def _lang(raw: str, line_no: int) -> str:
    try:
        return check_language_id(raw)
    except InvalidValue:
        raise MalformedRow(f"invalid language id {raw!r}", line_no) from None


# -- word lists --------------------------------------------------------------

def parse_wordlist(source: Source) -> WordListTable:
    lines = _read_lines(source)
    if not lines or tuple(lines[0].split("\t")) != WORDLIST_HEADER:
        raise MalformedHeader("expected header 'lang<TAB>concept<TAB>form'", 1)
    entries: dict[tuple[str, str], str] = {}
    concepts: dict[str, None] = {}
    for line_no, line in _numbered(lines[1:], 2):
        fields = line.split("\t")
        if len(fields) != 3:
            raise MalformedRow(f"expected 3 tab-separated fields, got {len(fields)}", line_no)
        lang = _lang(fields[0].strip(), line_no)
        concept = fields[1].strip()
        if not concept:
            raise MalformedRow("empty concept name", line_no)
        form = fields[2].strip()
        if not form:
            raise EmptyForm(f"empty form for ({lang}, {concept})", line_no)
        if (lang, concept) in entries:
            raise DuplicateEntry(lang, concept, line_no)
        entries[lang, concept] = form
        concepts.setdefault(concept, None)
    return WordListTable(entries, tuple(concepts))


def write_wordlist(table: WordListTable, stream: IO[str]) -> None:
    stream.write("\t".join(WORDLIST_HEADER) + "\n")
    for (lang, concept), form in table.entries.items():
        stream.write(f"{lang}\t{concept}\t{form}\n")


# -- feature tables ----------------------------------------------------------

def parse_feature_table(source: Source) -> FeatureTable:
    lines = _read_lines(source)
    rows = csv.reader(lines, strict=True)
    try:
        header = next(rows)
    except StopIteration:
        raise MalformedHeader("empty feature table", 1) from None
    except csv.Error as exc:
        raise MalformedHeader(str(exc), 1) from None
    if not header or header[0] != "lang":
        raise MalformedHeader("first header cell must be 'lang'", 1)
    features = [f.strip() for f in header[1:]]
    if any(not f for f in features) or len(set(features)) != len(features):
        raise MalformedHeader("feature names must be nonempty and unique", 1)
    languages: list[str] = []
    seen: set[str] = set()
    cells: dict[tuple[str, str], object] = {}
    line_no = 1
    while True:
        try:
            row = next(rows)
        except StopIteration:
            break
        except csv.Error as exc:
            raise MalformedRow(str(exc), rows.line_num) from None
        line_no = rows.line_num
        if len(row) != len(header):
            raise MalformedRow(f"expected {len(header)} cells, got {len(row)}", line_no)
        lang = _lang(row[0].strip(), line_no)
        if lang in seen:
            raise DuplicateLanguageRow(lang, line_no)
        seen.add(lang)
        languages.append(lang)
        for feat, raw in zip(features, row[1:]):
            if raw == "":
                continue
            if raw == "?":
                cells[lang, feat] = UNKNOWN
            elif _CODED.fullmatch(raw):
                cells[lang, feat] = int(raw)
            else:
                raise BadCell(lang, feat, raw, line_no)
    return FeatureTable(tuple(features), tuple(languages), cells)


def write_feature_table(table: FeatureTable, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["lang", *table.features])
    for lang in table.languages:
        row = [lang]
        for feat in table.features:
            value = table.cells.get((lang, feat))
            row.append("" if value is None else "?" if value is UNKNOWN else str(value))
        writer.writerow(row)


# -- lineages ----------------------------------------------------------------

def parse_lineages(source: Source) -> dict[str, LanguageProfile]:
    profiles: dict[str, LanguageProfile] = {}
    for line_no, line in _numbered(_read_lines(source)):
        fields = line.split("\t")
        if len(fields) != 2:
            raise MalformedRow(f"expected 2 tab-separated fields, got {len(fields)}", line_no)
        lang = _lang(fields[0].strip(), line_no)
        raw_path = fields[1].strip()
        if not raw_path:
            raise EmptyPath(lang, line_no)
        nodes = tuple(node.strip() for node in raw_path.split(">"))
        if lang in profiles:
            raise DuplicateLanguage(lang, line_no)
        try:
            profiles[lang] = LanguageProfile(lang, LineagePath(nodes))
        except InvalidValue as exc:
            raise MalformedRow(str(exc), line_no) from None
    return profiles


def write_lineages(profiles: Mapping[str, LanguageProfile], stream: IO[str]) -> None:
    for lang, profile in profiles.items():
        stream.write(f"{lang}\t{'>'.join(profile.lineage.nodes)}\n")


# -- concept vectors ---------------------------------------------------------

def _parse_dim(raw: str, line_no: int) -> int:
    if not _DIGITS.fullmatch(raw):
        raise MalformedRow(f"bad dimension index {raw!r}", line_no)
    return int(raw)


def parse_concept_vectors(source: Source) -> ConceptVectorSet:
    """Read a concept-vector file.

    The label preamble fixes the concept order (first appearance) and the
    dimensionality, which must be the same for every concept. A vector
    exists for (lang, concept) as soon as one value row names it, so an
    all-zero vector is written as a single explicit ``0`` row.
    """
    lines = _read_lines(source)
    labels: dict[str, dict[int, str]] = {}
    label_lines: dict[str, int] = {}
    values: dict[tuple[str, str], dict[int, float]] = {}
    dims = None
    in_preamble = True
    for line_no, line in _numbered(lines):
        fields = line.split("\t")
        if fields[0] == LABEL_MARK:
            if not in_preamble:
                raise MalformedRow("label rows must precede value rows", line_no)
            if len(fields) != 4:
                raise MalformedRow("label rows need 4 fields", line_no)
            concept, dim, text = fields[1], _parse_dim(fields[2], line_no), fields[3]
            if not concept:
                raise MalformedRow("empty concept name", line_no)
            block = labels.setdefault(concept, {})
            label_lines.setdefault(concept, line_no)
            if dim < 1:
                raise DimOutOfRange(f"label dimension {dim} < 1", line_no)
            if dim in block and block[dim] != text:
                raise LabelConflict(
                    f"conflicting labels for {concept!r} dim {dim}: {block[dim]!r} vs {text!r}",
                    line_no,
                )
            block[dim] = text
            continue
        if in_preamble:
            in_preamble = False
            dims = _check_label_blocks(labels, label_lines)
        if len(fields) != 4:
            raise MalformedRow(f"expected 4 tab-separated fields, got {len(fields)}", line_no)
        lang = _lang(fields[0], line_no)
        concept = fields[1]
        if concept not in labels:
            raise MissingLabelBlock(concept, line_no)
        dim = _parse_dim(fields[2], line_no)
        if not 1 <= dim <= dims:
            raise DimOutOfRange(f"dimension {dim} outside 1..{dims}", line_no)
        try:
            value = float(fields[3])
        except ValueError:
            raise MalformedRow(f"bad value {fields[3]!r}", line_no) from None
        if not 0.0 <= value <= 1.0:
            raise ValueOutOfRange(f"value {fields[3]} outside [0, 1]", line_no)
        cell = values.setdefault((lang, concept), {})
        if dim in cell:
            raise DuplicateEntry(lang, f"{concept}#{dim}", line_no)
        cell[dim] = value
    if in_preamble:
        dims = _check_label_blocks(labels, label_lines)
    vectors = {}
    for key, cell in values.items():
        vec = np.zeros(dims)
        for dim, value in cell.items():
            vec[dim - 1] = value
        vectors[key] = vec
    try:
        return ConceptVectorSet(
            tuple(labels),
            dims,
            vectors,
            {c: tuple(block[i] for i in range(1, dims + 1)) for c, block in labels.items()},
        )
    except InvalidValue as exc:
        raise ParseError(str(exc)) from None


def _check_label_blocks(labels, label_lines) -> int:
    if not labels:
        return DEFAULT_DIMS_PER_CONCEPT
    dims = None
    for concept, block in labels.items():
        size = max(block)
        if set(block) != set(range(1, size + 1)):
            raise MissingLabelBlock(concept, label_lines[concept])
        if dims is None:
            dims = size
        elif size != dims:
            raise DimOutOfRange(
                f"concept {concept!r} has {size} labelled dimensions, expected {dims}",
                label_lines[concept],
            )
    return dims


def write_concept_vectors(vector_set: ConceptVectorSet, stream: IO[str]) -> None:
    for concept in vector_set.concept_set:
        for i, label in enumerate(vector_set.dimension_labels[concept], 1):
            stream.write(f"{LABEL_MARK}\t{concept}\t{i}\t{label}\n")
    order = {c: i for i, c in enumerate(vector_set.concept_set)}
    keys = sorted(vector_set.vectors, key=lambda k: (k[0], order[k[1]]))
    for lang, concept in keys:
        vec = vector_set.vectors[lang, concept]
        nonzero = np.flatnonzero(vec)
        if nonzero.size == 0:
            stream.write(f"{lang}\t{concept}\t1\t0.0\n")
        for i in nonzero:
            stream.write(f"{lang}\t{concept}\t{i + 1}\t{float(vec[i])!r}\n")


# -- parallel corpora --------------------------------------------------------

@dataclass(frozen=True)
class VerseAlignedCorpus:
    """verse id -> language -> text, with NFC-normalized texts."""

    verses: Mapping[str, Mapping[str, str]]
    languages: frozenset = field(default=frozenset())

    def __post_init__(self):
        verses = {v: MappingProxyType(dict(texts)) for v, texts in self.verses.items()}
        langs = set(self.languages)
        for texts in verses.values():
            langs.update(texts)
        object.__setattr__(self, "verses", MappingProxyType(verses))
        object.__setattr__(self, "languages", frozenset(langs))

    def texts(self, lang: str) -> dict[str, str]:
        """verse id -> text for one language."""
        return {v: t[lang] for v, t in self.verses.items() if lang in t}


def parse_parallel_corpus(source: Source) -> VerseAlignedCorpus:
    verses: dict[str, dict[str, str]] = {}
    for line_no, line in _numbered(_read_lines(source)):
        fields = line.split("\t", 2)
        if len(fields) != 3:
            raise MalformedRow("expected verse_id<TAB>lang<TAB>text", line_no)
        verse_id, lang, text = fields[0].strip(), _lang(fields[1].strip(), line_no), fields[2]
        if not verse_id:
            raise MalformedRow("empty verse id", line_no)
        texts = verses.setdefault(verse_id, {})
        if lang in texts:
            raise DuplicateVerseText(verse_id, lang, line_no)
        texts[lang] = text
    return VerseAlignedCorpus(verses)


def write_parallel_corpus(corpus: VerseAlignedCorpus, stream: IO[str]) -> None:
    for verse_id, texts in corpus.verses.items():
        for lang, text in texts.items():
            stream.write(f"{verse_id}\t{lang}\t{text}\n")


# -- distance matrices -------------------------------------------------------

def format_value(value: float) -> str:
    """9 significant digits; ``inf`` for infinite distances."""
    return format(float(value), ".9g")


def write_distance_matrix(m: DistanceMatrix, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([f"{m.metric_tag}:{m.kind.value}", *m.index])
    for lang, row in zip(m.index, m.values):
        writer.writerow([lang, *(format_value(v) for v in row)])


def read_distance_matrix(source: Source) -> DistanceMatrix:
    lines = _read_lines(source)
    rows = list(csv.reader(lines, strict=True))
    if not rows:
        raise MalformedHeader("empty matrix file", 1)
    header = rows[0]
    tag, sep, kind_raw = header[0].rpartition(":")
    if not sep or kind_raw not in {k.value for k in Kind}:
        raise MalformedHeader("first header cell must be '<metric>:distance|similarity'", 1)
    kind = Kind(kind_raw)
    index = tuple(header[1:])
    n = len(index)
    for lang in index:
        _lang(lang, 1)
    if len(set(index)) != n:
        raise MalformedHeader("duplicate language in header", 1)
    if len(rows) - 1 != n:
        raise MalformedRow(f"expected {n} data rows, got {len(rows) - 1}", len(rows))
    values = np.empty((n, n))
    for i, row in enumerate(rows[1:]):
        line_no = i + 2
        if len(row) != n + 1:
            raise MalformedRow(f"expected {n + 1} cells, got {len(row)}", line_no)
        if row[0] != index[i]:
            raise MalformedRow(f"row label {row[0]!r} does not match header {index[i]!r}", line_no)
        for j, raw in enumerate(row[1:]):
            try:
                v = float(raw)
            except ValueError:
                raise MalformedRow(f"bad value {raw!r}", line_no) from None
            if math.isnan(v) or v < 0:
                raise MalformedRow(f"value {raw!r} must be a nonnegative number", line_no)
            values[i, j] = v
    for i in range(n):
        if kind is Kind.DISTANCE and values[i, i] != 0:
            raise NonzeroDiagonal(f"diagonal entry {i} is {values[i, i]!r}", i + 2)
        for j in range(i + 1, n):
            a, b = values[i, j], values[j, i]
            if a != b:
                delta = abs(a - b)
                if not delta <= SYMMETRY_TOLERANCE:
                    raise AsymmetryDetected(i, j, delta)
    return DistanceMatrix(index, values, tag, kind)


def to_text(writer, obj) -> str:
    """Serialize with one of the ``write_*`` functions into a string."""
    buf = io.StringIO()
    writer(obj, buf)
    return buf.getvalue()


# -- concept lists -----------------------------------------------------------

def parse_concept_list(source: Source) -> list[tuple[str, tuple[str, ...]]]:
    """Read ``concept<TAB>query`` rows; a concept may span several rows.

    Returns (concept, query strings) pairs in first-appearance order.
    """
    queries: dict[str, list[str]] = {}
    for line_no, line in _numbered(_read_lines(source)):
        fields = line.split("\t")
        if len(fields) != 2:
            raise MalformedRow("expected concept<TAB>query", line_no)
        concept, query = fields[0].strip(), fields[1].strip()
        if not concept or not query:
            raise MalformedRow("empty concept or query string", line_no)
        strings = queries.setdefault(concept, [])
        if query not in strings:
            strings.append(query)
    return [(c, tuple(q)) for c, q in queries.items()]


def write_concept_list(concepts, stream: IO[str]) -> None:
    for concept, strings in concepts:
        for query in strings:
            stream.write(f"{concept}\t{query}\n")
