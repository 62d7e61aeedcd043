"""Family classification and coverage experiments over distance matrices.

A language counts as correctly classified when a strict majority of its
k nearest neighbours share its top-level family. Neighbours are drawn
from every language in the matrix, not only the evaluated families.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyFamily, InvalidValue, KTooLarge, MissingLineage, NTooLarge, UnknownLanguage
from .model import CellState, DistanceMatrix, FeatureTable, Kind, LanguageProfile, top_level_family


# -- neighbours --------------------------------------------------------------

def _neighbor_order(m: DistanceMatrix, row: int) -> list[int]:
    sign = -1.0 if m.kind is Kind.SIMILARITY else 1.0
    id_rank = np.empty(len(m.index), dtype=np.int64)
    id_rank[np.array(sorted(range(len(m.index)), key=m.index.__getitem__), dtype=np.int64)] = (
        np.arange(len(m.index))
    )
    order = np.lexsort((id_rank, sign * m.values[row]))
    return [int(j) for j in order if j != row]


def k_nearest(m: DistanceMatrix, lang: str, k: int) -> list[str]:
    """The k closest other languages; ties go to the smaller language id."""
    if lang not in m:
        raise UnknownLanguage(f"{lang} not in matrix")
    if k < 1:
        raise KTooLarge(f"k must be positive, got {k}")
    if k > len(m) - 1:
        raise KTooLarge(f"k={k} but only {len(m) - 1} other languages")
    order = _neighbor_order(m, m.position(lang))
    return [m.index[j] for j in order[:k]]


def _family(lineages: Mapping[str, LanguageProfile], lang: str) -> str:
    profile = lineages.get(lang)
    if profile is None:
        raise MissingLineage(lang)
    return top_level_family(profile)


def majority_family_correct(m: DistanceMatrix, lang: str, k: int,
                            lineages: Mapping[str, LanguageProfile]) -> bool:
    own = _family(lineages, lang)
    neighbors = k_nearest(m, lang, k)
    same = sum(_family(lineages, n) == own for n in neighbors)
    return 2 * same > k


def _members(m: DistanceMatrix, lineages, families: Sequence[str]) -> dict[str, list[str]]:
    members: dict[str, list[str]] = {f: [] for f in families}
    for lang in m.index:
        profile = lineages.get(lang)
        if profile is not None and top_level_family(profile) in members:
            members[top_level_family(profile)].append(lang)
    for family, langs in members.items():
        if not langs:
            raise EmptyFamily(family)
    return members


# -- accuracy ----------------------------------------------------------------

@dataclass(frozen=True)
class FamilyAccuracyReport:
    k: int
    metric_tag: str
    per_family: Mapping[str, tuple[float, int]]
    overall: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["family", "k", "metric", "accuracy", "n_languages"])
        for family, (acc, n) in self.per_family.items():
            writer.writerow([family, self.k, self.metric_tag, _fmt(acc), n])
        total = sum(n for _, n in self.per_family.values())
        writer.writerow(["all", self.k, self.metric_tag, _fmt(self.overall), total])
        return buf.getvalue()


def _fmt(x: float) -> str:
    return format(x, ".9g")


def family_accuracy(m: DistanceMatrix, lineages: Mapping[str, LanguageProfile],
                    families: Sequence[str], k: int) -> FamilyAccuracyReport:
    members = _members(m, lineages, families)
    per_family = {}
    hits_total = n_total = 0
    for family in families:
        langs = members[family]
        hits = sum(majority_family_correct(m, lang, k, lineages) for lang in langs)
        per_family[family] = (hits / len(langs), len(langs))
        hits_total += hits
        n_total += len(langs)
    return FamilyAccuracyReport(k, m.metric_tag, per_family, hits_total / n_total)


def accuracy_table(reports: Sequence[FamilyAccuracyReport]) -> str:
    """Plain-text k x family grid, two decimals, like a results table."""
    if not reports:
        return ""
    families = list(reports[0].per_family)
    header = ["k", *families, "all"]
    rows = [[str(r.k), *(f"{r.per_family[f][0]:.2f}" for f in families), f"{r.overall:.2f}"]
            for r in reports]
    return _align([header, *rows])


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"


# -- neighbour distributions -------------------------------------------------

@dataclass(frozen=True)
class NeighborDistributionReport:
    k: int
    rows: Mapping[str, Mapping[str, float]]

    def other(self, family: str) -> float:
        """Share of neighbours outside the listed families."""
        return 100.0 - math.fsum(self.rows[family].values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        targets = list(next(iter(self.rows.values()), {}))
        writer.writerow(["source", *targets, "other"])
        for source, row in self.rows.items():
            writer.writerow([source, *(_fmt(row[t]) for t in targets), _fmt(self.other(source))])
        return buf.getvalue()

    def to_text(self) -> str:
        targets = list(next(iter(self.rows.values()), {}))
        table = [["source", *targets, "other"]]
        for source, row in self.rows.items():
            table.append([source, *(f"{row[t]:.0f}" for t in targets), f"{self.other(source):.0f}"])
        return _align(table)


def neighbor_family_distribution(m: DistanceMatrix, lineages: Mapping[str, LanguageProfile],
                                 families: Sequence[str], k: int = 10) -> NeighborDistributionReport:
    """Mean percentage of each listed family among a family's k nearest neighbours."""
    members = _members(m, lineages, families)
    rows = {}
    for source in families:
        sums = {f: 0.0 for f in families}
        for lang in members[source]:
            counts = {f: 0 for f in families}
            for n in k_nearest(m, lang, k):
                fam = _family(lineages, n)
                if fam in counts:
                    counts[fam] += 1
            for f in families:
                sums[f] += 100.0 * counts[f] / k
        size = len(members[source])
        rows[source] = {f: sums[f] / size for f in families}
    return NeighborDistributionReport(k, rows)


# -- feature coverage --------------------------------------------------------

@dataclass(frozen=True)
class CoverageDetail:
    coded: float
    unknown: float
    missing: float


def _family_rows(t: FeatureTable, lineages, family: str) -> list[str]:
    langs = [l for l in t.languages if l in lineages and top_level_family(lineages[l]) == family]
    if not langs:
        raise EmptyFamily(family)
    return langs


def feature_coverage(t: FeatureTable, lineages: Mapping[str, LanguageProfile],
                     family: str) -> dict[str, float]:
    """Fraction of the family's languages with a coded value, per feature."""
    return {f: d.coded for f, d in feature_coverage_detail(t, lineages, family).items()}


def feature_coverage_detail(t: FeatureTable, lineages: Mapping[str, LanguageProfile],
                            family: str) -> dict[str, CoverageDetail]:
    langs = _family_rows(t, lineages, family)
    out = {}
    for feat in t.features:
        counts = {state: 0 for state in CellState}
        for lang in langs:
            counts[t.state(lang, feat)] += 1
        n = len(langs)
        out[feat] = CoverageDetail(
            counts[CellState.CODED] / n, counts[CellState.UNKNOWN] / n, counts[CellState.MISSING] / n
        )
    return out


# -- feature selection -------------------------------------------------------

def coded_counts(t: FeatureTable) -> dict[str, int]:
    counts = {f: 0 for f in t.features}
    for (lang, feat), _ in t.cells.items():
        if t.is_coded(lang, feat):
            counts[feat] += 1
    return counts


def select_most_frequent_features(t: FeatureTable, n: int) -> list[str]:
    """Top-n features by number of coded languages; ties by feature name."""
    if n < 1:
        raise NTooLarge(f"n must be positive, got {n}")
    if n > len(t.features):
        raise NTooLarge(f"n={n} exceeds the {len(t.features)} available features")
    counts = coded_counts(t)
    return sorted(t.features, key=lambda f: (-counts[f], f))[:n]


def comparable_languages(t: FeatureTable, features: Sequence[str]) -> set[str]:
    """Languages coded for every feature in the subset."""
    features = list(features)
    return {lang for lang in t.languages if all(t.is_coded(lang, f) for f in features)}


def feature_tradeoff_curve(t: FeatureTable, n_values: Sequence[int]) -> list[tuple[int, int]]:
    """(n, number of languages comparable on the top-n features) per n."""
    n_values = list(n_values)
    if n_values != sorted(n_values):
        raise InvalidValue("n values must be sorted ascending")
    if not n_values:
        return []
    ranked = select_most_frequent_features(t, max(n_values))
    coded = np.array([[t.is_coded(l, f) for f in ranked] for l in t.languages], dtype=bool)
    if coded.size:
        # prefix[i, j]: language i coded for all of the first j+1 ranked features
        prefix = np.logical_and.accumulate(coded, axis=1)
    curve = []
    for n in n_values:
        if n < 1:
            raise NTooLarge(f"n must be positive, got {n}")
        count = int(prefix[:, n - 1].sum()) if coded.size else 0
        curve.append((n, count))
    return curve


def tradeoff_csv(curve: Sequence[tuple[int, int]]) -> str:
    return "n_features,n_languages\n" + "".join(f"{n},{c}\n" for n, c in curve)
