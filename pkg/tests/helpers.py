"""Fixture builders shared by the test modules."""

import random

import numpy as np

from lingdist.ingest import VerseAlignedCorpus
from lingdist.model import DistanceMatrix, Kind, LanguageProfile, LineagePath

# Constant filler: every n-gram it contributes occurs in every verse and so
# scores 0. It also makes short pieces of the planted words non-exclusive,
# so the planted words win the lexicographic tie-break.
SOURCE_FILLER = "the lord said unto them bath mouton dance entrancing doom"
TARGET_FILLER = "xa qa oq za va ov ba de"

HUN = ("Uralic", "Hungarian")
EKK = ("Uralic", "Finnic", "Coastal Finnic", "Neva", "Central Finnic", "Estonian")


def corpus_from(rows):
    """rows: list of {lang: text} dicts, one per verse (ids v00, v01, ...)."""
    return VerseAlignedCorpus({f"v{i:02d}": dict(r) for i, r in enumerate(rows)})


def perfect_corpus():
    """20 verses; target ``xq`` occurs exactly where source ``mouth`` does."""
    rows = []
    for i in range(20):
        hit = i < 10
        rows.append({
            "eng": ("mouth " if hit else "") + SOURCE_FILLER,
            "tgt": ("xq " if hit else "") + TARGET_FILLER,
        })
    return corpus_from(rows)


def independent_corpus():
    """Target words split every source class exactly in half."""
    rows = []
    for i in range(20):
        hit = i < 10
        word = "ka" if i % 10 < 5 else "lo"
        rows.append({
            "eng": ("mouth " if hit else "") + SOURCE_FILLER,
            "tgt": word + " " + TARGET_FILLER,
        })
    return corpus_from(rows)


def split_corpus():
    """Half of the ``mouth`` verses use ``xq``, the other half ``zv``."""
    rows = []
    for i in range(20):
        target = "xq " if i < 5 else "zv " if i < 10 else ""
        rows.append({
            "eng": ("mouth " if i < 10 else "") + SOURCE_FILLER,
            "tgt": target + TARGET_FILLER,
        })
    return corpus_from(rows)


def kou_corpus(extra_langs=False):
    """40 verses: ``mouth`` in 0-9, ``entrance`` in 10-19.

    ``zh`` uses one word ``xq`` for both (like 口); ``en2`` keeps them apart
    with ``mm`` and ``ee``. With ``extra_langs`` a language ``ko`` is added
    whose ``zv`` covers ``mouth`` plus ``door`` (verses 20-24).
    """
    rows = []
    for i in range(40):
        src = []
        if i < 10:
            src.append("mouth")
        elif i < 20:
            src.append("entrance")
        elif extra_langs and i < 25:
            src.append("door")
        row = {
            "eng": " ".join(src + [SOURCE_FILLER]),
            "zh": ("xq " if i < 20 else "") + TARGET_FILLER,
            "en2": ("mm " if i < 10 else "ee " if i < 20 else "") + TARGET_FILLER,
        }
        if extra_langs:
            row["ko"] = ("zv " if i < 10 or 20 <= i < 25 else "") + TARGET_FILLER
        rows.append(row)
    return corpus_from(rows)


def random_corpus(seed, n_verses=30, langs=("src", "tgt"), vocab_size=8):
    rng = random.Random(seed)
    vocab = {
        lang: ["".join(rng.choice("abcde") for _ in range(rng.randint(1, 4))) for _ in range(vocab_size)]
        for lang in langs
    }
    rows = []
    for _ in range(n_verses):
        row = {}
        for lang in langs:
            if rng.random() < 0.9:
                row[lang] = " ".join(rng.sample(vocab[lang], rng.randint(1, 4)))
        rows.append(row)
    return corpus_from(rows), vocab


def profiles(mapping):
    return {lang: LanguageProfile(lang, LineagePath(tuple(path))) for lang, path in mapping.items()}


def clustered_matrix(n_families=6, per_family=50, seed=0):
    """Within-family distances in [0.1, 0.5), cross-family in [1, 2)."""
    rng = np.random.default_rng(seed)
    langs = [f"l{f}x{i:03d}" for f in range(n_families) for i in range(per_family)]
    fam = np.repeat(np.arange(n_families), per_family)
    n = len(langs)
    vals = np.where(fam[:, None] == fam[None, :], rng.uniform(0.1, 0.5, (n, n)), rng.uniform(1, 2, (n, n)))
    vals = np.triu(vals, 1)
    vals = vals + vals.T
    lineages = profiles({lang: (f"Fam{fam[i]}", lang) for i, lang in enumerate(langs)})
    return DistanceMatrix(langs, vals, "synthetic", Kind.DISTANCE), lineages, [f"Fam{f}" for f in range(n_families)]


def random_matrix(n_families=6, per_family=50, seed=12345):
    rng = np.random.default_rng(seed)
    langs = [f"l{f}x{i:03d}" for f in range(n_families) for i in range(per_family)]
    n = len(langs)
    vals = np.triu(rng.uniform(0, 1, (n, n)), 1)
    vals = vals + vals.T
    lineages = profiles({lang: (f"Fam{i // per_family}", lang) for i, lang in enumerate(langs)})
    return DistanceMatrix(langs, vals, "random", Kind.DISTANCE), lineages, [f"Fam{f}" for f in range(n_families)]


def random_feature_table(seed, n_langs=40, n_feats=15):
    """Mix of coded, unknown and missing cells with per-language density."""
    from lingdist.model import UNKNOWN, FeatureTable

    rng = random.Random(seed)
    feats = [f"GB{i:03d}" for i in range(n_feats)]
    langs = [f"l{i:03d}" for i in range(n_langs)]
    cells = {}
    for lang in langs:
        p = rng.random()
        for f in feats:
            if rng.random() < p:
                cells[lang, f] = rng.randint(0, 2)
            elif rng.random() < 0.5:
                cells[lang, f] = UNKNOWN
    return FeatureTable(tuple(feats), tuple(langs), cells)


def write_fixture_files(directory):
    """Write one file of every input kind; returns name -> path."""
    from pathlib import Path

    from lingdist.conceptualizer import ConceptQuery, ConceptualizerConfig, conceptualize
    from lingdist.ingest import (
        to_text,
        write_concept_list,
        write_concept_vectors,
        write_distance_matrix,
        write_feature_table,
        write_lineages,
        write_parallel_corpus,
        write_wordlist,
    )
    from lingdist.model import WordListTable

    d = Path(directory)
    paths = {}

    def put(name, text):
        paths[name] = d / name
        paths[name].write_text(text, encoding="utf-8")

    corpus = kou_corpus(extra_langs=True)
    put("corpus.tsv", to_text(write_parallel_corpus, corpus))
    concepts = [("mouth", ("mouth",)), ("door", ("door",)), ("entrance", ("entrance", "entrancing"))]
    put("concepts.tsv", to_text(write_concept_list, concepts))
    queries = [ConceptQuery(c, q, "eng") for c, q in concepts]
    run = conceptualize(corpus, queries, ["en2", "ko", "zh"], config=ConceptualizerConfig(dims_per_concept=5))
    put("vectors.tsv", to_text(write_concept_vectors, run.vectors))

    rng = random.Random(5)
    words = {}
    for lang in ("aaa", "bbb", "ccc", "ddd"):
        for c in ("hand", "eye", "water", "stone"):
            words[lang, c] = "".join(rng.choice("ptkaeiou") for _ in range(rng.randint(2, 6)))
    del words["ddd", "stone"]
    put("wordlist.tsv", to_text(write_wordlist, WordListTable(words, ("hand", "eye", "water", "stone"))))

    put("features.csv", to_text(write_feature_table, random_feature_table(11, n_langs=30, n_feats=12)))

    m, lin, fams = clustered_matrix(n_families=4, per_family=12)
    put("matrix.csv", to_text(write_distance_matrix, m))
    put("lineages.tsv", to_text(write_lineages, lin))
    tree = profiles({
        "hun": HUN, "ekk": EKK, "fin": ("Uralic", "Finnic", "Coastal Finnic", "Finnish"),
        "cmn": ("Sino-Tibetan", "Sinitic", "Mandarin"), "yue": ("Sino-Tibetan", "Sinitic", "Cantonese"),
    })
    put("tree.tsv", to_text(write_lineages, tree))
    feature_lineages = profiles({f"l{i:03d}": (f"Fam{i % 3}", f"l{i:03d}") for i in range(30)})
    put("feature_lineages.tsv", to_text(write_lineages, feature_lineages))
    paths["families"] = ",".join(fams)
    return paths
