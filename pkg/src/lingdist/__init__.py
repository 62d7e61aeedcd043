"""Language distance toolkit: typological, lexical, genealogical and
conceptual language representations, pairwise distance matrices, and the
kNN family-classification evaluation built on them."""

from .model import (
    UNKNOWN,
    CellState,
    ConceptVectorSet,
    DistanceMatrix,
    FeatureTable,
    Kind,
    LanguageProfile,
    LineagePath,
    WordListTable,
    binarize,
    concatenate_language_vector,
    top_level_family,
)
from .ingest import VerseAlignedCorpus

__version__ = "0.1.0"

__all__ = [
    "UNKNOWN",
    "CellState",
    "ConceptVectorSet",
    "DistanceMatrix",
    "FeatureTable",
    "Kind",
    "LanguageProfile",
    "LineagePath",
    "VerseAlignedCorpus",
    "WordListTable",
    "binarize",
    "concatenate_language_vector",
    "top_level_family",
]
