"""Exception hierarchy.

Every error raised for bad input data derives from :class:`LingDistError`;
the CLI maps those to exit code 1 and anything else to exit code 2.
"""


class LingDistError(Exception):
    """Base class for user/data errors."""


# -- ingestion ---------------------------------------------------------------

class ParseError(LingDistError):
    """A file violates its grammar. ``line_no`` is 1-based."""

    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class MalformedHeader(ParseError):
    pass


class MalformedRow(ParseError):
    pass


class DuplicateEntry(ParseError):
    def __init__(self, lang, concept, line_no=None):
        self.lang, self.concept = lang, concept
        super().__init__(f"duplicate entry for ({lang}, {concept})", line_no)


class EmptyForm(ParseError):
    pass


class BadCell(ParseError):
    def __init__(self, lang, feature, raw, line_no=None):
        self.lang, self.feature, self.raw = lang, feature, raw
        super().__init__(f"bad cell {raw!r} for ({lang}, {feature})", line_no)


class DuplicateLanguageRow(ParseError):
    def __init__(self, lang, line_no=None):
        self.lang = lang
        super().__init__(f"duplicate row for language {lang}", line_no)


class DuplicateLanguage(ParseError):
    def __init__(self, lang, line_no=None):
        self.lang = lang
        super().__init__(f"duplicate language {lang}", line_no)


class EmptyPath(ParseError):
    def __init__(self, lang, line_no=None):
        self.lang = lang
        super().__init__(f"empty lineage path for {lang}", line_no)


class DimOutOfRange(ParseError):
    pass


class ValueOutOfRange(ParseError):
    pass


class MissingLabelBlock(ParseError):
    def __init__(self, concept, line_no=None):
        self.concept = concept
        super().__init__(f"no label block for concept {concept!r}", line_no)


class LabelConflict(ParseError):
    pass


class DuplicateVerseText(ParseError):
    def __init__(self, verse_id, lang, line_no=None):
        self.verse_id, self.lang = verse_id, lang
        super().__init__(f"duplicate text for verse {verse_id} in {lang}", line_no)


class AsymmetryDetected(ParseError):
    def __init__(self, i, j, delta):
        self.i, self.j, self.delta = i, j, delta
        super().__init__(f"asymmetric matrix at ({i}, {j}): delta={delta:.3g}")


class NonzeroDiagonal(ParseError):
    pass


# -- model / metrics ---------------------------------------------------------

class InvalidValue(LingDistError):
    """A container was built with data breaking one of its invariants."""


class MissingConcept(LingDistError):
    def __init__(self, lang, concept):
        self.lang, self.concept = lang, concept
        super().__init__(f"{lang} has no vector for concept {concept!r}")


class NullVector(LingDistError):
    pass


class LengthMismatch(LingDistError):
    pass


class BothEmpty(LingDistError):
    pass


class NoSharedConcepts(LingDistError):
    def __init__(self, x, y):
        self.x, self.y = x, y
        super().__init__(f"{x} and {y} share no concepts")


class NotComparable(LingDistError):
    def __init__(self, x, y, missing_features):
        self.x, self.y = x, y
        self.missing_features = tuple(missing_features)
        shown = ", ".join(self.missing_features[:5])
        more = "..." if len(self.missing_features) > 5 else ""
        super().__init__(f"{x} and {y} not comparable; uncoded: {shown}{more}")


class UnknownMetric(LingDistError):
    pass


class PairError(LingDistError):
    """A per-pair failure while filling a distance matrix."""

    def __init__(self, x, y, cause):
        self.x, self.y, self.cause = x, y, cause
        super().__init__(f"pair ({x}, {y}): {cause}")


# -- conceptualizer ----------------------------------------------------------

class ConceptNotInSource(LingDistError):
    def __init__(self, concept, target=None):
        self.concept, self.target = concept, target
        where = f" (universe shared with {target})" if target else ""
        super().__init__(f"no source verse matches concept {concept!r}{where}")


# -- evaluation --------------------------------------------------------------

class KTooLarge(LingDistError):
    pass


class UnknownLanguage(LingDistError):
    pass


class MissingLineage(LingDistError):
    def __init__(self, lang):
        self.lang = lang
        super().__init__(f"no lineage for language {lang}")


class EmptyFamily(LingDistError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"family {name!r} has no languages in the data")


class NTooLarge(LingDistError):
    pass
