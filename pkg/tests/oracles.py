"""Independent reference implementations used as test oracles.

Written without the package's index, sparse matrix, vectorized statistic
or string shortcuts, so agreement is meaningful.
"""

from fractions import Fraction

from lingdist.conceptualizer import BOUNDARY, CorpusIndex, greedy_search


def naive_levenshtein(a, b):
    """Full-table Wagner-Fischer, no shortcuts."""
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        table[i][0] = i
    for j in range(len(b) + 1):
        table[0][j] = j
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            table[i][j] = min(table[i - 1][j] + 1, table[i][j - 1] + 1,
                              table[i - 1][j - 1] + (a[i - 1] != b[j - 1]))
    return table[len(a)][len(b)]


def brute_common_substring(a, b):
    """Longest substring of ``a`` that also occurs in ``b``, by enumeration."""
    best = 0
    for i in range(len(a)):
        for j in range(i + 1, len(a) + 1):
            if a[i:j] in b:
                best = max(best, j - i)
    return best


def exact_chi2(n11, na, nb, n):
    if na in (0, n) or nb in (0, n) or Fraction(n11) <= Fraction(na * nb, n):
        return Fraction(0)
    d = n11 * (n - na - nb + n11) - (na - n11) * (nb - n11)
    return Fraction(n * d * d, na * (n - na) * nb * (n - nb))


def grams_of(text, lo, hi):
    out = set()
    for tok in text.split():
        w = BOUNDARY + tok + BOUNDARY
        for i in range(len(w)):
            for j in range(i + lo, min(i + hi, len(w)) + 1):
                out.add(w[i:j])
    return out


def marked(text):
    return " ".join(f"{BOUNDARY}{t}{BOUNDARY}" for t in text.split())


def brute_greedy(corpus, seed_lang, seed_strings, cand_lang, cfg, max_iter):
    verses = corpus.verses
    universe = [v for v in sorted(verses) if seed_lang in verses[v] and cand_lang in verses[v]]
    n = len(universe)
    seed = {v for v in universe if any(s in marked(verses[v][seed_lang]) for s in seed_strings)}
    occurs = {}
    for v in universe:
        for g in grams_of(verses[v][cand_lang], cfg.min_n, cfg.max_n):
            occurs.setdefault(g, set()).add(v)
    cands = {g: vs for g, vs in occurs.items() if len(vs) >= cfg.min_count}
    picks = []
    for _ in range(max_iter):
        if not seed:
            break
        scored = [(exact_chi2(len(vs & seed), len(vs), len(seed), n), g) for g, vs in cands.items()]
        best = max(s for s, _ in scored)
        name = min(g for s, g in scored if s == best)
        if best < Fraction(cfg.min_score) or not cands[name] & seed:
            break
        picks.append((name, float(best)))
        seed -= cands[name]
    return picks, len(cands)


def index_picks(corpus, seed_lang, seed_strings, cand_lang, cfg, max_iter):
    """Greedy picks as the package makes them (the side under test)."""
    index = CorpusIndex(corpus, cfg)
    universe = index.universe(seed_lang, cand_lang)
    seed = index.language(seed_lang).containing(seed_strings, universe)
    names, rows = index.candidates(cand_lang, universe, cfg.min_count)
    return greedy_search(names, rows, seed, universe, max_iter, cfg.min_score)
