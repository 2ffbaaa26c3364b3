"""Lexical translation tables, word alignment, phrase extraction, and
phrase-table triangulation through a pivot language.

The lexical model is IBM Model 1 with a NULL source word: p(pair) =
prod_j (1/(l+1)) sum_i t(t_j | s_i). EM expected counts keep every row of
the table a distribution over the target words the source word co-occurs
with.

Phrase-table file format, one entry per line, sorted by source phrase then
target phrase, probabilities printed with 12 significant digits:

    source phrase ||| target phrase ||| probability
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass

from .corpus import ParallelCorpus
from .errors import ConfigError, DataError

NULL = "<null>"


@dataclass(frozen=True)
class LexicalTable:
    """t(target word | source word); includes a NULL source word."""

    probs: dict[str, dict[str, float]]

    def prob(self, tgt_word: str, src_word: str) -> float:
        row = self.probs.get(src_word)
        if row is None:
            return 0.0
        return row.get(tgt_word, 0.0)


@dataclass(frozen=True)
class AlignmentMatrix:
    """Word alignment links as (source index, target index) pairs."""

    links: frozenset[tuple[int, int]]


@dataclass
class PhraseTable:
    """phi(target phrase | source phrase) keyed by space-joined phrases."""

    entries: dict[str, dict[str, float]]
    max_phrase_len: int

    def targets(self, src_phrase: str) -> list[tuple[str, float]]:
        """Candidates for a source phrase, best first, ties by target text."""
        row = self.entries.get(src_phrase, {})
        return sorted(row.items(), key=lambda kv: (-kv[1], kv[0]))

    def validate(self) -> None:
        for src, row in self.entries.items():
            if not row:
                raise DataError(f"empty row for source phrase {src!r}")
            total = 0.0
            for tgt, p in row.items():
                if not 0.0 < p <= 1.0 + 1e-9:
                    raise DataError(
                        f"probability out of range for {src!r} ||| {tgt!r}: {p!r}")
                total += p
            if total > 1.0 + 1e-9:
                raise DataError(f"row for {src!r} sums to {total!r} > 1")


def initial_table(corpus: ParallelCorpus) -> LexicalTable:
    """The EM starting point: uniform over co-occurring words, per source
    word (NULL co-occurs with everything)."""
    cooc: dict[str, set[str]] = defaultdict(set)
    for src, tgt, _ in corpus.pairs:
        ttoks = tgt.tokens
        cooc[NULL].update(ttoks)
        for s in src.tokens:
            cooc[s].update(ttoks)
    probs = {}
    for s, tgts in cooc.items():
        u = 1.0 / len(tgts)
        probs[s] = {t: u for t in tgts}
    return LexicalTable(probs)


def train_model1(corpus: ParallelCorpus,
                 iterations: int = 20) -> tuple[LexicalTable, list[float]]:
    """EM for Model 1. Returns the table and the per-iteration corpus
    log-likelihood trace (computed under the parameters entering each
    iteration, so the trace is non-decreasing)."""
    if iterations < 1:
        raise ConfigError("iterations must be >= 1")
    if not corpus.pairs:
        raise DataError("cannot train a lexical table on an empty corpus")

    pairs = [([NULL] + src.tokens, tgt.tokens) for src, tgt, _ in corpus.pairs]
    t = initial_table(corpus).probs
    trace: list[float] = []

    for _ in range(iterations):
        counts: dict[str, dict[str, float]] = defaultdict(lambda: defaultdict(float))
        totals: dict[str, float] = defaultdict(float)
        ll = 0.0
        for stoks, ttoks in pairs:
            rows = [t[s] for s in stoks]
            log_len = math.log(len(stoks))
            for tt in ttoks:
                denom = 0.0
                for row in rows:
                    denom += row.get(tt, 0.0)
                ll += math.log(denom) - log_len
                for s, row in zip(stoks, rows):
                    p = row.get(tt, 0.0)
                    if p:
                        c = p / denom
                        counts[s][tt] += c
                        totals[s] += c
        trace.append(ll)
        t = {s: {tt: c / totals[s] for tt, c in row.items()}
             for s, row in counts.items()}

    return LexicalTable(t), trace


def viterbi_align(table: LexicalTable, pair) -> AlignmentMatrix:
    """Link each target word to its argmax source word, or to NULL
    (producing no link). Ties go to the leftmost source position; a real
    source word beats NULL on ties. A target word with zero probability
    everywhere links nowhere."""
    src, tgt = pair[0], pair[1]
    links = set()
    probs = table.probs
    null_row = probs.get(NULL, {})
    rows = [(i, probs.get(s, {})) for i, s in enumerate(src.tokens)]
    for j, tt in enumerate(tgt.tokens):
        best_i = -1
        best_p = 0.0
        for i, row in rows:
            p = row.get(tt, 0.0)
            if p > best_p:
                best_p = p
                best_i = i
        if best_i >= 0 and best_p >= null_row.get(tt, 0.0):
            links.add((best_i, j))
    return AlignmentMatrix(frozenset(links))


def align_corpus(table: LexicalTable, corpus: ParallelCorpus) -> list[AlignmentMatrix]:
    return [viterbi_align(table, pair) for pair in corpus.pairs]


def extract_phrases(corpus: ParallelCorpus, alignments,
                    max_phrase_len: int = 4) -> PhraseTable:
    """Extract all alignment-consistent phrase pairs up to max_phrase_len
    tokens per side and score them by relative frequency
    phi = count(src, tgt) / count(src).

    A span pair is consistent when it contains at least one link and no
    link connects a word inside either span to a word outside the other.
    Unaligned boundary words may extend a target span.
    """
    alignments = list(alignments)
    if len(alignments) != len(corpus.pairs):
        raise DataError(
            f"{len(corpus.pairs)} pairs but {len(alignments)} alignments")
    if max_phrase_len < 1:
        raise ConfigError("max_phrase_len must be >= 1")

    pair_counts: dict[str, Counter] = defaultdict(Counter)
    for (src, tgt, _), al in zip(corpus.pairs, alignments):
        stoks, ttoks = src.tokens, tgt.tokens
        links = sorted(al.links)
        for i, j in links:
            if i >= len(stoks) or j >= len(ttoks) or i < 0 or j < 0:
                raise DataError(f"alignment link {(i, j)} out of bounds")
        aligned_tgt = {j for _, j in links}
        for i1 in range(len(stoks)):
            for i2 in range(i1, min(i1 + max_phrase_len, len(stoks))):
                inside = [(i, j) for i, j in links if i1 <= i <= i2]
                if not inside:
                    continue
                j_min = min(j for _, j in inside)
                j_max = max(j for _, j in inside)
                if any(j_min <= j <= j_max and not i1 <= i <= i2
                       for i, j in links):
                    continue
                src_phrase = " ".join(stoks[i1:i2 + 1])
                # grow the target span over unaligned boundary words
                j1 = j_min
                while True:
                    j2 = j_max
                    while True:
                        if j2 - j1 < max_phrase_len:
                            tgt_phrase = " ".join(ttoks[j1:j2 + 1])
                            pair_counts[src_phrase][tgt_phrase] += 1
                        j2 += 1
                        if j2 >= len(ttoks) or j2 in aligned_tgt:
                            break
                    j1 -= 1
                    if j1 < 0 or j1 in aligned_tgt:
                        break

    entries = {}
    for src_phrase, row in pair_counts.items():
        total = sum(row.values())
        entries[src_phrase] = {t: c / total for t, c in row.items()}
    return PhraseTable(entries, max_phrase_len)


def triangulate(src_pivot: PhraseTable, pivot_tgt: PhraseTable,
                floor: float = 1e-6) -> PhraseTable:
    """Compose two phrase tables through their shared pivot language:

        phi(e | n) = sum_h phi(e | h) * phi(h | n)

    summed over pivot phrases h present in both tables, in lexicographic
    order of h. Output entries with accumulated mass below floor are
    dropped."""
    pt = pivot_tgt.entries
    out: dict[str, dict[str, float]] = {}
    for n_phrase, pivots in src_pivot.entries.items():
        acc: dict[str, float] = {}
        for h in sorted(pivots):
            row = pt.get(h)
            if not row:
                continue
            p_hn = pivots[h]
            for e, p_eh in row.items():
                acc[e] = acc.get(e, 0.0) + p_eh * p_hn
        acc = {e: p for e, p in acc.items() if p >= floor}
        if acc:
            out[n_phrase] = acc
    return PhraseTable(out, src_pivot.max_phrase_len)


def prune(table: PhraseTable, top_k: int | None = 20,
          floor: float = 0.0) -> PhraseTable:
    """Keep the top_k most probable targets per source phrase (ties broken
    by lexicographic target) and drop entries below floor. top_k=None means
    unlimited; floor=0 with top_k=None is the identity."""
    if top_k is not None and top_k < 1:
        raise ConfigError("top_k must be >= 1")
    out = {}
    for src_phrase, row in table.entries.items():
        items = sorted(row.items(), key=lambda kv: (-kv[1], kv[0]))
        if top_k is not None:
            items = items[:top_k]
        items = [(t, p) for t, p in items if p >= floor]
        if items:
            out[src_phrase] = dict(items)
    return PhraseTable(out, table.max_phrase_len)


def save_phrase_table(table: PhraseTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for src_phrase in sorted(table.entries):
            row = table.entries[src_phrase]
            for tgt_phrase in sorted(row):
                fh.write(f"{src_phrase} ||| {tgt_phrase} ||| "
                         f"{row[tgt_phrase]:.12g}\n")


def load_phrase_table(path) -> PhraseTable:
    entries: dict[str, dict[str, float]] = {}
    max_len = 1
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(" ||| ")
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: malformed phrase table line")
            src_phrase, tgt_phrase, prob_text = parts
            try:
                p = float(prob_text)
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: bad probability {prob_text!r}") from None
            entries.setdefault(src_phrase, {})[tgt_phrase] = p
            max_len = max(max_len, len(src_phrase.split()))
    table = PhraseTable(entries, max_len)
    table.validate()
    return table
