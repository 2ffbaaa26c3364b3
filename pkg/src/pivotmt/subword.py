"""Joint byte-pair encoding over pooled corpora.

A model is an ordered list of symbol-pair merges learned greedily from
word-frequency counts pooled over all input corpora, so two languages
share one symbol inventory. Words end in a boundary marker appended to the
word-final symbol; merges never cross word boundaries.

Model file format: a header line "bpe v1 <marker>" followed by one merge
per line as two space-separated symbols.
"""

from __future__ import annotations

import heapq
from collections import Counter

from .corpus import Sentence
from .errors import ConfigError, DataError

BOUNDARY_MARKER = "</w>"

# list of subword symbols; word boundaries recoverable via the marker
TokenSequence = list[str]


class BpeModel:
    """Ordered merges plus the symbol vocabulary they induce.

    vocab is training-time metadata (initial characters plus merge outputs);
    encoding only replays the merge list, so a model reloaded from disk
    segments identically even though never-merged characters are absent
    from its vocab.
    """

    def __init__(self, merges, vocab, boundary_marker: str = BOUNDARY_MARKER):
        self.merges: tuple[tuple[str, str], ...] = tuple(merges)
        self.vocab: frozenset[str] = frozenset(vocab)
        self.boundary_marker = boundary_marker
        # merge list annotated with concatenations, plus a per-word cache;
        # both are derived state, invisible to equality and persistence
        self._merge_strings = tuple((l, r, l + r) for l, r in self.merges)
        self._word_cache: dict[str, tuple[str, ...]] = {}

    def __repr__(self):
        return (f"BpeModel({len(self.merges)} merges, "
                f"{len(self.vocab)} symbols, marker={self.boundary_marker!r})")


def _word_symbols(word: str, marker: str) -> tuple[str, ...]:
    chars = list(word)
    chars[-1] = chars[-1] + marker
    return tuple(chars)


def _merge_word(syms: tuple[str, ...], left: str, right: str,
                merged: str) -> tuple[str, ...]:
    """Replace adjacent (left, right) by merged, left to right, exhaustively."""
    out = []
    i = 0
    n = len(syms)
    while i < n:
        if i + 1 < n and syms[i] == left and syms[i + 1] == right:
            out.append(merged)
            i += 2
        else:
            out.append(syms[i])
            i += 1
    return tuple(out)


def _count_words(corpora) -> Counter:
    freq: Counter = Counter()
    for corpus in corpora:
        for sent in corpus.sentences:
            freq.update(sent.tokens)
    return freq


def learn_joint_bpe(corpora, num_merges: int) -> BpeModel:
    """Learn merges greedily by most frequent adjacent symbol pair.

    Ties break lexicographically on (left, right). Learning stops after
    num_merges merges or when no adjacent pair is left, whichever comes
    first. The result depends only on pooled word frequencies, so learning
    over [A, B] equals learning over their concatenation.
    """
    if num_merges < 0:
        raise ConfigError("num_merges must be >= 0")
    word_freq = _count_words(corpora)
    if not word_freq:
        raise DataError("cannot learn subword merges from empty corpora")

    vocab: set[str] = set()
    segs: dict[str, tuple[str, ...]] = {}
    for word in word_freq:
        syms = _word_symbols(word, BOUNDARY_MARKER)
        segs[word] = syms
        vocab.update(syms)

    # pair -> pooled frequency, and which word types currently contain it
    pair_counts: Counter = Counter()
    pair_words: dict[tuple[str, str], set[str]] = {}
    for word, syms in segs.items():
        freq = word_freq[word]
        for pair in zip(syms, syms[1:]):
            pair_counts[pair] += freq
            pair_words.setdefault(pair, set()).add(word)

    # lazy max-heap: stale entries are re-pushed with their current count,
    # so the top valid entry is always the true (count, lexicographic) best
    heap = [(-count, pair) for pair, count in pair_counts.items()]
    heapq.heapify(heap)

    merges: list[tuple[str, str]] = []
    while len(merges) < num_merges and heap:
        neg, pair = heapq.heappop(heap)
        count = pair_counts.get(pair, 0)
        if count <= 0:
            continue
        if -neg != count:
            heapq.heappush(heap, (-count, pair))
            continue
        merges.append(pair)
        left, right = pair
        merged = left + right
        vocab.add(merged)
        touched: set[tuple[str, str]] = set()
        for word in list(pair_words.get(pair, ())):
            freq = word_freq[word]
            old = segs[word]
            for p in zip(old, old[1:]):
                pair_counts[p] -= freq
                pair_words[p].discard(word)
                touched.add(p)
            new = _merge_word(old, left, right, merged)
            segs[word] = new
            for p in zip(new, new[1:]):
                pair_counts[p] += freq
                pair_words.setdefault(p, set()).add(word)
                touched.add(p)
        for p in touched:
            if pair_counts[p] > 0:
                heapq.heappush(heap, (-pair_counts[p], p))

    return BpeModel(merges, vocab)


def _encode_word(word: str, model: BpeModel) -> tuple[str, ...]:
    syms = _word_symbols(word, model.boundary_marker)
    if len(syms) == 1:
        return syms
    # the concatenation of the symbols never changes, so a merge can only
    # apply if its joined string occurs in the marked word
    full = word + model.boundary_marker
    for left, right, merged in model._merge_strings:
        if len(syms) == 1:
            break
        if merged in full:
            syms = _merge_word(syms, left, right, merged)
    return syms


def encode(model: BpeModel, sentence: Sentence) -> TokenSequence:
    """Split a sentence into subword symbols by applying the merges in
    learned order, each exhaustively. Characters never seen in training
    pass through as singleton symbols."""
    cache = model._word_cache
    out: TokenSequence = []
    for word in sentence.tokens:
        syms = cache.get(word)
        if syms is None:
            syms = _encode_word(word, model)
            cache[word] = syms
        out.extend(syms)
    return out


def decode(model: BpeModel, tokens) -> Sentence:
    """Invert encode: concatenate symbols and split words at the marker."""
    joined = "".join(tokens)
    words = [w for w in joined.split(model.boundary_marker) if w]
    return Sentence.from_tokens(words)


def save_bpe(model: BpeModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"bpe v1 {model.boundary_marker}\n")
        for left, right in model.merges:
            fh.write(f"{left} {right}\n")


def load_bpe(path) -> BpeModel:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("bpe v1 "):
        raise DataError(f"not a bpe model file: {path}")
    marker = lines[0][len("bpe v1 "):]
    if not marker:
        raise DataError(f"bpe model header missing boundary marker: {path}")
    merges = []
    vocab: set[str] = set()
    for line in lines[1:]:
        parts = line.split(" ")
        if len(parts) != 2:
            raise DataError(f"malformed merge line {line!r} in {path}")
        merges.append((parts[0], parts[1]))
        vocab.update(parts)
        vocab.add(parts[0] + parts[1])
    return BpeModel(merges, vocab, marker)
