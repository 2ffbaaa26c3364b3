"""Interpolated n-gram language model and a monotone phrase-based beam
decoder over a pruned phrase table.

The LM is recursively interpolated: the unigram level is add-1 smoothed
over the vocabulary (plus UNK), and each higher order k mixes its
maximum-likelihood estimate with the level below,
p_k = lam * ml_k + (1 - lam) * p_{k-1}, falling back to p_{k-1} entirely
for unseen histories. Every conditional therefore sums to exactly 1 over
vocab + UNK.

LM file format: header lines "lm v1", "order N", "interp l2 ... lN", then
one count per line as "k<TAB>context<TAB>word<TAB>count" (context words
space-joined, empty for unigrams).

The decoder covers the source strictly left to right with phrases from the
table. A hypothesis scores
    lambda_tm * sum log phi + lambda_lm * log p_lm + word_penalty * length
where source tokens absent from the table (as single-token phrases) are
copied through verbatim with a fixed OOV log-penalty in place of log phi.
Hypotheses with identical target strings and coverage are recombined
keeping the best score, which is lossless for distinct-string k-best lists.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass

from .corpus import MonolingualCorpus, Sentence
from .errors import ConfigError, DataError
from .subword import BpeModel
from .tm import PhraseTable

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

OOV_LOG_PENALTY = -10.0


class NGramLm:
    """Count-based n-gram model with recursive interpolation."""

    def __init__(self, order: int, counts, vocab, interp):
        # counts: {k: {context tuple: {word: count}}} for k = 1..order
        self.order = order
        self.counts = counts
        self.vocab = frozenset(vocab)
        self.interp = tuple(interp)  # lambdas for orders 2..order
        self._totals = {
            k: {ctx: sum(row.values()) for ctx, row in by_ctx.items()}
            for k, by_ctx in counts.items()
        }
        n = self._totals[1].get((), 0)
        self._uni_denom = n + len(self.vocab)
        self._uni_counts = counts[1].get((), {})

    def _norm(self, token: str) -> str:
        if token == BOS or token in self.vocab:
            return token
        return UNK

    def word_logprob(self, context, word: str) -> float:
        """log p(word | context); context is the raw preceding tokens."""
        w = self._norm(word)
        p = (self._uni_counts.get(w, 0) + 1) / self._uni_denom
        if self.order == 1:
            return math.log(p)
        ctx = tuple(self._norm(t) for t in context[-(self.order - 1):])
        for k in range(2, self.order + 1):
            if len(ctx) < k - 1:
                break
            sub = ctx[len(ctx) - (k - 1):]
            row = self.counts[k].get(sub)
            if row is None:
                continue
            lam = self.interp[k - 2]
            p = lam * (row.get(w, 0) / self._totals[k][sub]) + (1 - lam) * p
        return math.log(p)

    def start_context(self) -> tuple[str, ...]:
        return (BOS,) * (self.order - 1)


def train_lm(mono: MonolingualCorpus, order: int = 3,
             interp: float = 0.7) -> NGramLm:
    """Count n-grams up to the given order with sentence-boundary padding."""
    if order < 1:
        raise ConfigError("order must be >= 1")
    if not 0.0 < interp < 1.0:
        raise ConfigError("interp must be in (0, 1)")
    if not mono.sentences:
        raise DataError("cannot train a language model on an empty corpus")

    counts: dict[int, dict] = {k: defaultdict(Counter) for k in range(1, order + 1)}
    vocab: set[str] = set()
    for sent in mono.sentences:
        toks = sent.tokens
        vocab.update(toks)
        padded = [BOS] * (order - 1) + toks + [EOS]
        for idx in range(order - 1, len(padded)):
            word = padded[idx]
            for k in range(1, order + 1):
                ctx = tuple(padded[idx - (k - 1):idx])
                counts[k][ctx][word] += 1
    vocab.add(EOS)
    vocab.add(UNK)
    counts = {k: dict(by_ctx) for k, by_ctx in counts.items()}
    return NGramLm(order, counts, vocab, (interp,) * (order - 1))


def logprob(lm: NGramLm, sentence) -> float:
    """Log-probability of a sentence including the end-of-sentence event."""
    tokens = sentence.tokens if isinstance(sentence, Sentence) else list(sentence)
    ctx = lm.start_context()
    total = 0.0
    for tok in list(tokens) + [EOS]:
        total += lm.word_logprob(ctx, tok)
        if lm.order > 1:
            ctx = (ctx + (tok,))[-(lm.order - 1):]
    return total


def perplexity(lm: NGramLm, sentence) -> float:
    tokens = sentence.tokens if isinstance(sentence, Sentence) else list(sentence)
    events = len(tokens) + 1
    return math.exp(-logprob(lm, sentence) / events)


def save_lm(lm: NGramLm, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("lm v1\n")
        fh.write(f"order {lm.order}\n")
        fh.write("interp " + " ".join(repr(x) for x in lm.interp) + "\n")
        for k in range(1, lm.order + 1):
            by_ctx = lm.counts.get(k, {})
            for ctx in sorted(by_ctx):
                row = by_ctx[ctx]
                ctx_text = " ".join(ctx)
                for word in sorted(row):
                    fh.write(f"{k}\t{ctx_text}\t{word}\t{row[word]}\n")


def load_lm(path) -> NGramLm:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if len(lines) < 3 or lines[0] != "lm v1" or not lines[1].startswith("order "):
        raise DataError(f"not an lm file: {path}")
    order = int(lines[1].split()[1])
    interp_parts = lines[2].split()
    if interp_parts[0] != "interp":
        raise DataError(f"missing interp line in {path}")
    interp = tuple(float(x) for x in interp_parts[1:])
    counts: dict[int, dict] = {k: {} for k in range(1, order + 1)}
    vocab: set[str] = set()
    for line in lines[3:]:
        if not line:
            continue
        k_text, ctx_text, word, count = line.split("\t")
        k = int(k_text)
        ctx = tuple(ctx_text.split())
        counts[k].setdefault(ctx, {})[word] = int(count)
        if word != EOS:
            vocab.add(word)
    vocab.add(EOS)
    vocab.add(UNK)
    vocab.discard(BOS)
    return NGramLm(order, counts, vocab, interp)


@dataclass(frozen=True)
class Weights:
    tm: float = 1.0
    lm: float = 1.0
    word_penalty: float = 0.0
    oov_log_penalty: float = OOV_LOG_PENALTY


@dataclass
class TranslationModel:
    phrase_table: PhraseTable
    lm: NGramLm
    weights: Weights = Weights()
    bpe: BpeModel | None = None
    src_lang: str = ""
    tgt_lang: str = ""


@dataclass(frozen=True)
class Segment:
    """One back-trace step: source span [start, end) emitted tgt_tokens
    with the given translation-model log-probability (the OOV penalty for
    copied-through tokens)."""

    src_start: int
    src_end: int
    tgt_tokens: tuple[str, ...]
    tm_logprob: float
    oov: bool = False


@dataclass(frozen=True)
class Hypothesis:
    tokens: tuple[str, ...]
    score: float
    segments: tuple[Segment, ...]

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


NBestList = list[Hypothesis]


class _Partial:
    __slots__ = ("score", "tokens", "ctx", "segments")

    def __init__(self, score, tokens, ctx, segments):
        self.score = score
        self.tokens = tokens
        self.ctx = ctx
        self.segments = segments


def decode(model: TranslationModel, source, k: int = 1,
           beam: int | None = None) -> NBestList:
    """Monotone beam decode; returns up to k hypotheses with distinct
    target strings, best first (ties broken by target string).

    beam bounds the hypotheses kept per source position; None means
    unlimited (exhaustive over the table). beam must be >= k so the list
    cannot lose strings the caller asked for.
    """
    if k < 1:
        raise ConfigError("k must be >= 1")
    if beam is not None and beam < k:
        raise ConfigError("beam must be >= k")
    src = source.tokens if isinstance(source, Sentence) else list(source)
    n = len(src)
    w = model.weights
    lm = model.lm
    table = model.phrase_table.entries
    max_len = model.phrase_table.max_phrase_len
    keep_ctx = lm.order - 1

    stacks: list[dict[tuple[str, ...], _Partial]] = [dict() for _ in range(n + 1)]
    stacks[0][()] = _Partial(0.0, (), lm.start_context(), ())

    for i in range(n):
        if not stacks[i]:
            continue
        hyps = sorted(stacks[i].values(), key=lambda h: (-h.score, h.tokens))
        if beam is not None:
            hyps = hyps[:beam]

        options = []
        for j in range(i + 1, min(i + max_len, n) + 1):
            row = table.get(" ".join(src[i:j]))
            if row:
                for tgt_phrase, phi in sorted(row.items()):
                    options.append((j, tuple(tgt_phrase.split()),
                                    math.log(phi), False))
        if src[i] not in table:
            options.append((i + 1, (src[i],), w.oov_log_penalty, True))

        for hyp in hyps:
            for j, tgt_tokens, tm_lp, oov in options:
                score = hyp.score + w.tm * tm_lp
                ctx = hyp.ctx
                for tok in tgt_tokens:
                    score += w.lm * lm.word_logprob(ctx, tok)
                    if keep_ctx:
                        ctx = (ctx + (tok,))[-keep_ctx:]
                score += w.word_penalty * len(tgt_tokens)
                tokens = hyp.tokens + tgt_tokens
                prev = stacks[j].get(tokens)
                if prev is None or score > prev.score:
                    seg = Segment(i, j, tgt_tokens, tm_lp, oov)
                    stacks[j][tokens] = _Partial(score, tokens, ctx,
                                                 hyp.segments + (seg,))

    finals = []
    for hyp in stacks[n].values():
        score = hyp.score + w.lm * lm.word_logprob(hyp.ctx, EOS)
        finals.append(Hypothesis(hyp.tokens, score, hyp.segments))
    finals.sort(key=lambda h: (-h.score, h.tokens))
    return finals[:k]


def recompute_score(model: TranslationModel, hypothesis: Hypothesis) -> float:
    """Re-derive a hypothesis score from its back-trace; matches the stored
    score because the accumulation order is identical."""
    w = model.weights
    lm = model.lm
    keep_ctx = lm.order - 1
    score = 0.0
    ctx = lm.start_context()
    for seg in hypothesis.segments:
        score += w.tm * seg.tm_logprob
        for tok in seg.tgt_tokens:
            score += w.lm * lm.word_logprob(ctx, tok)
            if keep_ctx:
                ctx = (ctx + (tok,))[-keep_ctx:]
        score += w.word_penalty * len(seg.tgt_tokens)
    score += w.lm * lm.word_logprob(ctx, EOS)
    return score
