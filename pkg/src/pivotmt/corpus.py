"""Corpus handling: parallel/monolingual containers, load/save, cleaning,
splitting, concatenation, statistics, and a seeded synthetic trilingual
generator used by the end-to-end experiment.

File conventions: a corpus on disk is a pair of line-aligned UTF-8 text
files sharing a stem with language-tag suffixes (name.src / name.piv).
Statistics are emitted both as a key:value text report and as a single-line
JSON record with keys n_pairs, src_tokens, tgt_tokens, provenance.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass

from .errors import AlignmentError, ConfigError, DataError

PROV_REAL = "real"
PROV_SYNTH_SRC = "synthetic-src"
PROV_SYNTH_TGT = "synthetic-tgt"
PROV_BACKTRANSLATED = "backtranslated"
PROVENANCES = (PROV_REAL, PROV_SYNTH_SRC, PROV_SYNTH_TGT, PROV_BACKTRANSLATED)


class Sentence:
    """A sentence holding whitespace-normalized text and cached tokens.

    Tokens are the whitespace-split pieces of the text; joining them with
    single spaces reproduces the text exactly.
    """

    __slots__ = ("text", "_tokens")

    def __init__(self, text: str):
        self.text = " ".join(text.split())
        self._tokens = None

    @classmethod
    def from_tokens(cls, tokens) -> "Sentence":
        return cls(" ".join(tokens))

    @property
    def tokens(self) -> list[str]:
        if self._tokens is None:
            self._tokens = self.text.split()
        return self._tokens

    def __eq__(self, other):
        return isinstance(other, Sentence) and self.text == other.text

    def __hash__(self):
        return hash(self.text)

    def __repr__(self):
        return f"Sentence({self.text!r})"


# (source sentence, target sentence, provenance tag)
Pair = tuple[Sentence, Sentence, str]


def _check_provenance(tag: str) -> None:
    if tag not in PROVENANCES:
        raise DataError(f"unknown provenance tag {tag!r}")


@dataclass(frozen=True)
class ParallelCorpus:
    """An ordered list of aligned sentence pairs with per-pair provenance."""

    src_lang: str
    tgt_lang: str
    pairs: tuple[Pair, ...]

    def __post_init__(self):
        for src, tgt, prov in self.pairs:
            if src is None or tgt is None:
                raise DataError("parallel pair with a missing side")
            _check_provenance(prov)

    def __len__(self):
        return len(self.pairs)


@dataclass(frozen=True)
class MonolingualCorpus:
    lang: str
    sentences: tuple[Sentence, ...]

    def __len__(self):
        return len(self.sentences)


@dataclass(frozen=True)
class CleaningConfig:
    min_tokens: int = 1
    max_tokens: int = 80
    max_len_ratio: float = 3.0
    drop_copies: bool = True

    def __post_init__(self):
        if self.min_tokens < 1:
            raise ConfigError("min_tokens must be >= 1")
        if self.max_tokens < self.min_tokens:
            raise ConfigError("max_tokens must be >= min_tokens")
        if self.max_len_ratio < 1.0:
            raise ConfigError("max_len_ratio must be >= 1.0")


@dataclass(frozen=True)
class CorpusStats:
    n_pairs: int
    src_tokens: int
    tgt_tokens: int
    by_provenance: dict[str, int]

    def text_report(self) -> str:
        lines = [
            f"n_pairs: {self.n_pairs}",
            f"src_tokens: {self.src_tokens}",
            f"tgt_tokens: {self.tgt_tokens}",
        ]
        for tag in sorted(self.by_provenance):
            lines.append(f"provenance.{tag}: {self.by_provenance[tag]}")
        return "\n".join(lines)

    def json_record(self) -> str:
        rec = {
            "n_pairs": self.n_pairs,
            "src_tokens": self.src_tokens,
            "tgt_tokens": self.tgt_tokens,
            "provenance": dict(sorted(self.by_provenance.items())),
        }
        return json.dumps(rec, sort_keys=True)


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()


def load_parallel(src_path, tgt_path, src_lang: str, tgt_lang: str,
                  provenance: str = PROV_REAL) -> ParallelCorpus:
    """Load a line-aligned pair of files; mismatched line counts are an error."""
    src_lines = _read_lines(src_path)
    tgt_lines = _read_lines(tgt_path)
    if len(src_lines) != len(tgt_lines):
        raise AlignmentError(
            f"line count mismatch: {src_path} has {len(src_lines)} lines, "
            f"{tgt_path} has {len(tgt_lines)}")
    pairs = tuple((Sentence(s), Sentence(t), provenance)
                  for s, t in zip(src_lines, tgt_lines))
    return ParallelCorpus(src_lang, tgt_lang, pairs)


def save_parallel(corpus: ParallelCorpus, src_path, tgt_path) -> None:
    with open(src_path, "w", encoding="utf-8") as fs, \
         open(tgt_path, "w", encoding="utf-8") as ft:
        for src, tgt, _ in corpus.pairs:
            fs.write(src.text + "\n")
            ft.write(tgt.text + "\n")


def load_monolingual(path, lang: str) -> MonolingualCorpus:
    return MonolingualCorpus(lang, tuple(Sentence(l) for l in _read_lines(path)))


def save_monolingual(mono: MonolingualCorpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sent in mono.sentences:
            fh.write(sent.text + "\n")


def side(corpus: ParallelCorpus, which: str) -> MonolingualCorpus:
    """Project one side of a parallel corpus as a monolingual corpus."""
    if which == "src":
        return MonolingualCorpus(corpus.src_lang,
                                 tuple(p[0] for p in corpus.pairs))
    if which == "tgt":
        return MonolingualCorpus(corpus.tgt_lang,
                                 tuple(p[1] for p in corpus.pairs))
    raise ConfigError(f"side must be 'src' or 'tgt', got {which!r}")


def flipped(corpus: ParallelCorpus) -> ParallelCorpus:
    """Swap source and target sides (used to train reverse models)."""
    return ParallelCorpus(corpus.tgt_lang, corpus.src_lang,
                          tuple((t, s, prov) for s, t, prov in corpus.pairs))


def clean(corpus: ParallelCorpus,
          cfg: CleaningConfig = CleaningConfig()) -> tuple[ParallelCorpus, dict[str, int]]:
    """Drop bad pairs; returns the surviving corpus and counts per drop reason.

    Checks run in a fixed order and each dropped pair is charged to the
    first failing check: empty-side, too-short, too-long, ratio, copy.
    Idempotent: cleaning an already-clean corpus drops nothing.
    """
    kept = []
    report: dict[str, int] = {}

    def drop(reason):
        report[reason] = report.get(reason, 0) + 1

    for src, tgt, prov in corpus.pairs:
        ls, lt = len(src.tokens), len(tgt.tokens)
        if ls == 0 or lt == 0:
            drop("empty-side")
        elif ls < cfg.min_tokens or lt < cfg.min_tokens:
            drop("too-short")
        elif ls > cfg.max_tokens or lt > cfg.max_tokens:
            drop("too-long")
        elif max(ls, lt) / min(ls, lt) > cfg.max_len_ratio:
            drop("ratio")
        elif cfg.drop_copies and src.text == tgt.text:
            drop("copy")
        else:
            kept.append((src, tgt, prov))
    return ParallelCorpus(corpus.src_lang, corpus.tgt_lang, tuple(kept)), report


def split(corpus: ParallelCorpus, ratios, seed: int) -> list[ParallelCorpus]:
    """Partition a corpus into len(ratios) disjoint pieces.

    Ratios must be positive and sum to 1 (within 1e-9). Piece sizes follow
    the largest-remainder rule, each within one pair of ratio * n. Pair
    membership is chosen by a seeded shuffle; inside each piece the pairs
    keep their original corpus order.
    """
    ratios = list(ratios)
    if not ratios or any(r <= 0 for r in ratios):
        raise ConfigError("split ratios must be positive")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"split ratios must sum to 1, got {sum(ratios)!r}")

    n = len(corpus.pairs)
    targets = [r * n for r in ratios]
    sizes = [int(t) for t in targets]
    remainders = [t - s for t, s in zip(targets, sizes)]
    for _ in range(n - sum(sizes)):
        i = max(range(len(ratios)), key=lambda k: (remainders[k], -k))
        sizes[i] += 1
        remainders[i] = -1.0

    order = list(range(n))
    random.Random(f"split:{seed}").shuffle(order)
    pieces = []
    start = 0
    for size in sizes:
        chosen = sorted(order[start:start + size])
        pieces.append(ParallelCorpus(
            corpus.src_lang, corpus.tgt_lang,
            tuple(corpus.pairs[i] for i in chosen)))
        start += size
    return pieces


def concat(corpora) -> ParallelCorpus:
    """Concatenate corpora sharing language tags; provenance is preserved."""
    corpora = list(corpora)
    if not corpora:
        raise ConfigError("concat needs at least one corpus")
    first = corpora[0]
    for c in corpora[1:]:
        if (c.src_lang, c.tgt_lang) != (first.src_lang, first.tgt_lang):
            raise ConfigError(
                f"language tag mismatch: {first.src_lang}-{first.tgt_lang} "
                f"vs {c.src_lang}-{c.tgt_lang}")
    pairs = tuple(p for c in corpora for p in c.pairs)
    return ParallelCorpus(first.src_lang, first.tgt_lang, pairs)


def stats(corpus: ParallelCorpus) -> CorpusStats:
    by_prov: dict[str, int] = {}
    src_tokens = 0
    tgt_tokens = 0
    for src, tgt, prov in corpus.pairs:
        src_tokens += len(src.tokens)
        tgt_tokens += len(tgt.tokens)
        by_prov[prov] = by_prov.get(prov, 0) + 1
    return CorpusStats(len(corpus.pairs), src_tokens, tgt_tokens, by_prov)


# ---------------------------------------------------------------------------
# Synthetic trilingual generator.
#
# Source and pivot are verb-final (SOV) with a postposition after the object;
# the target is SVO and drops the postposition. Two templates:
#   A: S O post V        -> target: S V O
#   B: S Adj O post V    -> target: S V Adj O
# The pivot side is a token-for-token lexicon image of the source, sharing
# surface forms for about lexical_overlap of the lexicon. Word choices follow
# a Zipf distribution within each category so frequent combinations recur the
# way they do in natural text. Generation is a pure function of the config;
# all randomness flows through named sub-seeds.

_SRC_CONSONANTS = "kgtdnpbmrl"
_TGT_CONSONANTS = "fhvwzscjqx"
_VOWELS = "aeiou"

_ZIPF_EXPONENT = 1.0

SRC_TAG = "src"
PIVOT_TAG = "piv"
TGT_TAG = "tgt"

_TEMPLATE_ARITY = 5  # longest template: S Adj O post V


@dataclass(frozen=True)
class TrilingualGenConfig:
    seed: int = 7
    n_sentences: int = 1000
    vocab_size: int = 300
    lexical_overlap: float = 0.7
    pivot_word_order: str = "SOV"
    target_word_order: str = "SVO"

    def __post_init__(self):
        if self.n_sentences < 0:
            raise ConfigError("n_sentences must be >= 0")
        if self.vocab_size < _TEMPLATE_ARITY:
            raise ConfigError(
                f"vocab_size must be >= {_TEMPLATE_ARITY} (template arity)")
        if not 0.0 <= self.lexical_overlap <= 1.0:
            raise ConfigError("lexical_overlap must be in [0, 1]")
        if self.pivot_word_order != "SOV" or self.target_word_order != "SVO":
            raise ConfigError("supported word orders: pivot SOV, target SVO")


@dataclass(frozen=True)
class TrilingualGroundTruth:
    """The lexicons and reorder rules behind a generated dataset.

    Exposed so consistency can be verified: applying pivot_tokens /
    target_tokens to a generated source sentence reproduces the pivot and
    target sentences exactly.
    """

    nouns: tuple[str, ...]
    adjectives: tuple[str, ...]
    verbs: tuple[str, ...]
    postpositions: tuple[str, ...]
    pivot_map: dict[str, str]
    target_map: dict[str, str]  # postpositions map to "" (dropped)

    def pivot_tokens(self, src_tokens) -> list[str]:
        return [self.pivot_map[t] for t in src_tokens]

    def target_tokens(self, src_tokens) -> list[str]:
        tm = self.target_map
        if len(src_tokens) == 4:
            s, o, _post, v = src_tokens
            return [tm[s], tm[v], tm[o]]
        if len(src_tokens) == 5:
            s, a, o, _post, v = src_tokens
            return [tm[s], tm[v], tm[a], tm[o]]
        raise DataError(f"not a template sentence: {src_tokens!r}")


def _make_word(rng, consonants, n_syllables):
    return "".join(rng.choice(consonants) + rng.choice(_VOWELS)
                   for _ in range(n_syllables))

def _make_vocab(rng, consonants, count, taken, min_syll=2, max_syll=3):
    words = []
    while len(words) < count:
        w = _make_word(rng, consonants, rng.randint(min_syll, max_syll))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return tuple(words)


def _category_sizes(vocab_size):
    n_post = max(1, min(4, vocab_size // 20))
    n_adj = max(1, vocab_size // 5)
    n_verb = max(1, vocab_size // 4)
    n_noun = vocab_size - n_post - n_adj - n_verb
    return n_noun, n_adj, n_verb, n_post


def _zipf_weights(n: int) -> list[float]:
    return [1.0 / (r ** _ZIPF_EXPONENT) for r in range(1, n + 1)]


def _shared_subset(category, overlap: float):
    """Pick round(overlap * len) words whose combined Zipf mass tracks
    overlap, so token-level overlap between source and pivot text comes out
    near the configured lexicon-level overlap despite the skewed
    frequencies. Words are in frequency order; the pick is deterministic."""
    n = len(category)
    m = round(overlap * n)
    weights = _zipf_weights(n)
    shared: set[str] = set()
    shared_mass = 0.0
    seen_mass = 0.0
    for word, w in zip(category, weights):
        seen_mass += w
        if len(shared) < m and shared_mass < overlap * seen_mass:
            shared.add(word)
            shared_mass += w
    # pad with the rarest words if the mass rule came up short
    for word in reversed(category):
        if len(shared) >= m:
            break
        shared.add(word)
    return shared


def trilingual_ground_truth(cfg: TrilingualGenConfig) -> TrilingualGroundTruth:
    rng = random.Random(f"trilingual-lexicon:{cfg.seed}")
    n_noun, n_adj, n_verb, n_post = _category_sizes(cfg.vocab_size)

    taken: set[str] = set()
    nouns = _make_vocab(rng, _SRC_CONSONANTS, n_noun, taken)
    adjectives = _make_vocab(rng, _SRC_CONSONANTS, n_adj, taken)
    verbs = _make_vocab(rng, _SRC_CONSONANTS, n_verb, taken)
    postpositions = _make_vocab(rng, _SRC_CONSONANTS, n_post, taken,
                                min_syll=1, max_syll=1)

    pivot_map: dict[str, str] = {}
    for category in (nouns, adjectives, verbs, postpositions):
        shared = _shared_subset(category, cfg.lexical_overlap)
        for word in category:
            if word in shared:
                pivot_map[word] = word
            else:
                pivot_map[word] = _make_vocab(rng, _SRC_CONSONANTS, 1, taken)[0]

    taken_tgt: set[str] = set()
    target_map: dict[str, str] = {}
    for category in (nouns, adjectives, verbs):
        for word in category:
            target_map[word] = _make_vocab(rng, _TGT_CONSONANTS, 1, taken_tgt)[0]
    for word in postpositions:
        target_map[word] = ""

    return TrilingualGroundTruth(nouns, adjectives, verbs, postpositions,
                                 pivot_map, target_map)


def generate_trilingual(cfg: TrilingualGenConfig) -> tuple[
        ParallelCorpus, ParallelCorpus, ParallelCorpus, MonolingualCorpus]:
    """Generate mutually consistent src-pivot, pivot-tgt, and src-tgt corpora
    over the same underlying sentence set, plus the pivot side as a
    monolingual corpus."""
    gt = trilingual_ground_truth(cfg)
    rng = random.Random(f"trilingual-sentences:{cfg.seed}")

    def sampler(category):
        cum = list(itertools.accumulate(_zipf_weights(len(category))))
        return lambda: rng.choices(category, cum_weights=cum)[0]

    pick_noun = sampler(gt.nouns)
    pick_adj = sampler(gt.adjectives)
    pick_verb = sampler(gt.verbs)
    pick_post = sampler(gt.postpositions)

    triples = []
    for _ in range(cfg.n_sentences):
        subj = pick_noun()
        obj = pick_noun()
        post = pick_post()
        verb = pick_verb()
        if rng.random() < 0.5:
            src_tokens = [subj, obj, post, verb]
        else:
            src_tokens = [subj, pick_adj(), obj, post, verb]
        src = Sentence.from_tokens(src_tokens)
        piv = Sentence.from_tokens(gt.pivot_tokens(src_tokens))
        tgt = Sentence.from_tokens(gt.target_tokens(src_tokens))
        triples.append((src, piv, tgt))

    src_piv = ParallelCorpus(SRC_TAG, PIVOT_TAG,
                             tuple((s, p, PROV_REAL) for s, p, _ in triples))
    piv_tgt = ParallelCorpus(PIVOT_TAG, TGT_TAG,
                             tuple((p, t, PROV_REAL) for _, p, t in triples))
    src_tgt = ParallelCorpus(SRC_TAG, TGT_TAG,
                             tuple((s, t, PROV_REAL) for s, _, t in triples))
    mono = MonolingualCorpus(PIVOT_TAG, tuple(p for _, p, _ in triples))
    return src_piv, piv_tgt, src_tgt, mono
