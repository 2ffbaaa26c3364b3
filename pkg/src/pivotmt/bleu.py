"""Corpus-level BLEU against a single reference.

Orders 1-4, unsmoothed by default: score = 100 * BP * exp(sum 1/4 ln p_k),
or 0 when any p_k is 0. BP = 1 if c >= r else exp(1 - r/c) over corpus
hypothesis length c and reference length r. The optional add-one smoothing
(for sentence-level diagnostics) adds 1 to numerator and denominator of
orders 2-4.

Two modes: "tokenized" scores whitespace tokens as they stand;
"detokenized" runs a built-in tokenizer first (split on whitespace, then
every Unicode punctuation character becomes its own token; case-sensitive).
This approximates but does not claim to match external scorers.

The machine-readable line is "score p1 p2 p3 p4 BP c r mode" with score
printed as %.4f and the precisions and BP as %.6f.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass

from .corpus import Sentence
from .errors import ConfigError, DataError

MAX_ORDER = 4
MODES = ("tokenized", "detokenized")


def tokenize(text: str) -> list[str]:
    """The detokenized-mode tokenizer."""
    out: list[str] = []
    for chunk in text.split():
        run = []
        for ch in chunk:
            if unicodedata.category(ch).startswith("P"):
                if run:
                    out.append("".join(run))
                    run = []
                out.append(ch)
            else:
                run.append(ch)
        if run:
            out.append("".join(run))
    return out


@dataclass(frozen=True)
class BleuReport:
    score: float
    precisions: tuple[tuple[int, int], ...]  # (clipped matches, total) per order
    bp: float
    hyp_len: int
    ref_len: int
    mode: str

    def precision_values(self) -> list[float]:
        return [num / den if den else 0.0 for num, den in self.precisions]

    def machine_line(self) -> str:
        ps = " ".join(f"{p:.6f}" for p in self.precision_values())
        return (f"{self.score:.4f} {ps} {self.bp:.6f} "
                f"{self.hyp_len} {self.ref_len} {self.mode}")

    def text_report(self) -> str:
        ps = "/".join(f"{num}:{den}" for num, den in self.precisions)
        return (f"BLEU = {self.score:.1f} (counts {ps}, BP = {self.bp:.6f}, "
                f"hyp_len = {self.hyp_len}, ref_len = {self.ref_len}, "
                f"mode = {self.mode})")


def _ngram_counts(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _mode_tokens(sentence: Sentence, mode: str) -> list[str]:
    if mode == "tokenized":
        return sentence.tokens
    return tokenize(sentence.text)


def bleu(hyps, refs, mode: str = "tokenized", smooth: bool = False) -> BleuReport:
    """Corpus BLEU of hypotheses against line-aligned references."""
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    hyps = list(hyps)
    refs = list(refs)
    if not hyps:
        raise DataError("empty hypothesis set")
    if len(hyps) != len(refs):
        raise DataError(
            f"{len(hyps)} hypotheses but {len(refs)} references")

    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hyps, refs):
        htoks = _mode_tokens(hyp, mode)
        rtoks = _mode_tokens(ref, mode)
        hyp_len += len(htoks)
        ref_len += len(rtoks)
        for n in range(1, MAX_ORDER + 1):
            hcounts = _ngram_counts(htoks, n)
            if not hcounts:
                continue
            rcounts = _ngram_counts(rtoks, n)
            totals[n - 1] += sum(hcounts.values())
            for gram, c in hcounts.items():
                rc = rcounts.get(gram, 0)
                if rc:
                    matches[n - 1] += min(c, rc)

    precisions = tuple(zip(matches, totals))
    ps = []
    for order, (num, den) in enumerate(precisions, 1):
        if smooth and order > 1:
            ps.append((num + 1) / (den + 1))
        else:
            ps.append(num / den if den else 0.0)

    if hyp_len == 0:
        bp = 0.0
    elif hyp_len >= ref_len:
        bp = 1.0
    else:
        bp = math.exp(1.0 - ref_len / hyp_len)

    if min(ps) > 0.0 and bp > 0.0:
        score = 100.0 * bp * math.exp(sum(0.25 * math.log(p) for p in ps))
    else:
        score = 0.0
    return BleuReport(score, precisions, bp, hyp_len, ref_len, mode)


def score_table(results: dict[str, "BleuReport"]) -> str:
    """Aligned comparison table, one system per row sorted by name.
    Columns: system, BLEU (one decimal), BP, length ratio."""
    if not results:
        raise DataError("score_table needs at least one system")
    name_w = max(len("system"), max(len(n) for n in results))
    lines = [f"{'system':<{name_w}}  {'BLEU':>6}  {'BP':>6}  {'len-ratio':>9}"]
    for name in sorted(results):
        rep = results[name]
        ratio = rep.hyp_len / rep.ref_len if rep.ref_len else 0.0
        lines.append(f"{name:<{name_w}}  {rep.score:>6.1f}  "
                     f"{rep.bp:>6.3f}  {ratio:>9.3f}")
    return "\n".join(lines)
