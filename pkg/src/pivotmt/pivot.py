"""Pivot-language translation: the two-leg transfer cascade and the
synthetic-data routes (synthetic target, synthetic source, and
backtranslation of monolingual text).

The cascade decodes n pivot hypotheses with the source-to-pivot model,
re-segments each with the pivot-to-target model's own subword model, and
decodes m target hypotheses per pivot. The n * m candidates are ranked by
the sum of both leg scores, optionally plus a weighted rescoring LM term.
With n = m = 1 the cascade is exactly the composition of the two 1-best
decodes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from . import decoder, subword
from .corpus import (MonolingualCorpus, ParallelCorpus, Sentence,
                     PROV_BACKTRANSLATED, PROV_SYNTH_SRC, PROV_SYNTH_TGT,
                     concat, stats)
from .decoder import NGramLm, TranslationModel
from .errors import ConfigError

log = logging.getLogger(__name__)

DEFAULT_BEAM = 5


@dataclass(frozen=True)
class CascadeConfig:
    n: int = 1
    m: int = 1
    rescore_lm: NGramLm | None = None
    rescore_weight: float = 0.0

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ConfigError("cascade n and m must be >= 1")


@dataclass(frozen=True)
class CascadeCandidate:
    pivot: Sentence
    target: Sentence
    score: float
    leg1_score: float
    leg2_score: float


@dataclass(frozen=True)
class CascadeResult:
    best: Sentence
    candidates: tuple[CascadeCandidate, ...]


def translate(model: TranslationModel, sentence: Sentence, k: int = 1,
              beam: int | None = None) -> list[tuple[Sentence, float]]:
    """Plain-text k-best: encode with the model's subword model when it has
    one, decode, and map hypotheses back to plain text. Surfaces that
    differ only in segmentation are deduplicated keeping the best score."""
    if beam is None:
        beam = max(k, DEFAULT_BEAM)
    if model.bpe is not None:
        source = Sentence.from_tokens(subword.encode(model.bpe, sentence))
    else:
        source = sentence
    hyps = decoder.decode(model, source, k=k, beam=beam)
    best: dict[str, tuple[Sentence, float]] = {}
    for hyp in hyps:
        if model.bpe is not None:
            text = subword.decode(model.bpe, hyp.tokens)
        else:
            text = Sentence.from_tokens(hyp.tokens)
        seen = best.get(text.text)
        if seen is None or hyp.score > seen[1]:
            best[text.text] = (text, hyp.score)
    ranked = sorted(best.values(), key=lambda ts: (-ts[1], ts[0].text))
    return ranked[:k]


def transfer_translate(src_to_pivot: TranslationModel,
                       pivot_to_tgt: TranslationModel,
                       sentence: Sentence,
                       cfg: CascadeConfig = CascadeConfig(),
                       beam: int | None = None) -> CascadeResult:
    """Translate through the pivot, ranking all n * m cascade candidates."""
    candidates = []
    for piv, s1 in translate(src_to_pivot, sentence, k=cfg.n, beam=beam):
        for tgt, s2 in translate(pivot_to_tgt, piv, k=cfg.m, beam=beam):
            score = s1 + s2
            if cfg.rescore_lm is not None and cfg.rescore_weight != 0.0:
                score += cfg.rescore_weight * decoder.logprob(cfg.rescore_lm, tgt)
            candidates.append(CascadeCandidate(piv, tgt, score, s1, s2))
    candidates.sort(key=lambda c: (-c.score, c.pivot.text, c.target.text))
    return CascadeResult(candidates[0].target, tuple(candidates))


def synthesize_target(pivot_to_tgt: TranslationModel,
                      src_pivot: ParallelCorpus,
                      beam: int | None = None) -> ParallelCorpus:
    """Translate the pivot side of a src-pivot corpus into the target,
    yielding a synthetic src-target corpus whose source side is real."""
    pairs = tuple(
        (src, translate(pivot_to_tgt, piv, 1, beam)[0][0], PROV_SYNTH_TGT)
        for src, piv, _ in src_pivot.pairs)
    return ParallelCorpus(src_pivot.src_lang, pivot_to_tgt.tgt_lang, pairs)


def synthesize_source(pivot_to_src: TranslationModel,
                      pivot_tgt: ParallelCorpus,
                      beam: int | None = None) -> ParallelCorpus:
    """Translate the pivot side of a pivot-target corpus into the source,
    yielding a synthetic src-target corpus whose target side is real."""
    pairs = tuple(
        (translate(pivot_to_src, piv, 1, beam)[0][0], tgt, PROV_SYNTH_SRC)
        for piv, tgt, _ in pivot_tgt.pairs)
    return ParallelCorpus(pivot_to_src.tgt_lang, pivot_tgt.tgt_lang, pairs)


def backtranslate(reverse_model: TranslationModel,
                  mono: MonolingualCorpus,
                  beam: int | None = None) -> ParallelCorpus:
    """Pair real monolingual sentences with their reverse translations; the
    real text lands on the target side of the direction being trained."""
    pairs = tuple(
        (translate(reverse_model, sent, 1, beam)[0][0], sent, PROV_BACKTRANSLATED)
        for sent in mono.sentences)
    return ParallelCorpus(reverse_model.tgt_lang, mono.lang, pairs)


def augment_and_retrain(real: ParallelCorpus, synthetic: ParallelCorpus,
                        trainer) -> TranslationModel:
    """Concatenate real and synthetic corpora and hand the result to the
    trainer hook (a callable from ParallelCorpus to TranslationModel)."""
    combined = concat([real, synthetic])
    breakdown = stats(combined).by_provenance
    log.info("augment: training on %d pairs (%s)", len(combined),
             ", ".join(f"{tag}={n}" for tag, n in sorted(breakdown.items())))
    return trainer(combined)
