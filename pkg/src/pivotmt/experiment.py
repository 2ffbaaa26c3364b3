"""End-to-end pivot translation experiment on synthetic trilingual data.

The direct source-to-target corpus is deliberately starved while both
pivot legs get far more data; the run trains a direct baseline, the two
cascade legs, the transfer system, and (optionally) a semi-supervised
variant whose source-to-pivot leg is retrained after one backtranslation
round over held-out pivot monolingual text. All systems are scored with
tokenized BLEU on a held-out source-target test set that is disjoint from
every training slice.

Artifacts land under a run directory with a manifest listing every file
and its producing stage. report.txt and report.json are deterministic for
a fixed config (stage timings go to a separate timings.txt).
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

from . import bleu as bleu_mod
from . import corpus as corpus_mod
from . import decoder, pivot, subword, tm
from .bleu import BleuReport
from .config import PipelineConfig, dump_config
from .corpus import (CorpusStats, MonolingualCorpus, ParallelCorpus,
                     Sentence, TrilingualGenConfig)
from .decoder import TranslationModel
from .errors import ConfigError

log = logging.getLogger(__name__)


@dataclass
class ExperimentReport:
    systems: dict[str, BleuReport]
    data_stats: dict[str, CorpusStats]
    em_traces: dict[str, list[float]]
    timings: dict[str, float]
    config_text: str
    backtranslation_delta: float | None  # transfer-semi minus transfer; recorded, not asserted


def train_translation_model(corpus: ParallelCorpus,
                            cfg: PipelineConfig) -> tuple[TranslationModel, list[float]]:
    """The standard training pipeline for one direction: joint BPE over
    both sides, Model 1 EM, Viterbi alignment, consistent phrase
    extraction, pruning, and a target-side LM over the same segmentation.
    Returns the model and the EM log-likelihood trace."""
    src_side = corpus_mod.side(corpus, "src")
    tgt_side = corpus_mod.side(corpus, "tgt")
    bpe = subword.learn_joint_bpe([src_side, tgt_side], cfg.num_merges)

    enc_pairs = tuple(
        (Sentence.from_tokens(subword.encode(bpe, s)),
         Sentence.from_tokens(subword.encode(bpe, t)), prov)
        for s, t, prov in corpus.pairs)
    enc = ParallelCorpus(corpus.src_lang, corpus.tgt_lang, enc_pairs)

    lex, trace = tm.train_model1(enc, cfg.em_iterations)
    alignments = tm.align_corpus(lex, enc)
    table = tm.extract_phrases(enc, alignments, cfg.max_phrase_len)
    table = tm.prune(table, cfg.prune_top_k, cfg.prune_floor)
    lm = decoder.train_lm(corpus_mod.side(enc, "tgt"), cfg.lm_order,
                          cfg.lm_interp)
    model = TranslationModel(table, lm, cfg.weights(), bpe,
                             corpus.src_lang, corpus.tgt_lang)
    return model, trace


def _slice(pc: ParallelCorpus, start: int, stop: int) -> ParallelCorpus:
    return ParallelCorpus(pc.src_lang, pc.tgt_lang, pc.pairs[start:stop])


class _Run:
    """Bookkeeping for one experiment run directory."""

    def __init__(self, out_dir):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.manifest: list[tuple[str, str]] = []
        self.timings: dict[str, float] = {}
        self._stage = None
        self._t0 = 0.0

    def start(self, stage: str):
        self._stage = stage
        self._t0 = time.perf_counter()

    def done(self):
        elapsed = time.perf_counter() - self._t0
        self.timings[self._stage] = self.timings.get(self._stage, 0.0) + elapsed
        log.info("stage %s done in %.1fs", self._stage, elapsed)

    def path(self, rel: str) -> Path:
        p = self.dir / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        self.manifest.append((rel, self._stage or "setup"))
        return p


def _save_pair(run: _Run, pc: ParallelCorpus, stem: str) -> None:
    corpus_mod.save_parallel(pc, run.path(f"{stem}.{pc.src_lang}"),
                             run.path(f"{stem}.{pc.tgt_lang}"))


def _save_model(run: _Run, model: TranslationModel, name: str) -> None:
    tm.save_phrase_table(model.phrase_table, run.path(f"models/{name}.table"))
    decoder.save_lm(model.lm, run.path(f"models/{name}.lm"))
    if model.bpe is not None:
        subword.save_bpe(model.bpe, run.path(f"models/{name}.bpe"))


def run_experiment(cfg: PipelineConfig, out_dir) -> ExperimentReport:
    if not (cfg.n_direct >= 1 and cfg.n_src_pivot >= 1
            and cfg.n_pivot_tgt >= 1 and cfg.n_test >= 1):
        raise ConfigError("experiment corpus sizes must be >= 1")
    run = _Run(out_dir)

    # --- data -------------------------------------------------------------
    run.start("gen-data")
    max_train = max(cfg.n_direct, cfg.n_src_pivot, cfg.n_pivot_tgt)
    n_mono = round(cfg.backtranslate_ratio * cfg.n_src_pivot)
    total = max_train + n_mono + cfg.n_test
    gen_cfg = TrilingualGenConfig(seed=cfg.seed, n_sentences=total,
                                  vocab_size=cfg.gen_vocab_size,
                                  lexical_overlap=cfg.gen_lexical_overlap)
    src_piv_all, piv_tgt_all, src_tgt_all, mono_all = \
        corpus_mod.generate_trilingual(gen_cfg)

    # generated pairs are well-formed by construction, so no cleaning pass;
    # at the rho=1 control setting the copy filter would drop every src-piv
    # pair (source and pivot are identical) and starve the first leg
    direct_train = _slice(src_tgt_all, 0, cfg.n_direct)
    leg1_train = _slice(src_piv_all, 0, cfg.n_src_pivot)
    leg2_train = _slice(piv_tgt_all, 0, cfg.n_pivot_tgt)
    mono = MonolingualCorpus(mono_all.lang,
                             mono_all.sentences[max_train:max_train + n_mono])
    test = _slice(src_tgt_all, max_train + n_mono, total)

    _save_pair(run, direct_train, "data/direct-train")
    _save_pair(run, leg1_train, "data/src-piv-train")
    _save_pair(run, leg2_train, "data/piv-tgt-train")
    _save_pair(run, test, "data/test")
    corpus_mod.save_monolingual(mono, run.path(f"data/mono.{mono.lang}"))
    run.done()

    data_stats = {
        "direct-train": corpus_mod.stats(direct_train),
        "src-piv-train": corpus_mod.stats(leg1_train),
        "piv-tgt-train": corpus_mod.stats(leg2_train),
        "test": corpus_mod.stats(test),
    }
    em_traces: dict[str, list[float]] = {}

    # --- models -----------------------------------------------------------
    run.start("train-direct")
    direct_model, em_traces["direct"] = train_translation_model(direct_train, cfg)
    _save_model(run, direct_model, "direct")
    run.done()

    run.start("train-leg1")
    leg1_model, em_traces["src-piv"] = train_translation_model(leg1_train, cfg)
    _save_model(run, leg1_model, "src-piv")
    run.done()

    run.start("train-leg2")
    leg2_model, em_traces["piv-tgt"] = train_translation_model(leg2_train, cfg)
    _save_model(run, leg2_model, "piv-tgt")
    run.done()

    leg1_semi = None
    if cfg.semi_supervised:
        run.start("backtranslate")
        reverse_model, em_traces["piv-src"] = train_translation_model(
            corpus_mod.flipped(leg1_train), cfg)
        synthetic = pivot.backtranslate(reverse_model, mono, beam=cfg.beam)
        _save_pair(run, synthetic, "data/backtranslated")

        def trainer(combined):
            model, trace = train_translation_model(combined, cfg)
            em_traces["src-piv-semi"] = trace
            return model

        leg1_semi = pivot.augment_and_retrain(leg1_train, synthetic, trainer)
        _save_model(run, leg1_semi, "src-piv-semi")
        run.done()

    # --- decoding ---------------------------------------------------------
    run.start("decode-test")
    sources = [s for s, _, _ in test.pairs]
    refs = [t for _, t, _ in test.pairs]

    outputs: dict[str, list[Sentence]] = {}
    outputs["direct"] = [
        pivot.translate(direct_model, s, 1, cfg.beam)[0][0] for s in sources]

    unit = pivot.CascadeConfig(1, 1)
    outputs["transfer"] = [
        pivot.transfer_translate(leg1_model, leg2_model, s, unit,
                                 beam=cfg.beam).best for s in sources]
    if (cfg.cascade_n, cfg.cascade_m) != (1, 1):
        cascade = pivot.CascadeConfig(cfg.cascade_n, cfg.cascade_m)
        outputs[f"transfer-n{cfg.cascade_n}m{cfg.cascade_m}"] = [
            pivot.transfer_translate(leg1_model, leg2_model, s, cascade,
                                     beam=cfg.beam).best for s in sources]
    if leg1_semi is not None:
        outputs["transfer-semi"] = [
            pivot.transfer_translate(leg1_semi, leg2_model, s, unit,
                                     beam=cfg.beam).best for s in sources]

    for name, sents in outputs.items():
        corpus_mod.save_monolingual(MonolingualCorpus(test.tgt_lang, tuple(sents)),
                                    run.path(f"out/{name}.hyp"))
    run.done()

    # --- scoring and report -----------------------------------------------
    run.start("score")
    systems = {name: bleu_mod.bleu(sents, refs, mode="tokenized")
               for name, sents in outputs.items()}
    run.done()

    run.start("report")
    delta = None
    if "transfer-semi" in systems:
        delta = systems["transfer-semi"].score - systems["transfer"].score
    config_text = dump_config(cfg)
    report = ExperimentReport(systems, data_stats, em_traces, run.timings,
                              config_text, delta)
    _write_report(run, report)
    run.done()
    return report


def _report_json(report: ExperimentReport) -> str:
    rec = {
        "systems": {
            name: {
                "score": rep.score,
                "precisions": [list(p) for p in rep.precisions],
                "bp": rep.bp,
                "hyp_len": rep.hyp_len,
                "ref_len": rep.ref_len,
                "mode": rep.mode,
            }
            for name, rep in report.systems.items()
        },
        "data": {
            name: json.loads(st.json_record())
            for name, st in report.data_stats.items()
        },
        "backtranslation_delta": report.backtranslation_delta,
        "config": report.config_text,
    }
    return json.dumps(rec, sort_keys=True, indent=2) + "\n"


def _report_text(report: ExperimentReport) -> str:
    parts = [bleu_mod.score_table(report.systems), ""]
    for name, rep in sorted(report.systems.items()):
        parts.append(f"{name}: {rep.machine_line()}")
    parts.append("")
    if report.backtranslation_delta is not None:
        parts.append("backtranslation delta (transfer-semi minus transfer): "
                     f"{report.backtranslation_delta:+.1f} BLEU")
        parts.append("")
    for name, st in report.data_stats.items():
        parts.append(f"[{name}]")
        parts.append(st.text_report())
        parts.append("")
    return "\n".join(parts)


def _write_report(run: _Run, report: ExperimentReport) -> None:
    run.path("report.txt").write_text(_report_text(report), encoding="utf-8")
    run.path("report.json").write_text(_report_json(report), encoding="utf-8")
    run.path("config.txt").write_text(report.config_text, encoding="utf-8")
    timing_lines = "".join(f"{stage}\t{secs:.2f}\n"
                           for stage, secs in report.timings.items())
    run.path("timings.txt").write_text(timing_lines, encoding="utf-8")

    from . import report as report_mod  # defers the matplotlib import
    report_mod.save_score_figure(report.systems, run.path("figures/bleu.png"))
    if report.em_traces:
        report_mod.save_em_trace_figure(report.em_traces,
                                        run.path("figures/em-trace.png"))

    manifest = "".join(f"{rel}\t{stage}\n" for rel, stage in run.manifest)
    manifest += "manifest.txt\treport\n"
    (run.dir / "manifest.txt").write_text(manifest, encoding="utf-8")
