"""Command-line interface.

Every subcommand accepts --config FILE (key = value lines), --seed N, and
repeatable --set key=value overrides; flags win over file values. Errors
exit nonzero with a one-line diagnostic. Unknown flags are a usage error
(exit 2).
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import bleu as bleu_mod
from . import corpus as corpus_mod
from . import decoder, pivot, subword, tm
from .config import PipelineConfig, load_config, set_option
from .corpus import MonolingualCorpus, Sentence, TrilingualGenConfig
from .decoder import TranslationModel
from .errors import AlignmentError, ConfigError, PivotMtError

log = logging.getLogger(__name__)


def _load_pair(args, provenance="real"):
    return corpus_mod.load_parallel(f"{args.corpus}.{args.src_lang}",
                                    f"{args.corpus}.{args.tgt_lang}",
                                    args.src_lang, args.tgt_lang, provenance)


def _save_pair(pc, stem):
    corpus_mod.save_parallel(pc, f"{stem}.{pc.src_lang}",
                             f"{stem}.{pc.tgt_lang}")


def _load_model(args, table_attr="table", lm_attr="lm", bpe_attr="bpe",
                cfg=None, src_lang="", tgt_lang=""):
    table = tm.load_phrase_table(getattr(args, table_attr))
    lm = decoder.load_lm(getattr(args, lm_attr))
    bpe_path = getattr(args, bpe_attr, None)
    bpe = subword.load_bpe(bpe_path) if bpe_path else None
    weights = cfg.weights() if cfg else decoder.Weights()
    return TranslationModel(table, lm, weights, bpe, src_lang, tgt_lang)


def cmd_clean(args, cfg):
    pc = _load_pair(args)
    cleaned, report = corpus_mod.clean(pc, cfg.cleaning())
    _save_pair(cleaned, args.out)
    dropped = sum(report.values())
    for reason in sorted(report):
        print(f"dropped.{reason}: {report[reason]}")
    print(f"kept: {len(cleaned)}")
    log.info("clean: kept %d of %d pairs (%d dropped) -> %s",
             len(cleaned), len(pc), dropped, args.out)
    return 0


def cmd_split(args, cfg):
    pc = _load_pair(args)
    ratios = [float(x) for x in args.ratios.split(",")]
    pieces = corpus_mod.split(pc, ratios, cfg.seed)
    if len(pieces) == 2:
        names = ["train", "test"]
    elif len(pieces) == 3:
        names = ["train", "valid", "test"]
    else:
        names = [f"part{i}" for i in range(len(pieces))]
    for name, piece in zip(names, pieces):
        _save_pair(piece, f"{args.out}.{name}")
    log.info("split: %s -> %s", len(pc),
             "/".join(str(len(p)) for p in pieces))
    return 0


def cmd_stats(args, cfg):
    st = corpus_mod.stats(_load_pair(args))
    print(st.text_report())
    print(st.json_record())
    return 0


def cmd_gen_data(args, cfg):
    from pathlib import Path
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    gen_cfg = TrilingualGenConfig(seed=cfg.seed, n_sentences=args.n_sentences,
                                  vocab_size=cfg.gen_vocab_size,
                                  lexical_overlap=cfg.gen_lexical_overlap)
    src_piv, piv_tgt, src_tgt, mono = corpus_mod.generate_trilingual(gen_cfg)
    _save_pair(src_piv, out / "src-piv")
    _save_pair(piv_tgt, out / "piv-tgt")
    _save_pair(src_tgt, out / "src-tgt")
    corpus_mod.save_monolingual(mono, out / f"mono.{mono.lang}")
    log.info("gen-data: %d sentences -> %s", args.n_sentences, out)
    return 0


def cmd_bpe_learn(args, cfg):
    corpora = [corpus_mod.load_monolingual(path, f"input{i}")
               for i, path in enumerate(args.input)]
    num_merges = cfg.num_merges if args.num_merges is None else args.num_merges
    model = subword.learn_joint_bpe(corpora, num_merges)
    subword.save_bpe(model, args.out)
    log.info("bpe-learn: %d merges, %d symbols -> %s",
             len(model.merges), len(model.vocab), args.out)
    return 0


def cmd_bpe_apply(args, cfg):
    model = subword.load_bpe(args.model)
    mono = corpus_mod.load_monolingual(args.input, "input")
    with open(args.out, "w", encoding="utf-8") as fh:
        for sent in mono.sentences:
            fh.write(" ".join(subword.encode(model, sent)) + "\n")
    log.info("bpe-apply: %d sentences -> %s", len(mono), args.out)
    return 0


def cmd_align(args, cfg):
    pc = _load_pair(args)
    table, trace = tm.train_model1(pc, cfg.em_iterations)
    alignments = tm.align_corpus(table, pc)
    with open(args.out, "w", encoding="utf-8") as fh:
        for al in alignments:
            fh.write(" ".join(f"{i}-{j}" for i, j in sorted(al.links)) + "\n")
    if args.lex_out:
        rows = {s: dict(row) for s, row in table.probs.items()}
        tm.save_phrase_table(tm.PhraseTable(rows, 1), args.lex_out)
    log.info("align: %d pairs, final log-likelihood %.4f -> %s",
             len(pc), trace[-1], args.out)
    return 0


def _load_alignments(path, n_pairs):
    alignments = []
    with open(path, encoding="utf-8") as fh:
        for line in fh.read().splitlines():
            links = set()
            for part in line.split():
                i, j = part.split("-")
                links.add((int(i), int(j)))
            alignments.append(tm.AlignmentMatrix(frozenset(links)))
    if len(alignments) != n_pairs:
        raise AlignmentError(
            f"{n_pairs} pairs but {len(alignments)} alignment lines in {path}")
    return alignments


def cmd_extract(args, cfg):
    pc = _load_pair(args)
    alignments = _load_alignments(args.alignments, len(pc))
    table = tm.extract_phrases(pc, alignments, cfg.max_phrase_len)
    tm.save_phrase_table(table, args.out)
    log.info("extract: %d source phrases -> %s", len(table.entries), args.out)
    return 0


def cmd_triangulate(args, cfg):
    src_pivot = tm.load_phrase_table(args.src_pivot)
    pivot_tgt = tm.load_phrase_table(args.pivot_tgt)
    table = tm.triangulate(src_pivot, pivot_tgt, cfg.triangulate_floor)
    tm.save_phrase_table(table, args.out)
    log.info("triangulate: %d source phrases -> %s",
             len(table.entries), args.out)
    return 0


def cmd_prune(args, cfg):
    table = tm.load_phrase_table(args.table)
    pruned = tm.prune(table, cfg.prune_top_k, cfg.prune_floor)
    tm.save_phrase_table(pruned, args.out)
    log.info("prune: %d -> %d source phrases -> %s", len(table.entries),
             len(pruned.entries), args.out)
    return 0


def cmd_lm_train(args, cfg):
    mono = corpus_mod.load_monolingual(args.input, "input")
    lm = decoder.train_lm(mono, cfg.lm_order, cfg.lm_interp)
    decoder.save_lm(lm, args.out)
    log.info("lm-train: order %d over %d sentences -> %s",
             cfg.lm_order, len(mono), args.out)
    return 0


def _write_nbest(fh, idx, ranked):
    for text, score in ranked:
        fh.write(f"{idx} ||| {text.text} ||| {score:.6f}\n")


def cmd_decode(args, cfg):
    model = _load_model(args, cfg=cfg)
    mono = corpus_mod.load_monolingual(args.input, "input")
    onebest = open(args.onebest, "w", encoding="utf-8") if args.onebest else None
    with open(args.out, "w", encoding="utf-8") as fh:
        for idx, sent in enumerate(mono.sentences):
            ranked = pivot.translate(model, sent, args.k, args.beam or cfg.beam)
            _write_nbest(fh, idx, ranked)
            if onebest:
                onebest.write(ranked[0][0].text + "\n")
    if onebest:
        onebest.close()
    log.info("decode: %d sentences, k=%d -> %s", len(mono), args.k, args.out)
    return 0


def cmd_transfer(args, cfg):
    leg1 = _load_model(args, "leg1_table", "leg1_lm", "leg1_bpe", cfg)
    leg2 = _load_model(args, "leg2_table", "leg2_lm", "leg2_bpe", cfg)
    mono = corpus_mod.load_monolingual(args.input, "input")
    n = cfg.cascade_n if args.n is None else args.n
    m = cfg.cascade_m if args.m is None else args.m
    cascade = pivot.CascadeConfig(n, m)
    trace_fh = open(args.trace, "w", encoding="utf-8") if args.trace else None
    with open(args.out, "w", encoding="utf-8") as fh:
        for idx, sent in enumerate(mono.sentences):
            result = pivot.transfer_translate(leg1, leg2, sent, cascade,
                                              beam=cfg.beam)
            fh.write(result.best.text + "\n")
            if trace_fh:
                for c in result.candidates:
                    trace_fh.write(
                        f"{idx} ||| {c.pivot.text} ||| {c.target.text} ||| "
                        f"{c.score:.6f} ||| {c.leg1_score:.6f} ||| "
                        f"{c.leg2_score:.6f}\n")
    if trace_fh:
        trace_fh.close()
    log.info("transfer: %d sentences, n=%d m=%d -> %s",
             len(mono), n, m, args.out)
    return 0


def cmd_synth_tgt(args, cfg):
    pc = _load_pair(args)
    model = _load_model(args, cfg=cfg, src_lang=args.tgt_lang,
                        tgt_lang=args.model_tgt_lang)
    out = pivot.synthesize_target(model, pc, beam=cfg.beam)
    _save_pair(out, args.out)
    log.info("synth-tgt: %d pairs -> %s", len(out), args.out)
    return 0


def cmd_synth_src(args, cfg):
    pc = _load_pair(args)
    model = _load_model(args, cfg=cfg, src_lang=args.src_lang,
                        tgt_lang=args.model_tgt_lang)
    out = pivot.synthesize_source(model, pc, beam=cfg.beam)
    _save_pair(out, args.out)
    log.info("synth-src: %d pairs -> %s", len(out), args.out)
    return 0


def cmd_backtranslate(args, cfg):
    mono = corpus_mod.load_monolingual(args.mono, args.mono_lang)
    model = _load_model(args, cfg=cfg, src_lang=args.mono_lang,
                        tgt_lang=args.model_tgt_lang)
    out = pivot.backtranslate(model, mono, beam=cfg.beam)
    _save_pair(out, args.out)
    log.info("backtranslate: %d sentences -> %s", len(out), args.out)
    return 0


def cmd_bleu(args, cfg):
    hyps = corpus_mod.load_monolingual(args.hyps, "hyp").sentences
    refs = corpus_mod.load_monolingual(args.refs, "ref").sentences
    report = bleu_mod.bleu(hyps, refs, mode=args.mode, smooth=args.smooth)
    print(report.text_report())
    print(report.machine_line())
    return 0


def cmd_experiment(args, cfg):
    from .experiment import run_experiment
    report = run_experiment(cfg, args.out)
    print(bleu_mod.score_table(report.systems))
    if report.backtranslation_delta is not None:
        print(f"backtranslation delta: {report.backtranslation_delta:+.1f}")
    log.info("experiment: report written to %s", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file (key = value lines)")
    common.add_argument("--seed", type=int, help="master random seed")
    common.add_argument("--set", action="append", default=[],
                        metavar="KEY=VALUE", help="override one config option")

    parser = argparse.ArgumentParser(
        prog="pivotmt",
        description="pivot-language statistical machine translation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("clean", cmd_clean, "drop bad pairs from a parallel corpus")
    p.add_argument("--corpus", required=True, help="corpus file stem")
    p.add_argument("--src-lang", required=True)
    p.add_argument("--tgt-lang", required=True)
    p.add_argument("--out", required=True, help="output stem")

    p = add("split", cmd_split, "split a corpus into disjoint pieces")
    p.add_argument("--corpus", required=True)
    p.add_argument("--src-lang", required=True)
    p.add_argument("--tgt-lang", required=True)
    p.add_argument("--ratios", required=True, help="e.g. 0.8,0.1,0.1")
    p.add_argument("--out", required=True, help="output stem")

    p = add("stats", cmd_stats, "corpus statistics report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--src-lang", required=True)
    p.add_argument("--tgt-lang", required=True)

    p = add("gen-data", cmd_gen_data, "generate synthetic trilingual corpora")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-sentences", type=int, default=1000)

    p = add("bpe-learn", cmd_bpe_learn, "learn a joint BPE model")
    p.add_argument("--input", action="append", required=True,
                   help="text file; repeat for joint learning")
    p.add_argument("--num-merges", type=int)
    p.add_argument("--out", required=True)

    p = add("bpe-apply", cmd_bpe_apply, "segment text with a BPE model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)

    p = add("align", cmd_align, "train Model 1 and write Viterbi alignments")
    p.add_argument("--corpus", required=True)
    p.add_argument("--src-lang", required=True)
    p.add_argument("--tgt-lang", required=True)
    p.add_argument("--out", required=True, help="alignment file (i-j pairs)")
    p.add_argument("--lex-out", help="also write the lexical table")

    p = add("extract", cmd_extract, "extract a phrase table from alignments")
    p.add_argument("--corpus", required=True)
    p.add_argument("--src-lang", required=True)
    p.add_argument("--tgt-lang", required=True)
    p.add_argument("--alignments", required=True)
    p.add_argument("--out", required=True)

    p = add("triangulate", cmd_triangulate,
            "compose two phrase tables through the pivot")
    p.add_argument("--src-pivot", required=True)
    p.add_argument("--pivot-tgt", required=True)
    p.add_argument("--out", required=True)

    p = add("prune", cmd_prune, "keep the best targets per source phrase")
    p.add_argument("--table", required=True)
    p.add_argument("--out", required=True)

    p = add("lm-train", cmd_lm_train, "train an n-gram language model")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)

    p = add("decode", cmd_decode, "translate text with one model")
    p.add_argument("--table", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--bpe")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="n-best file")
    p.add_argument("--onebest", help="also write 1-best plain text")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--beam", type=int)

    p = add("transfer", cmd_transfer, "translate through the pivot cascade")
    p.add_argument("--leg1-table", required=True)
    p.add_argument("--leg1-lm", required=True)
    p.add_argument("--leg1-bpe")
    p.add_argument("--leg2-table", required=True)
    p.add_argument("--leg2-lm", required=True)
    p.add_argument("--leg2-bpe")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="1-best plain text")
    p.add_argument("--trace", help="candidate trace file")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)

    p = add("synth-tgt", cmd_synth_tgt,
            "translate the pivot side of a src-pivot corpus into the target")
    p.add_argument("--table", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--bpe")
    p.add_argument("--corpus", required=True, help="src-pivot corpus stem")
    p.add_argument("--src-lang", required=True)
    p.add_argument("--tgt-lang", required=True, help="pivot language tag")
    p.add_argument("--model-tgt-lang", required=True,
                   help="language the model translates into")
    p.add_argument("--out", required=True)

    p = add("synth-src", cmd_synth_src,
            "translate the pivot side of a pivot-target corpus into the source")
    p.add_argument("--table", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--bpe")
    p.add_argument("--corpus", required=True, help="pivot-target corpus stem")
    p.add_argument("--src-lang", required=True, help="pivot language tag")
    p.add_argument("--tgt-lang", required=True)
    p.add_argument("--model-tgt-lang", required=True,
                   help="language the model translates into")
    p.add_argument("--out", required=True)

    p = add("backtranslate", cmd_backtranslate,
            "pair monolingual text with its reverse translation")
    p.add_argument("--table", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--bpe")
    p.add_argument("--mono", required=True)
    p.add_argument("--mono-lang", required=True)
    p.add_argument("--model-tgt-lang", required=True,
                   help="language the model translates into")
    p.add_argument("--out", required=True)

    p = add("bleu", cmd_bleu, "score hypotheses against references")
    p.add_argument("--hyps", required=True)
    p.add_argument("--refs", required=True)
    p.add_argument("--mode", default="tokenized",
                   choices=["tokenized", "detokenized"])
    p.add_argument("--smooth", action="store_true")

    p = add("experiment", cmd_experiment,
            "run the full pivot translation experiment")
    p.add_argument("--out", required=True, help="run directory")

    return parser


def _build_config(args) -> PipelineConfig:
    cfg = PipelineConfig()
    if args.config:
        cfg = load_config(args.config, cfg)
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        set_option(cfg, key, value)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s",
                        stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _build_config(args)
        return args.func(args, cfg)
    except (PivotMtError, OSError) as err:
        print(f"pivotmt: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
