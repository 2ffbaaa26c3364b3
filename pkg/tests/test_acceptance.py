"""Acceptance checks. Each test prints one PASS line once its assertions
hold; run with -s (or read the captured stdout) for the checklist."""

import json
import math
import random
import time

import pytest

from pivotmt import cli
from pivotmt import decoder as D
from pivotmt import pivot as P
from pivotmt import subword as S
from pivotmt import tm as T
from pivotmt.bleu import bleu
from pivotmt.corpus import MonolingualCorpus, ParallelCorpus, Sentence
from pivotmt.decoder import TranslationModel, Weights, train_lm
from pivotmt.tm import PhraseTable

from builders import (SRC_WORDS, TGT_WORDS, identity_model, rand_model,
                      rand_mono, rand_parallel, rand_phrase_table,
                      rand_sentence)
from oracles import bleu_oracle, bpe_learn_oracle, decode_oracle, model1_oracle, triangulate_oracle


def announce(n, name):
    print(f"ACCEPTANCE {n} {name}: PASS")


def test_01_triangulation_oracle():
    started = time.perf_counter()
    rng = random.Random(101)
    for _ in range(100):
        src_piv = rand_phrase_table(rng, SRC_WORDS, TGT_WORDS,
                                    max_entries=50)
        piv_tgt = rand_phrase_table(rng, TGT_WORDS, SRC_WORDS,
                                    max_entries=50)
        got = T.triangulate(src_piv, piv_tgt, floor=0.0)
        want = triangulate_oracle(src_piv.entries, piv_tgt.entries, 0.0)
        assert got.entries.keys() == want.keys()
        for src, row in want.items():
            assert got.entries[src].keys() == row.keys()
            for tgt, p in row.items():
                assert abs(got.entries[src][tgt] - p) <= 1e-12

    # normalized inputs with complete pivot coverage keep rows normalized
    for _ in range(20):
        src_piv = rand_phrase_table(rng, SRC_WORDS, TGT_WORDS,
                                    max_entries=50)
        piv_tgt = rand_phrase_table(rng, TGT_WORDS, SRC_WORDS,
                                    max_entries=200)
        for pivots in src_piv.entries.values():
            for h in pivots:
                piv_tgt.entries.setdefault(h, {"cover": 1.0})
        out = T.triangulate(src_piv, piv_tgt, floor=0.0)
        assert out.entries.keys() == src_piv.entries.keys()
        for src, row in out.entries.items():
            assert abs(sum(row.values()) - 1.0) < 1e-9, src

    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"{elapsed:.1f}s"
    announce(1, "triangulation matches brute-force oracle")


def test_02_decoder_oracle():
    started = time.perf_counter()
    rng = random.Random(102)
    for _ in range(100):
        model = rand_model(rng, max_entries=50)
        src = rand_sentence(rng, list(model.phrase_table.entries) + ["zz"],
                            1, 5)
        k = rng.randint(1, 5)
        got = D.decode(model, src, k=k, beam=None)
        want = decode_oracle(model, src.tokens, k)
        assert [(h.tokens, h.score) for h in got] == want
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"{elapsed:.1f}s"
    announce(2, "unpruned decoder equals exhaustive enumeration")


def test_03_em_monotonicity():
    rng = random.Random(103)
    for _ in range(100):
        corpus = rand_parallel(rng, rng.randint(1, 12), hi=4)
        _, trace = T.train_model1(corpus, iterations=20)
        assert len(trace) == 20
        for before, after in zip(trace, trace[1:]):
            assert after >= before - 1e-9

    two_pair = ParallelCorpus("s", "t", (
        (Sentence("a"), Sentence("x"), "real"),
        (Sentence("a b"), Sentence("x y"), "real")))
    table, _ = T.train_model1(two_pair, iterations=20)
    assert table.prob("x", "a") > 0.9
    ref, _ = model1_oracle([(["a"], ["x"]), (["a", "b"], ["x", "y"])], 20)
    assert table.prob("x", "a") == pytest.approx(ref["a"]["x"], abs=1e-12)
    announce(3, "EM log-likelihood non-decreasing, toy corpus sharpens")


def test_04_bpe():
    rng = random.Random(104)
    corpus = rand_mono(rng, 200, TGT_WORDS + ["kolme", "zw"], lo=1, hi=9)
    model = S.learn_joint_bpe([corpus], num_merges=40)
    sentences = [rand_sentence(rng, TGT_WORDS + ["unseen", "qq"], 1, 9)
                 for _ in range(1000)]
    for sent in sentences:
        assert S.decode(model, S.encode(model, sent)) == sent

    for _ in range(20):
        sents = [rand_sentence(rng, ["ab", "ba", "aab", "bb", "abab"], 1, 6)
                 for _ in range(rng.randint(1, 12))]
        pool = MonolingualCorpus("x", tuple(sents))
        n = rng.randint(0, 10)
        learned = S.learn_joint_bpe([pool], num_merges=n)
        freq = {}
        for sent in pool.sentences:
            for w in sent.tokens:
                freq[w] = freq.get(w, 0) + 1
        assert list(learned.merges) == bpe_learn_oracle(freq, n)
        again = S.learn_joint_bpe([pool], num_merges=n)
        assert again.merges == learned.merges
    announce(4, "BPE round-trips, matches counting oracle, deterministic")


def test_05_bleu():
    rng = random.Random(105)
    for _ in range(25):
        n = rng.randint(1, 10)
        hyps = [rand_sentence(rng, TGT_WORDS, 1, 9) for _ in range(n)]
        refs = [rand_sentence(rng, TGT_WORDS, 1, 9) for _ in range(n)]
        smooth = rng.random() < 0.5
        rep = bleu(hyps, refs, smooth=smooth)
        want_score, want_counts, want_bp = bleu_oracle(
            [h.tokens for h in hyps], [r.tokens for r in refs], smooth)
        assert list(rep.precisions) == want_counts
        assert rep.bp == want_bp
        assert rep.score == pytest.approx(want_score, abs=1e-9)

    same = [Sentence("fa ho vi wu"), Sentence("ze so")]
    assert bleu(same, same).score == pytest.approx(100.0)

    rep = bleu([Sentence("a b c d")], [Sentence("a b c e")])
    assert rep.precisions == ((3, 4), (2, 3), (1, 2), (0, 1))
    assert rep.score == 0.0

    rep = bleu([Sentence("a b c d")], [Sentence("a b c d e f g h")])
    assert rep.bp == pytest.approx(math.exp(-1.0), abs=1e-15)
    assert rep.score == pytest.approx(100.0 * math.exp(-1.0), abs=1e-9)
    announce(5, "BLEU equals counting oracle, worked cases reproduce")


def test_06_cascade_degeneracy_and_argmax():
    rng = random.Random(106)
    for _ in range(200):
        leg1 = rand_model(rng, SRC_WORDS, TGT_WORDS)
        leg2 = rand_model(rng, TGT_WORDS, SRC_WORDS)
        sent = rand_sentence(rng, SRC_WORDS + ["oov"], 1, 5)
        res = P.transfer_translate(leg1, leg2, sent)
        step = P.translate(leg1, sent, k=1)[0][0]
        composed = P.translate(leg2, step, k=1)[0][0]
        assert res.best.text == composed.text

    # crafted instance where the greedy leg-1 winner loses globally
    zero_lm = Weights(tm=1.0, lm=0.0)
    leg1 = TranslationModel(
        PhraseTable({"a": {"x": 0.55, "y": 0.45}}, 1),
        train_lm(MonolingualCorpus("p", (Sentence("x y"),)), 1),
        zero_lm, None, "s", "p")
    leg2 = TranslationModel(
        PhraseTable({"x": {"u": 0.5, "v": 0.5},
                     "y": {"w": 0.95, "z": 0.05}}, 1),
        train_lm(MonolingualCorpus("t", (Sentence("u v w z"),)), 1),
        zero_lm, None, "p", "t")
    res = P.transfer_translate(leg1, leg2, Sentence("a"),
                               P.CascadeConfig(n=2, m=2))
    assert len(res.candidates) == 4
    pairs = {(c.pivot.text, c.target.text): c.score for c in res.candidates}
    enumerated = {
        ("x", "u"): math.log(0.55) + math.log(0.5),
        ("x", "v"): math.log(0.55) + math.log(0.5),
        ("y", "w"): math.log(0.45) + math.log(0.95),
        ("y", "z"): math.log(0.45) + math.log(0.05),
    }
    assert pairs.keys() == enumerated.keys()
    for key, score in enumerated.items():
        assert pairs[key] == pytest.approx(score, abs=1e-12)
    assert res.best.text == "w"
    announce(6, "n=m=1 composes exactly, n=2 m=2 finds global argmax")


def test_07_augmentation_bookkeeping():
    rng = random.Random(107)
    reverse = rand_model(rng, TGT_WORDS, SRC_WORDS)
    reverse.src_lang, reverse.tgt_lang = "t", "s"
    pool = rand_mono(rng, 40, TGT_WORDS, lang="t")
    bt = P.backtranslate(reverse, pool)
    assert len(bt) == len(pool)
    assert "\n".join(t.text for _, t, _ in bt.pairs) == \
        "\n".join(s.text for s in pool.sentences)

    src_piv = rand_parallel(rng, 40, SRC_WORDS, TGT_WORDS)
    model = rand_model(rng, TGT_WORDS, SRC_WORDS)
    model.src_lang, model.tgt_lang = "t", "u"
    synth = P.synthesize_target(model, src_piv)
    assert len(synth) == len(src_piv)
    assert "\n".join(s.text for s, _, _ in synth.pairs) == \
        "\n".join(s.text for s, _, _ in src_piv.pairs)

    piv_tgt = rand_parallel(rng, 40, TGT_WORDS, SRC_WORDS)
    model2 = rand_model(rng, TGT_WORDS, SRC_WORDS)
    model2.src_lang, model2.tgt_lang = "t", "v"
    synth2 = P.synthesize_source(model2, piv_tgt)
    assert len(synth2) == len(piv_tgt)
    assert "\n".join(t.text for _, t, _ in synth2.pairs) == \
        "\n".join(t.text for _, t, _ in piv_tgt.pairs)

    # corpus sizes add exactly under concatenation (desk-scale counts)
    from pivotmt.corpus import concat, stats
    real = rand_parallel(rng, 284, SRC_WORDS, TGT_WORDS)
    extra = ParallelCorpus("s", "t", tuple(
        (a, b, "backtranslated")
        for a, b, _ in rand_parallel(rng, 300, SRC_WORDS, TGT_WORDS).pairs))
    merged = concat([real, extra])
    assert len(merged) == 584
    assert stats(merged).by_provenance == {"real": 284,
                                           "backtranslated": 300}
    announce(7, "augmentation preserves real sides, concat sizes add")


def test_08_experiment_directional_claim(tmp_path, capsys):
    started = time.perf_counter()
    code = cli.main(["experiment", "--seed", "7",
                     "--out", str(tmp_path / "default")])
    elapsed = time.perf_counter() - started
    capsys.readouterr()
    assert code == 0
    assert elapsed < 300.0, f"{elapsed:.1f}s"
    report = json.loads((tmp_path / "default" / "report.json").read_text())
    scores = {name: sys["score"] for name, sys in report["systems"].items()}
    assert scores["transfer"] >= scores["direct"] + 5.0, scores

    code = cli.main(["experiment", "--seed", "7",
                     "--out", str(tmp_path / "control"),
                     "--set", "n_direct=5000",
                     "--set", "n_src_pivot=5000",
                     "--set", "n_pivot_tgt=5000",
                     "--set", "gen_lexical_overlap=1.0"])
    capsys.readouterr()
    assert code == 0
    control = json.loads((tmp_path / "control" / "report.json").read_text())
    cscores = {name: sys["score"] for name, sys in control["systems"].items()}
    assert abs(cscores["transfer"] - cscores["direct"]) < 2.0, cscores

    # backtranslation outcome is recorded, not sign-asserted
    assert "transfer-semi" in scores
    assert report["backtranslation_delta"] is not None
    delta = scores["transfer-semi"] - scores["transfer"]
    assert report["backtranslation_delta"] == pytest.approx(delta, abs=0.1)
    announce(8, "transfer beats direct by >= 5, control gap collapses")
