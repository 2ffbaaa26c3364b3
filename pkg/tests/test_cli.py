import filecmp

import pytest

from pivotmt import cli
from pivotmt.config import (PipelineConfig, dump_config, load_config,
                            set_option)
from pivotmt.errors import ConfigError


@pytest.fixture
def run(capsys):
    def invoke(*args):
        code = cli.main([str(a) for a in args])
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return invoke


class TestConfig:
    def test_dump_load_roundtrip(self, tmp_path):
        cfg = PipelineConfig()
        cfg.beam = 11
        cfg.lm_interp = 0.42
        cfg.drop_copies = False
        cfg.semi_supervised = True
        path = tmp_path / "run.cfg"
        path.write_text(dump_config(cfg))
        assert load_config(path) == cfg

    def test_set_option_parses_types(self):
        cfg = PipelineConfig()
        set_option(cfg, "beam", "9")
        set_option(cfg, "lm_interp", "0.5")
        set_option(cfg, "drop_copies", "no")
        set_option(cfg, "semi_supervised", "TRUE")
        assert (cfg.beam, cfg.lm_interp) == (9, 0.5)
        assert cfg.drop_copies is False and cfg.semi_supervised is True

    def test_set_option_rejects_bad_input(self):
        cfg = PipelineConfig()
        with pytest.raises(ConfigError):
            set_option(cfg, "no_such_key", "1")
        with pytest.raises(ConfigError):
            set_option(cfg, "beam", "wide")
        with pytest.raises(ConfigError):
            set_option(cfg, "drop_copies", "maybe")

    def test_load_config_comments_and_errors(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\n\nbeam = 3  # trailing\n")
        assert load_config(path).beam == 3
        path.write_text("beam\n")
        with pytest.raises(ConfigError) as err:
            load_config(path)
        assert ":1:" in str(err.value)


class TestArgHandling:
    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as err:
            cli.main(["bleu", "--hyps", "x", "--refs", "y", "--frobnicate"])
        assert err.value.code == 2

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as err:
            cli.main(["transmogrify"])
        assert err.value.code == 2

    def test_missing_file_single_diagnostic(self, run, tmp_path):
        code, _, err = run("stats", "--corpus", tmp_path / "nope",
                           "--src-lang", "s", "--tgt-lang", "t")
        assert code == 1
        diags = [l for l in err.splitlines()
                 if l.startswith("pivotmt: error:")]
        assert len(diags) == 1

    def test_set_requires_key_value(self, run, tmp_path):
        code, _, err = run("stats", "--corpus", tmp_path / "c",
                           "--src-lang", "s", "--tgt-lang", "t",
                           "--set", "beam")
        assert code == 1
        assert "pivotmt: error:" in err

    def test_unknown_config_key_rejected(self, run, tmp_path):
        code, _, err = run("stats", "--corpus", tmp_path / "c",
                           "--src-lang", "s", "--tgt-lang", "t",
                           "--set", "no_such_key=1")
        assert code == 1
        assert "no_such_key" in err

    def test_config_file_applied_and_set_overrides(self, run, tmp_path):
        (tmp_path / "c.s").write_text("a\n")
        (tmp_path / "c.t").write_text("b c d e\n")
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("max_len_ratio = 2.0\n")
        # ratio 4 > 2 drops the pair under the file config
        code, out, _ = run("clean", "--corpus", tmp_path / "c",
                           "--src-lang", "s", "--tgt-lang", "t",
                           "--out", tmp_path / "o1",
                           "--config", cfg_file)
        assert code == 0 and "dropped.ratio: 1" in out
        # --set wins over the file
        code, out, _ = run("clean", "--corpus", tmp_path / "c",
                           "--src-lang", "s", "--tgt-lang", "t",
                           "--out", tmp_path / "o2",
                           "--config", cfg_file, "--set", "max_len_ratio=5")
        assert code == 0 and "kept: 1" in out


class TestBleuCommand:
    def test_identical_files_score_100(self, run, tmp_path):
        text = "fa ho vi wu\nze so ja\n"
        (tmp_path / "hyp.txt").write_text(text)
        (tmp_path / "ref.txt").write_text(text)
        code, out, _ = run("bleu", "--hyps", tmp_path / "hyp.txt",
                           "--refs", tmp_path / "ref.txt")
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("BLEU = 100.0")
        assert lines[1].startswith("100.0000 ")
        assert lines[1].endswith(" tokenized")

    def test_length_mismatch_fails(self, run, tmp_path):
        (tmp_path / "hyp.txt").write_text("a\nb\n")
        (tmp_path / "ref.txt").write_text("a\n")
        code, _, err = run("bleu", "--hyps", tmp_path / "hyp.txt",
                           "--refs", tmp_path / "ref.txt")
        assert code == 1 and "pivotmt: error:" in err


class TestPipeline:
    def test_end_to_end_subcommands(self, run, tmp_path):
        data = tmp_path / "data"
        code, _, _ = run("gen-data", "--out", data, "--n-sentences", 60,
                         "--seed", 3, "--set", "gen_vocab_size=30")
        assert code == 0
        for name in ("src-piv.src", "src-piv.piv", "piv-tgt.piv",
                     "piv-tgt.tgt", "src-tgt.src", "src-tgt.tgt",
                     "mono.piv"):
            assert (data / name).exists(), name

        code, out, _ = run("stats", "--corpus", data / "src-piv",
                           "--src-lang", "src", "--tgt-lang", "piv")
        assert code == 0 and "n_pairs: 60" in out

        code, _, _ = run("split", "--corpus", data / "src-tgt",
                         "--src-lang", "src", "--tgt-lang", "tgt",
                         "--ratios", "0.5,0.5", "--out", tmp_path / "sp",
                         "--seed", 1)
        assert code == 0
        train_lines = (tmp_path / "sp.train.src").read_text().splitlines()
        test_lines = (tmp_path / "sp.test.src").read_text().splitlines()
        assert len(train_lines) == 30 and len(test_lines) == 30

        code, _, _ = run("bpe-learn", "--input", data / "mono.piv",
                         "--num-merges", 25, "--out", tmp_path / "m.bpe")
        assert code == 0
        code, _, _ = run("bpe-apply", "--model", tmp_path / "m.bpe",
                         "--input", data / "mono.piv",
                         "--out", tmp_path / "mono.enc")
        assert code == 0
        assert len((tmp_path / "mono.enc").read_text().splitlines()) == 60

        for stem, langs, table in (("src-piv", ("src", "piv"), "t1.table"),
                                   ("piv-tgt", ("piv", "tgt"), "t2.table")):
            code, _, _ = run("align", "--corpus", data / stem,
                             "--src-lang", langs[0], "--tgt-lang", langs[1],
                             "--out", tmp_path / f"{stem}.al",
                             "--set", "em_iterations=3")
            assert code == 0
            al_lines = (tmp_path / f"{stem}.al").read_text().splitlines()
            assert len(al_lines) == 60
            code, _, _ = run("extract", "--corpus", data / stem,
                             "--src-lang", langs[0], "--tgt-lang", langs[1],
                             "--alignments", tmp_path / f"{stem}.al",
                             "--out", tmp_path / table)
            assert code == 0

        code, _, _ = run("lm-train", "--input", data / "mono.piv",
                         "--out", tmp_path / "lm.piv",
                         "--set", "lm_order=2")
        assert code == 0
        code, _, _ = run("lm-train", "--input", data / "piv-tgt.tgt",
                         "--out", tmp_path / "lm.tgt",
                         "--set", "lm_order=2")
        assert code == 0

        code, _, _ = run("decode", "--table", tmp_path / "t1.table",
                         "--lm", tmp_path / "lm.piv",
                         "--input", data / "src-piv.src",
                         "--out", tmp_path / "nbest.txt",
                         "--onebest", tmp_path / "best.txt", "--k", 2)
        assert code == 0
        nbest = (tmp_path / "nbest.txt").read_text().splitlines()
        assert all(len(l.split(" ||| ")) == 3 for l in nbest)
        assert len((tmp_path / "best.txt").read_text().splitlines()) == 60

        code, out, _ = run("bleu", "--hyps", tmp_path / "best.txt",
                           "--refs", data / "src-piv.piv")
        assert code == 0 and out.startswith("BLEU = ")

        code, _, _ = run("triangulate", "--src-pivot", tmp_path / "t1.table",
                         "--pivot-tgt", tmp_path / "t2.table",
                         "--out", tmp_path / "tri.table")
        assert code == 0
        code, _, _ = run("prune", "--table", tmp_path / "tri.table",
                         "--out", tmp_path / "pruned.table")
        assert code == 0

        code, _, _ = run("transfer",
                         "--leg1-table", tmp_path / "t1.table",
                         "--leg1-lm", tmp_path / "lm.piv",
                         "--leg2-table", tmp_path / "t2.table",
                         "--leg2-lm", tmp_path / "lm.tgt",
                         "--input", data / "src-tgt.src",
                         "--out", tmp_path / "cascade.txt",
                         "--trace", tmp_path / "cascade.trace",
                         "--n", 2, "--m", 2)
        assert code == 0
        assert len((tmp_path / "cascade.txt").read_text().splitlines()) == 60
        trace = (tmp_path / "cascade.trace").read_text().splitlines()
        assert trace and all(len(l.split(" ||| ")) == 6 for l in trace)

        code, _, _ = run("backtranslate", "--table", tmp_path / "t1.table",
                         "--lm", tmp_path / "lm.piv",
                         "--mono", data / "mono.piv",
                         "--mono-lang", "piv", "--model-tgt-lang", "src",
                         "--out", tmp_path / "bt")
        assert code == 0
        assert filecmp.cmp(tmp_path / "bt.piv", data / "mono.piv",
                           shallow=False)


class TestExperimentCommand:
    TINY = ["--set", "n_direct=60", "--set", "n_src_pivot=120",
            "--set", "n_pivot_tgt=150", "--set", "n_test=30",
            "--set", "gen_vocab_size=25", "--set", "num_merges=60",
            "--set", "em_iterations=4"]

    def test_tiny_run_is_deterministic(self, run, tmp_path):
        outs = []
        for name in ("one", "two"):
            out_dir = tmp_path / name
            code, out, _ = run("experiment", "--seed", 11,
                               "--out", out_dir, *self.TINY)
            assert code == 0
            outs.append(out)
            for artifact in ("report.json", "report.txt", "config.txt",
                             "timings.txt", "manifest.txt",
                             "figures/bleu.png", "figures/em-trace.png"):
                assert (out_dir / artifact).exists(), artifact
        assert outs[0] == outs[1]
        for name in ("report.json", "report.txt", "config.txt"):
            assert (tmp_path / "one" / name).read_bytes() == \
                (tmp_path / "two" / name).read_bytes(), name
        report = (tmp_path / "one" / "report.txt").read_text()
        assert "direct" in report and "transfer" in report
