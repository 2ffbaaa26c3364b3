"""Pipeline configuration shared by every CLI subcommand.

Config files are plain text, one "key = value" per line, with # comments
and blank lines ignored. Keys must be PipelineConfig field names; unknown
keys are rejected. Command-line flags override file values. All stage
randomness flows from the single seed through per-stage named sub-seeds.

Schema (defaults in parentheses):
  seed (7)                 master random seed
  min_tokens (1), max_tokens (80), max_len_ratio (3.0), drop_copies (true)
                           cleaning thresholds
  num_merges (5000)        BPE merge operations to learn
  em_iterations (20)       Model 1 EM iterations
  max_phrase_len (4)       phrase length cap, both sides
  triangulate_floor (1e-06)  drop triangulated entries below this mass
  prune_top_k (20), prune_floor (0.0)  phrase-table pruning
  lm_order (3), lm_interp (0.7)        language model
  lambda_tm (1.0), lambda_lm (1.0), word_penalty (0.0), oov_log_penalty (-10.0)
                           decoder weights
  beam (5)                 decoder beam width
  cascade_n (1), cascade_m (1), rescore_weight (0.0)  transfer cascade
  gen_vocab_size (300), gen_lexical_overlap (0.7)     synthetic generator
  n_direct (500), n_src_pivot (5000), n_pivot_tgt (20000), n_test (500)
                           experiment corpus sizes
  backtranslate_ratio (1.06)  monolingual pool size over src-pivot size
  semi_supervised (true)   run one backtranslation round in the experiment
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .corpus import CleaningConfig
from .decoder import Weights
from .errors import ConfigError


@dataclass
class PipelineConfig:
    seed: int = 7
    # cleaning
    min_tokens: int = 1
    max_tokens: int = 80
    max_len_ratio: float = 3.0
    drop_copies: bool = True
    # subword
    num_merges: int = 5000
    # translation model
    em_iterations: int = 20
    max_phrase_len: int = 4
    triangulate_floor: float = 1e-6
    prune_top_k: int = 20
    prune_floor: float = 0.0
    # language model and decoder
    lm_order: int = 3
    lm_interp: float = 0.7
    lambda_tm: float = 1.0
    lambda_lm: float = 1.0
    word_penalty: float = 0.0
    oov_log_penalty: float = -10.0
    beam: int = 5
    # transfer cascade
    cascade_n: int = 1
    cascade_m: int = 1
    rescore_weight: float = 0.0
    # synthetic data generation
    gen_vocab_size: int = 300
    gen_lexical_overlap: float = 0.7
    # experiment corpus sizes
    n_direct: int = 500
    n_src_pivot: int = 5000
    n_pivot_tgt: int = 20000
    n_test: int = 500
    backtranslate_ratio: float = 1.06
    semi_supervised: bool = True

    def cleaning(self) -> CleaningConfig:
        return CleaningConfig(self.min_tokens, self.max_tokens,
                              self.max_len_ratio, self.drop_copies)

    def weights(self) -> Weights:
        return Weights(self.lambda_tm, self.lambda_lm, self.word_penalty,
                       self.oov_log_penalty)


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}

_TRUE = {"true", "1", "on", "yes"}
_FALSE = {"false", "0", "off", "no"}


def _parse_value(key: str, text: str):
    ftype = _FIELDS[key].type
    text = text.strip()
    try:
        if ftype == "bool":
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(text)
        if ftype == "int":
            return int(text)
        if ftype == "float":
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None


def set_option(cfg: PipelineConfig, key: str, value: str) -> None:
    """Set one option from its text form; unknown keys are rejected."""
    key = key.strip()
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    setattr(cfg, key, _parse_value(key, value))


def load_config(path, base: PipelineConfig | None = None) -> PipelineConfig:
    cfg = base if base is not None else PipelineConfig()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            try:
                set_option(cfg, key, value)
            except ConfigError as err:
                raise ConfigError(f"{path}:{lineno}: {err}") from None
    return cfg


def dump_config(cfg: PipelineConfig) -> str:
    """Render a config in the file format; loading it back reproduces cfg."""
    lines = []
    for f in dataclasses.fields(PipelineConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
