"""Run configuration: `key = value` files, presets, flag overrides.

Every field has a documented default at desk scale; the "paper" preset
switches to the published large-corpus hyperparameters. Unknown keys are
rejected. Lines starting with `#` (and trailing ` #` comments) are ignored.
"""

from dataclasses import asdict, dataclass, fields

from .model import HyperParams
from .training import TrainConfig


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # architecture
    cell_size: int = 32
    embed_size: int = 32
    latent_dim: int = 16
    bow_width: int = 32
    len_embed_size: int = 8
    decoder_layers: int = 2
    max_len_index: int = 30
    softmax_samples: int = 32
    lenemb: bool = True
    # preprocessing
    top_k: int = 1000
    max_words: int = 30
    # training
    batch_size: int = 64
    total_steps: int = 2000
    anneal_kind: str = "linear"
    anneal_horizon: int = 1000
    word_drop_p: float = 0.20
    dropout_keep: float = 0.87
    learning_rate: float = 0.002
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    grad_clip: float = 5.0
    seed: int = 0
    checkpoint_interval: int = 1000
    # decoding
    desired_length: str = "20"      # a word count or "natural"
    beam_width: int = 8
    max_tokens: int = 40
    # evaluation
    byte_cap: int = 75
    bucket_width: int = 5

    def hyperparams(self, vocab_size: int) -> HyperParams:
        return HyperParams(vocab_size=vocab_size, cell_size=self.cell_size,
                           embed_size=self.embed_size, latent_dim=self.latent_dim,
                           bow_width=self.bow_width, len_embed_size=self.len_embed_size,
                           decoder_layers=self.decoder_layers,
                           max_len_index=self.max_len_index,
                           softmax_samples=self.softmax_samples, lenemb=self.lenemb)

    def train_config(self) -> TrainConfig:
        return TrainConfig(batch_size=self.batch_size, total_steps=self.total_steps,
                           anneal_kind=self.anneal_kind,
                           anneal_horizon=self.anneal_horizon,
                           word_drop_p=self.word_drop_p, dropout_keep=self.dropout_keep,
                           learning_rate=self.learning_rate,
                           adam_beta1=self.adam_beta1, adam_beta2=self.adam_beta2,
                           adam_eps=self.adam_eps, grad_clip=self.grad_clip,
                           seed=self.seed, checkpoint_interval=self.checkpoint_interval,
                           lenemb=self.lenemb)

    def render(self) -> str:
        lines = [f"{name} = {value}" for name, value in asdict(self).items()]
        return "\n".join(lines) + "\n"


# Published large-corpus settings, selectable with --preset paper.
PAPER_PRESET = {
    "cell_size": 243,
    "embed_size": 254,
    "latent_dim": 124,
    "bow_width": 236,
    "len_embed_size": 50,
    "softmax_samples": 1000,
    "top_k": 40000,
    "batch_size": 512,
    "beam_width": 100,
    "desired_length": "20",
}

PRESETS = {"desk": {}, "paper": PAPER_PRESET}

_FIELD_TYPES = {f.name: (f.type if isinstance(f.type, str) else f.type.__name__)
                for f in fields(RunConfig)}


def _parse_value(key: str, text: str):
    kind = _FIELD_TYPES[key]
    text = text.strip()
    try:
        if kind == "bool":
            if text.lower() in ("true", "1", "yes", "on"):
                return True
            if text.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(text)
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {text!r} as {kind}") from None


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines into a typed override dict."""
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        overrides[key] = _parse_value(key, value)
    return overrides


def load_run_config(config_path=None, preset: str = "desk", overrides=None) -> RunConfig:
    """Defaults <- preset <- config file <- explicit overrides, in that order."""
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r} (choose from {sorted(PRESETS)})")
    merged = dict(PRESETS[preset])
    if config_path is not None:
        with open(config_path, encoding="utf-8") as f:
            merged.update(parse_config_text(f.read()))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        merged[key] = value
    return RunConfig(**merged)
