"""Run configuration: flat key-value files and validation.

Grammar, one statement per line::

    key = value        # trailing comments allowed
    # full-line comment / blank lines ignored

Keys are case-sensitive; values are integers (``1_000_000`` and ``1e6``
accepted), decimals, or bare strings.  Unknown and duplicate keys are
rejected.  Defaults that depend on other fields are resolved after
parsing: burn_in = n_trades // 2, snapshot_every = n_agents,
n_snapshots = min(1000, (n_trades - burn_in) // snapshot_every).
"""
from __future__ import annotations

import difflib
from dataclasses import dataclass, field, fields

from .errors import ConfigError
from .savings import (
    DEFAULT_URN_WARMUP,
    Constant,
    Imitation,
    MoneyDependent,
    QuenchedUniform,
    SavingsRule,
    Urn,
)

__all__ = ["RunConfig", "parse_config", "load_config"]

MODELS = (
    "cc",
    "ccm",
    "selforg_decreasing",
    "selforg_increasing",
    "polya",
    "imitation",
)

# model -> model_params it accepts ("warmup" is optional, the rest required)
_MODEL_PARAMS = {
    "cc": {"lambda"},
    "ccm": set(),
    "selforg_decreasing": {"c1", "c2"},
    "selforg_increasing": {"c1", "c2"},
    "polya": {"a", "b", "warmup"},
    "imitation": set(),
}

_INT_KEYS = {"n_agents", "n_trades", "burn_in", "snapshot_every", "n_snapshots", "seed", "warmup"}
_FLOAT_KEYS = {"lambda", "c1", "c2", "a", "b"}
_STR_KEYS = {"model", "output_dir"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


@dataclass
class RunConfig:
    """Fully resolved parameters of one simulation run."""

    model: str
    n_agents: int = 100
    n_trades: int = 1_000_000
    burn_in: int | None = None
    snapshot_every: int | None = None
    n_snapshots: int | None = None
    seed: int = 0
    output_dir: str = "out"
    # model parameters; which ones apply depends on `model`
    lam: float | None = None
    c1: float | None = None
    c2: float | None = None
    a: float | None = None
    b: float | None = None
    warmup: int | None = None
    model_params: dict = field(init=False, default_factory=dict)

    def __post_init__(self):
        self._resolve_defaults()
        self._validate()
        self.model_params = self._collect_params()

    def _resolve_defaults(self):
        if self.burn_in is None:
            self.burn_in = self.n_trades // 2
        if self.snapshot_every is None:
            self.snapshot_every = max(1, self.n_agents)
        if self.n_snapshots is None:
            budget = self.n_trades - self.burn_in
            self.n_snapshots = max(0, min(1000, budget // self.snapshot_every))
        if self.model == "polya" and self.warmup is None:
            self.warmup = DEFAULT_URN_WARMUP

    def _validate(self):
        def bad(name, why):
            return ConfigError(f"invalid {name}: {why}")

        if self.model not in MODELS:
            hint = difflib.get_close_matches(self.model, MODELS, n=1)
            extra = f" (did you mean {hint[0]!r}?)" if hint else ""
            raise bad("model", f"{self.model!r} is not one of {MODELS}{extra}")
        if self.n_agents < 2:
            raise bad("n_agents", f"must be at least 2, got {self.n_agents}")
        if self.n_trades < 0:
            raise bad("n_trades", f"must be nonnegative, got {self.n_trades}")
        if self.burn_in < 0:
            raise bad("burn_in", f"must be nonnegative, got {self.burn_in}")
        if self.snapshot_every < 1:
            raise bad("snapshot_every", f"must be at least 1, got {self.snapshot_every}")
        if self.n_snapshots < 0:
            raise bad("n_snapshots", f"must be nonnegative, got {self.n_snapshots}")
        span = self.burn_in + self.snapshot_every * self.n_snapshots
        if span > self.n_trades:
            raise bad(
                "n_snapshots",
                "snapshot schedule overruns the run: burn_in + snapshot_every * n_snapshots"
                f" = {span} > n_trades = {self.n_trades}",
            )
        if not 0 <= self.seed < 2**64:
            raise bad("seed", f"must be a 64-bit unsigned integer, got {self.seed}")

        given = {
            key
            for key, value in (
                ("lambda", self.lam),
                ("c1", self.c1),
                ("c2", self.c2),
                ("a", self.a),
                ("b", self.b),
                ("warmup", self.warmup),
            )
            if value is not None
        }
        allowed = _MODEL_PARAMS[self.model]
        required = allowed - {"warmup"}
        missing = required - given
        if missing:
            raise bad("model", f"model {self.model!r} needs {sorted(missing)}")
        stray = given - allowed
        if stray:
            raise bad("model", f"model {self.model!r} does not use {sorted(stray)}")

        if self.lam is not None and not 0.0 <= self.lam <= 1.0:
            raise bad("lambda", f"must be in [0, 1], got {self.lam}")
        if self.c1 is not None and not 0.0 < self.c1 < 1.0:
            raise bad("c1", f"must be in (0, 1), got {self.c1}")
        if self.c2 is not None and not self.c2 > 0.0:
            raise bad("c2", f"must be positive, got {self.c2}")
        if self.a is not None and not self.a > 0.0:
            raise bad("a", f"must be positive, got {self.a}")
        if self.b is not None and not self.b > 0.0:
            raise bad("b", f"must be positive, got {self.b}")
        if self.warmup is not None and self.warmup < 1:
            raise bad("warmup", f"must be at least 1, got {self.warmup}")

    def _collect_params(self) -> dict:
        if self.model == "cc":
            return {"lambda": self.lam}
        if self.model in ("selforg_decreasing", "selforg_increasing"):
            return {"c1": self.c1, "c2": self.c2}
        if self.model == "polya":
            return {"a": self.a, "b": self.b, "warmup": self.warmup}
        return {}

    def rule(self) -> SavingsRule:
        """The savings rule this configuration describes."""
        if self.model == "cc":
            return Constant(self.lam)
        if self.model == "ccm":
            return QuenchedUniform()
        if self.model == "selforg_decreasing":
            return MoneyDependent("decreasing", self.c1, self.c2)
        if self.model == "selforg_increasing":
            return MoneyDependent("increasing", self.c1, self.c2)
        if self.model == "polya":
            return Urn(self.a, self.b, self.warmup)
        return Imitation()

    def to_dict(self) -> dict:
        """Stable, JSON-safe echo of every resolved field."""
        out = {
            "model": self.model,
            "n_agents": self.n_agents,
            "n_trades": self.n_trades,
            "burn_in": self.burn_in,
            "snapshot_every": self.snapshot_every,
            "n_snapshots": self.n_snapshots,
            "seed": self.seed,
            "output_dir": self.output_dir,
        }
        out.update(self.model_params)
        return out


def _parse_int(raw: str) -> int:
    text = raw.replace("_", "")
    try:
        return int(text)
    except ValueError:
        value = float(text)  # accept 1e6-style integers
        if value != int(value):
            raise ValueError(f"{raw!r} is not an integer")
        return int(value)


def parse_config(text: str, **overrides) -> RunConfig:
    """Parse the key-value format into a validated RunConfig.

    ``overrides`` (RunConfig field names, e.g. seed=7) replace values
    from the text; the CLI uses this for its --seed/--out flags.
    """
    seen: dict[str, int] = {}
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stmt = line.split("#", 1)[0].strip()
        if not stmt:
            continue
        if "=" not in stmt:
            raise ConfigError(f"expected 'key = value', got {stmt!r}", line=lineno)
        key, _, raw = stmt.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _ALL_KEYS:
            hint = difflib.get_close_matches(key, sorted(_ALL_KEYS), n=1)
            extra = f"; did you mean {hint[0]!r}?" if hint else ""
            raise ConfigError(f"unknown key {key!r}{extra}", line=lineno)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first set on line {seen[key]})", line=lineno)
        seen[key] = lineno
        if not raw:
            raise ConfigError(f"key {key!r} has no value", line=lineno)
        try:
            if key in _INT_KEYS:
                values[key] = _parse_int(raw)
            elif key in _FLOAT_KEYS:
                values[key] = float(raw)
            else:
                values[key] = raw
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", line=lineno) from None

    if "lambda" in values:
        values["lam"] = values.pop("lambda")
    if "model" not in values:
        raise ConfigError("missing required key 'model'")

    known_fields = {f.name for f in fields(RunConfig) if f.init}
    for name in overrides:
        if name not in known_fields:
            raise ConfigError(f"unknown override {name!r}")
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def load_config(path, **overrides) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), **overrides)
