"""Scenario configuration and its flat ``key = value`` text format.

Grammar, one assignment per line::

    # comment
    signal = cos_shift          # exp_sin | cos_shift | poly:a0,a1,a2,...
    n = 48
    m = 9
    lambda = 4
    snr_db = 10                 # or: inv_variance = 2e-3 (0 means noiseless)
    seed = 0
    method = fourier, gegenbauer, bsr, gbsr
    refine = 8
    trials = 1
    credible_level = 0.999
    samples = 10000
    band = empirical            # empirical | analytic
    output_dir = out
    rel_tol = 1e-8
    max_iter = 100
    shape = 1
    rate = 1e-4
    gbsr_adjoint = normalized   # normalized | unnormalized

Blank lines are ignored and ``#`` starts a comment anywhere on a line.
Keys may use ``-`` or ``_``.  Lists are comma separated.
"""

from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigError
from .inference import GBSR_ADJOINTS, BcdConfig

ALL_METHODS = ("fourier", "gegenbauer", "bsr", "gbsr")
SIGNAL_NAMES = ("exp_sin", "cos_shift")


@dataclass(frozen=True)
class ScenarioConfig:
    signal: str = "cos_shift"
    n: int = 48
    m: int = 9
    lam: float = 4.0
    snr_db: float = None
    inv_variance: float = None
    seed: int = 0
    methods: tuple = ALL_METHODS
    refine: int = 8
    bcd: BcdConfig = field(default_factory=BcdConfig)
    credible_level: float = 0.999
    samples: int = 10000
    band: str = "empirical"
    trials: int = 1
    output_dir: str = None

    def validate(self):
        """Raise :class:`ConfigError` naming the first offending field."""
        if not (self.signal in SIGNAL_NAMES or self.signal.startswith("poly:")):
            raise ConfigError(f"unknown signal {self.signal!r}", "signal")
        if self.signal.startswith("poly:"):
            try:
                [float(t) for t in self.signal[5:].split(",")]
            except ValueError:
                raise ConfigError("poly: expects comma-separated coefficients", "signal") from None
        if int(self.n) != self.n or self.n < 4 or self.n % 2:
            raise ConfigError(f"must be an even integer >= 4, got {self.n}", "n")
        if int(self.m) != self.m or self.m < 0:
            raise ConfigError(f"must be a non-negative integer, got {self.m}", "m")
        if self.m + 1 > self.n:
            raise ConfigError(f"m + 1 = {self.m + 1} exceeds n = {self.n}", "m")
        if not self.lam > 0:
            raise ConfigError(f"must be positive, got {self.lam}", "lambda")
        if (self.snr_db is None) == (self.inv_variance is None):
            raise ConfigError("set exactly one of snr_db and inv_variance", "noise")
        if self.inv_variance is not None and not self.inv_variance >= 0:
            raise ConfigError(f"must be >= 0, got {self.inv_variance}", "inv_variance")
        if not self.methods:
            raise ConfigError("at least one method is required", "method")
        for meth in self.methods:
            if meth not in ALL_METHODS:
                raise ConfigError(f"unknown method {meth!r}; choose from {ALL_METHODS}", "method")
        if int(self.refine) != self.refine or self.refine < 1:
            raise ConfigError(f"must be a positive integer, got {self.refine}", "refine")
        if not 0 < self.credible_level < 1:
            raise ConfigError(f"must lie in (0, 1), got {self.credible_level}", "credible_level")
        if int(self.samples) != self.samples or self.samples < 2:
            raise ConfigError(f"must be an integer >= 2, got {self.samples}", "samples")
        if self.band not in ("empirical", "analytic"):
            raise ConfigError(f"must be empirical or analytic, got {self.band!r}", "band")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"must be a positive integer, got {self.trials}", "trials")
        return self

    def echo(self):
        """Plain dict of every setting, for manifests."""
        d = asdict(self)
        d["methods"] = list(self.methods)
        d["bcd"]["init_precisions"] = list(self.bcd.init_precisions)
        return d


_BCD_KEYS = {"rel_tol": float, "max_iter": int, "shape": float, "rate": float, "gbsr_adjoint": str}
_KEYS = {
    "signal": str,
    "n": int,
    "m": int,
    "lambda": float,
    "lam": float,
    "snr_db": float,
    "inv_variance": float,
    "seed": int,
    "method": "methods",
    "methods": "methods",
    "refine": int,
    "credible_level": float,
    "samples": int,
    "band": str,
    "trials": int,
    "output_dir": str,
    "out": str,
}


def _convert(key, raw):
    conv = _KEYS.get(key) or _BCD_KEYS.get(key)
    if conv is None:
        raise ConfigError(f"unknown key {key!r}", key)
    if conv == "methods":
        return tuple(t.strip() for t in raw.split(",") if t.strip())
    try:
        if conv is int:
            val = float(raw)
            if val != int(val):
                raise ValueError
            return int(val)
        return conv(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r} as {conv.__name__}", key) from None


def parse_config_text(text):
    """Parse the key-value text format into a dict of typed values."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'", "config")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_").lower()
        if not raw:
            raise ConfigError(f"line {lineno}: empty value", key)
        values[key] = _convert(key, raw)
    return values


def config_from_mapping(values, base=None):
    """Build a :class:`ScenarioConfig` from parsed values layered over ``base``."""
    cfg = base or ScenarioConfig()
    top, bcd = {}, {}
    for key, val in values.items():
        if val is None:
            continue
        key = key.replace("-", "_")
        if key in _BCD_KEYS:
            bcd[key] = val
        elif key in ("lambda", "lam"):
            top["lam"] = val
        elif key in ("method", "methods"):
            top["methods"] = tuple(val)
        elif key in ("out", "output_dir"):
            top["output_dir"] = str(val)
        elif key in {f.name for f in fields(ScenarioConfig)}:
            top[key] = val
        else:
            raise ConfigError(f"unknown key {key!r}", key)
    if "snr_db" in top and "inv_variance" not in top:
        top["inv_variance"] = None
    if "inv_variance" in top and "snr_db" not in top:
        top["snr_db"] = None
    if bcd:
        if bcd.get("gbsr_adjoint", GBSR_ADJOINTS[1]) not in GBSR_ADJOINTS:
            raise ConfigError(f"must be one of {GBSR_ADJOINTS}", "gbsr_adjoint")
        top["bcd"] = replace(cfg.bcd, **bcd)
    return replace(cfg, **top)


def load_config(path, overrides=None):
    """Read a config file, apply ``overrides`` (dict) and validate."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}", "config") from err
    values = parse_config_text(text)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    # a noise setting given as an override replaces either noise key from the file
    if "snr_db" in overrides or "inv_variance" in overrides:
        values.pop("snr_db", None)
        values.pop("inv_variance", None)
    values.update(overrides)
    return config_from_mapping(values).validate()


def dump_config(cfg):
    """Render ``cfg`` in the key-value text format (round-trips through :func:`load_config`)."""
    lines = [
        f"signal = {cfg.signal}",
        f"n = {cfg.n}",
        f"m = {cfg.m}",
        f"lambda = {cfg.lam!r}",
    ]
    if cfg.snr_db is not None:
        lines.append(f"snr_db = {cfg.snr_db!r}")
    else:
        lines.append(f"inv_variance = {cfg.inv_variance!r}")
    lines += [
        f"seed = {cfg.seed}",
        f"method = {', '.join(cfg.methods)}",
        f"refine = {cfg.refine}",
        f"trials = {cfg.trials}",
        f"credible_level = {cfg.credible_level!r}",
        f"samples = {cfg.samples}",
        f"band = {cfg.band}",
        f"rel_tol = {cfg.bcd.rel_tol!r}",
        f"max_iter = {cfg.bcd.max_iter}",
        f"shape = {cfg.bcd.shape!r}",
        f"rate = {cfg.bcd.rate!r}",
        f"gbsr_adjoint = {cfg.bcd.gbsr_adjoint}",
    ]
    if cfg.output_dir is not None:
        lines.append(f"output_dir = {cfg.output_dir}")
    return "\n".join(lines) + "\n"
