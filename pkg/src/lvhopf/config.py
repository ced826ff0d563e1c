"""Run configuration: a flat ``key.path = value`` text format.

Example::

    # model
    model.a = 4.0
    model.H = 0.01
    kernel.family = dirac
    kernel.expectation = 1.0
    sim.dt = 0.001
    output = out
    seed = 0

Blank lines and ``#`` comments are ignored.  Unknown keys are errors.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace

from .errors import ConfigError
from .kernels import FAMILIES, DelayKernel
from .model import ModelParams
from .simulate import SimConfig


@dataclass(frozen=True)
class KernelSpec:
    family: str = "dirac"
    expectation: float = 1.0
    shape: int = 1

    def to_kernel(self) -> DelayKernel:
        return DelayKernel(self.family, self.expectation, self.shape)


@dataclass(frozen=True)
class ScanConfig:
    E_min: float = 0.0
    E_max: float = 2.5
    n_points: int = 51

    def __post_init__(self):
        if self.n_points < 2:
            raise ConfigError("scan.n_points must be >= 2")
        if not (0 <= self.E_min < self.E_max):
            raise ConfigError("scan range must satisfy 0 <= E_min < E_max")


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=lambda: ModelParams(4.0, 0.01))
    kernel: KernelSpec = field(default_factory=KernelSpec)
    sim: SimConfig = field(default_factory=SimConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    output: str = "out"
    seed: int = 0


_SECTIONS = {"model": ModelParams, "kernel": KernelSpec, "sim": SimConfig, "scan": ScanConfig}
_TOP = {"output": str, "seed": int}


def _field_types(cls) -> dict:
    hints = {"float": float, "int": int, "str": str}
    return {f.name: hints.get(str(f.type).split(" ")[0], float) for f in fields(cls)}


def _convert(key: str, raw: str, typ):
    try:
        if typ is int:
            as_float = float(raw)
            if as_float != int(as_float):
                raise ValueError
            return int(as_float)
        return typ(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {typ.__name__}") from None


def parse_config(text: str) -> RunConfig:
    values: dict[str, dict] = {name: {} for name in _SECTIONS}
    top: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in _TOP:
            top[key] = _convert(key, raw, _TOP[key])
            continue
        section, _, name = key.partition(".")
        if section not in _SECTIONS or name not in _field_types(_SECTIONS[section]):
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[section][name] = _convert(key, raw, _field_types(_SECTIONS[section])[name])

    base = RunConfig()
    try:
        built = {
            name: replace(getattr(base, name), **values[name]) if values[name] else getattr(base, name)
            for name in _SECTIONS
        }
        cfg = RunConfig(**built, **top)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.kernel.family not in FAMILIES:
        raise ConfigError(f"kernel.family must be one of {FAMILIES}")
    try:
        cfg.kernel.to_kernel()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for name in _SECTIONS:
        for key, v in asdict(getattr(cfg, name)).items():
            lines.append(f"{name}.{key} = {_fmt(v)}")
    lines.append(f"output = {cfg.output}")
    lines.append(f"seed = {cfg.seed}")
    return "\n".join(lines) + "\n"


def with_overrides(cfg: RunConfig, a=None, H=None, kernel=None, E=None, shape=None, output=None) -> RunConfig:
    """Apply command-line overrides; ``None`` leaves a value untouched."""
    try:
        model = ModelParams(cfg.model.a if a is None else a, cfg.model.H if H is None else H)
        ks = KernelSpec(
            cfg.kernel.family if kernel is None else kernel,
            cfg.kernel.expectation if E is None else E,
            cfg.kernel.shape if shape is None else shape,
        )
        ks.to_kernel()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return replace(cfg, model=model, kernel=ks, output=cfg.output if output is None else output)
