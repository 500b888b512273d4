"""Plain-text ``key=value`` run configuration.

Blank lines and ``#`` comments are ignored; every key must be known and may
appear once.  ``dump`` writes every key in a fixed order, so a dumped
config parses back to an identical object.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .nn import Ablation


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_scales(text: str) -> tuple[float, ...]:
    vals = tuple(float(v) for v in text.split(",") if v.strip())
    if not vals or any(v <= 0 for v in vals):
        raise ValueError(f"scales must be positive numbers, got {text!r}")
    return vals


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class Config:
    size: int = 64
    seed: int = 0
    epochs: int = 100
    batch: int = 16
    lr: float = 1e-4
    lr_decay_every: int = 30
    lr_decay: float = 0.1
    scales: tuple[float, ...] = (0.75, 1.0, 1.25)
    data_dir: str = "data/train"
    ckpt_path: str = "model.ckpt"
    log_path: str = "runlog.csv"
    # stop after this many optimizer steps (0 = run every epoch)
    max_steps: int = 0
    ablation: Ablation = field(default_factory=Ablation)
    weight_amp: float = 5.0
    weight_window: int = 31

    def __post_init__(self):
        if self.size <= 0 or self.size % 32:
            raise ConfigError(f"size must be a positive multiple of 32, got {self.size}")
        if self.batch <= 0 or self.epochs < 0 or self.max_steps < 0:
            raise ConfigError("batch must be positive; epochs and max_steps non-negative")
        if self.lr <= 0 or self.lr_decay_every <= 0:
            raise ConfigError("lr and lr_decay_every must be positive")
        if self.weight_window <= 0 or self.weight_window % 2 == 0:
            raise ConfigError(f"loss.weight_window must be a positive odd integer, got {self.weight_window}")

    def items(self) -> list[tuple[str, str]]:
        out = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "ablation":
                out += [(f"ablation.{k}", _fmt(v)) for k, v in value.as_dict().items()]
            elif f.name.startswith("weight_"):
                out.append((f"loss.{f.name}", _fmt(value)))
            else:
                out.append((f.name, _fmt(value)))
        return out

    def dump(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.items())


_SCALAR = {f.name: f.type for f in fields(Config) if f.name not in ("ablation", "weight_amp", "weight_window")}
_PARSERS = {
    "int": int,
    "float": float,
    "str": str,
    "tuple[float, ...]": _parse_scales,
}


def parse_config(text: str, source: str = "<config>") -> Config:
    values: dict = {}
    ablation: dict[str, bool] = {}
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        seen.add(key)
        try:
            if key.startswith("ablation."):
                flag = key.split(".", 1)[1]
                if flag not in Ablation.__dataclass_fields__:
                    raise ConfigError(f"{where}: unknown key {key!r}")
                ablation[flag] = _parse_bool(value)
            elif key == "loss.weight_amp":
                values["weight_amp"] = float(value)
            elif key == "loss.weight_window":
                values["weight_window"] = int(value)
            elif key in _SCALAR:
                values[key] = _PARSERS[_SCALAR[key]](value)
            else:
                raise ConfigError(f"{where}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None
    try:
        return Config(ablation=Ablation(**ablation), **values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path) -> Config:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


def with_overrides(cfg: Config, **changes) -> Config:
    return replace(cfg, **changes)
