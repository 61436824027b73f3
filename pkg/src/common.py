from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np
import yaml

LOGGER = logging.getLogger(__name__)

TOOL_NAME = "clique-homology"
TOOL_VERSION = "0.3.0"
RNG_NAME = "PCG64"

DEFAULT_PRIMES = (1_000_000_007, 998_244_353)


class InputError(ValueError):
    """Bad user data or parameters."""


class ParseError(InputError):
    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None) -> None:
        self.path = str(path) if path is not None else None
        self.line = line
        where = ""
        if self.path is not None:
            where = f"{self.path}:"
        if line is not None:
            where = f"{where}{line}:"
        super().__init__(f"{where} {message}".strip() if where else message)


class PreconditionError(InputError):
    pass


class EmptyDimensionError(InputError):
    pass


class ResourceBudgetError(RuntimeError):
    def __init__(self, budget: str, limit: int | float, message: str) -> None:
        self.budget = budget
        self.limit = limit
        super().__init__(f"{message} (budget {budget}={limit})")


class StateError(RuntimeError):
    pass


class NumericIntegrityError(ArithmeticError):
    pass


@dataclass
class Settings:
    max_dim: int = 16
    max_simplices: int = 2_000_000
    eigensolver_cap: int = 4096
    brute_force_max_vars: int = 24
    primes: tuple[int, int] = DEFAULT_PRIMES
    rational_fallback: bool = True
    qpe_bits: Optional[int] = None
    rescale: str = "exact"
    clique_dense_exponent: float = 3.0
    regime_thresholds: tuple[float, float] = (0.5, 2.0)
    seed: int = 0
    threads: int = 1

    def budgets(self) -> dict:
        return {
            "max_dim": self.max_dim,
            "max_simplices": self.max_simplices,
            "eigensolver_cap": self.eigensolver_cap,
            "brute_force_max_vars": self.brute_force_max_vars,
        }

    def to_dict(self) -> dict:
        out = asdict(self)
        out["primes"] = list(self.primes)
        out["regime_thresholds"] = list(self.regime_thresholds)
        return out


def setup_logging(level: int = logging.INFO) -> None:
    logging.basicConfig(
        level=level,
        format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    )


def load_config(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        config = yaml.safe_load(f)
    if not config or "budgets" not in config:
        raise ValueError("Config must define a top-level 'budgets' object")
    return config


def resolve_settings(config: Optional[dict] = None, overrides: Optional[dict] = None) -> Settings:
    """Flatten config sections and CLI overrides into one Settings object.

    Precedence is defaults < config file < overrides; None overrides are ignored.
    """
    merged: dict[str, Any] = {}
    config = config or {}
    for section in ("budgets", "homology", "lgz", "experiments", "rng"):
        merged.update(config.get(section) or {})
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    known = {f.name for f in fields(Settings)}
    unknown = sorted(set(merged) - known - {"generator"})
    if unknown:
        LOGGER.warning("Ignoring unknown config keys: %s", unknown)
    if merged.get("generator", RNG_NAME) != RNG_NAME:
        raise InputError(f"Only the {RNG_NAME} generator is supported, got {merged['generator']!r}")

    kwargs = {k: v for k, v in merged.items() if k in known}
    if "primes" in kwargs:
        primes = tuple(int(p) for p in kwargs["primes"])
        if len(primes) != 2 or primes[0] == primes[1]:
            raise InputError("homology.primes must list two distinct primes")
        kwargs["primes"] = primes
    if "regime_thresholds" in kwargs:
        lo, hi = (float(v) for v in kwargs["regime_thresholds"])
        if not 0 <= lo < hi:
            raise InputError("experiments.regime_thresholds must satisfy 0 <= lower < upper")
        kwargs["regime_thresholds"] = (lo, hi)
    if kwargs.get("rescale", "exact") not in {"exact", "gershgorin"}:
        raise InputError("lgz.rescale must be 'exact' or 'gershgorin'")
    return Settings(**kwargs)


def ensure_parent_dir(path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def child_seeds(seed: int, count: int) -> list[int]:
    """Child i of the master seed drives batch or trial i."""
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_jsonable(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float) and not np.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, np.ndarray):
        return _to_jsonable(value.tolist())
    if isinstance(value, Path):
        return str(value)
    return value


def dumps_json(payload: dict) -> str:
    return json.dumps(_to_jsonable(payload), sort_keys=True, indent=2) + "\n"


def write_json(payload: dict, path: str | Path | None) -> str:
    text = dumps_json(payload)
    if path is None or str(path) == "-":
        return text
    ensure_parent_dir(path)
    Path(path).write_text(text, encoding="utf-8")
    LOGGER.info("Wrote %s", path)
    return text


def meta_block(command: str, settings: Settings, **extra: Any) -> dict:
    meta = {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "command": command,
        "seed": settings.seed,
        "rng": RNG_NAME,
        "budgets": settings.budgets(),
        "primes": list(settings.primes),
        "settings": settings.to_dict(),
    }
    meta.update(extra)
    return meta


def sorted_unique(values: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(set(int(v) for v in values)))
