"""Runtime configuration.

Values come from, in order of precedence: explicit overrides (``using`` or
CLI flags), ``GCALC_*`` environment variables, then the defaults below.
"""

from __future__ import annotations

import contextlib
import contextvars
import os
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction

from .errors import ConfigError

ENV_PREFIX = "GCALC_"


@dataclass(frozen=True)
class Config:
    lattice_depth: int = 48
    window_fraction: Fraction = Fraction(1, 2)
    mollifier_order: int = 6
    quad_tolerance: float = 1e-10
    valuation_tolerance: float = 0.05
    term_cap: int = 64
    order_window: Fraction = Fraction(16)

    def __post_init__(self):
        if self.lattice_depth < 8:
            raise ConfigError("lattice depth must be >= 8")
        if not 0 < self.window_fraction < 1:
            raise ConfigError("window fraction must lie in (0, 1)")
        if not 0 <= self.mollifier_order <= 12:
            raise ConfigError("mollifier order must lie in [0, 12]")
        if self.term_cap < 2:
            raise ConfigError("term cap must be >= 2")
        if self.order_window <= 0:
            raise ConfigError("order window must be positive")

    @property
    def window_start(self) -> int:
        """First lattice index of the regression window."""
        lo = int(self.lattice_depth * (1 - self.window_fraction))
        return max(1, min(lo, self.lattice_depth - 2))

    def to_json(self) -> dict:
        out = {}
        for key, value in asdict(self).items():
            out[key] = str(value) if isinstance(value, Fraction) else value
        return out


_CASTS = {
    "lattice_depth": int,
    "window_fraction": Fraction,
    "mollifier_order": int,
    "quad_tolerance": float,
    "valuation_tolerance": float,
    "term_cap": int,
    "order_window": Fraction,
}


def from_env(environ=None) -> Config:
    environ = os.environ if environ is None else environ
    values = {}
    for f in fields(Config):
        raw = environ.get(ENV_PREFIX + f.name.upper())
        if raw is None:
            continue
        try:
            values[f.name] = _CASTS[f.name](raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad value for {ENV_PREFIX}{f.name.upper()}: {raw!r}") from exc
    return Config(**values)


_current: contextvars.ContextVar[Config | None] = contextvars.ContextVar("gcalc_config", default=None)


def current() -> Config:
    cfg = _current.get()
    if cfg is None:
        cfg = from_env()
        _current.set(cfg)
    return cfg


@contextlib.contextmanager
def using(cfg: Config | None = None, **overrides):
    """Temporarily replace the active configuration.

    >>> with using(lattice_depth=32):
    ...     current().lattice_depth
    32
    """
    base = cfg if cfg is not None else current()
    token = _current.set(replace(base, **overrides))
    try:
        yield _current.get()
    finally:
        _current.reset(token)
