"""Run-level and placement configuration dataclasses.

Config precedence is flags > config file > defaults. The config file is a
plain ``key = value`` text format; keys use the same names as the dataclass
fields below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path


@dataclass(frozen=True)
class FilterConfig:
    """Parameters of the support-surface search and rotation refinement.

    ``dbscan_eps = None`` selects the automatic rule: twice the median
    nearest-neighbour spacing of the filtered vertices.
    """

    n: int = 3                          # filter side, in cells
    threshold: float = 0.9              # mean-occupancy acceptance level
    up_angle_tolerance: float = 15.0    # degrees from +Z for "upward" normals
    dbscan_eps: float | None = None     # meters; None = auto
    dbscan_min_pts: int = 10
    rotation_steps: int = 24
    contact_epsilon: float = 0.005      # meters; resting-contact band
    z_neighbors: int = 16               # vertices averaged for the support Z

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"filter side must be >= 2, got {self.n}")
        if not (0.0 < self.threshold <= 1.0):
            raise ValueError(f"threshold must be in (0, 1], got {self.threshold}")
        if self.rotation_steps < 1:
            raise ValueError(f"rotation_steps must be >= 1, got {self.rotation_steps}")

    @property
    def up_cos_tolerance(self) -> float:
        return math.cos(math.radians(self.up_angle_tolerance))


@dataclass(frozen=True)
class RunConfig:
    """One end-to-end run: scene, backends, placement knobs, output."""

    scene: str = ""
    annotations: str | None = None
    out: str | None = None
    nlp: str = "fallback"                    # fallback | client
    asset_sources: tuple[str, ...] = ("library", "procedural")
    asset_library: str | None = None
    scale_source: str = "priors"             # detector | priors
    scale_cap: float = 0.8
    scale_samples: int = 5
    unit_scale: float = 1.0                  # scene units per meter at ingest
    seed: int = 0
    port: int = 8030
    filter: FilterConfig = field(default_factory=FilterConfig)

    def __post_init__(self):
        if not (1 <= self.port <= 65535):
            raise ValueError(f"port must be in [1, 65535], got {self.port}")


_FILTER_KEYS = {f.name for f in fields(FilterConfig)}
_RUN_KEYS = {f.name for f in fields(RunConfig)} - {"filter"}


def _coerce(raw: str, current):
    if isinstance(current, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(current, int) and not isinstance(current, bool):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if isinstance(current, tuple):
        return tuple(part.strip() for part in raw.split(",") if part.strip())
    if current is None:
        lowered = raw.lower()
        if lowered in ("none", ""):
            return None
        try:
            return float(raw)
        except ValueError:
            return raw
    return raw


def load_config_file(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    """Parse a ``key = value`` config file on top of ``base`` (or defaults).

    Blank lines and ``#`` comments are ignored. Unknown keys raise ValueError
    so typos fail fast instead of silently using defaults.
    """
    cfg = base if base is not None else RunConfig()
    filt = cfg.filter
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key in _FILTER_KEYS:
            filt = replace(filt, **{key: _coerce(raw, getattr(filt, key))})
        elif key in _RUN_KEYS:
            cfg = replace(cfg, **{key: _coerce(raw, getattr(cfg, key))})
        else:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
    return replace(cfg, filter=filt)
