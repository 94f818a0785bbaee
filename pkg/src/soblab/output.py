"""Deterministic serialisation: JSON and CSV with 12 significant digits, SVG region plots,
the flat ``key=value`` config format and the shipped JSON schemas."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Mapping

from soblab.exponents import Answer, RegionSample
from soblab.experiments import DEFAULT_EPSILONS, Tolerances

SIG_DIGITS = 12


def fmt_float(x: float) -> str:
    """``x`` at 12 significant digits; ``inf``/``nan`` spelled out."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(f"{x:.{SIG_DIGITS}g}"))


def plain(obj):
    """Convert to JSON-ready builtins, rounding floats to 12 significant digits."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return str(obj.numerator) if obj.denominator == 1 else f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return fmt_float(obj)
        return float(f"{obj:.{SIG_DIGITS}g}")
    if isinstance(obj, Mapping):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(plain(v) for v in obj)
    if hasattr(obj, "item"):          # numpy scalars
        return plain(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(plain(obj), indent=2, allow_nan=False) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# Schemas -----------------------------------------------------------------------------

SCHEMAS = ("verdict", "norm_report", "experiment_report")


def load_schema(name: str) -> dict:
    if name not in SCHEMAS:
        raise KeyError(name)
    text = resources.files("soblab").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


# Region plots --------------------------------------------------------------------------

def region_csv(sample: RegionSample) -> str:
    rows = []
    for s_t, r_t, answer in sample.cells:
        p_t = math.inf if r_t == 0 else 1 / float(r_t)
        rows.append([float(s_t), float(r_t), p_t, answer.value])
    return csv_text(["s_tilde", "inv_p_tilde", "p_tilde", "verdict"], rows)


_FILL = {Answer.YES: "#4a90c2", Answer.UNSUPPORTED: "#c8c8c8"}
_STROKE = {"target-p-max": "#c0392b", "critical-curve-sp=N": "#8e44ad",
           "holder-line": "#27ae60", "compact-lower": "#d35400"}


def region_svg(sample: RegionSample, title: str) -> str:
    """Unit-square plot: s~ across, 1/p~ upwards, so p~ = inf is the top edge."""
    size, pad = 400, 50

    def X(s):
        return pad + size * s

    def Y(r):
        return pad + size * (1 - r)

    def num(v):
        return f"{v:.6g}"

    dx = 1.0 / max(sample.n_s - 1, 1)
    dy = 1.0 / max(sample.n_r - 1, 1)
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size + 2 * pad}" '
           f'height="{size + 2 * pad}" viewBox="0 0 {size + 2 * pad} {size + 2 * pad}">',
           f'<title>{_escape(title)}</title>',
           f'<rect x="{pad}" y="{pad}" width="{size}" height="{size}" fill="white" stroke="black"/>',
           '<g stroke="none">']
    for s_t, r_t, answer in sample.cells:
        fill = _FILL.get(answer)
        if fill is None:
            continue
        x0 = max(0.0, float(s_t) - dx / 2)
        x1 = min(1.0, float(s_t) + dx / 2)
        y0 = max(0.0, float(r_t) - dy / 2)
        y1 = min(1.0, float(r_t) + dy / 2)
        out.append(f'<rect x="{num(X(x0))}" y="{num(Y(y1))}" width="{num(size * (x1 - x0))}" '
                   f'height="{num(size * (y1 - y0))}" fill="{fill}"/>')
    out.append("</g>")
    for name in sorted(sample.curves):
        pts = " ".join(f"{num(X(s))},{num(Y(r))}" for s, r in sample.curves[name]
                       if 0 <= s <= 1 and 0 <= r <= 1)
        if pts:
            out.append(f'<polyline points="{pts}" fill="none" stroke="{_STROKE.get(name, "black")}" '
                       f'stroke-width="2"><title>{_escape(name)}</title></polyline>')
    out.append(f'<text x="{pad + size / 2}" y="{size + pad + 35}" text-anchor="middle">s~</text>')
    out.append(f'<text x="{pad - 30}" y="{pad + size / 2}" text-anchor="middle">1/p~</text>')
    for v in (0, 0.5, 1):
        out.append(f'<text x="{num(X(v))}" y="{size + pad + 18}" text-anchor="middle">{v:g}</text>')
        out.append(f'<text x="{pad - 8}" y="{num(Y(v) + 4)}" text-anchor="end">{v:g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# Config --------------------------------------------------------------------------------

FORMATS = frozenset({"json", "csv", "svg"})


@dataclass(frozen=True)
class CliConfig:
    tolerances: Tolerances = Tolerances()
    epsilons: tuple = DEFAULT_EPSILONS
    resolution: int = 100
    output_dir: str = "soblab-out"
    formats: frozenset = field(default_factory=lambda: FORMATS)


class ConfigError(ValueError):
    pass


_TOLERANCE_KEYS = frozenset(Tolerances.__dataclass_fields__)
CONFIG_KEYS = _TOLERANCE_KEYS | {"epsilons", "resolution", "output_dir", "formats"}


def parse_config(text: str) -> CliConfig:
    """Read ``key=value`` lines; ``#`` starts a comment; unknown keys are errors."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    try:
        tolerances = Tolerances.from_mapping({k: v for k, v in values.items() if k in _TOLERANCE_KEYS})
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    cfg = {"tolerances": tolerances}
    if "epsilons" in values:
        try:
            eps = tuple(float(v) for v in values["epsilons"].split(","))
        except ValueError:
            raise ConfigError("epsilons must be a comma-separated list of numbers") from None
        if len(eps) < 3 or not all(0 < e <= 1 for e in eps) or len(set(eps)) != len(eps):
            raise ConfigError("epsilons needs at least three distinct values in (0, 1]")
        cfg["epsilons"] = eps
    if "resolution" in values:
        try:
            res = int(values["resolution"])
        except ValueError:
            raise ConfigError("resolution must be an integer") from None
        if not 1 <= res <= 1000:
            raise ConfigError("resolution must lie in [1, 1000]")
        cfg["resolution"] = res
    if "output_dir" in values:
        if not values["output_dir"]:
            raise ConfigError("output_dir is empty")
        cfg["output_dir"] = values["output_dir"]
    if "formats" in values:
        chosen = frozenset(v.strip() for v in values["formats"].split(",") if v.strip())
        if not chosen or not chosen <= FORMATS:
            raise ConfigError(f"formats must be a nonempty subset of {sorted(FORMATS)}")
        cfg["formats"] = chosen
    return CliConfig(**cfg)


def read_config(path) -> CliConfig:
    return parse_config(Path(path).read_text())
