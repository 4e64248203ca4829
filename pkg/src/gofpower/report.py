"""Study output: CSV and JSON tables and static SVG power figures.

Every artifact is a byte-deterministic function of the study result:
numbers are printed in shortest round-trip form, ``+inf`` as the token
``inf``, and the SVG contains no timestamps or generated ids.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .stats import STUDY_KINDS, StatisticKind
from .study import StudyResult

__all__ = [
    "format_number",
    "emit_csv",
    "emit_json",
    "FigureSpec",
    "figure_specs",
    "emit_svg_figure",
    "write_figures",
]

CSV_HEADER = ("statistic,alternative,n,reps,c_liberal,alpha_liberal,"
              "c_conservative,alpha_conservative,power_liberal,"
              "power_conservative,power_interpolated,std_err,null_source,seed")


def format_number(x) -> str:
    """Shortest decimal that round-trips; ``inf`` for +infinity."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _sorted_entries(result: StudyResult):
    return sorted(result.entries(),
                  key=lambda e: (e.alternative, e.N, e.kind.value))


def emit_csv(result: StudyResult, path) -> Path:
    """Write the study grid as CSV, one row per (statistic, alternative, n)."""
    seed = result.provenance["master_seed"]
    lines = [CSV_HEADER]
    for e in _sorted_entries(result):
        lines.append(",".join([
            e.kind.value,
            e.alternative,
            str(e.N),
            str(e.reps),
            format_number(e.bracket.c_liberal),
            format_number(e.bracket.alpha_liberal),
            format_number(e.bracket.c_conservative),
            format_number(e.bracket.alpha_conservative),
            format_number(e.power_liberal),
            format_number(e.power_conservative),
            format_number(e.power_interpolated),
            format_number(e.std_err),
            e.null_source,
            str(seed),
        ]))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def _json_value(x: float):
    return "inf" if math.isinf(x) else float(x)


def emit_json(result: StudyResult, path) -> Path:
    """Write the grid plus the full provenance block as one JSON document."""
    doc = {
        "schema": "gofpower-study/1",
        "provenance": result.provenance,
        "grid": [
            {
                "statistic": e.kind.value,
                "alternative": e.alternative,
                "n": e.N,
                "reps": e.reps,
                "c_liberal": _json_value(e.bracket.c_liberal),
                "alpha_liberal": e.bracket.alpha_liberal,
                "c_conservative": _json_value(e.bracket.c_conservative),
                "alpha_conservative": e.bracket.alpha_conservative,
                "exact_hit": e.bracket.exact_hit,
                "power_liberal": e.power_liberal,
                "power_conservative": e.power_conservative,
                "power_interpolated": e.power_interpolated,
                "std_err": e.std_err,
                "null_source": e.null_source,
                "seed": result.provenance["master_seed"],
            }
            for e in _sorted_entries(result)
        ],
    }
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


# -- figures -----------------------------------------------------------------

@dataclass(frozen=True)
class FigureSpec:
    """One power-versus-sample-size chart: a polyline per statistic."""

    alternative: str
    sample_sizes: tuple[int, ...]
    series: tuple[tuple[StatisticKind, tuple[float, ...]], ...]
    title: str


def _display_order(kinds) -> list[StatisticKind]:
    preferred = list(STUDY_KINDS) + [k for k in StatisticKind
                                     if k not in STUDY_KINDS]
    present = set(kinds)
    return [k for k in preferred if k in present]


def figure_specs(result: StudyResult) -> list[FigureSpec]:
    """One figure per alternative in the study, series in legend order."""
    prov = result.provenance
    sizes = tuple(int(n) for n in prov["sample_sizes"])
    kinds = _display_order(StatisticKind(name) for name in prov["statistics"])
    specs = []
    for alt in prov["alternatives"]:
        name = alt["name"]
        series = tuple(
            (kind, tuple(min(1.0, max(0.0, result.power(kind, name, n)))
                         for n in sizes))
            for kind in kinds
        )
        specs.append(FigureSpec(
            alternative=name,
            sample_sizes=sizes,
            series=series,
            title=f"Power at level {prov['alpha']:g}: {name} alternative",
        ))
    return specs


_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
            "#393b79", "#637939", "#8c6d31")

_W, _H = 800, 500
_ML, _MR, _MT, _MB = 62, 168, 42, 48


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def emit_svg_figure(spec: FigureSpec, path) -> Path:
    """Render one figure as a standalone, byte-stable SVG file."""
    sizes = spec.sample_sizes
    if not sizes:
        raise ValueError("figure needs at least one sample size")
    for kind, powers in spec.series:
        if len(powers) != len(sizes):
            raise ValueError(
                f"series {kind.value} has {len(powers)} points for "
                f"{len(sizes)} sample sizes"
            )
    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB
    n_lo, n_hi = min(sizes), max(sizes)
    span = (n_hi - n_lo) or 1

    def sx(n: float) -> float:
        if n_hi == n_lo:
            return _ML + plot_w / 2.0
        return _ML + (n - n_lo) / span * plot_w

    def sy(p: float) -> float:
        p = min(1.0, max(0.0, p))
        return _MT + (1.0 - p) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_fmt(_ML + plot_w / 2)}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{spec.title}</text>',
    ]
    # y grid and ticks, 0.0 to 1.0 by 0.1
    for i in range(11):
        p = i / 10.0
        y = sy(p)
        out.append(f'<line x1="{_ML}" y1="{_fmt(y)}" x2="{_ML + plot_w}" '
                   f'y2="{_fmt(y)}" stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{_ML - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{p:.1f}</text>')
    # x ticks at the configured sample sizes
    for n in sizes:
        x = sx(n)
        out.append(f'<line x1="{_fmt(x)}" y1="{_MT}" x2="{_fmt(x)}" '
                   f'y2="{_MT + plot_h}" stroke="#eeeeee" stroke-width="1"/>')
        out.append(f'<line x1="{_fmt(x)}" y1="{_MT + plot_h}" x2="{_fmt(x)}" '
                   f'y2="{_MT + plot_h + 5}" stroke="#333333" stroke-width="1"/>')
        out.append(f'<text x="{_fmt(x)}" y="{_MT + plot_h + 20}" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{n}</text>')
    # axes
    out.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_MT + plot_h}" '
               f'stroke="#333333" stroke-width="1"/>')
    out.append(f'<line x1="{_ML}" y1="{_MT + plot_h}" x2="{_ML + plot_w}" '
               f'y2="{_MT + plot_h}" stroke="#333333" stroke-width="1"/>')
    out.append(f'<text x="{_fmt(_ML + plot_w / 2)}" y="{_H - 10}" '
               f'text-anchor="middle" font-family="sans-serif" '
               f'font-size="12">sample size</text>')
    out.append(f'<text x="16" y="{_fmt(_MT + plot_h / 2)}" '
               f'text-anchor="middle" font-family="sans-serif" font-size="12" '
               f'transform="rotate(-90 16 {_fmt(_MT + plot_h / 2)})">power</text>')
    # series
    for idx, (kind, powers) in enumerate(spec.series):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(f"{_fmt(sx(n))},{_fmt(sy(p))}"
                       for n, p in zip(sizes, powers))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        for n, p in zip(sizes, powers):
            out.append(f'<circle cx="{_fmt(sx(n))}" cy="{_fmt(sy(p))}" r="2.5" '
                       f'fill="{color}"/>')
    # legend
    lx = _W - _MR + 14
    for idx, (kind, _) in enumerate(spec.series):
        color = _PALETTE[idx % len(_PALETTE)]
        ly = _MT + 10 + idx * 18
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<circle cx="{lx + 11}" cy="{ly}" r="2.5" fill="{color}"/>')
        out.append(f'<text x="{lx + 28}" y="{ly + 4}" '
                   f'font-family="sans-serif" font-size="11">'
                   f'{kind.display_name}</text>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path


def write_figures(result: StudyResult, out_dir) -> list[Path]:
    """Emit ``power_<alternative>.svg`` for every alternative in the study."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for spec in figure_specs(result):
        paths.append(emit_svg_figure(spec, out_dir / f"power_{spec.alternative}.svg"))
    return paths
