"""Serialization of corpora, corpus transforms, and stability reports.

Everything here is deterministic: JSON is emitted with sorted keys and no
timestamps, CSV rows are formatted with repr, and SVG plots are flat
polyline renderings with fixed-format coordinates, so identical inputs
produce byte-identical artifacts.
"""

from __future__ import annotations

import json
import math
import os
from typing import Dict, List, Optional, Sequence, Tuple

from .corpus import Corpus
from .exceptions import SpecFormatError
from .specio import function_to_obj, parse_function
from .stability import (
    CorpusTransform,
    StabilityReport,
    TransformClass,
    Violation,
)

__all__ = [
    "corpus_to_obj",
    "parse_corpus",
    "transform_to_obj",
    "parse_corpus_transform",
    "report_to_obj",
    "render_report_text",
    "dump_json",
    "emit_plots",
]


def _jsonable_witness(w):
    if isinstance(w, tuple):
        return [float(v) for v in w]
    if w is None or isinstance(w, (int, float, str)):
        return w
    return float(w)


def corpus_to_obj(c: Corpus) -> dict:
    return {
        "kind": "corpus",
        "description": c.description,
        "labels": list(c.labels),
        "elements": [function_to_obj(f) for f in c.elements],
        "lattice_pairs": [list(p) for p in c.lattice_pairs],
    }


def parse_corpus(obj: dict) -> Corpus:
    if not isinstance(obj, dict) or obj.get("kind") != "corpus":
        raise SpecFormatError("corpus object must have kind 'corpus'")
    try:
        elements = tuple(parse_function(o) for o in obj["elements"])
        labels = tuple(str(s) for s in obj["labels"])
        pairs = tuple(
            (int(a), int(b), int(s), int(m))
            for a, b, s, m in obj.get("lattice_pairs", [])
        )
        description = str(obj.get("description", ""))
    except SpecFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecFormatError(f"malformed corpus object: {exc}") from exc
    n = len(elements)
    if any(not 0 <= i < n for p in pairs for i in p):
        raise SpecFormatError("lattice pair index out of range")
    return Corpus(elements, labels, description, pairs)


def transform_to_obj(t: CorpusTransform) -> dict:
    return {
        "kind": "corpus-transform",
        "corpus": corpus_to_obj(t.corpus),
        "images": [function_to_obj(f) for f in t.images],
        "provenance": t.provenance,
    }


def parse_corpus_transform(obj: dict) -> CorpusTransform:
    if not isinstance(obj, dict) or obj.get("kind") != "corpus-transform":
        raise SpecFormatError(
            "corpus transform object must have kind 'corpus-transform'"
        )
    corpus = parse_corpus(obj.get("corpus", {}))
    try:
        images = tuple(parse_function(o) for o in obj["images"])
        provenance = str(obj.get("provenance", ""))
    except SpecFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecFormatError(f"malformed corpus transform: {exc}") from exc
    if len(images) != len(corpus):
        raise SpecFormatError("one image per corpus element required")
    return CorpusTransform(corpus, images, provenance)


def report_to_obj(r: StabilityReport) -> dict:
    return {
        "kind": "stability-report",
        "classification": r.classification.value,
        "certified": r.certified,
        "ctilde": r.ctilde,
        "violations": [
            {
                "condition": v.condition,
                "f": v.f_label,
                "g": v.g_label,
                "witness": _jsonable_witness(v.witness),
                "detail": v.detail,
            }
            for v in r.violations
        ],
        "phi_samples": [[z, p] for z, p in r.phi_samples],
        "slope_samples": [[a, c] for a, c in r.slope_samples],
        "alpha": r.alpha,
        "sandwich_lower": r.sandwich_lower,
        "sandwich_upper": r.sandwich_upper,
        "gamma": r.gamma,
        "exponent_deviation": r.exponent_deviation,
        "sandwich_flagged": r.sandwich_flagged,
        "within_regime": r.within_regime,
        "diagnostics": list(r.diagnostics),
        "provenance": r.provenance,
    }


def dump_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _fmt(v: Optional[float]) -> str:
    if v is None:
        return "n/a"
    return repr(float(v))


def render_report_text(obj: dict) -> str:
    """Human-readable rendering of a stability-report object."""
    lines = ["stability report"]
    if obj.get("provenance"):
        lines.append(f"  source: {obj['provenance']}")
    lines.append(f"  constant: C = {_fmt(obj.get('ctilde'))}")
    cls = obj.get("classification", "unknown")
    cert = "certified" if obj.get("certified") else "NOT certified"
    lines.append(f"  classification: {cls} ({cert})")
    if obj.get("gamma") is not None:
        lines.append(
            f"  exponent: gamma = {_fmt(obj['gamma'])} "
            f"(sup deviation {_fmt(obj.get('exponent_deviation'))})"
        )
    if obj.get("alpha") is not None:
        lines.append(f"  dilation: alpha = {_fmt(obj['alpha'])}")
    lo, hi = obj.get("sandwich_lower"), obj.get("sandwich_upper")
    if lo is not None and hi is not None:
        spread = hi / lo if lo else math.inf
        flagged = "yes" if obj.get("sandwich_flagged") else "no"
        regime = "yes" if obj.get("within_regime") else "no"
        lines.append(
            f"  sandwich: {_fmt(lo)} * ref <= Tf <= {_fmt(hi)} * ref "
            f"(spread {spread!r}; flagged: {flagged}; within C^7: {regime})"
        )
    for note in obj.get("diagnostics", ()):
        lines.append(f"  note: {note}")
    violations = obj.get("violations", ())
    if not violations:
        lines.append("  violations: none")
    else:
        lines.append(f"  violations: {len(violations)}")
        for v in violations:
            pair = v["f"] + (f" vs {v['g']}" if v.get("g") else "")
            at = "" if v.get("witness") is None else f" at {v['witness']}"
            lines.append(f"    [{v['condition']}] {pair}{at}: {v['detail']}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# plot emission


_SVG_W, _SVG_H = 480, 360
_MARGIN = 48.0


def _svg_scatter_lines(
    series: Sequence[Tuple[str, Sequence[Tuple[float, float]]]],
    title: str,
    log_axes: bool = True,
) -> str:
    """Flat SVG with one polyline per series; points carry small markers."""
    pts_all: List[Tuple[float, float]] = []
    plotted: List[Tuple[str, List[Tuple[float, float]]]] = []
    for name, pts in series:
        keep = []
        for x, y in pts:
            if log_axes:
                if x <= 0 or y <= 0:
                    continue
                keep.append((math.log10(x), math.log10(y)))
            else:
                keep.append((float(x), float(y)))
        if keep:
            plotted.append((name, keep))
            pts_all.extend(keep)
    if not pts_all:
        pts_all = [(0.0, 0.0), (1.0, 1.0)]
    x0 = min(p[0] for p in pts_all)
    x1 = max(p[0] for p in pts_all)
    y0 = min(p[1] for p in pts_all)
    y1 = max(p[1] for p in pts_all)
    dx = (x1 - x0) or 1.0
    dy = (y1 - y0) or 1.0

    def to_px(p):
        px = _MARGIN + (p[0] - x0) / dx * (_SVG_W - 2 * _MARGIN)
        py = _SVG_H - _MARGIN - (p[1] - y0) / dy * (_SVG_H - 2 * _MARGIN)
        return f"{px:.2f},{py:.2f}"

    colors = ("#1f5fa8", "#bb3311", "#227744", "#886600")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" '
        f'height="{_SVG_H}" viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<rect x="{_MARGIN:.2f}" y="{_MARGIN:.2f}" '
        f'width="{_SVG_W - 2 * _MARGIN:.2f}" '
        f'height="{_SVG_H - 2 * _MARGIN:.2f}" fill="none" stroke="#333"/>',
        f'<text x="{_MARGIN:.2f}" y="{_MARGIN - 12:.2f}" '
        f'font-family="monospace" font-size="13">{title}</text>',
    ]
    scale_note = "log10/log10" if log_axes else "linear"
    parts.append(
        f'<text x="{_MARGIN:.2f}" y="{_SVG_H - 12:.2f}" '
        f'font-family="monospace" font-size="11">axes: {scale_note}; '
        f'x in [{x0:.4g}, {x1:.4g}], y in [{y0:.4g}, {y1:.4g}]</text>'
    )
    for i, (name, pts) in enumerate(plotted):
        color = colors[i % len(colors)]
        coords = " ".join(to_px(p) for p in pts)
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{coords}"/>'
        )
        for p in pts:
            px, py = to_px(p).split(",")
            parts.append(
                f'<circle cx="{px}" cy="{py}" r="2.5" fill="{color}"/>'
            )
        parts.append(
            f'<text x="{_SVG_W - _MARGIN:.2f}" y="{_MARGIN + 14 * (i + 1):.2f}" '
            f'text-anchor="end" font-family="monospace" font-size="11" '
            f'fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_rows(header: Sequence[str], rows: Sequence[Sequence[float]]) -> str:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(repr(float(v)) for v in row))
    return "\n".join(out) + "\n"


def emit_plots(obj: dict, directory: str) -> List[str]:
    """Write phi(z), c(a), and sandwich-envelope CSV + SVG artifacts."""
    os.makedirs(directory, exist_ok=True)
    written: List[str] = []

    phi = [(float(z), float(p)) for z, p in obj.get("phi_samples", ())]
    if phi:
        path = os.path.join(directory, "phi.csv")
        _write(path, _csv_rows(("z", "phi"), phi))
        written.append(path)
        path = os.path.join(directory, "phi.svg")
        _write(path, _svg_scatter_lines([("phi(z)", phi)], "indicator support map phi(z)"))
        written.append(path)

    slopes = [(float(a), float(c)) for a, c in obj.get("slope_samples", ())]
    if slopes:
        path = os.path.join(directory, "slope.csv")
        _write(path, _csv_rows(("a", "c"), slopes))
        written.append(path)
        path = os.path.join(directory, "slope.svg")
        _write(path, _svg_scatter_lines([("c(a)", slopes)], "ray image map c(a)"))
        written.append(path)

    # the sandwich constants bound values, so the envelope is drawn around
    # whichever sample family carries value jitter: image slopes in both cases
    lo, hi = obj.get("sandwich_lower"), obj.get("sandwich_upper")
    alpha = obj.get("alpha")
    gauge_like = obj.get("classification") == "gauge"
    family = phi if gauge_like else slopes
    if family and lo is not None and hi is not None and alpha:
        rows = []
        band_lo = []
        band_hi = []
        for x, v in family:
            ref = (1.0 / (alpha * x)) if gauge_like else (x / alpha)
            rows.append((x, v, lo * ref, hi * ref))
            band_lo.append((x, lo * ref))
            band_hi.append((x, hi * ref))
        name = "phi(z)" if gauge_like else "c(a)"
        path = os.path.join(directory, "sandwich.csv")
        _write(path, _csv_rows(("x", "value", "lower", "upper"), rows))
        written.append(path)
        path = os.path.join(directory, "sandwich.svg")
        _write(
            path,
            _svg_scatter_lines(
                [(name, family), ("c*ref", band_lo), ("C*ref", band_hi)],
                "sandwich envelope around the value-jittered samples",
            ),
        )
        written.append(path)
    return written
