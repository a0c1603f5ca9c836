"""Rug-plot emission: one vertical strip per defeasible example.

Strips are sorted left to right by their proportion of weakening atom
effects. Within a strip, stacked bands show the example's distribution of
gold atom effects: green for strengthening, red for weakening, light for
magnitude one, dark for magnitude two, gray for no effect. A thin header
tick above each strip carries the example's overall gold label (green
strengthener, red weakener). A tabular companion file holds the exact
numbers plotted.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Union

from .core import Atom, DefeasibleExample, DefeasibleLabel
from .errors import ValidationError

EFFECT_ORDER = (-2, -1, 0, 1, 2)

_BAND_COLORS = {
    -2: "#7f1d1d",  # dark red
    -1: "#fca5a5",  # light red
    0: "#d4d4d4",  # gray
    1: "#86efac",  # light green
    2: "#14532d",  # dark green
}

_GOLD_COLORS = {
    DefeasibleLabel.STRENGTHENER: "#16a34a",
    DefeasibleLabel.WEAKENER: "#dc2626",
}


@dataclass(frozen=True)
class RugPlotSlice:
    example_id: str
    gold: DefeasibleLabel
    effect_histogram: Dict[int, int]

    @property
    def weakener_proportion(self) -> float:
        negatives = sum(n for value, n in self.effect_histogram.items() if value < 0)
        nonzero = sum(n for value, n in self.effect_histogram.items() if value != 0)
        return negatives / nonzero if nonzero else 0.0

    @property
    def total(self) -> int:
        return sum(self.effect_histogram.values())


def slices_from_atoms(
    examples: Sequence[DefeasibleExample], atoms: Sequence[Atom]
) -> List[RugPlotSlice]:
    """One slice per example with at least one scored valid atom."""
    histograms: Dict[str, Dict[int, int]] = {}
    for atom in atoms:
        if atom.human_valid is not True or atom.effect_gold is None:
            continue
        if atom.effect_gold.is_invalid:
            continue
        histogram = histograms.setdefault(
            atom.parent_example_id, {value: 0 for value in EFFECT_ORDER}
        )
        histogram[atom.effect_gold.value] += 1
    slices = []
    for example in examples:
        histogram = histograms.get(example.id)
        if histogram is None:
            continue
        slices.append(RugPlotSlice(example.id, example.gold, histogram))
    return slices


def sort_slices(slices: Sequence[RugPlotSlice]) -> List[RugPlotSlice]:
    return sorted(slices, key=lambda s: (s.weakener_proportion, s.example_id))


def render_svg(slices: Sequence[RugPlotSlice], width_per_slice: int = 8,
               height: int = 220) -> str:
    """Deterministic hand-rolled SVG; identical input gives identical bytes."""
    if not slices:
        raise ValidationError("rug plot needs at least one slice")
    ordered = sort_slices(slices)
    header_height = 12
    gap = 2
    body_top = header_height + gap
    body_height = height - body_top
    width = width_per_slice * len(ordered)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        "<desc>Per-example gold atom-effect distributions, sorted by "
        "weakener proportion</desc>",
    ]
    for index, item in enumerate(ordered):
        x = index * width_per_slice
        gold_color = _GOLD_COLORS[item.gold]
        parts.append(
            f'<rect x="{x}" y="0" width="{width_per_slice - 1}" '
            f'height="{header_height}" fill="{gold_color}">'
            f"<title>{item.example_id}</title></rect>"
        )
        y = float(body_top)
        for value in EFFECT_ORDER:
            count = item.effect_histogram.get(value, 0)
            if count == 0:
                continue
            band = body_height * count / item.total
            parts.append(
                f'<rect x="{x}" y="{y:.2f}" width="{width_per_slice - 1}" '
                f'height="{band:.2f}" fill="{_BAND_COLORS[value]}"/>'
            )
            y += band
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_rug_plot(
    slices: Sequence[RugPlotSlice],
    svg_path: Union[str, Path],
    table_path: Union[str, Path],
) -> None:
    """Emit the vector figure and its tabular companion side by side."""
    ordered = sort_slices(slices)
    svg_path = Path(svg_path)
    svg_path.parent.mkdir(parents=True, exist_ok=True)
    svg_path.write_text(render_svg(ordered), encoding="utf-8")
    table_path = Path(table_path)
    with table_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["position", "example_id", "gold", "weakener_proportion"]
            + [f"effect_{value}" for value in EFFECT_ORDER]
        )
        for position, item in enumerate(ordered):
            writer.writerow(
                [position, item.example_id, item.gold.value,
                 f"{item.weakener_proportion:.6f}"]
                + [item.effect_histogram.get(value, 0) for value in EFFECT_ORDER]
            )
