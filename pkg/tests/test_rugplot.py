import pytest

from atomnli.core import Atom, DefeasibleExample, DefeasibleLabel, EffectScore
from atomnli.errors import ValidationError
from atomnli.rugplot import (
    RugPlotSlice,
    render_svg,
    slices_from_atoms,
    sort_slices,
    write_rug_plot,
)


def _slice(eid, gold, histogram):
    full = {v: 0 for v in (-2, -1, 0, 1, 2)}
    full.update(histogram)
    return RugPlotSlice(eid, gold, full)


S, W = DefeasibleLabel.STRENGTHENER, DefeasibleLabel.WEAKENER


def test_weakener_proportion():
    assert _slice("a", S, {2: 2, 0: 1}).weakener_proportion == 0.0
    assert _slice("a", W, {-2: 1, 1: 1}).weakener_proportion == 0.5
    # all-zero histogram: defined as 0, not an error
    assert _slice("a", S, {0: 3}).weakener_proportion == 0.0


def test_sort_is_ascending_with_id_tiebreak():
    slices = [
        _slice("b", W, {-2: 4}),          # 1.0
        _slice("a", S, {2: 1, -1: 4}),    # 0.8
        _slice("c", S, {2: 4, -1: 1}),    # 0.2
    ]
    ordered = sort_slices(slices)
    assert [s.example_id for s in ordered] == ["c", "a", "b"]
    proportions = [s.weakener_proportion for s in ordered]
    assert proportions == sorted(proportions)
    # ties broken by example id
    tied = sort_slices([_slice("z", S, {2: 1}), _slice("y", S, {1: 1})])
    assert [s.example_id for s in tied] == ["y", "z"]


def test_slices_from_atoms_skips_invalid_and_unscored():
    example = DefeasibleExample(id="d1", premise="P.", hypothesis="H.",
                                update="U.", gold=S)
    atoms = [
        Atom(atom_id="a1", parent_example_id="d1", text="Scored.",
             human_valid=True, effect_gold=EffectScore(2)),
        Atom(atom_id="a2", parent_example_id="d1", text="Invalid.",
             human_valid=False),
        Atom(atom_id="a3", parent_example_id="d1", text="Unscored.",
             human_valid=None),
    ]
    slices = slices_from_atoms([example], atoms)
    assert len(slices) == 1
    assert slices[0].effect_histogram[2] == 1
    assert slices[0].total == 1


def test_svg_is_deterministic_and_single_hue_for_uniform_data(tmp_path):
    slices = [_slice(f"e{i}", S, {2: 2, 1: 1}) for i in range(3)]
    svg = render_svg(slices)
    assert svg == render_svg(slices)
    # all-strengthener and all-positive: only green shades appear
    assert "#7f1d1d" not in svg and "#fca5a5" not in svg and "#dc2626" not in svg
    assert svg.count("#16a34a") == 3  # header tick per strip

    svg_path = tmp_path / "plot.svg"
    csv_path = tmp_path / "plot.csv"
    write_rug_plot(slices, svg_path, csv_path)
    assert svg_path.read_text() == svg
    header = csv_path.read_text().splitlines()[0]
    assert header.split(",")[:4] == ["position", "example_id", "gold",
                                    "weakener_proportion"]


def test_empty_slices_rejected():
    with pytest.raises(ValidationError):
        render_svg([])
