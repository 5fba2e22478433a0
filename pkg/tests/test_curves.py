"""CSR curves, F50 crossovers, curve inversion, and CSV round trips."""

from __future__ import annotations

import math

import pytest

from pfikit import (
    KINGHAM_Z,
    AmbiguityError,
    BracketError,
    CrossoverResult,
    DomainError,
    FieldGrid,
    KinghamCurve,
    NumericalError,
    csr_from_fractions,
    csr_to_field,
    evaluate_csr,
    find_f50,
    generate_curve,
    read_curve_csv,
    write_curve_csv,
)

F50_ANCHORS = {
    "si": 19.8155,
    "si2": 18.0904,
    "si3": 14.4225,
    "si4": 13.0518,
}


def test_csr_from_fractions_conventions():
    assert csr_from_fractions((0.25, 0.75)) == pytest.approx(0.75)
    assert csr_from_fractions((0.2, 0.3, 0.5), charge_pair=(2, 3)) == pytest.approx(0.625)
    # all ions promoted past the pair: the higher state wins
    assert csr_from_fractions((0.0, 0.0, 1.0)) == 1.0


@pytest.mark.parametrize("name", sorted(F50_ANCHORS))
def test_silicon_family_crossovers(species_table, si_env, f50, name):
    assert f50(species_table[name], si_env) == pytest.approx(
        F50_ANCHORS[name], abs=2e-3)


def test_rhodium_crossover(species_table, rh_env, f50):
    assert f50(species_table["rh"], rh_env) == pytest.approx(24.6889, abs=2e-3)


def test_cluster_crossovers_fall_with_size(species_table, si_env, f50):
    values = [f50(species_table[n], si_env) for n in ("si4", "si3", "si2", "si")]
    assert values == sorted(values)


def test_crossover_result_is_validated():
    with pytest.raises(NumericalError):
        CrossoverResult(20.0, (5.0, 45.0), 0.6)
    with pytest.raises(NumericalError):
        CrossoverResult(50.0, (5.0, 45.0), 0.5)


def test_find_f50_reports_unreachable_bracket(species_table, si_env):
    with pytest.raises(BracketError) as exc_info:
        find_f50(species_table["si"], si_env, KINGHAM_Z, search_vnm=(5.0, 10.0))
    lo, hi = exc_info.value.achievable
    assert lo < 0.5 and hi < 0.5


def test_find_f50_rejects_bad_search_range(species_table, si_env):
    with pytest.raises(DomainError):
        find_f50(species_table["si"], si_env, KINGHAM_Z, search_vnm=(30.0, 10.0))
    with pytest.raises(DomainError):
        find_f50(species_table["si"], si_env, KINGHAM_Z, search_vnm=(5.0, 80.0))


def test_discontinuous_crossover_is_refused(species_table, si_env):
    # push the second ionization energy up until the singles/doubles ratio
    # jumps straight over 0.5 when the first-step barrier collapses
    stiff = species_table["si3"].with_ie(2, 18.72)
    with pytest.raises(NumericalError, match="discontinuous"):
        find_f50(stiff, si_env, KINGHAM_Z)


def test_grid_halving_leaves_inversion_stable(species_table, si_env):
    si = species_table["si"]
    coarse = generate_curve(si, si_env, KINGHAM_Z, FieldGrid(17.0, 22.0, 0.25))
    fine = generate_curve(si, si_env, KINGHAM_Z, FieldGrid(17.0, 22.0, 0.125))
    f_coarse = csr_to_field(coarse, 0.5).field_vnm
    f_fine = csr_to_field(fine, 0.5).field_vnm
    assert f_coarse == pytest.approx(f_fine, abs=1e-3)


def test_inversion_recovers_the_forward_model(species_table, si_env, f50):
    si = species_table["si"]
    curve = generate_curve(si, si_env, KINGHAM_Z, FieldGrid(17.0, 22.0, 0.25))
    crossover = f50(si, si_env)
    assert csr_to_field(curve, 0.5).field_vnm == pytest.approx(crossover, abs=1e-3)
    # a mid-run point away from the crossover inverts just as cleanly
    target = evaluate_csr(si, si_env, KINGHAM_Z, 20.6)
    assert csr_to_field(curve, target).field_vnm == pytest.approx(20.6, abs=1e-3)


def test_inversion_refuses_extrapolation(species_table, si_env):
    curve = generate_curve(species_table["si"], si_env, KINGHAM_Z,
                           FieldGrid(17.0, 19.0, 0.5))
    lo, hi = curve.csr_range()
    with pytest.raises(DomainError):
        csr_to_field(curve, hi + 0.05)
    with pytest.raises(DomainError):
        csr_to_field(curve, lo - 0.05)


def _synthetic_curve(grid, ratios):
    rows = tuple((1.0 - c, c, 0.0) for c in ratios)
    return KinghamCurve("synthetic", grid, rows, tuple(ratios))


def test_inversion_flags_ambiguous_values():
    curve = _synthetic_curve((10.0, 11.0, 12.0), (0.2, 0.6, 0.3))
    with pytest.raises(AmbiguityError) as exc_info:
        csr_to_field(curve, 0.5)
    assert len(exc_info.value.branches) == 2
    # but a value reached on one branch only still inverts
    assert csr_to_field(curve, 0.25).field_vnm == pytest.approx(10.125, abs=1e-9)


def test_inversion_flags_flat_curves():
    curve = _synthetic_curve((10.0, 11.0, 12.0), (0.5, 0.5, 0.5))
    with pytest.raises(DomainError, match="flat"):
        csr_to_field(curve, 0.5)


def test_counting_band_is_tight_mid_curve(species_table, si_env):
    # a 10^4-ion sample puts the two-sigma field band within +/- 1 %
    si = species_table["si"]
    curve = generate_curve(si, si_env, KINGHAM_Z, FieldGrid(18.5, 21.0, 0.25))
    two_sigma = 2.0 * math.sqrt(0.5 * 0.5 / 10000.0)
    est = csr_to_field(curve, 0.5, two_sigma=two_sigma)
    lo, hi = est.interval_vnm
    assert lo < est.field_vnm < hi
    assert (hi - lo) / est.field_vnm <= 0.02


def test_counting_band_clamps_to_the_run(species_table, si_env):
    curve = generate_curve(species_table["si"], si_env, KINGHAM_Z,
                           FieldGrid(18.5, 21.0, 0.25))
    est = csr_to_field(curve, 0.5, two_sigma=0.45)
    lo, hi = est.interval_vnm
    assert curve.field_grid_vnm[0] <= lo < hi <= curve.field_grid_vnm[-1]
    with pytest.raises(DomainError):
        csr_to_field(curve, 0.5, two_sigma=-0.1)


def test_curve_csv_round_trip(tmp_path, species_table, si_env):
    si2 = species_table["si2"]
    curve = generate_curve(si2, si_env, KINGHAM_Z, FieldGrid(16.0, 20.0, 0.5))
    path = tmp_path / "si2_curve.csv"
    write_curve_csv(curve, path)
    back = read_curve_csv(path)
    assert back.species_name == curve.species_name
    assert back.field_grid_vnm == pytest.approx(curve.field_grid_vnm, rel=1e-8)
    assert back.csr == pytest.approx(curve.csr, rel=1e-8, abs=1e-12)
    for row, orig in zip(back.fractions, curve.fractions):
        # construction already proved each row sums to 1 within 1e-12
        assert row[:len(orig)] == pytest.approx(orig, rel=1e-8, abs=1e-12)


def test_curve_csv_reader_validates(tmp_path):
    bad_header = tmp_path / "bad.csv"
    bad_header.write_text("field_Vnm,f1,f2\n10,0.5,0.5\n")
    with pytest.raises(DomainError, match="header"):
        read_curve_csv(bad_header)
    empty = tmp_path / "empty.csv"
    empty.write_text("field_Vnm,f1,f2,f3,csr\n")
    with pytest.raises(DomainError, match="no data"):
        read_curve_csv(empty)


def test_curve_validation_rejects_bad_rows():
    with pytest.raises(DomainError):
        KinghamCurve("x", (10.0, 9.0), ((1.0, 0.0, 0.0),) * 2, (0.0, 0.0))
    with pytest.raises(DomainError):
        KinghamCurve("x", (10.0, 11.0), ((0.7, 0.2, 0.0),) * 2, (0.0, 0.0))
    with pytest.raises(DomainError):
        KinghamCurve("x", (10.0, 11.0), ((1.0, 0.0, 0.0),) * 2, (0.0, 1.5))


def test_field_grid_points_hit_both_ends():
    grid = FieldGrid(5.0, 45.0, 0.1)
    pts = grid.points()
    assert pts[0] == 5.0
    assert pts[-1] == pytest.approx(45.0, abs=1e-9)
    assert len(pts) == 401
    with pytest.raises(DomainError):
        FieldGrid(10.0, 5.0, 0.1)
    with pytest.raises(DomainError):
        FieldGrid(5.0, 45.0, 0.0)
