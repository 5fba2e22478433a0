"""Regenerate the synthetic fixtures in this directory.

The curves are logistic stand-ins for model output: steepness 2 V/nm, with
midpoints chosen so that each species shows the intended charge-state ratio
at the design field of 21.3 V/nm.  The In midpoint is solved so that
inverting the written curve at the measured In CSR (392 / 70000 = 0.0056)
returns 21.3 V/nm exactly.  Peak tables use integer counts, so downstream
ratios are reproduced to about 1e-4.

Run from the repository root:  python fixtures/generate.py
"""

from __future__ import annotations

import json
import math
import os

from scipy.optimize import brentq

from pfikit.curves import KinghamCurve, csr_to_field, read_curve_csv, write_curve_csv
from pfikit.spectrum import (Assignment, Peak, RangedPeakSet, build_overlap_matrix,
                             compute_csr, deconvolve, isotopologue_distribution,
                             load_isotopes, raw_csr, write_peaks_csv)

HERE = os.path.dirname(os.path.abspath(__file__))
DESIGN_FIELD_VNM = 21.3
STEEPNESS_VNM = 2.0

IN_CSR = 392.0 / 70000.0
CSR_TARGETS = {"As": 0.0143, "As2": 0.99996, "As3": 0.9468, "As4": 0.99996}


def logistic_curve(species: str, midpoint_vnm: float, low: float, high: float,
                   step: float) -> KinghamCurve:
    n = round((high - low) / step)
    grid = tuple(low + i * step for i in range(n + 1))
    csr = tuple(1.0 / (1.0 + math.exp(-(f - midpoint_vnm) / STEEPNESS_VNM))
                for f in grid)
    fractions = tuple((1.0 - v, v, 0.0) for v in csr)
    return KinghamCurve(species, grid, fractions, csr)


def solve_in_midpoint() -> float:
    def miss(midpoint: float) -> float:
        curve = logistic_curve("In", midpoint, 5.0, 45.0, 0.5)
        return csr_to_field(curve, IN_CSR).field_vnm - DESIGN_FIELD_VNM

    return brentq(miss, 25.0, 40.0, xtol=1e-10)


def write_curves() -> dict[str, str]:
    paths = {}
    midpoint_in = solve_in_midpoint()
    write_curve_csv(logistic_curve("In", midpoint_in, 5.0, 45.0, 0.5),
                    os.path.join(HERE, "in_curve.csv"))
    paths["In"] = "in_curve.csv"
    print(f"In midpoint: {midpoint_in:.6f} V/nm")
    for species, target in CSR_TARGETS.items():
        midpoint = DESIGN_FIELD_VNM + STEEPNESS_VNM * math.log(1.0 / target - 1.0)
        name = f"{species.lower()}_curve.csv"
        write_curve_csv(logistic_curve(species, midpoint, 5.0, 45.0, 0.1),
                        os.path.join(HERE, name))
        paths[species] = name
        print(f"{species} midpoint: {midpoint:.6f} V/nm (target csr {target})")
    return paths


def write_as_fixture(curve_paths: dict[str, str]) -> None:
    peaks = (
        Peak(25.0, 1200.0, (Assignment("As", 3, 75),)),
        Peak(37.5, 2000.0, (Assignment("As", 2, 75),)),
        Peak(56.5, 17.0, (Assignment("In", 2, 113),)),
        Peak(57.5, 375.0, (Assignment("In", 2, 115),)),
        Peak(69.0, 33866.0, (Assignment("Ga", 1, 69),)),
        Peak(71.0, 22475.0, (Assignment("Ga", 1, 71),)),
        Peak(75.0, 55482.0, (Assignment("As", 1, 75), Assignment("As2", 2, 150))),
        Peak(112.5, 2056.0, (Assignment("As3", 2, 225),)),
        Peak(113.0, 2986.0, (Assignment("In", 1, 113),)),
        Peak(115.0, 66622.0, (Assignment("In", 1, 115),)),
        Peak(150.0, 16330.0, (Assignment("As2", 1, 150), Assignment("As4", 2, 300))),
        Peak(225.0, 4100.0, (Assignment("As3", 1, 225),)),
    )
    write_peaks_csv(RangedPeakSet(peaks), os.path.join(HERE, "as_peaks.csv"))
    config = {
        "peaks": "as_peaks.csv",
        "reference": {"species": "In", "charge_pair": [1, 2]},
        "curves": curve_paths,
        "overlaps": [
            {"shared_mz": 75.0, "anchor": ["As", 2], "partner_charge": 1,
             "claimant": ["As2", 2]},
            {"shared_mz": 150.0, "anchor": ["As2", 2], "partner_charge": 1,
             "claimant": ["As4", 2]},
        ],
        "nominal_fraction": {"As": 0.5},
    }
    with open(os.path.join(HERE, "as_pipeline.json"), "w") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_consistent_fixture() -> None:
    peaks = (
        Peak(56.5, 17.0, (Assignment("In", 2, 113),)),
        Peak(57.5, 375.0, (Assignment("In", 2, 115),)),
        Peak(69.0, 33866.0, (Assignment("Ga", 1, 69),)),
        Peak(71.0, 22475.0, (Assignment("Ga", 1, 71),)),
        Peak(113.0, 2986.0, (Assignment("In", 1, 113),)),
        Peak(115.0, 66622.0, (Assignment("In", 1, 115),)),
    )
    write_peaks_csv(RangedPeakSet(peaks), os.path.join(HERE, "consistent_peaks.csv"))
    config = {
        "peaks": "consistent_peaks.csv",
        "reference": {"species": "In", "charge_pair": [1, 2]},
        "curves": {"In": "in_curve.csv"},
        "overlaps": [],
        "nominal_fraction": {"In": 0.60},
    }
    with open(os.path.join(HERE, "consistent_pipeline.json"), "w") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_si2_fixture() -> None:
    iso = load_isotopes()
    d1 = dict(isotopologue_distribution(iso, "Si", 1))
    d2 = dict(isotopologue_distribution(iso, "Si", 2))
    d4 = dict(isotopologue_distribution(iso, "Si", 4))

    t_si, t_si2_2p, t_si2_1p = 100000.0, 5430.0, 4570.0
    # Si2(2+) counts on half-integer peaks come from odd dimer masses; solve
    # the Si4(2+) total so the primary-assignment CSR of Si2 is 0.048.
    odd2 = sum(p for m, p in d2.items() if m % 2)
    even4 = sum(p for m, p in d4.items() if m % 2 == 0)
    raw_target = 0.048
    n_2p_raw = t_si2_2p * odd2
    t_si4_2p = (n_2p_raw / raw_target - n_2p_raw - t_si2_1p) / even4
    print(f"Si4(2+) total: {t_si4_2p:.3f} (odd2 {odd2:.6f}, even4 {even4:.6f})")

    peaks = []
    for twice_mz in range(56, 61):
        mz = twice_mz / 2.0
        counts = 0.0
        assigns = []
        if twice_mz % 2 == 0:
            m1 = twice_mz // 2
            if m1 in d1:
                counts += t_si * d1[m1]
                assigns.append(Assignment("Si", 1, m1))
        if twice_mz in d2:
            counts += t_si2_2p * d2[twice_mz]
            assigns.append(Assignment("Si2", 2, twice_mz))
        peaks.append(Peak(mz, round(counts), tuple(assigns)))
    for twice_mz in range(112, 121):
        mz = twice_mz / 2.0
        counts = 0.0
        assigns = []
        if twice_mz % 2 == 0:
            m1 = twice_mz // 2
            if m1 in d2:
                counts += t_si2_1p * d2[m1]
                assigns.append(Assignment("Si2", 1, m1))
        if twice_mz in d4:
            counts += t_si4_2p * d4[twice_mz]
            assigns.append(Assignment("Si4", 2, twice_mz))
        peaks.append(Peak(mz, round(counts), tuple(assigns)))
    peak_set = RangedPeakSet(tuple(peaks))
    write_peaks_csv(peak_set, os.path.join(HERE, "si2_overlap_peaks.csv"))

    before = raw_csr(peak_set, "Si2")
    result = deconvolve(peak_set, build_overlap_matrix(peak_set, iso))
    after = compute_csr(result, "Si2")
    print(f"Si2 csr before {before.value:.6f} after {after.value:.6f}")
    print("totals:", {k: round(v, 1) for k, v in result.totals.items()})


def main() -> None:
    curve_paths = write_curves()
    write_as_fixture(curve_paths)
    write_consistent_fixture()
    write_si2_fixture()

    from pfikit.pipeline import load_pipeline_config, run_pipeline
    report = run_pipeline(load_pipeline_config(os.path.join(HERE, "as_pipeline.json")), HERE)
    print(f"\nfield: {report.field.field_vnm:.6f} V/nm  interval {report.field.interval_vnm}")
    for sp, table in report.fractions.items():
        f1, f2 = table[1], table[2]
        print(f"  {sp}: csr {f2 / (f1 + f2):.6f}")
    print("composition before:", {k: f"{100 * v:.3f}" for k, v in report.composition_before.items()})
    print("composition after:", {k: f"{100 * v:.3f}" for k, v in report.composition_after.items()})
    print(f"flags ({len(report.flags)}):")
    for flag in report.flags:
        print(f"  [{flag.kind}] {flag.subject}")
    consistent = run_pipeline(
        load_pipeline_config(os.path.join(HERE, "consistent_pipeline.json")), HERE)
    print(f"consistent fixture flags: {consistent.flags}  field "
          f"{consistent.field.field_vnm:.4f}")


if __name__ == "__main__":
    main()
