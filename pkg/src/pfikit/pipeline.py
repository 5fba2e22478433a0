"""End-to-end overlap resolution: field estimate, peak budget, consistency audit.

The route: measure the CSR of a clean reference species, invert its
calibration curve to get the local field, evaluate every analyte species'
charge-state fractions at that field, then walk the declared peak overlaps in
order, predicting how many counts of the anchor's partner charge state hide
inside each shared peak and handing the remainder to the claimant species.
A final audit compares the resolved spectrum against the model and the
declared nominal composition and emits advisory flags; it never raises.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .curves import FieldEstimate, KinghamCurve, csr_to_field, read_curve_csv
from .errors import ConfigError, DomainError
from .spectrum import (CsrEstimate, Peak, RangedPeakSet, parse_composition,
                       raw_csr, read_peaks_csv)

UNEXPECTED_FRACTION_THRESHOLD = 1e-4
CSR_MISMATCH_TOLERANCE = 0.05

FLAG_KINDS = ("composition_exceeds_nominal", "predicted_counts_exceed_peak",
              "unexpected_charge_state_present", "missing_expected_peak",
              "csr_prediction_mismatch")


def kellogg_field(voltage_v: float, f0_vnm: float, v0_v: float) -> float:
    """Field from the specimen voltage by proportional rescaling.

    A reference pair (f0, v0) anchors the proportionality; the field at
    voltage V is f0 * V / v0.
    """
    if v0_v <= 0.0:
        raise DomainError(f"reference voltage {v0_v} V must be positive")
    if f0_vnm <= 0.0:
        raise DomainError(f"reference field {f0_vnm} V/nm must be positive")
    return f0_vnm * voltage_v / v0_v


def estimate_field(csr_estimate: CsrEstimate, curve: KinghamCurve) -> FieldEstimate:
    """Invert a reference curve at a measured CSR, with its 2-sigma interval."""
    return csr_to_field(curve, csr_estimate.value, csr_estimate.two_sigma)


def fraction_at(curve: KinghamCurve, field_vnm: float, charge: int) -> float:
    """Charge-state fraction at a field, linear interpolation on the grid.

    Fraction columns are charge-ordered starting at 1+; charges beyond the
    stored columns have fraction 0.
    """
    grid = curve.field_grid_vnm
    if not grid[0] <= field_vnm <= grid[-1]:
        raise DomainError(f"{curve.species_name}: field {field_vnm:g} V/nm outside "
                          f"the curve grid [{grid[0]:g}, {grid[-1]:g}]")
    if charge < 1:
        raise DomainError(f"charge {charge} must be >= 1")
    j = charge - 1
    if j >= len(curve.fractions[0]):
        return 0.0
    column = [row[j] for row in curve.fractions]
    return float(np.interp(field_vnm, grid, column))


@dataclass(frozen=True)
class OverlapCase:
    """One declared peak overlap.

    The anchor (species, charge) has a clean peak elsewhere; its partner
    charge state hides inside the shared peak; the claimant (species, charge)
    owns whatever the partner prediction leaves behind.
    """

    shared_mz_da: float
    anchor: tuple[str, int]
    partner_charge: int
    claimant: tuple[str, int]

    def __post_init__(self):
        if self.partner_charge < 1 or self.anchor[1] < 1 or self.claimant[1] < 1:
            raise DomainError("charges must be >= 1")
        if self.partner_charge == self.anchor[1]:
            raise DomainError("partner charge must differ from the anchor charge")


@dataclass(frozen=True)
class OverlapResolution:
    """Count budget of one shared peak.

    ``predicted_counts`` is the raw partner prediction
    anchor * fraction_partner / fraction_anchor; ``assigned_counts`` caps it
    at the shared peak, ``remainder_counts`` goes to the claimant, and any
    ``deficit_counts`` (prediction exceeding the peak) is an inconsistency
    surfaced by the audit.  assigned + remainder equals the shared counts
    exactly.
    """

    shared_counts: float
    anchor_counts: float
    fraction_anchor: float
    fraction_partner: float
    predicted_counts: float
    assigned_counts: float
    remainder_counts: float
    deficit_counts: float
    case: OverlapCase | None = None

    @property
    def feasible(self) -> bool:
        return self.deficit_counts == 0.0


def resolve_overlap(shared_counts: float, anchor_counts: float,
                    fraction_partner: float, fraction_anchor: float,
                    case: OverlapCase | None = None) -> OverlapResolution:
    """Split one shared peak between the anchor's partner state and the claimant."""
    if shared_counts < 0.0 or anchor_counts < 0.0:
        raise DomainError("counts must be nonnegative")
    if not 0.0 <= fraction_partner <= 1.0 or not 0.0 <= fraction_anchor <= 1.0:
        raise DomainError("fractions must lie in [0, 1]")
    if fraction_anchor <= 0.0:
        if anchor_counts > 0.0:
            raise DomainError(
                "anchor fraction is 0 while anchor counts are present; the "
                "partner prediction saturates")
        predicted = 0.0
    else:
        predicted = anchor_counts * fraction_partner / fraction_anchor
    assigned = min(predicted, shared_counts)
    remainder = shared_counts - assigned
    if assigned < remainder:
        # recompute the smaller share from the larger one: subtracting a
        # float in [s/2, s] from s is exact, so assigned + remainder == s
        assigned = shared_counts - remainder
    deficit = max(0.0, predicted - shared_counts)
    return OverlapResolution(shared_counts, anchor_counts, fraction_anchor,
                             fraction_partner, predicted, assigned, remainder,
                             deficit, case)


@dataclass(frozen=True)
class ConsistencyFlag:
    """One advisory audit finding."""

    kind: str
    subject: str
    detail: str
    numbers: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.kind not in FLAG_KINDS:
            raise ConfigError(f"unknown flag kind {self.kind!r}")


def _state_label(species: str, charge: int) -> str:
    return f"{species}:{charge}+"


def primary_counts(peak_set: RangedPeakSet) -> dict[tuple[str, int], float]:
    """Counts per (species, charge) with every peak on its primary assignment."""
    counts: dict[tuple[str, int], float] = {}
    for peak in peak_set.peaks:
        if not peak.assignments:
            continue
        a = peak.assignments[0]
        key = (a.species, a.charge)
        counts[key] = counts.get(key, 0.0) + peak.counts
    return counts


def composition_by_element(counts: dict[tuple[str, int], float],
                           compositions: dict[str, tuple[str, int]] | None = None
                           ) -> dict[str, float]:
    """Atomic fractions per element from (species, charge) ion counts."""
    compositions = compositions or {}
    atoms: dict[str, float] = {}
    for (species, _), value in counts.items():
        element, size = compositions.get(species) or parse_composition(species)
        atoms[element] = atoms.get(element, 0.0) + size * value
    total = sum(atoms.values())
    if total <= 0.0:
        raise DomainError("no atoms counted; composition undefined")
    return {element: n / total for element, n in sorted(atoms.items())}


def audit_consistency(peak_set: RangedPeakSet,
                      resolved: dict[tuple[str, int], float],
                      fractions: dict[str, dict[int, float]],
                      resolutions: tuple[OverlapResolution, ...] = (),
                      nominal_fraction: dict[str, float] | None = None,
                      compositions: dict[str, tuple[str, int]] | None = None,
                      unexpected_threshold: float = UNEXPECTED_FRACTION_THRESHOLD,
                      csr_tolerance: float = CSR_MISMATCH_TOLERANCE
                      ) -> tuple[ConsistencyFlag, ...]:
    """Advisory checks of the resolved spectrum against model and nominals.

    Total function: returns flags in a deterministic order (kind by kind,
    subjects in input order) and never raises.
    """
    flags: list[ConsistencyFlag] = []

    if nominal_fraction:
        measured = composition_by_element(resolved, compositions)
        for element in sorted(nominal_fraction):
            nominal = nominal_fraction[element]
            got = measured.get(element, 0.0)
            if got > nominal:
                flags.append(ConsistencyFlag(
                    "composition_exceeds_nominal", element,
                    f"resolved {element} fraction {100 * got:.2f} at.% exceeds "
                    f"the nominal {100 * nominal:.2f} at.%",
                    (("measured", got), ("nominal", nominal))))

    for res in resolutions:
        if res.deficit_counts > 0.0 and res.case is not None:
            species, _ = res.case.anchor
            label = _state_label(species, res.case.partner_charge)
            flags.append(ConsistencyFlag(
                "predicted_counts_exceed_peak",
                f"{label} at {res.case.shared_mz_da:g} Da",
                f"model predicts {res.predicted_counts:.1f} {label} counts but the "
                f"shared peak at {res.case.shared_mz_da:g} Da holds only "
                f"{res.shared_counts:.0f}",
                (("predicted", res.predicted_counts),
                 ("observed", res.shared_counts),
                 ("deficit", res.deficit_counts))))

    for (species, charge), value in resolved.items():
        if species not in fractions or value <= 0.0:
            continue
        predicted = fractions[species].get(charge, 0.0)
        if predicted < unexpected_threshold:
            flags.append(ConsistencyFlag(
                "unexpected_charge_state_present", _state_label(species, charge),
                f"{_state_label(species, charge)} carries {value:.0f} counts but "
                f"the model fraction at this field is {predicted:.2e}",
                (("counts", value), ("fraction", predicted))))

    ranged_states = {(a.species, a.charge)
                     for peak in peak_set.peaks for a in peak.assignments}
    for species in fractions:
        for charge, predicted in sorted(fractions[species].items()):
            if predicted >= unexpected_threshold and (species, charge) not in ranged_states:
                flags.append(ConsistencyFlag(
                    "missing_expected_peak", _state_label(species, charge),
                    f"the model expects fraction {predicted:.4f} of "
                    f"{_state_label(species, charge)} but no peak is ranged for it",
                    (("fraction", predicted),)))

    overlap_species = set()
    for res in resolutions:
        if res.case is not None:
            overlap_species.add(res.case.anchor[0])
            overlap_species.add(res.case.claimant[0])
    for species in fractions:
        if species in overlap_species:
            continue
        f_lo = fractions[species].get(1, 0.0)
        f_hi = fractions[species].get(2, 0.0)
        if f_lo + f_hi <= 0.0:
            continue
        predicted_csr = f_hi / (f_lo + f_hi)
        n_lo = resolved.get((species, 1), 0.0)
        n_hi = resolved.get((species, 2), 0.0)
        if n_lo + n_hi <= 0.0:
            continue
        observed_csr = n_hi / (n_lo + n_hi)
        if abs(observed_csr - predicted_csr) > csr_tolerance:
            flags.append(ConsistencyFlag(
                "csr_prediction_mismatch", species,
                f"{species}: model CSR {predicted_csr:.4f} at the estimated field "
                f"but the resolved spectrum gives {observed_csr:.4f}",
                (("predicted", predicted_csr), ("observed", observed_csr))))

    order = {kind: i for i, kind in enumerate(FLAG_KINDS)}
    flags.sort(key=lambda fl: order[fl.kind])
    return tuple(flags)


@dataclass(frozen=True)
class ResolutionReport:
    """Everything the overlap pipeline produced, JSON- and text-serializable."""

    reference_species: str
    reference_csr: CsrEstimate
    field: FieldEstimate
    fractions: dict[str, dict[int, float]]
    counts_before: dict[tuple[str, int], float]
    counts_after: dict[tuple[str, int], float]
    composition_before: dict[str, float]
    composition_after: dict[str, float]
    resolutions: tuple[OverlapResolution, ...]
    flags: tuple[ConsistencyFlag, ...]

    def narrative(self) -> str:
        lines = [
            f"Reference {self.reference_species} CSR "
            f"{self.reference_csr.value:.4f} +/- {self.reference_csr.two_sigma:.4f} "
            f"puts the field at {self.field.field_vnm:.2f} V/nm."]
        for res in self.resolutions:
            if res.case is None:
                continue
            anchor = _state_label(*res.case.anchor)
            partner = _state_label(res.case.anchor[0], res.case.partner_charge)
            claimant = _state_label(*res.case.claimant)
            if res.deficit_counts > 0.0:
                lines.append(
                    f"At {res.case.shared_mz_da:g} Da the predicted {partner} "
                    f"({res.predicted_counts:.0f} from {anchor} "
                    f"{res.anchor_counts:.0f}) exceeds the peak "
                    f"({res.shared_counts:.0f}); {claimant} gets nothing and the "
                    f"surplus is flagged.")
            else:
                lines.append(
                    f"At {res.case.shared_mz_da:g} Da, {partner} accounts for "
                    f"{res.assigned_counts:.0f} of {res.shared_counts:.0f} counts; "
                    f"{claimant} keeps {res.remainder_counts:.0f}.")
        for flag in self.flags:
            lines.append(f"[{flag.kind}] {flag.detail}.")
        return "\n".join(lines)

    def to_json(self) -> str:
        payload = {
            "reference_species": self.reference_species,
            "reference_csr": asdict(self.reference_csr),
            "field": asdict(self.field),
            "fractions": {s: {str(q): v for q, v in table.items()}
                          for s, table in self.fractions.items()},
            "counts_before": {_state_label(*k): v
                              for k, v in sorted(self.counts_before.items())},
            "counts_after": {_state_label(*k): v
                             for k, v in sorted(self.counts_after.items())},
            "composition_before": self.composition_before,
            "composition_after": self.composition_after,
            "resolutions": [
                {**{f: getattr(r, f) for f in (
                    "shared_counts", "anchor_counts", "fraction_anchor",
                    "fraction_partner", "predicted_counts", "assigned_counts",
                    "remainder_counts", "deficit_counts")},
                 "case": None if r.case is None else asdict(r.case)}
                for r in self.resolutions],
            "flags": [asdict(flag) for flag in self.flags],
            "narrative": self.narrative(),
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    def to_text(self) -> str:
        lines = [f"field estimate: {self.field.field_vnm:.4f} V/nm"]
        if self.field.interval_vnm is not None:
            lo, hi = self.field.interval_vnm
            lines[0] += f"  (2-sigma [{lo:.4f}, {hi:.4f}])"
        lines.append("model fractions at the estimated field:")
        for species in self.fractions:
            table = self.fractions[species]
            f_lo, f_hi = table.get(1, 0.0), table.get(2, 0.0)
            csr = f_hi / (f_lo + f_hi) if f_lo + f_hi > 0.0 else float("nan")
            lines.append(f"  {species}: " + "  ".join(
                f"{q}+ {v:.4f}" for q, v in sorted(table.items())) +
                f"  csr {csr:.4f}")
        lines.append("composition (at.%):")
        for element in sorted(set(self.composition_before) | set(self.composition_after)):
            before = 100.0 * self.composition_before.get(element, 0.0)
            after = 100.0 * self.composition_after.get(element, 0.0)
            lines.append(f"  {element}: {before:.2f} -> {after:.2f}")
        lines.append(f"flags ({len(self.flags)}):")
        for flag in self.flags:
            lines.append(f"  [{flag.kind}] {flag.subject}: {flag.detail}")
        lines.append("narrative:")
        for line in self.narrative().splitlines():
            lines.append(f"  {line}")
        return "\n".join(lines) + "\n"


def _find_peak(peak_set: RangedPeakSet, mz_da: float) -> Peak:
    for peak in peak_set.peaks:
        if abs(peak.mz_da - mz_da) <= peak_set.tolerance_da:
            return peak
    raise ConfigError(f"no ranged peak at {mz_da:g} Da")


def run_pipeline(config: dict, base_dir: str | os.PathLike = ".") -> ResolutionReport:
    """Execute the overlap-resolution recipe described by a config mapping.

    Keys: ``peaks`` (ranged-peak CSV), ``reference`` (species, charge_pair,
    curve), ``curves`` (species -> curve CSV evaluated at the estimated
    field), ``overlaps`` (ordered list of shared_mz, anchor [species, charge],
    partner_charge, claimant [species, charge]), optional ``nominal_fraction``
    (element -> atomic fraction) and ``compositions`` (species ->
    [element, cluster size]).
    """
    def path_of(name: str) -> str:
        return os.path.join(base_dir, name)

    for key in ("peaks", "reference", "curves"):
        if key not in config:
            raise ConfigError(f"pipeline config lacks the {key!r} key")

    peak_set = read_peaks_csv(path_of(config["peaks"]))
    compositions = {name: (element, int(size)) for name, (element, size)
                    in (config.get("compositions") or {}).items()}

    reference = config["reference"]
    ref_species = reference["species"]
    charge_pair = tuple(reference.get("charge_pair", (1, 2)))
    ref_csr = raw_csr(peak_set, ref_species, charge_pair)

    curves = {species: read_curve_csv(path_of(path))
              for species, path in config["curves"].items()}
    if ref_species not in curves:
        raise ConfigError(f"reference species {ref_species!r} has no curve")
    estimate = estimate_field(ref_csr, curves[ref_species])

    fractions = {}
    for species, curve in curves.items():
        table = {}
        for charge in range(1, len(curve.fractions[0]) + 1):
            table[charge] = fraction_at(curve, estimate.field_vnm, charge)
        fractions[species] = table

    counts_before = primary_counts(peak_set)
    counts = dict(counts_before)
    resolutions = []
    for raw_case in config.get("overlaps", ()):
        case = OverlapCase(float(raw_case["shared_mz"]),
                           (raw_case["anchor"][0], int(raw_case["anchor"][1])),
                           int(raw_case["partner_charge"]),
                           (raw_case["claimant"][0], int(raw_case["claimant"][1])))
        anchor_species, anchor_charge = case.anchor
        if anchor_species not in fractions:
            raise ConfigError(f"anchor species {anchor_species!r} has no curve")
        shared_peak = _find_peak(peak_set, case.shared_mz_da)
        if not shared_peak.assignments:
            raise ConfigError(f"shared peak at {case.shared_mz_da:g} Da has no "
                              "assignments")
        resolution = resolve_overlap(
            shared_peak.counts, counts.get(case.anchor, 0.0),
            fractions[anchor_species].get(case.partner_charge, 0.0),
            fractions[anchor_species].get(anchor_charge, 0.0), case)
        primary = shared_peak.assignments[0]
        holder = (primary.species, primary.charge)
        counts[holder] = counts.get(holder, 0.0) - shared_peak.counts
        partner_key = (anchor_species, case.partner_charge)
        counts[partner_key] = counts.get(partner_key, 0.0) + resolution.assigned_counts
        counts[case.claimant] = (counts.get(case.claimant, 0.0)
                                 + resolution.remainder_counts)
        resolutions.append(resolution)

    flags = audit_consistency(peak_set, counts, fractions, tuple(resolutions),
                              config.get("nominal_fraction"), compositions)
    return ResolutionReport(
        ref_species, ref_csr, estimate, fractions, counts_before, counts,
        composition_by_element(counts_before, compositions),
        composition_by_element(counts, compositions),
        tuple(resolutions), flags)


def load_pipeline_config(path: str | os.PathLike) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
