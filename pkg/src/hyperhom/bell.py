"""Polarization and OAM Bell states, their 16 hyper-entangled products, and
exchange-symmetry classification."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .states import TwoPhotonState, exchange, symmetry_expectation

_R = 1 / np.sqrt(2)

# 2x2 amplitude patterns over (photon-1 level, photon-2 level); level 0 is H
# (or +m) and level 1 is V (or -m).
_PATTERNS = {
    "phi+": np.array([[_R, 0], [0, _R]]),
    "phi-": np.array([[_R, 0], [0, -_R]]),
    "psi+": np.array([[0, _R], [_R, 0]]),
    "psi-": np.array([[0, _R], [-_R, 0]]),
}
_PATTERNS["mu+"] = _PATTERNS["phi+"]
_PATTERNS["mu-"] = _PATTERNS["phi-"]
_PATTERNS["nu+"] = _PATTERNS["psi+"]
_PATTERNS["nu-"] = _PATTERNS["psi-"]

_FERMIONS = {"psi-", "nu-"}


def _canon(text: str) -> str:
    return text.strip().lower().replace("−", "-")


class _BellLabel(str, enum.Enum):
    @property
    def fermion(self) -> bool:
        return self.value in _FERMIONS

    @property
    def tag(self) -> str:
        return "Fermion" if self.fermion else "Boson"

    @property
    def pattern(self) -> np.ndarray:
        return _PATTERNS[self.value]

    @classmethod
    def parse(cls, text: str):
        try:
            return cls(_canon(text))
        except ValueError:
            raise ValueError(f"unknown {cls.__name__} {text!r}") from None

    def __str__(self) -> str:
        return self.value


class PolBell(_BellLabel):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"


class OamBell(_BellLabel):
    MU_PLUS = "mu+"
    MU_MINUS = "mu-"
    NU_PLUS = "nu+"
    NU_MINUS = "nu-"


BellLabel = Union[PolBell, OamBell]


@dataclass(frozen=True)
class HyperLabel:
    pol: PolBell
    oam: OamBell

    def __str__(self) -> str:
        return f"{self.pol} x {self.oam}"

    @classmethod
    def parse(cls, text: str) -> HyperLabel:
        parts = _canon(text).split("x")
        if len(parts) != 2:
            raise ValueError(f"hyper label must look like 'phi+ x nu+', got {text!r}")
        return cls(PolBell.parse(parts[0]), OamBell.parse(parts[1]))

    @property
    def labels(self) -> tuple[PolBell, OamBell]:
        return (self.pol, self.oam)


HYPER_LABELS: tuple[HyperLabel, ...] = tuple(
    HyperLabel(p, o) for p, o in itertools.product(PolBell, OamBell)
)


def parse_label(text: str) -> Union[HyperLabel, PolBell, OamBell]:
    """Parse a hyper label ("psi- x mu+") or a single-DoF Bell label."""
    t = _canon(text)
    if "x" in t:
        return HyperLabel.parse(t)
    for cls in (PolBell, OamBell):
        try:
            return cls(t)
        except ValueError:
            pass
    raise ValueError(f"unknown Bell label {text!r}")


# Single-DoF Bell states are embedded with the other DoF fixed in the
# symmetric product |H>|H> or |+m>|+m>, which leaves their exchange symmetry
# unchanged.
_FIXED = np.array([[1.0, 0.0], [0.0, 0.0]])


def polarization_bell(label: PolBell | str, m: int = 1) -> TwoPhotonState:
    label = PolBell.parse(label) if isinstance(label, str) else label
    return TwoPhotonState(np.kron(label.pattern, _FIXED), m)


def oam_bell(label: OamBell | str, m: int = 1) -> TwoPhotonState:
    label = OamBell.parse(label) if isinstance(label, str) else label
    if m < 1:
        raise ValueError(f"OAM magnitude m must be >= 1, got {m}")
    return TwoPhotonState(np.kron(_FIXED, label.pattern), m)


def hyper_state(label: HyperLabel | str, m: int = 1) -> TwoPhotonState:
    label = HyperLabel.parse(label) if isinstance(label, str) else label
    if m < 1:
        raise ValueError(f"OAM magnitude m must be >= 1, got {m}")
    # mode index is 2*pol + oam, so kron gives pol_amp(p1,p2) * oam_amp(o1,o2)
    return TwoPhotonState(np.kron(label.pol.pattern, label.oam.pattern), m)


def catalog_state(label, m: int = 1) -> TwoPhotonState:
    """State for any hyper or single-DoF label (object or string)."""
    if isinstance(label, str):
        label = parse_label(label)
    if isinstance(label, HyperLabel):
        return hyper_state(label, m)
    if isinstance(label, PolBell):
        return polarization_bell(label, m)
    return oam_bell(label, m)


@dataclass(frozen=True)
class SymmetryClass:
    kind: str  # "symmetric", "antisymmetric" or "mixed"
    s: float

    def __str__(self) -> str:
        if self.kind == "mixed":
            return f"Mixed({self.s:.6g})"
        return self.kind.capitalize()

    def same_kind(self, other: SymmetryClass) -> bool:
        return self.kind == other.kind


SYMMETRIC = SymmetryClass("symmetric", 1.0)
ANTISYMMETRIC = SymmetryClass("antisymmetric", -1.0)


def mixed(s: float) -> SymmetryClass:
    return SymmetryClass("mixed", float(s))


def classify_exchange(state: TwoPhotonState, tol: float = 1e-9) -> SymmetryClass:
    swapped = exchange(state)
    if np.linalg.norm(swapped.amps - state.amps) < tol:
        return SYMMETRIC
    if np.linalg.norm(swapped.amps + state.amps) < tol:
        return ANTISYMMETRIC
    return mixed(symmetry_expectation(state))


def parity_rule(labels: Iterable[BellLabel] | HyperLabel) -> SymmetryClass:
    """Antisymmetric iff an odd number of the per-DoF Bell states are Fermions."""
    if isinstance(labels, HyperLabel):
        labels = labels.labels
    labels = list(labels)
    if not labels:
        raise ValueError("parity_rule needs at least one Bell label")
    n_fermions = sum(lab.fermion for lab in labels)
    return ANTISYMMETRIC if n_fermions % 2 else SYMMETRIC
