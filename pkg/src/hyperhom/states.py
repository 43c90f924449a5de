"""One- and two-photon states over the polarization x OAM internal modes.

Photons are labeled: amplitude ``amps[i, j]`` belongs to photon 1 in mode
``MODES[i]`` and photon 2 in mode ``MODES[j]``.  Bosonic symmetrization is
applied only where photons meet at an interference element (see ``optics``
and ``hom``).
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

INPUT_NORM_TOL = 1e-9
INTERNAL_TOL = 1e-12


class Polarization(enum.IntEnum):
    H = 0
    V = 1


class InternalMode(NamedTuple):
    pol: Polarization
    oam_sign: int  # +1 or -1, in units of m

    @property
    def index(self) -> int:
        return 2 * int(self.pol) + (0 if self.oam_sign > 0 else 1)

    def label(self, m: int = 1) -> str:
        return f"{self.pol.name}{'+' if self.oam_sign > 0 else '-'}{m}"


# canonical order: H+, H-, V+, V-
MODES: tuple[InternalMode, ...] = tuple(
    InternalMode(p, s) for p in Polarization for s in (+1, -1)
)


class NormalizationError(ValueError):
    pass


class AnnihilatedStateError(ValueError):
    """Raised when a state has zero norm, e.g. fully removed by post-selection."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SinglePhotonState:
    amps: np.ndarray  # shape (4,)
    m: int = 1

    def __post_init__(self):
        a = _frozen(self.amps)
        if a.shape != (4,):
            raise ValueError(f"single-photon amplitudes must have shape (4,), got {a.shape}")
        object.__setattr__(self, "amps", a)

    @classmethod
    def from_pol(cls, alpha: complex, beta: complex, oam_sign: int = +1, m: int = 1):
        """``alpha|H> + beta|V>`` carried by one OAM mode."""
        a = np.zeros(4, dtype=complex)
        a[InternalMode(Polarization.H, oam_sign).index] = alpha
        a[InternalMode(Polarization.V, oam_sign).index] = beta
        return cls(a, m)

    @classmethod
    def basis(cls, pol: Polarization | str, oam_sign: int = +1, m: int = 1):
        pol = Polarization[pol] if isinstance(pol, str) else pol
        a = np.zeros(4, dtype=complex)
        a[InternalMode(pol, oam_sign).index] = 1.0
        return cls(a, m)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def __getitem__(self, mode: InternalMode) -> complex:
        return complex(self.amps[mode.index])


@dataclass(frozen=True, eq=False)
class TwoPhotonState:
    amps: np.ndarray  # shape (4, 4), [photon-1 mode, photon-2 mode]
    m: int = 1

    def __post_init__(self):
        a = _frozen(self.amps)
        if a.shape != (4, 4):
            raise ValueError(f"two-photon amplitudes must have shape (4, 4), got {a.shape}")
        object.__setattr__(self, "amps", a)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def __getitem__(self, pair: tuple[InternalMode, InternalMode]) -> complex:
        m1, m2 = pair
        return complex(self.amps[m1.index, m2.index])

    def __add__(self, other: TwoPhotonState) -> TwoPhotonState:
        return TwoPhotonState(self.amps + other.amps, self.m)

    def __sub__(self, other: TwoPhotonState) -> TwoPhotonState:
        return TwoPhotonState(self.amps - other.amps, self.m)

    def __mul__(self, c: complex) -> TwoPhotonState:
        return TwoPhotonState(self.amps * c, self.m)

    __rmul__ = __mul__

    def __neg__(self) -> TwoPhotonState:
        return TwoPhotonState(-self.amps, self.m)

    def allclose(self, other: TwoPhotonState, atol: float = INTERNAL_TOL) -> bool:
        return bool(np.allclose(self.amps, other.amps, rtol=0.0, atol=atol))

    def nonzero(self, atol: float = 1e-15):
        """Yield ``(mode1, mode2, amplitude)`` in canonical order."""
        for m1 in MODES:
            for m2 in MODES:
                a = self.amps[m1.index, m2.index]
                if abs(a) > atol:
                    yield m1, m2, complex(a)

    def to_records(self) -> list[dict]:
        return [
            {
                "pol1": m1.pol.name,
                "oam1": m1.oam_sign * self.m,
                "pol2": m2.pol.name,
                "oam2": m2.oam_sign * self.m,
                "re": _round15(a.real),
                "im": _round15(a.imag),
            }
            for m1, m2, a in self.nonzero()
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_records())

    @classmethod
    def from_records(cls, records: list[dict]) -> TwoPhotonState:
        ms = {abs(int(r[k])) for r in records for k in ("oam1", "oam2")}
        if len(ms) > 1:
            raise ValueError(f"records mix OAM magnitudes {sorted(ms)}")
        m = ms.pop() if ms else 1
        a = np.zeros((4, 4), dtype=complex)
        for r in records:
            i = InternalMode(Polarization[r["pol1"]], int(np.sign(r["oam1"]))).index
            j = InternalMode(Polarization[r["pol2"]], int(np.sign(r["oam2"]))).index
            a[i, j] = complex(r["re"], r["im"])
        return cls(a, m)

    @classmethod
    def from_json(cls, text: str) -> TwoPhotonState:
        return cls.from_records(json.loads(text))


def _round15(x: float) -> float:
    return float(f"{x:.15g}") + 0.0  # + 0.0 turns -0.0 into 0.0


def _check_normalized(norm: float, what: str) -> None:
    if abs(norm - 1.0) > INPUT_NORM_TOL:
        raise NormalizationError(f"{what} has norm {norm:.12g}, expected 1")


def tensor_product(s1: SinglePhotonState, s2: SinglePhotonState) -> TwoPhotonState:
    _check_normalized(s1.norm, "photon-1 state")
    _check_normalized(s2.norm, "photon-2 state")
    if s1.m != s2.m:
        raise ValueError("photons carry different OAM magnitudes")
    return normalize(TwoPhotonState(np.outer(s1.amps, s2.amps), s1.m))


def exchange(state: TwoPhotonState) -> TwoPhotonState:
    """Swap the photon labels: amplitude'(m1, m2) = amplitude(m2, m1)."""
    return TwoPhotonState(state.amps.T, state.m)


def inner_product(a: TwoPhotonState, b: TwoPhotonState) -> complex:
    """Hermitian inner product <a|b>, antilinear in ``a``."""
    return complex(np.vdot(a.amps, b.amps))


def symmetry_expectation(state: TwoPhotonState) -> float:
    """<state|exchange(state)>, real because the swap is Hermitian."""
    s = inner_product(state, exchange(state))
    assert abs(s.imag) < 1e-12 * max(1.0, state.norm**2)
    return s.real


def project(state: TwoPhotonState, bra1: SinglePhotonState, bra2: SinglePhotonState) -> complex:
    """Amplitude of finding photon 1 in ``bra1`` and photon 2 in ``bra2``."""
    _check_normalized(bra1.norm, "photon-1 basis state")
    _check_normalized(bra2.norm, "photon-2 basis state")
    return complex(np.conj(bra1.amps) @ state.amps @ np.conj(bra2.amps))


def normalize(state: TwoPhotonState, return_weight: bool = False):
    """Rescale to unit norm.

    With ``return_weight`` the squared input norm is returned as well; for a
    post-selected branch this is the branch probability.
    """
    n = state.norm
    if n < 1e-15:
        raise AnnihilatedStateError("state has zero norm (annihilated by post-selection?)")
    out = TwoPhotonState(state.amps / n, state.m)
    if return_weight:
        return out, n * n
    return out
