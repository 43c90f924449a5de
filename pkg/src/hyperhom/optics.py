"""Single-photon mode unitaries for the optical elements, circuit composition
and the two-photon lift.

The single-photon space is (path x internal mode): path 0 is arm 1 (In1 before
a beam splitter, Out3 after it), path 1 is arm 2 (In2 / Out4).  Index is
``4 * path + InternalMode.index``.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .bell import HyperLabel, OamBell, PolBell
from .states import INTERNAL_TOL, TwoPhotonState

N_PATHS = 2
DIM = 4 * N_PATHS
_I2 = np.eye(2, dtype=complex)


class Port(enum.Enum):
    IN1 = 0
    IN2 = 1
    OUT3 = 2
    OUT4 = 3

    @property
    def path(self) -> int:
        return self.value % 2


@dataclass(frozen=True, eq=False)
class ModeUnitary:
    matrix: np.ndarray  # (DIM, DIM)

    def __post_init__(self):
        a = np.array(self.matrix, dtype=complex)
        if a.shape != (DIM, DIM):
            raise ValueError(f"mode unitary must be {DIM}x{DIM}, got {a.shape}")
        a.flags.writeable = False
        object.__setattr__(self, "matrix", a)

    def __matmul__(self, other: ModeUnitary) -> ModeUnitary:
        return ModeUnitary(self.matrix @ other.matrix)

    def unitarity_error(self) -> float:
        u = self.matrix
        return float(np.max(np.abs(u.conj().T @ u - np.eye(DIM))))

    def is_unitary(self, tol: float = INTERNAL_TOL) -> bool:
        return self.unitarity_error() < tol

    @classmethod
    def identity(cls) -> ModeUnitary:
        return cls(np.eye(DIM))


def _internal(pol: np.ndarray = _I2, oam: np.ndarray = _I2) -> np.ndarray:
    return np.kron(pol, oam)


def _on_arms(internal: np.ndarray, arm: Optional[int]) -> ModeUnitary:
    """Apply a 4x4 internal-mode matrix on arm 1, arm 2, or both (``None``)."""
    blocks = [np.eye(4, dtype=complex) for _ in range(N_PATHS)]
    for p in range(N_PATHS):
        if arm is None or arm == p + 1:
            blocks[p] = internal
    out = np.zeros((DIM, DIM), dtype=complex)
    for p, b in enumerate(blocks):
        out[4 * p:4 * p + 4, 4 * p:4 * p + 4] = b
    return ModeUnitary(out)


def retarder_jones(theta: float, retardance: float) -> np.ndarray:
    """Jones matrix of a linear retarder with its fast axis at ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, s], [-s, c]])
    return rot.T @ np.diag([1.0, np.exp(1j * retardance)]) @ rot


def hwp_jones(theta: float) -> np.ndarray:
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def qwp_jones(theta: float) -> np.ndarray:
    return retarder_jones(theta, math.pi / 2)


def dove_oam(alpha: float, m: int = 1) -> np.ndarray:
    """|+m> -> exp(-2imα)|-m>, |-m> -> exp(+2imα)|+m>."""
    return np.array(
        [[0, np.exp(2j * m * alpha)], [np.exp(-2j * m * alpha), 0]], dtype=complex
    )


def hwp_unitary(theta: float, arm: Optional[int] = None) -> ModeUnitary:
    return _on_arms(_internal(pol=hwp_jones(theta)), arm)


def qwp_unitary(theta: float, arm: Optional[int] = None) -> ModeUnitary:
    return _on_arms(_internal(pol=qwp_jones(theta)), arm)


def dove_unitary(alpha: float, m: int = 1, arm: Optional[int] = None) -> ModeUnitary:
    if m < 1:
        raise ValueError(f"OAM magnitude m must be >= 1, got {m}")
    return _on_arms(_internal(oam=dove_oam(alpha, m)), arm)


def mirror_unitary(arm: Optional[int] = None) -> ModeUnitary:
    return _on_arms(_internal(oam=np.array([[0, 1], [1, 0]], dtype=complex)), arm)


def bc_unitary(phi: float, arm: int = 1) -> ModeUnitary:
    """Babinet compensator: phase exp(iφ) on V relative to H in one arm."""
    return _on_arms(_internal(pol=np.diag([1.0, np.exp(1j * phi)])), arm)


BS_CONVENTIONS = {
    # [out, in]; columns In1, In2; rows Out3, Out4
    "hadamard": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "symmetric": np.array([[1, 1j], [1j, 1]], dtype=complex) / math.sqrt(2),
}


def bs_unitary(convention: str = "hadamard") -> ModeUnitary:
    """Lossless 50:50 beam splitter, identity on internal modes."""
    return ModeUnitary(np.kron(BS_CONVENTIONS[convention], np.eye(4)))


def pbs_unitary() -> ModeUnitary:
    """H transmits (In1->Out3, In2->Out4); V reflects to the other port with phase i."""
    h = np.diag([1.0, 0.0])
    v = np.diag([0.0, 1.0])
    transmit = np.kron(np.eye(2), _internal(pol=h))
    reflect = np.kron(np.array([[0, 1j], [1j, 0]]), _internal(pol=v))
    return ModeUnitary(transmit + reflect)


# ---------------------------------------------------------------------------
# element settings and circuits

ELEMENT_KINDS = ("HWP", "QWP", "DP", "BC", "MIRROR", "DELAY", "BS", "PBS")
_ANGLE_KINDS = {"HWP", "QWP", "DP", "BC"}
_TWO_ARM_KINDS = {"BS", "PBS"}


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class ElementSetting:
    kind: str
    value: float = 0.0  # radians for angle kinds, seconds for DELAY
    arm: Optional[int] = None  # 1, 2, or None for both arms

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in ELEMENT_KINDS:
            raise CircuitError(f"unknown element {self.kind!r}")
        if kind in _TWO_ARM_KINDS and self.arm is not None:
            raise CircuitError(f"{kind} acts on both arms")
        if self.arm not in (None, 1, 2):
            raise CircuitError(f"arm must be 1, 2 or both, got {self.arm!r}")
        object.__setattr__(self, "kind", kind)

    def unitary(self, m: int = 1) -> ModeUnitary:
        k, v, arm = self.kind, self.value, self.arm
        if k == "HWP":
            return hwp_unitary(v, arm)
        if k == "QWP":
            return qwp_unitary(v, arm)
        if k == "DP":
            return dove_unitary(v, m, arm)
        if k == "BC":
            if arm is None:
                raise CircuitError("BC needs a single arm")
            return bc_unitary(v, arm)
        if k == "MIRROR":
            return mirror_unitary(arm)
        if k == "BS":
            return bs_unitary()
        if k == "PBS":
            return pbs_unitary()
        # DELAY acts on the temporal mode only, which hom.py models separately
        return ModeUnitary.identity()

    def to_text(self) -> str:
        where = "both" if self.arm is None else f"arm{self.arm}"
        if self.kind in _ANGLE_KINDS:
            return f"{where}: {self.kind} {_fmt(math.degrees(self.value))}deg"
        if self.kind == "DELAY":
            return f"{where}: DELAY {_fmt(self.value * 1e12)}ps"
        return f"{where}: {self.kind}"

    @classmethod
    def from_text(cls, text: str) -> ElementSetting:
        mt = re.fullmatch(
            r"\s*(arm[12]|both)\s*:\s*([A-Za-z]+)\s*(?:([-+0-9.eE]+)\s*(deg|rad|ps|fs)?)?\s*",
            text,
        )
        if not mt:
            raise CircuitError(f"cannot parse element {text!r}")
        where, kind, num, unit = mt.groups()
        arm = None if where == "both" else int(where[-1])
        kind = kind.upper()
        if kind not in ELEMENT_KINDS:
            raise CircuitError(f"unknown element {kind!r}")
        value = 0.0
        if kind in _ANGLE_KINDS:
            if num is None:
                raise CircuitError(f"{kind} needs an angle")
            value = float(num) if unit == "rad" else math.radians(float(num))
        elif kind == "DELAY":
            if num is None:
                raise CircuitError("DELAY needs a duration")
            value = float(num) / (1e15 if unit == "fs" else 1e12)
        elif num is not None:
            raise CircuitError(f"{kind} takes no value")
        return cls(kind, value, arm)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def compose_circuit(elements: Sequence[ElementSetting], m: int = 1) -> ModeUnitary:
    """Product of element unitaries in propagation order (first element acts first).

    Every arm must see an even number of mirrors so OAM handedness is kept.
    """
    mirrors = [0] * N_PATHS
    u = ModeUnitary.identity()
    for el in elements:
        if not isinstance(el, ElementSetting):
            raise CircuitError(f"unknown element {el!r}")
        if el.kind == "MIRROR":
            for p in range(N_PATHS):
                if el.arm is None or el.arm == p + 1:
                    mirrors[p] += 1
        u = el.unitary(m) @ u
    odd = [p + 1 for p in range(N_PATHS) if mirrors[p] % 2]
    if odd:
        raise CircuitError(f"odd number of mirror reflections on arm(s) {odd}")
    return u


# ---------------------------------------------------------------------------
# two-photon states with paths


@dataclass(frozen=True, eq=False)
class PathState:
    """Labeled two-photon amplitudes over (path x internal) for each photon."""

    amps: np.ndarray  # (DIM, DIM)
    m: int = 1

    def __post_init__(self):
        a = np.array(self.amps, dtype=complex)
        if a.shape != (DIM, DIM):
            raise ValueError(f"path state must be {DIM}x{DIM}, got {a.shape}")
        a.flags.writeable = False
        object.__setattr__(self, "amps", a)

    @classmethod
    def embed(cls, state: TwoPhotonState, path1: int = 0, path2: int = 1) -> PathState:
        a = np.zeros((DIM, DIM), dtype=complex)
        a[4 * path1:4 * path1 + 4, 4 * path2:4 * path2 + 4] = state.amps
        return cls(a, state.m)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def block(self, path1: int, path2: int) -> TwoPhotonState:
        """Internal amplitudes with photon 1 in ``path1`` and photon 2 in ``path2``."""
        return TwoPhotonState(
            self.amps[4 * path1:4 * path1 + 4, 4 * path2:4 * path2 + 4], self.m
        )

    def coincidence_state(self) -> TwoPhotonState:
        """Bosonic amplitude for one photon per output, relabeled by port.

        Photon 1 is whichever photon sits in arm 1 (Out3).  The squared norm
        of the result is the coincidence probability.
        """
        a = self.amps
        return TwoPhotonState(a[0:4, 4:8] + a[4:8, 0:4].T, self.m)

    def coincidence_probability(self) -> float:
        return self.coincidence_state().norm ** 2

    def bunched_probability(self) -> float:
        """Probability that both photons leave through the same port."""
        total = 0.0
        for p in range(N_PATHS):
            blk = self.amps[4 * p:4 * p + 4, 4 * p:4 * p + 4]
            total += 0.5 * float(np.sum(np.abs(blk + blk.T) ** 2))
        return total


@dataclass(frozen=True)
class TwoPhotonTransform:
    """U (x) U acting on labeled two-photon states."""

    unitary: ModeUnitary

    def __call__(self, state) -> PathState:
        if isinstance(state, TwoPhotonState):
            state = PathState.embed(state)
        u = self.unitary.matrix
        return PathState(u @ state.amps @ u.T, state.m)

    def matrix(self) -> np.ndarray:
        return np.kron(self.unitary.matrix, self.unitary.matrix)


def lift_two_photon(u: ModeUnitary) -> TwoPhotonTransform:
    return TwoPhotonTransform(u)


# ---------------------------------------------------------------------------
# state preparation from the source |phi+> x |nu+>

SOURCE_LABEL = HyperLabel(PolBell.PHI_PLUS, OamBell.NU_PLUS)

_POL_PREP = {
    PolBell.PHI_PLUS: [],
    PolBell.PHI_MINUS: [ElementSetting("HWP", 0.0, 1)],
    PolBell.PSI_PLUS: [ElementSetting("HWP", math.pi / 4, 1)],
    PolBell.PSI_MINUS: [ElementSetting("HWP", 0.0, 1), ElementSetting("HWP", math.pi / 4, 2)],
}
_OAM_PREP = {
    OamBell.NU_PLUS: [],
    OamBell.MU_PLUS: [ElementSetting("DP", 0.0, 1)],
    OamBell.MU_MINUS: [ElementSetting("DP", math.pi / 4, 1)],
    OamBell.NU_MINUS: [ElementSetting("DP", math.pi / 4, 1), ElementSetting("DP", 0.0, 2)],
}


def prepare_hyper(target: HyperLabel | str) -> list[ElementSetting]:
    """Per-arm HWP/Dove-prism settings turning the source into ``target``.

    Equality holds up to a global phase.
    """
    if isinstance(target, str):
        target = HyperLabel.parse(target)
    return list(_POL_PREP[target.pol]) + list(_OAM_PREP[target.oam])


def apply_local(state: TwoPhotonState, elements: Iterable[ElementSetting]) -> TwoPhotonState:
    """Run per-arm elements on a state with photon 1 in arm 1 and photon 2 in arm 2."""
    elements = list(elements)
    if any(el.kind in _TWO_ARM_KINDS for el in elements):
        raise CircuitError("apply_local takes per-arm elements only")
    out = lift_two_photon(compose_circuit(elements, state.m))(state)
    return out.block(0, 1)


def fidelity(a: TwoPhotonState, b: TwoPhotonState) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)
