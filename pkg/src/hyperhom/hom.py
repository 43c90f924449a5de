"""Coincidence statistics for the beam-splitter interference unit and the PBS
exchange-phase unit.

The production path is the factorized model ``P_cc = (1 - s G(tau)) / 2``
with ``s`` the exchange expectation of the internal state and ``G`` the
temporal overlap of the two single-photon spectra.  ``full_fock_oracle``
recomputes the same probability by brute force on a frequency grid.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bell import HyperLabel, OamBell, PolBell, hyper_state, oam_bell
from .optics import BS_CONVENTIONS, bc_unitary, lift_two_photon, pbs_unitary
from .states import (
    SinglePhotonState,
    TwoPhotonState,
    exchange,
    inner_product,
    normalize,
    project,
    symmetry_expectation,
    tensor_product,
)

C_LIGHT = 299_792_458.0
_FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


@dataclass(frozen=True)
class SpectralModel:
    center_wavelength: float = 780e-9  # m
    filter_fwhm: float = 3e-9  # m, intensity FWHM of the Gaussian bandpass
    distinguishability_floor: float = 0.0

    def __post_init__(self):
        if not self.filter_fwhm > 0:
            raise ValueError("filter_fwhm must be > 0")
        if not self.center_wavelength > 0:
            raise ValueError("center_wavelength must be > 0")
        if not 0.0 <= self.distinguishability_floor <= 1.0:
            raise ValueError("distinguishability_floor must lie in [0, 1]")

    @property
    def sigma_omega(self) -> float:
        """RMS width (rad/s) of the filtered intensity spectrum."""
        d_omega = 2 * math.pi * C_LIGHT * self.filter_fwhm / self.center_wavelength**2
        return d_omega * _FWHM_TO_SIGMA

    @property
    def tau_c(self) -> float:
        """Delay at which the overlap falls to exp(-1/2) of its peak."""
        return 1.0 / (math.sqrt(2.0) * self.sigma_omega)


@dataclass(frozen=True)
class ScanConfig:
    delay_min: float
    delay_max: float
    n_points: int = 41
    pairs_per_point: float = 1e4
    accidental_rate: float = 0.0
    rng_seed: int = 0
    poisson: bool = True

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("n_points must be >= 2")
        if not self.delay_min < self.delay_max:
            raise ValueError("delay_min must be < delay_max")
        if self.pairs_per_point < 0 or self.accidental_rate < 0:
            raise ValueError("pairs_per_point and accidental_rate must be >= 0")

    @classmethod
    def around(cls, spectral: SpectralModel, span: float = 3.0, **kw) -> ScanConfig:
        """Symmetric scan over +-span coherence times."""
        t = span * spectral.tau_c
        return cls(-t, t, **kw)

    @property
    def delays(self) -> np.ndarray:
        return np.linspace(self.delay_min, self.delay_max, self.n_points)


def _point_rngs(seed: int, n: int) -> list[np.random.Generator]:
    # one stream per scan point, so results do not depend on evaluation order
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


@dataclass
class HomCurve:
    delays: np.ndarray
    expected: np.ndarray
    sampled: Optional[np.ndarray]
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["delay_s", "expected", "sampled"])
        for i, t in enumerate(self.delays):
            s = None if self.sampled is None else int(self.sampled[i])
            w.writerow([_fmt(t), _fmt(self.expected[i]), _fmt(s)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "delays_s": [float(t) for t in self.delays],
            "expected": [float(x) for x in self.expected],
            "sampled": None if self.sampled is None else [int(x) for x in self.sampled],
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_csv(cls, text: str) -> HomCurve:
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows or "delay_s" not in rows[0]:
            raise ValueError("not a HOM curve CSV (missing delay_s column)")
        sampled = [r["sampled"] for r in rows]
        return cls(
            np.array([float(r["delay_s"]) for r in rows]),
            np.array([float(r["expected"]) for r in rows]),
            None if any(s == "" for s in sampled) else np.array([int(s) for s in sampled]),
        )


@dataclass
class PhaseScan:
    thetas: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    m_theta: np.ndarray
    counts_plus: Optional[np.ndarray]
    counts_minus: Optional[np.ndarray]
    phi_p: float
    phi_o: float
    meta: dict = field(default_factory=dict)

    @property
    def m_sampled(self) -> Optional[np.ndarray]:
        if self.counts_plus is None:
            return None
        cp = self.counts_plus.astype(float)
        cm = self.counts_minus.astype(float)
        tot = cp + cm
        return np.divide(cp - cm, tot, out=np.zeros_like(tot), where=tot > 0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["theta_rad", "expected", "sampled", "p_plus", "p_minus", "counts_plus", "counts_minus"]
        )
        ms = self.m_sampled
        for i, th in enumerate(self.thetas):
            sampled = None if ms is None else ms[i]
            cp = None if self.counts_plus is None else int(self.counts_plus[i])
            cm = None if self.counts_minus is None else int(self.counts_minus[i])
            w.writerow(
                [_fmt(th), _fmt(self.m_theta[i]), _fmt(sampled),
                 _fmt(self.p_plus[i]), _fmt(self.p_minus[i]), _fmt(cp), _fmt(cm)]
            )
        return buf.getvalue()

    def to_dict(self) -> dict:
        def lst(a, conv=float):
            return None if a is None else [conv(x) for x in a]

        return {
            "thetas_rad": lst(self.thetas),
            "p_plus": lst(self.p_plus),
            "p_minus": lst(self.p_minus),
            "m_theta": lst(self.m_theta),
            "counts_plus": lst(self.counts_plus, int),
            "counts_minus": lst(self.counts_minus, int),
            "phi_p": self.phi_p,
            "phi_o": self.phi_o,
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_csv(cls, text: str) -> PhaseScan:
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows or "theta_rad" not in rows[0]:
            raise ValueError("not a phase scan CSV (missing theta_rad column)")

        def col(name, conv=float):
            vals = [r.get(name, "") or "" for r in rows]
            if any(v == "" for v in vals):
                return None
            return np.array([conv(v) for v in vals])

        expected = col("expected")
        p_plus = col("p_plus")
        p_minus = col("p_minus")
        return cls(
            thetas=col("theta_rad"),
            p_plus=p_plus if p_plus is not None else (1 + expected) / 4,
            p_minus=p_minus if p_minus is not None else (1 - expected) / 4,
            m_theta=expected,
            counts_plus=col("counts_plus", int),
            counts_minus=col("counts_minus", int),
            phi_p=float("nan"),
            phi_o=float("nan"),
        )


# ---------------------------------------------------------------------------
# beam-splitter interference unit


def temporal_overlap(spectral: SpectralModel, tau: float) -> float:
    """G(tau) = (1 - floor) exp(-tau^2 / (2 tau_c^2))."""
    tau = np.asarray(tau, dtype=float)
    g = (1.0 - spectral.distinguishability_floor) * np.exp(-(tau**2) / (2 * spectral.tau_c**2))
    return float(g) if g.ndim == 0 else g


def coincidence_probability(state: TwoPhotonState, tau, spectral: SpectralModel):
    s = symmetry_expectation(state)
    return 0.5 * (1.0 - s * temporal_overlap(spectral, tau))


@dataclass(frozen=True)
class OracleResult:
    value: float
    converged: bool
    delta: float  # change against the half-size grid


def _grid_coincidence(c: np.ndarray, tau: float, spectral: SpectralModel, n: int, bs: np.ndarray):
    """Brute-force coincidence probability on an n-bin frequency grid.

    Returns (indistinguishable, distinguishable) probabilities; the second
    treats the photons as carrying orthogonal hidden labels.
    """
    sig = spectral.sigma_omega
    w = np.linspace(-8 * sig, 8 * sig, n)  # detuning from the carrier
    f = np.exp(-(w**2) / (4 * sig**2))
    f /= np.linalg.norm(f)
    # photon 1 enters arm 1, photon 2 enters arm 2 delayed by tau
    spec = np.outer(f, f * np.exp(1j * w * tau))
    k_direct = bs[0, 0] * bs[1, 1]  # photon 1 -> Out3, photon 2 -> Out4
    k_swapped = bs[1, 0] * bs[0, 1]  # photon 1 -> Out4, photon 2 -> Out3
    p_ind = 0.0
    p_dist = 0.0
    for a in range(4):
        for b in range(4):
            if c[a, b] == 0 and c[b, a] == 0:
                continue
            # event: (Out3, mode a, bin i) and (Out4, mode b, bin j)
            direct = k_direct * c[a, b] * spec
            swapped = k_swapped * c[b, a] * spec.T
            p_ind += float(np.sum(np.abs(direct + swapped) ** 2))
            p_dist += float(np.sum(np.abs(direct) ** 2) + np.sum(np.abs(swapped) ** 2))
    return p_ind, p_dist


def full_fock_oracle(
    state: TwoPhotonState,
    tau: float,
    spectral: SpectralModel,
    grid_n: int = 512,
    bs_convention: str = "hadamard",
) -> OracleResult:
    """Second-quantized coincidence probability on a discretized spectrum.

    The residual distinguishability is modeled as a mixture: with weight
    ``floor`` the photons carry orthogonal hidden labels and never interfere.
    """
    if grid_n < 64:
        raise ValueError("grid_n must be >= 64")
    bs = BS_CONVENTIONS[bs_convention]
    c = np.asarray(state.amps)
    fl = spectral.distinguishability_floor

    def mix(n):
        p_ind, p_dist = _grid_coincidence(c, tau, spectral, n, bs)
        return (1 - fl) * p_ind + fl * p_dist

    value = mix(grid_n)
    coarse = mix(grid_n // 2)
    delta = abs(value - coarse)
    return OracleResult(value, delta <= 1e-7, delta)


def simulate_hom_scan(
    state: TwoPhotonState,
    scan: ScanConfig,
    spectral: SpectralModel,
    label: Optional[str] = None,
) -> HomCurve:
    delays = scan.delays
    expected = scan.pairs_per_point * coincidence_probability(state, delays, spectral)
    expected = np.maximum(expected + scan.accidental_rate, 0.0)
    sampled = None
    if scan.poisson:
        rngs = _point_rngs(scan.rng_seed, scan.n_points)
        sampled = np.array([rng.poisson(lam) for rng, lam in zip(rngs, expected)], dtype=np.int64)
    meta = {
        "state": label,
        "symmetry": symmetry_expectation(state),
        "spectral": asdict(spectral),
        "tau_c_s": spectral.tau_c,
        "scan": asdict(scan),
        "seed": scan.rng_seed,
    }
    return HomCurve(delays, expected, sampled, meta)


# ---------------------------------------------------------------------------
# PBS exchange-phase unit


def hwp_angle_for_theta(theta: float) -> float:
    """Half-wave-plate fast-axis angle that realizes basis phase ``theta``."""
    return 3 * math.pi / 8 + theta / 4


def exchange_phase(state: TwoPhotonState) -> float:
    """Phase of <state|swap|state> for an exchange eigenstate (0 or pi)."""
    s = inner_product(normalize(state), exchange(normalize(state)))
    if abs(abs(s) - 1.0) > 1e-9:
        raise ValueError("state is not an exchange eigenstate")
    return float(np.angle(s)) % (2 * math.pi)


def _pol_vv() -> TwoPhotonState:
    v = SinglePhotonState.basis("V")
    return tensor_product(v, v)


def exchanged_superposition(
    oam_label: OamBell | str, m: int = 1, compensate: bool = True
) -> tuple[TwoPhotonState, float, float]:
    """Post-selected output of the PBS exchange unit for ``|phi+> x |OAM>``.

    Returns ``(state, branch_probability, phi_p)``.  The state is relabeled by
    output port (photon 1 = Out3).  With ``compensate`` a Babinet compensator
    set to ``-pi - phi_p`` sits in arm 1 after the PBS.
    """
    oam_label = OamBell.parse(oam_label) if isinstance(oam_label, str) else oam_label
    source = hyper_state(HyperLabel(PolBell.PHI_PLUS, oam_label), m)
    phi_p = exchange_phase(_pol_vv())
    u = pbs_unitary()
    if compensate:
        u = bc_unitary(-math.pi - phi_p, arm=1) @ u
    out = lift_two_photon(u)(source)
    state, prob = normalize(out.coincidence_state(), return_weight=True)
    return state, prob, phi_p


def _branch(state: TwoPhotonState, pol: int) -> TwoPhotonState:
    a = np.zeros((4, 4), dtype=complex)
    sl = slice(2 * pol, 2 * pol + 2)
    a[sl, sl] = state.amps[sl, sl]
    return TwoPhotonState(a, state.m)


def _projection_probs(state: TwoPhotonState, theta: float) -> tuple[float, float]:
    """P(+), P(-) for photon 1 on (H+V)/sqrt2, photon 2 on (H +- e^{i theta} V)/sqrt2,
    summed over the unmeasured OAM of both photons."""
    r = 1 / math.sqrt(2)
    e = np.exp(1j * theta)
    out = []
    for sign in (+1, -1):
        p = 0.0
        for o1 in (+1, -1):
            d = SinglePhotonState.from_pol(r, r, o1, state.m)
            for o2 in (+1, -1):
                b = SinglePhotonState.from_pol(r, sign * r * e, o2, state.m)
                p += abs(project(state, d, b)) ** 2
        out.append(p)
    return out[0], out[1]


def phase_protocol_scan(
    oam_label: OamBell | str,
    thetas: Sequence[float],
    spectral: Optional[SpectralModel] = None,
    pairs_per_point: Optional[float] = None,
    accidental_rate: float = 0.0,
    rng_seed: int = 0,
    m: int = 1,
) -> PhaseScan:
    """Simulate the M_theta scan of the exchange-phase unit.

    Residual distinguishability (``spectral.distinguishability_floor``) keeps
    the |HH> and |VV> branches from interfering with weight ``floor``, since
    the PBS swaps whatever hidden label each photon carries.  Counts are
    Poisson-sampled when ``pairs_per_point`` is given.
    """
    oam_label = OamBell.parse(oam_label) if isinstance(oam_label, str) else oam_label
    thetas = np.asarray(thetas, dtype=float)
    if np.any(thetas < -1e-12) or np.any(thetas > 2 * math.pi + 1e-12):
        raise ValueError("thetas must lie in [0, 2pi]")
    spectral = spectral or SpectralModel()
    coherence = temporal_overlap(spectral, 0.0)

    state, branch_prob, phi_p = exchanged_superposition(oam_label, m)
    hh, vv = _branch(state, 0), _branch(state, 1)
    p_plus = np.empty(len(thetas))
    p_minus = np.empty(len(thetas))
    for i, th in enumerate(thetas):
        cp, cm = _projection_probs(state, th)
        ip = [_projection_probs(br, th) for br in (hh, vv)]
        inc_p = ip[0][0] + ip[1][0]
        inc_m = ip[0][1] + ip[1][1]
        p_plus[i] = branch_prob * (coherence * cp + (1 - coherence) * inc_p)
        p_minus[i] = branch_prob * (coherence * cm + (1 - coherence) * inc_m)
    m_theta = (p_plus - p_minus) / (p_plus + p_minus)

    counts_plus = counts_minus = None
    if pairs_per_point is not None:
        rngs = _point_rngs(rng_seed, len(thetas))
        lam_p = pairs_per_point * p_plus + accidental_rate
        lam_m = pairs_per_point * p_minus + accidental_rate
        draws = np.array([rng.poisson([lp, lm]) for rng, lp, lm in zip(rngs, lam_p, lam_m)])
        counts_plus = draws[:, 0].astype(np.int64)
        counts_minus = draws[:, 1].astype(np.int64)

    phi_o = exchange_phase(oam_bell(oam_label, m))
    meta = {
        "state": str(oam_label),
        "spectral": asdict(spectral),
        "pairs_per_point": pairs_per_point,
        "accidental_rate": accidental_rate,
        "seed": rng_seed,
        "hwp_angles_rad": [hwp_angle_for_theta(t) for t in thetas],
    }
    return PhaseScan(thetas, p_plus, p_minus, m_theta, counts_plus, counts_minus, phi_p, phi_o, meta)
