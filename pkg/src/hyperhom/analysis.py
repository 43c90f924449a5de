"""Visibility and exchange-phase extraction from simulated or measured scans."""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from .hom import HomCurve, PhaseScan


class FitError(RuntimeError):
    pass


class HomEffect(str, enum.Enum):
    BUNCHING = "Bunching"
    ANTI_BUNCHING = "AntiBunching"


def visibility(c0: float, c_inf: float, kind: str) -> float:
    """Dip: 1 - C0/Cinf.  Peak: C0/Cinf - 1."""
    if not c_inf > 0:
        raise ValueError(f"c_inf must be > 0, got {c_inf}")
    if kind == "Dip":
        return 1.0 - c0 / c_inf
    if kind == "Peak":
        return c0 / c_inf - 1.0
    raise ValueError(f"kind must be 'Dip' or 'Peak', got {kind!r}")


@dataclass
class HomFit:
    c0: float
    c_inf: float
    visibility: float
    width: float
    center: float
    kind: str
    residual_rms: float
    stderr: dict = field(default_factory=dict)
    reliable: bool = True
    nfev: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _gauss_model(p, t, s):
    c, v, t0, w = p
    g = np.exp(-((t - t0) ** 2) / (2 * w**2))
    return c * (1 - s * v * g)


def _gauss_jac(p, t, s):
    c, v, t0, w = p
    d = t - t0
    g = np.exp(-(d**2) / (2 * w**2))
    return np.column_stack(
        [
            1 - s * v * g,
            -c * s * g,
            -c * s * v * g * d / w**2,
            -c * s * v * g * d**2 / w**3,
        ]
    )


def _stderr(jac: np.ndarray, resid: np.ndarray) -> np.ndarray:
    n, k = jac.shape
    dof = max(n - k, 1)
    s2 = float(resid @ resid) / dof
    try:
        cov = np.linalg.pinv(jac.T @ jac) * s2
    except np.linalg.LinAlgError:
        return np.full(k, np.nan)
    return np.sqrt(np.clip(np.diag(cov), 0, None))


def fit_hom(curve: HomCurve, noiseless: bool = False, max_nfev: int = 2000) -> HomFit:
    """Least-squares Gaussian dip/peak fit, C(t) = Cinf (1 - s V g(t)).

    Fits the sampled counts when present unless ``noiseless`` is set.
    """
    y = curve.expected if noiseless or curve.sampled is None else curve.sampled
    y = np.asarray(y, dtype=float)
    tau = np.asarray(curve.delays, dtype=float)
    if len(tau) < 7:
        raise ValueError("fit_hom needs at least 7 points")

    # scale delays to [-1, 1] and counts to O(1)
    mid = 0.5 * (tau.max() + tau.min())
    half = 0.5 * (tau.max() - tau.min())
    t = (tau - mid) / half
    n_tail = max(2, len(y) // 7)
    order = np.argsort(t)
    base = float(np.mean(np.r_[y[order[:n_tail]], y[order[-n_tail:]]]))
    if base <= 0:
        raise FitError("baseline counts are not positive")
    yn = y / base

    dev = yn - 1.0
    k = int(np.argmax(np.abs(dev)))
    s = 1.0 if dev[k] < 0 else -1.0
    kind = "Dip" if s > 0 else "Peak"
    p0 = [1.0, max(abs(dev[k]), 1e-3), t[k], 1.0 / 3.0]

    if np.max(np.abs(dev)) < 1e-12:
        # flat curve: nothing to fit
        return HomFit(base, base, 0.0, float("nan"), float("nan"), "Dip", 0.0, {}, False, 0)

    res = least_squares(
        lambda p: _gauss_model(p, t, s) - yn,
        p0,
        jac=lambda p: _gauss_jac(p, t, s),
        method="lm",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=max_nfev,
    )
    if res.status <= 0:
        raise FitError(f"HOM fit did not converge: {res.message}")
    c, v, t0, w = res.x
    w = abs(w)
    se = _stderr(res.jac, res.fun)
    c_inf = c * base
    c0 = c_inf * (1 - s * v)
    vis = visibility(c0, c_inf, kind)
    reliable = bool(vis > 0 and vis > 3 * se[1])
    if vis < 0:
        vis = 0.0
    return HomFit(
        c0=float(c0),
        c_inf=float(c_inf),
        visibility=float(vis),
        width=float(w * half),
        center=float(mid + t0 * half),
        kind=kind,
        residual_rms=float(np.sqrt(np.mean(res.fun**2)) * base),
        stderr={
            "c_inf": float(se[0] * base),
            "visibility": float(se[1]),
            "center": float(se[2] * half),
            "width": float(se[3] * half),
        },
        reliable=reliable,
        nfev=int(res.nfev),
    )


def classify_from_curve(fit: HomFit) -> HomEffect:
    if not fit.reliable:
        raise FitError("fit is unreliable (no resolvable dip or peak)")
    return HomEffect.BUNCHING if fit.kind == "Dip" else HomEffect.ANTI_BUNCHING


@dataclass
class PhaseFit:
    phi: float
    amplitude: float
    offset: float
    phi_stderr: float
    reliable: bool = True
    residual_rms: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def fit_phase(scan: PhaseScan, noiseless: bool = False) -> PhaseFit:
    """Fit <M_theta> = A cos(theta - phi) + B and return the maximizing phi.

    The model is linear in (A cos phi, A sin phi, B), so the least-squares
    optimum is found directly.
    """
    th = np.asarray(scan.thetas, dtype=float)
    ms = None if noiseless else scan.m_sampled
    y = np.asarray(scan.m_theta if ms is None else ms, dtype=float)
    if len(th) < 8:
        raise ValueError("fit_phase needs at least 8 theta points")
    srt = np.sort(th)
    span = srt[-1] - srt[0] + np.mean(np.diff(srt))
    if span < 2 * math.pi - 1e-9:
        raise ValueError("theta points must cover a full period")

    design = np.column_stack([np.cos(th), np.sin(th), np.ones_like(th)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    a, b, offset = coef
    resid = design @ coef - y
    se = _stderr(design, resid)
    dof = max(len(y) - 3, 1)
    cov = np.linalg.inv(design.T @ design) * float(resid @ resid) / dof

    amp = math.hypot(a, b)
    phi = math.atan2(b, a) % (2 * math.pi)
    if 2 * math.pi - phi < 1e-12:
        phi = 0.0
    if amp > 0:
        var_phi = (b * b * cov[0, 0] + a * a * cov[1, 1] - 2 * a * b * cov[0, 1]) / amp**4
        phi_se = math.sqrt(max(var_phi, 0.0))
        amp_se = math.sqrt(max((a * a * cov[0, 0] + b * b * cov[1, 1] + 2 * a * b * cov[0, 1]) / amp**2, 0.0))
    else:
        phi_se = amp_se = float("inf")
    reliable = bool(amp > 1e-12 and amp > 3 * amp_se)
    return PhaseFit(
        phi=float(phi),
        amplitude=float(amp),
        offset=float(offset),
        phi_stderr=float(phi_se),
        reliable=reliable,
        residual_rms=float(np.sqrt(np.mean(resid**2))),
    )


def angle_distance(a: float, b: float) -> float:
    """Shortest distance between two angles on the circle."""
    d = (a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)
