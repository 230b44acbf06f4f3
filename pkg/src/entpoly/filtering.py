"""Local-filter protocol for moving four-qubit spectra out of overlapping polytopes.

Qubit ``postselect_qubit`` gets the reflection U(theta2) and is measured in
the computational basis; ``filtered_qubit`` gets U(theta1) followed by the
attenuator diag(1, gamma). The residual three-qubit state is what gets
classified, with lambda_1 = 1 prepended for the post-selected qubit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from entpoly import polytope
from entpoly.qcore import (
    AnnihilationError,
    StateVector,
    apply_local,
    local_spectra,
    postselect,
)


def u_theta(theta: float) -> np.ndarray:
    """R(theta) diag(1, -1) R(-theta): a reflection, Hermitian and unitary with det -1."""
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    back = np.array([[c, s], [-s, c]])
    return rot @ np.diag([1.0, -1.0]) @ back


def a_gamma(gamma: float) -> np.ndarray:
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    return np.diag([1.0, gamma])


@dataclass(frozen=True)
class FilterSetting:
    theta1: float
    gamma: float = 1.0
    theta2: float = -math.pi / 8
    postselect_qubit: int = 1
    outcome: int = 0
    filtered_qubit: int = 4

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.postselect_qubit == self.filtered_qubit:
            raise ValueError("post-selected and filtered qubit must differ")
        if self.outcome not in (0, 1):
            raise ValueError(f"outcome must be 0 or 1, got {self.outcome}")

    @property
    def inv_gamma_sq(self) -> float:
        return 1.0 / self.gamma**2


@dataclass(frozen=True)
class ProtocolResult:
    setting: FilterSetting
    residual_state: StateVector
    spectra: tuple[float, ...]
    full_spectra: tuple[float, ...]
    f: float
    success: float


def run_protocol(state: StateVector, setting: FilterSetting) -> ProtocolResult:
    if state.num_qubits != 4:
        raise ValueError(f"the filter protocol acts on four qubits, got {state.num_qubits}")
    ops = [
        (setting.postselect_qubit, u_theta(setting.theta2)),
        (setting.filtered_qubit, a_gamma(setting.gamma) @ u_theta(setting.theta1)),
    ]
    filtered, pass_prob = apply_local(state, ops)
    residual, prob = postselect(filtered, setting.postselect_qubit, setting.outcome)
    success = pass_prob * prob
    if success < 1e-14:
        raise AnnihilationError(f"protocol success probability {success:.3e}")
    spectra = local_spectra(residual)
    full = (1.0,) + spectra
    return ProtocolResult(setting, residual, spectra, full, polytope.f_value(full, 1), success)


@dataclass(frozen=True)
class SweepRow:
    theta1: float
    inv_gamma_sq: float
    f: float
    success: float
    spectra: tuple[float, ...]
    annihilated: bool = False


def sweep(state: StateVector, theta1_grid: Sequence[float], inv_gamma_sq_grid: Sequence[float],
          base: FilterSetting | None = None) -> list[SweepRow]:
    """Protocol outputs over a (theta1, 1/gamma^2) grid; theta1 is the outer loop."""
    if len(theta1_grid) == 0 or len(inv_gamma_sq_grid) == 0:
        raise ValueError("sweep grids must be non-empty")
    if any(g < 1 for g in inv_gamma_sq_grid):
        raise ValueError("1/gamma^2 grid values must be >= 1")
    base = base or FilterSetting(0.0)
    rows = []
    for t in theta1_grid:
        for g in inv_gamma_sq_grid:
            setting = replace(base, theta1=float(t), gamma=1.0 / math.sqrt(g))
            try:
                res = run_protocol(state, setting)
            except AnnihilationError:
                nan = float("nan")
                rows.append(SweepRow(float(t), float(g), nan, 0.0, (nan, nan, nan), True))
                continue
            rows.append(SweepRow(float(t), float(g), res.f, res.success, res.spectra))
    return rows


def _margin(res: ProtocolResult, target: str) -> float:
    if target == "P4":
        system, point = polytope.facets("P4"), res.full_spectra
    else:
        system, point = polytope.facets("W3"), res.spectra
    return float(-system.slacks(point).min())


@dataclass(frozen=True)
class SearchResult:
    setting: FilterSetting | None
    margin: float
    escaped: bool
    evaluations: int


THETA_RANGE = (0.0, math.pi / 2)
INV_GAMMA_SQ_RANGE = (1.0, 8.0)


def search_escape(state: StateVector, target: str = "P4", budget: int = 200,
                  base: FilterSetting | None = None) -> SearchResult:
    """Look for a filter setting that pushes the spectra out of ``target``.

    The margin is the largest violation over the target's inequalities
    (positive means outside). A coarse grid over theta1 in [0, pi/2) and
    1/gamma^2 in [1, 8] is followed by coordinate descent with step halving
    until the evaluation budget is spent.
    """
    target = str(target)
    if target not in ("P4", "W3"):
        raise ValueError(f"search target must be P4 or W3, got {target!r}")
    if budget < 9:
        raise ValueError("budget must be at least 9 evaluations")
    base = base or FilterSetting(0.0)
    lo_g, hi_g = INV_GAMMA_SQ_RANGE
    evaluations = 0
    cache: dict[tuple[float, float], float] = {}

    def score(theta, g):
        nonlocal evaluations
        key = (theta, g)
        if key not in cache:
            evaluations += 1
            try:
                res = run_protocol(state, replace(base, theta1=theta, gamma=1.0 / math.sqrt(g)))
                cache[key] = _margin(res, target)
            except AnnihilationError:
                cache[key] = -math.inf
        return cache[key]

    side = max(3, int(math.isqrt(budget // 2)))
    thetas = [THETA_RANGE[0] + (THETA_RANGE[1] - THETA_RANGE[0]) * i / side for i in range(side)]
    gs = [lo_g + (hi_g - lo_g) * j / (side - 1) for j in range(side)]
    best = None
    for t in thetas:
        for g in gs:
            m = score(t, g)
            if best is None or m > best[0]:
                best = (m, t, g)

    step_t = (THETA_RANGE[1] - THETA_RANGE[0]) / side
    step_g = (hi_g - lo_g) / (side - 1)
    while evaluations < budget and (step_t > 1e-9 or step_g > 1e-9):
        improved = False
        _, t, g = best
        for cand in ((t + step_t, g), (t - step_t, g),
                     (t, min(hi_g, g + step_g)), (t, max(lo_g, g - step_g))):
            if evaluations >= budget:
                break
            m = score(*cand)
            if m > best[0]:
                best = (m, *cand)
                improved = True
        if not improved:
            step_t /= 2
            step_g /= 2

    margin, t, g = best
    setting = replace(base, theta1=t, gamma=1.0 / math.sqrt(g)) if margin > -math.inf else None
    return SearchResult(setting, margin, margin > 1e-6, evaluations)


REFERENCE_SETTINGS = {
    # label: (state, theta1, gamma)
    "a": ("PSI1", math.pi / 8, 1 / math.sqrt(2)),
    "b": ("PSI1", math.pi / 8, 1 / math.sqrt(3)),
    "c": ("PSI1", math.pi / 8, 1 / math.sqrt(5)),
    "d": ("PSI1", 3 * math.pi / 32, 1 / math.sqrt(5)),
    "e": ("PSI1", 0.0, 1.0),
    "f": ("PSI2", 0.0, 1.0),
}
