"""Precision-versus-loss curves under a fixed photon budget.

Each probe family is repeated ``m = r_phi / n_phi`` times so that every
curve spends the same total number of photons ``r_phi`` through the phase
shift, regardless of how large a single probe is.  ``m`` is treated as a
real-valued rate so the curves stay smooth across families whose ``n_phi``
does not divide the budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qfi import DEFAULT_EPS, crb, lossy_qfi, ucs_lossy_qfi
from .states import (
    NOON,
    UCS,
    StateSpec,
    format_state_spec,
    mean_photons_through_phase,
    n_c,
    solve_alpha_of_a,
)

GOLDEN_INV = (math.sqrt(5.0) - 1.0) / 2.0

BUDGET_TOL = 1e-9


@dataclass(frozen=True)
class PrecisionPoint:
    """One (transmissivity, precision) sample of a sweep."""

    eta: float
    delta_phi: float
    m: float
    n_phi: float
    a_opt: float | None = None
    spec: str = ""

    def __post_init__(self):
        if self.delta_phi <= 0:
            raise ValueError("delta_phi must be > 0")


@dataclass(frozen=True)
class PrecisionCurve:
    label: str
    points: tuple

    def __post_init__(self):
        etas = [p.eta for p in self.points]
        if any(b <= a for a, b in zip(etas, etas[1:])):
            raise ValueError("eta grid must be strictly increasing")

    def etas(self) -> np.ndarray:
        return np.array([p.eta for p in self.points])

    def deltas(self) -> np.ndarray:
        return np.array([p.delta_phi for p in self.points])


def eta_grid_default(count: int = 101, lo: float = 0.01, hi: float = 1.0) -> np.ndarray:
    """Uniform transmissivity grid; dense enough to resolve curve crossings."""
    return np.linspace(lo, hi, count)


def budget_repetitions(n_phi: float, r_phi: float) -> float:
    if r_phi <= 0:
        raise ValueError("photon budget must be > 0")
    m = r_phi / n_phi
    if abs(m * n_phi - r_phi) > BUDGET_TOL:
        raise ValueError("budget accounting drifted")
    return m


def golden_section(f, lo: float, hi: float, tol: float = 1e-6):
    """Minimize a unimodal scalar function on [lo, hi].

    Returns the best probed (x, f(x)); endpoints are always probed so the
    result never exceeds them.
    """
    a, b = float(lo), float(hi)
    best = min(((a, f(a)), (b, f(b))), key=lambda t: t[1])
    if b - a <= tol:
        return best
    c = b - GOLDEN_INV * (b - a)
    d = a + GOLDEN_INV * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN_INV * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN_INV * (b - a)
            fd = f(d)
    cand = (c, fc) if fc < fd else (d, fd)
    return cand if cand[1] < best[1] else best


# ---------------------------------------------------------------------------
# fixed-family sweeps


def crb_curve(
    spec: StateSpec,
    eta_grid,
    r_phi: float = 400.0,
    loss_arms: str = "both",
    cutoff: int | None = None,
    eps: float = DEFAULT_EPS,
    label: str | None = None,
) -> PrecisionCurve:
    """Bound curve for one probe family: build -> phase -> loss -> QFI -> CRB."""
    n_phi = mean_photons_through_phase(spec)
    m = budget_repetitions(n_phi, r_phi)
    pts = []
    name = label if label is not None else format_state_spec(spec)
    for eta in np.asarray(eta_grid, dtype=float):
        f_q = lossy_qfi(spec, eta, loss_arms=loss_arms, cutoff=cutoff, eps=eps).f_q
        pts.append(
            PrecisionPoint(
                eta=float(eta),
                delta_phi=crb(f_q, m),
                m=m,
                n_phi=n_phi,
                a_opt=None,
                spec=format_state_spec(spec),
            )
        )
    return PrecisionCurve(name, tuple(pts))


def snl_curve(eta_grid, r_phi: float = 400.0, label: str = "SNL") -> PrecisionCurve:
    """Shot-noise reference 1 / sqrt(eta r_phi): independent photons that survive."""
    if r_phi <= 0:
        raise ValueError("photon budget must be > 0")
    pts = []
    for eta in np.asarray(eta_grid, dtype=float):
        pts.append(
            PrecisionPoint(
                eta=float(eta),
                delta_phi=1.0 / math.sqrt(eta * r_phi),
                m=float(r_phi),
                n_phi=1.0,
                a_opt=None,
                spec="snl",
            )
        )
    return PrecisionCurve(label, tuple(pts))


# ---------------------------------------------------------------------------
# optimization over the unbalancing weight and over probe size


def _ucs_evaluator(method: str, n_phi: float, eta: float, m: float, eps: float):
    """delta_phi(a) for the budgeted unbalanced cat, by either QFI route.

    "cat-basis" is the closed two-eigenvalue form (fast, used inside
    optimizers); "numeric" is the full build -> loss -> eigh pipeline.  The
    two agree to machine precision wherever both apply.
    """
    if method == "cat-basis":
        return lambda a: crb(ucs_lossy_qfi(a, n_phi, eta, eps=eps).f_q, m)
    if method == "numeric":
        from .fock import default_cutoff

        cutoff = default_cutoff(solve_alpha_of_a(1.0, n_phi) ** 2)
        return lambda a: crb(
            lossy_qfi(UCS(a, n_phi), eta, cutoff=cutoff, eps=eps).f_q, m
        )
    raise ValueError(f"unknown evaluator {method!r}")


def optimize_ucs_a(
    n_phi: float,
    eta: float,
    r_phi: float = 400.0,
    a_step: float = 0.01,
    refine_tol: float = 1e-6,
    method: str = "cat-basis",
    eps: float = DEFAULT_EPS,
):
    """Best unbalancing weight at one loss value: (a_opt, delta_phi).

    Coarse grid first (guards against multimodality), then a golden-section
    polish of the bracketing interval.
    """
    m = budget_repetitions(n_phi, r_phi)
    objective = _ucs_evaluator(method, n_phi, eta, m, eps)

    grid = np.arange(0.0, 1.0 + a_step / 2.0, a_step)
    grid[-1] = 1.0
    values = [objective(a) for a in grid]
    i = int(np.argmin(values))
    best = (float(grid[i]), values[i])
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        refined = golden_section(objective, lo, hi, tol=refine_tol)
        if refined[1] < best[1]:
            best = refined
    return float(best[0]), float(best[1])


def ucs_optimal_curve(
    n_phi: float,
    eta_grid,
    r_phi: float = 400.0,
    label: str = "UCS",
    method: str = "cat-basis",
) -> PrecisionCurve:
    m = budget_repetitions(n_phi, r_phi)
    pts = []
    for eta in np.asarray(eta_grid, dtype=float):
        a_opt, delta = optimize_ucs_a(n_phi, float(eta), r_phi, method=method)
        pts.append(
            PrecisionPoint(
                eta=float(eta),
                delta_phi=delta,
                m=m,
                n_phi=n_phi,
                a_opt=a_opt,
                spec=format_state_spec(UCS(a_opt, n_phi)),
            )
        )
    return PrecisionCurve(label, tuple(pts))


def n_phi_ceiling(alpha_bal_max: float) -> float:
    """Largest allowed probe size, expressed as its phase-shift photon flux."""
    return n_c(alpha_bal_max) ** 2 * alpha_bal_max**2


def chop_optimize(
    eta: float,
    r_phi: float = 400.0,
    alpha_bal_max: float = 5.0,
    n_grid_points: int = 32,
    n_phi_min: float = 0.1,
    extra_candidates: tuple = (),
    method: str = "cat-basis",
    eps: float = DEFAULT_EPS,
):
    """Jointly pick probe size and weight at one loss value.

    Splits the fixed budget into probes of size ``n_phi`` (each repeated
    ``r_phi / n_phi`` times) and minimizes the bound over ``(n_phi, a)`` up
    to the size ceiling.  Larger probes win at low loss, smaller ones are
    more robust, so the optimum moves with ``eta``.  ``extra_candidates``
    are known-feasible ``(n_phi, a)`` pairs that are also probed; the
    returned minimum can only improve on them.

    Returns ``(n_phi_opt, a_opt, delta_phi)``.
    """
    if alpha_bal_max <= 0:
        raise ValueError("size ceiling must be > 0")
    ceiling = n_phi_ceiling(alpha_bal_max)

    def best_at_size(n_phi):
        m = budget_repetitions(n_phi, r_phi)
        objective = _ucs_evaluator(method, n_phi, eta, m, eps)

        grid = np.linspace(0.0, 1.0, 21)
        values = [objective(a) for a in grid]
        i = int(np.argmin(values))
        best = (float(grid[i]), values[i])
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        refined = golden_section(objective, lo, hi, tol=1e-6)
        if refined[1] < best[1]:
            best = refined
        return best  # (a, delta)

    sizes = np.exp(np.linspace(math.log(n_phi_min), math.log(ceiling), n_grid_points))
    sizes[-1] = ceiling
    candidates = []
    for n_phi in sizes:
        a_best, delta = best_at_size(float(n_phi))
        candidates.append((float(n_phi), a_best, delta))
    candidates.sort(key=lambda t: t[2])
    n0 = candidates[0][0]

    # Local polish of the size on the log axis around the best grid point.
    idx = int(np.searchsorted(sizes, n0))
    lo = sizes[max(idx - 1, 0)]
    hi = sizes[min(idx + 1, len(sizes) - 1)]

    def size_objective(log_n):
        n_phi = math.exp(log_n)
        a_best, delta = best_at_size(n_phi)
        return delta

    log_best, delta_best = golden_section(
        size_objective, math.log(lo), math.log(hi), tol=1e-6
    )
    n_ref = math.exp(log_best)
    a_ref, delta_ref = best_at_size(n_ref)
    candidates.append((n_ref, a_ref, delta_ref))

    for n_phi, a in extra_candidates:
        if n_phi <= ceiling * (1.0 + 1e-12):
            m = budget_repetitions(n_phi, r_phi)
            candidates.append(
                (n_phi, a, _ucs_evaluator(method, n_phi, eta, m, eps)(a))
            )

    n_opt, a_opt, delta = min(candidates, key=lambda t: t[2])
    return float(n_opt), float(a_opt), float(delta)


def chop_curve(
    eta_grid,
    r_phi: float = 400.0,
    alpha_bal_max: float = 5.0,
    extra_candidates: tuple = (),
    label: str = "CC",
) -> PrecisionCurve:
    pts = []
    for eta in np.asarray(eta_grid, dtype=float):
        n_opt, a_opt, delta = chop_optimize(
            float(eta), r_phi, alpha_bal_max, extra_candidates=extra_candidates
        )
        pts.append(
            PrecisionPoint(
                eta=float(eta),
                delta_phi=delta,
                m=budget_repetitions(n_opt, r_phi),
                n_phi=n_opt,
                a_opt=a_opt,
                spec=format_state_spec(UCS(a_opt, n_opt)),
            )
        )
    return PrecisionCurve(label, tuple(pts))


def noon_chop_n_max(alpha_bal_max: float = 5.0) -> int:
    """Largest chopped N, matched to the superposition size ceiling by flux."""
    return max(1, round(2.0 * n_phi_ceiling(alpha_bal_max)))


def noon_chop_curve(
    eta_grid,
    r_phi: float = 400.0,
    n_max: int | None = None,
    eps: float = DEFAULT_EPS,
    label: str = "NC",
) -> PrecisionCurve:
    """Per loss value, the best fixed-N path-entangled probe with N <= n_max."""
    if n_max is None:
        n_max = noon_chop_n_max()
    etas = np.asarray(eta_grid, dtype=float)
    best = {}
    for n in range(1, n_max + 1):
        spec = NOON(n)
        m = budget_repetitions(n / 2.0, r_phi)
        for eta in etas:
            f_q = lossy_qfi(spec, float(eta), eps=eps).f_q
            if f_q <= 0.0:
                # loss has wiped this candidate below the eigenvalue floor
                continue
            delta = crb(f_q, m)
            key = float(eta)
            if key not in best or delta < best[key][0]:
                best[key] = (delta, n, m)
    pts = []
    for eta in etas:
        delta, n, m = best[float(eta)]
        pts.append(
            PrecisionPoint(
                eta=float(eta),
                delta_phi=delta,
                m=m,
                n_phi=n / 2.0,
                a_opt=None,
                spec=format_state_spec(NOON(n)),
            )
        )
    return PrecisionCurve(label, tuple(pts))
