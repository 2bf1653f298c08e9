"""Displacement-plus-counting readout of a lossy single-mode probe.

The probe picks up the phase, loses photons, is displaced by -beta, and its
photons are counted.  The count distribution p(n | phi) is evaluated either
numerically (conjugating the density matrix with the displacement operator)
or through the closed form of the displaced superposition state, whose
branches stay coherent:

    D(-beta) rho D(-beta)+  =  N_u^2 [ |sigma><sigma| + a^2 |-beta><-beta|
        + a e^(-alpha_mu^2/2) (e^(i theta) |sigma><-beta| + h.c.) ]

with sigma = alpha_eta e^(i phi) - beta and theta = alpha_eta beta sin(phi).

A gridded Bayesian update over repeated counts turns the distribution into
a phase estimate; the classical Fisher information of p(n | phi) is the
yardstick both for the posterior width and for comparison against the
quantum bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .channels import apply_channel, loss_kraus
from .fock import (
    DensityOperator,
    TruncationError,
    default_cutoff,
    density_from_vector,
    displacement_operator,
    rotate_phase,
)
from .states import (
    Cat,
    Coherent,
    StateSpec,
    UCS,
    build_state,
    default_spec_cutoff,
    format_state_spec,
    mean_photons_through_phase,
    modes_of,
    n_u,
    solve_alpha_of_a,
)

# Largest dense outcome vector handed back to callers; beyond this the
# windowed evaluation inside classical_fisher is the only sensible route.
MAX_DENSE_OUTCOMES = 2_000_000

PROB_FLOOR = 1e-14  # Fisher-sum terms below this probability are skipped


class PriorSupportError(RuntimeError):
    """Posterior mass reached the edge of the prior; retry with wider support."""


@dataclass(frozen=True)
class MeasurementConfig:
    """Settings of one counting experiment."""

    spec: StateSpec
    eta: float
    beta: float
    phi0: float
    m: int
    seed: int
    prior_width: float = 0.5
    prior_points: int = 2001
    cutoff: int | None = None

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.m < 1 or int(self.m) != self.m:
            raise ValueError("repetition count m must be a positive integer")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("transmissivity must be in [0, 1]")
        if self.prior_width <= 0 or self.prior_points < 3:
            raise ValueError("prior must have positive width and >= 3 grid points")


@dataclass(frozen=True)
class OutcomeDistribution:
    """Photon-count probabilities at one phase; ``tail`` is truncated mass."""

    probs: np.ndarray
    phi: float
    tail: float

    def __post_init__(self):
        self.probs.flags.writeable = False


@dataclass(frozen=True)
class PosteriorSummary:
    """Gridded-posterior estimate after ``n_updates`` counted probes."""

    mean_phi: float
    std_phi: float
    n_updates: int
    counts: tuple

    def __post_init__(self):
        if self.std_phi <= 0:
            raise ValueError("posterior width must be > 0")


# ---------------------------------------------------------------------------
# branch form of the lossy state


def _lossy_branch_form(spec: StateSpec, eta: float):
    """(alpha, a) such that the lossy state is the coherent+vacuum mixture.

    Returns None for families without that structure.
    """
    if isinstance(spec, Coherent):
        return spec.alpha, 0.0
    if isinstance(spec, Cat):
        return spec.alpha, 1.0
    if isinstance(spec, UCS):
        return solve_alpha_of_a(spec.a, spec.n_phi), spec.a
    return None


def _coherent_window_amps(gamma: complex, ns: np.ndarray) -> np.ndarray:
    """<n|gamma> on an index window, through logs."""
    if abs(gamma) < 1e-300:
        return (ns == 0).astype(complex)
    return np.exp(
        -abs(gamma) ** 2 / 2.0 + ns * np.log(complex(gamma)) - 0.5 * gammaln(ns + 1)
    )


def _branch_probs(alpha: float, a: float, eta: float, beta: float, phis, ns):
    """p(n | phi) of the displaced lossy superposition on an index window.

    Vectorized over ``phis``; returns an array of shape (len(phis), len(ns)).
    """
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    alpha_eta = alpha * math.sqrt(eta)
    alpha_mu_sq = (1.0 - eta) * alpha**2
    nu_sq = n_u(a, alpha) ** 2
    cross = a * math.exp(-alpha_mu_sq / 2.0)

    sigma = alpha_eta * np.exp(1j * phis) - beta  # (nphi,)
    v_beta = _coherent_window_amps(-beta, ns).real  # (nn,)
    log_fact = 0.5 * gammaln(ns + 1)
    # |<n|sigma>|-type amplitudes for every phase at once
    tiny = np.abs(sigma) < 1e-300
    log_sigma = np.where(tiny, 1.0, sigma)
    v_sigma = np.exp(
        -np.abs(sigma[:, None]) ** 2 / 2.0
        + ns[None, :] * np.log(log_sigma[:, None])
        - log_fact[None, :]
    )
    if tiny.any():
        v_sigma[tiny, :] = (ns == 0).astype(complex)[None, :]

    theta = alpha_eta * beta * np.sin(phis)  # displacement phase of the cross term
    probs = nu_sq * (
        np.abs(v_sigma) ** 2
        + (a**2) * v_beta[None, :] ** 2
        + 2.0
        * cross
        * np.real(np.exp(1j * theta)[:, None] * v_sigma)
        * v_beta[None, :]
    )
    return probs


def _support_window(alpha: float, eta: float, beta: float):
    """Index range covering the displaced branches to tail < 1e-12."""
    means = [(alpha * math.sqrt(eta) + beta) ** 2, beta**2]
    lo_candidates = []
    hi = 0
    for mu in means:
        hi = max(hi, default_cutoff(mu))
        lo_candidates.append(mu - 12.0 * math.sqrt(mu) - 30.0)
    lo = max(0, int(math.floor(min(lo_candidates))))
    return lo, hi


def outcome_distribution(
    spec: StateSpec,
    eta: float,
    phi: float,
    beta: float,
    cutoff: int | None = None,
    method: str = "auto",
) -> OutcomeDistribution:
    """Counting distribution p(n | phi) = <n| D(-beta) rho(phi) D+ |n>.

    ``method`` picks the evaluation route: "analytic" uses the displaced
    branch form (coherent-family probes only), "numeric" conjugates the
    density matrix with the displacement operator, "auto" prefers analytic.
    """
    if modes_of(spec) != 1:
        raise ValueError("the displacement readout applies to single-mode probes")
    branch = _lossy_branch_form(spec, eta)
    if method == "auto":
        method = "analytic" if branch is not None else "numeric"
    if method not in ("analytic", "numeric"):
        raise ValueError(f"unknown method {method!r}")

    if cutoff is None:
        if branch is not None:
            cutoff = default_cutoff((branch[0] * math.sqrt(eta) + beta) ** 2)
        else:
            # Displaced number states spread with variance beta^2 (2n + 1).
            top = default_spec_cutoff(spec)
            mean = top + beta**2
            sigma = beta * math.sqrt(2.0 * top + 1.0) + math.sqrt(top + 1.0)
            cutoff = int(math.ceil(mean + 8.0 * sigma + 20.0))
    if cutoff > MAX_DENSE_OUTCOMES:
        raise TruncationError(
            f"dense outcome vector of {cutoff + 1} entries requested; "
            "use classical_fisher, which windows the support"
        )
    ns = np.arange(cutoff + 1)

    if method == "analytic":
        if branch is None:
            raise ValueError(f"no analytic branch form for {format_state_spec(spec)}")
        alpha, a = branch
        probs = _branch_probs(alpha, a, eta, beta, phi, ns)[0]
    else:
        probs = _numeric_outcome_probs(spec, eta, phi, beta, cutoff)

    if probs.min() < -1e-10:
        raise RuntimeError(f"negative outcome probability {probs.min():.3e}")
    probs = np.clip(probs, 0.0, None)
    tail = 1.0 - float(probs.sum())
    if tail > 1e-9:
        raise TruncationError(
            f"outcome distribution for {format_state_spec(spec)} at eta={eta} "
            f"leaves tail {tail:.2e}; raise the cutoff"
        )
    return OutcomeDistribution(probs, float(phi), tail)


def _numeric_outcome_probs(spec, eta, phi, beta, cutoff):
    small = default_spec_cutoff(spec)
    if small > cutoff:
        raise TruncationError("probe cutoff exceeds the displaced cutoff")
    state = rotate_phase(build_state(spec, small), phi)
    rho_small = density_from_vector(state)
    rho_small = apply_channel(rho_small, loss_kraus(eta, small), mode=1)
    big = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    big[: small + 1, : small + 1] = rho_small.matrix
    disp = displacement_operator(-beta, cutoff)
    conj = disp.matrix @ big @ disp.matrix.conj().T
    return np.real(np.diag(conj))


# ---------------------------------------------------------------------------
# classical Fisher information of the counting readout


def classical_fisher(
    spec: StateSpec,
    eta: float,
    phi: float,
    beta: float,
    dphi: float = 1e-5,
    cutoff: int | None = None,
) -> float:
    """F_C = sum_n (dp/dphi)^2 / p with a central-difference derivative.

    Terms with p(n | phi) below ``PROB_FLOOR`` are skipped.  Coherent-family
    probes are evaluated on a support window, so arbitrarily large ``beta``
    (e.g. the plateau study) costs only the window size.
    """
    if dphi <= 0:
        raise ValueError("dphi must be > 0")
    branch = _lossy_branch_form(spec, eta)
    if branch is not None and cutoff is None:
        alpha, a = branch
        lo, hi = _support_window(alpha, eta, beta)
        ns = np.arange(lo, hi + 1)
        trio = _branch_probs(alpha, a, eta, beta, [phi, phi + dphi, phi - dphi], ns)
        p0, pp, pm = trio[0], trio[1], trio[2]
    else:
        p0 = outcome_distribution(spec, eta, phi, beta, cutoff).probs
        pp = outcome_distribution(spec, eta, phi + dphi, beta, cutoff).probs
        pm = outcome_distribution(spec, eta, phi - dphi, beta, cutoff).probs
    deriv = (pp - pm) / (2.0 * dphi)
    mask = p0 >= PROB_FLOOR
    return float(np.sum(deriv[mask] ** 2 / p0[mask]))


def optimize_measurement(
    spec: StateSpec,
    eta: float,
    beta: float,
    phi_grid=None,
    r_phi: float = 400.0,
    dphi: float = 1e-5,
):
    """Phase maximizing F_C, and the budgeted precision it implies.

    Returns ``(phi_opt, delta_phi)`` with ``delta_phi = 1/sqrt(m F_C)`` and
    ``m = r_phi / n_phi``.  F_C(phi) carries interference fringes on the
    scale 1/(alpha_eta beta), so the default grid is dense.
    """
    if phi_grid is None:
        phi_grid = np.linspace(0.02, math.pi - 0.02, 601)
    phi_grid = np.asarray(phi_grid, dtype=float)
    values = [classical_fisher(spec, eta, p, beta, dphi) for p in phi_grid]
    i = int(np.argmax(values))
    best_phi, best_f = float(phi_grid[i]), values[i]
    lo = phi_grid[max(i - 1, 0)]
    hi = phi_grid[min(i + 1, len(phi_grid) - 1)]
    if hi > lo:
        from .precision import golden_section

        refined_phi, neg_f = golden_section(
            lambda p: -classical_fisher(spec, eta, p, beta, dphi), lo, hi, tol=1e-5
        )
        if -neg_f > best_f:
            best_phi, best_f = float(refined_phi), -neg_f
    m = r_phi / mean_photons_through_phase(spec)
    if best_f <= 0:
        raise ValueError("counting distribution carries no phase information here")
    return best_phi, 1.0 / math.sqrt(m * best_f)


def optimize_ucs_measurement(
    n_phi: float,
    eta: float,
    beta: float,
    r_phi: float = 400.0,
    a_grid=None,
    phi_points: int = 601,
    dphi: float = 1e-5,
):
    """Jointly tune the weight ``a`` and the phase for the counting readout.

    Returns ``(a_opt, phi_opt, f_c, delta_phi)``.  The budget accounting is
    untouched by ``a`` because alpha(a) holds ``n_phi`` fixed.
    """
    if a_grid is None:
        a_grid = np.linspace(0.0, 1.0, 21)
    phis = np.linspace(0.02, math.pi - 0.02, phi_points)
    m = r_phi / n_phi

    def best_phi_for(a):
        alpha = solve_alpha_of_a(a, n_phi)
        lo, hi = _support_window(alpha, eta, beta)
        ns = np.arange(lo, hi + 1)
        p0 = _branch_probs(alpha, a, eta, beta, phis, ns)
        pp = _branch_probs(alpha, a, eta, beta, phis + dphi, ns)
        pm = _branch_probs(alpha, a, eta, beta, phis - dphi, ns)
        deriv = (pp - pm) / (2.0 * dphi)
        masked = np.where(p0 >= PROB_FLOOR, deriv**2 / np.where(p0 > 0, p0, 1.0), 0.0)
        f_vals = masked.sum(axis=1)
        i = int(np.argmax(f_vals))
        return float(phis[i]), float(f_vals[i])

    results = [(float(a),) + best_phi_for(float(a)) for a in a_grid]
    a_opt, phi_opt, f_best = max(results, key=lambda t: t[2])

    # Polish the weight around the winning grid point.
    order = sorted(float(a) for a in a_grid)
    idx = order.index(a_opt)
    lo_a = order[max(idx - 1, 0)]
    hi_a = order[min(idx + 1, len(order) - 1)]
    if hi_a > lo_a:
        from .precision import golden_section

        a_ref, neg_f = golden_section(
            lambda a: -best_phi_for(a)[1], lo_a, hi_a, tol=1e-4
        )
        if -neg_f > f_best:
            a_opt = float(a_ref)
            phi_opt, f_best = best_phi_for(a_opt)

    return a_opt, phi_opt, f_best, 1.0 / math.sqrt(m * f_best)


# ---------------------------------------------------------------------------
# closed form for a coherent probe


def propagation_error_coherent(alpha: float, eta: float, phi: float, beta: float):
    """Propagated counting error of a lossy coherent probe.

    With sigma' = alpha_eta e^(i phi) - beta the counts are Poisson with
    mean |sigma'|^2, so delta_phi = Delta n / |d<n>/dphi|
                                  = |sigma'| / (2 alpha_eta beta |sin phi|).
    """
    if beta <= 0:
        raise ValueError("beta must be > 0")
    if alpha <= 0 or not 0 < eta <= 1:
        raise ValueError("need alpha > 0 and 0 < eta <= 1")
    s = math.sin(phi)
    if s == 0.0:
        raise ValueError("sin(phi) = 0: the mean count is stationary, "
                         "sensitivity diverges")
    alpha_eta = alpha * math.sqrt(eta)
    mod = abs(alpha_eta * complex(math.cos(phi), math.sin(phi)) - beta)
    return mod / (2.0 * alpha_eta * beta * abs(s))


# ---------------------------------------------------------------------------
# Bayesian phase inference from repeated counts


def bayesian_simulate(config: MeasurementConfig, phi_true: float) -> PosteriorSummary:
    """Draw counts at ``phi_true``, update a gridded posterior, summarize.

    The prior is uniform on ``phi0 +- prior_width/2``; ``phi_true`` must lie
    inside it.  Runs are bit-reproducible for a fixed seed.
    """
    half = config.prior_width / 2.0
    if not (config.phi0 - half <= phi_true <= config.phi0 + half):
        raise ValueError("phi_true lies outside the prior support")
    branch = _lossy_branch_form(config.spec, config.eta)
    if branch is None:
        raise ValueError(
            "Bayesian simulation needs the coherent-family branch form; "
            f"got {format_state_spec(config.spec)}"
        )
    alpha, a = branch
    cutoff = config.cutoff
    if cutoff is None:
        cutoff = default_cutoff((alpha * math.sqrt(config.eta) + config.beta) ** 2)
    ns = np.arange(cutoff + 1)

    phis = np.linspace(config.phi0 - half, config.phi0 + half, config.prior_points)
    p_grid = _branch_probs(alpha, a, config.eta, config.beta, phis, ns)
    p_true = _branch_probs(alpha, a, config.eta, config.beta, phi_true, ns)[0]
    p_true = np.clip(p_true, 0.0, None)
    tail = 1.0 - p_true.sum()
    if tail > 1e-9:
        raise TruncationError(f"sampling distribution leaves tail {tail:.2e}")

    rng = np.random.default_rng(config.seed)
    counts = rng.multinomial(config.m, p_true / p_true.sum())

    log_p = np.log(np.clip(p_grid, 1e-300, None))
    log_like = log_p @ counts.astype(float)
    log_like -= log_like.max()
    post = np.exp(log_like)
    post /= post.sum()

    edge = max(1, config.prior_points // 100)
    if post[:edge].sum() > 1e-6 or post[-edge:].sum() > 1e-6:
        raise PriorSupportError(
            "posterior mass reached the prior edge; widen prior_width and retry"
        )

    mean = float(np.dot(post, phis))
    var = float(np.dot(post, (phis - mean) ** 2))
    std = math.sqrt(max(var, 0.0))
    if std == 0.0:
        raise RuntimeError("posterior collapsed to a single grid cell; "
                           "raise prior_points")
    observed = tuple((int(n), int(c)) for n, c in zip(ns, counts) if c > 0)
    return PosteriorSummary(mean, std, int(config.m), observed)
