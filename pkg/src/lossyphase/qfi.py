"""Quantum Fisher information and the Cramér–Rao phase-precision bound.

For a phase imprinted by ``exp(i G phi)`` with ``G`` the photon number of
the phase mode, the information carried by a state ``rho`` is

    F_Q = sum_{i,j} 2 / (lambda_i + lambda_j) |<i| d rho / d phi |j>|^2

over eigenpairs of ``rho``; loss commutes with the phase rotation, so
``d rho / d phi = i [G, rho]`` exactly.  A measurement repeated ``m`` times
then bounds the phase deviation by ``delta_phi >= 1 / sqrt(m F_Q)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import apply_channel, loss_kraus
from .fock import (
    DensityOperator,
    FockVector,
    Operator,
    default_cutoff,
    density_from_vector,
    eigh,
    phase_generator,
    rotate_phase,
)
from .states import StateSpec, build_state, modes_of, n_c, n_e, n_u, solve_alpha_of_a

DEFAULT_EPS = 1e-12


@dataclass(frozen=True)
class QfiResult:
    """Per-state quantum Fisher information and how it was computed."""

    f_q: float
    method: str
    eps_used: float | None = None

    def __post_init__(self):
        if self.f_q < -1e-9:
            raise ValueError(f"QFI came out negative: {self.f_q}")
        object.__setattr__(self, "f_q", max(self.f_q, 0.0))


class DegenerateCatBasisError(ValueError):
    """The two coherent branches coincide, so the 2x2 basis collapses."""


def qfi_pure(state: FockVector, generator: Operator) -> QfiResult:
    """4 Var(G) on a normalized pure state."""
    if abs(state.norm_sq() - 1.0) > 1e-8:
        raise ValueError(f"state norm^2 = {state.norm_sq()} is not 1")
    if not generator.hermitian:
        raise ValueError("generator must be certified Hermitian")
    g_psi = generator.matrix @ state.amplitudes
    mean = float(np.vdot(state.amplitudes, g_psi).real)
    second = float(np.vdot(g_psi, g_psi).real)
    return QfiResult(4.0 * (second - mean**2), method="pure-variance")


def qfi_closed_form(alpha: float, kind: str) -> QfiResult:
    """Lossless QFI of the balanced superpositions, 4 a^2 N^2 (1 + a^2 - a^2 N^2).

    ``kind`` selects the normalization: "cat" for N_c(|alpha>+|0>)
    and "ecs" for N_e(|alpha,0>+|0,alpha>).
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if kind == "cat":
        nn = n_c(alpha)
    elif kind == "ecs":
        nn = n_e(alpha)
    else:
        raise ValueError(f"kind must be 'cat' or 'ecs', got {kind!r}")
    f = 4.0 * alpha**2 * nn**2 * (1.0 + alpha**2 - alpha**2 * nn**2)
    return QfiResult(f, method="analytic")


def qfi_mixed(
    rho: DensityOperator, generator: Operator, eps: float = DEFAULT_EPS
) -> QfiResult:
    """Eigenbasis sum of the mixed-state QFI with an eigenvalue floor.

    Pairs with ``lambda_i + lambda_j <= eps`` are skipped (they contribute
    nothing but divide by ~0).  Only the matrix-element strip against
    eigenvectors with ``lambda > eps/2`` is formed; every pair passing the
    floor lands in that strip.
    """
    if eps <= 0:
        raise ValueError("eigenvalue floor must be > 0")
    if not generator.hermitian:
        raise ValueError("generator must be certified Hermitian")
    if generator.dim != rho.dim:
        raise ValueError("generator/state dimension mismatch")
    es = eigh(rho)
    lam = es.eigenvalues
    vecs = es.eigenvectors
    keep = lam > eps / 2.0
    if not keep.any():
        return QfiResult(0.0, method="numeric-eigh", eps_used=eps)
    g = generator.matrix
    r = rho.matrix
    if not np.iscomplexobj(r) and np.all(g.imag == 0.0):
        g = g.real
    comm = g @ r - r @ g  # i * comm is d rho / d phi
    strip = vecs.conj().T @ (comm @ vecs[:, keep])
    li = lam[:, None]
    lj = lam[keep][None, :]
    ok = (li + lj) > eps
    terms = np.where(ok, 2.0 * np.abs(strip) ** 2 / np.where(ok, li + lj, 1.0), 0.0)
    # Strip columns cover pairs (i, j in keep); rows outside `keep` mirror the
    # (i in keep, j outside) pairs, which carry the same value by symmetry.
    total = float(terms.sum() + terms[~keep, :].sum())
    return QfiResult(total, method="numeric-eigh", eps_used=eps)


# ---------------------------------------------------------------------------
# the two-eigenvalue route for coherent-plus-vacuum superpositions


@dataclass(frozen=True)
class CatBasisEigensystem:
    """Spectrum of a lossy coherent+vacuum superposition in its 2d support.

    The support of the lossy state is spanned by the surviving coherent
    branch |c> = |alpha_eta e^(i phi)> and the vacuum.  ``vectors_pm`` holds
    the eigenvectors (columns, matching ``eigenvalues``) in the orthonormal
    basis N_pm (|c> +- |0>); ``coherent_coeff``/``vacuum_coeff`` express the
    same eigenvectors as p |c> + r |0>.
    """

    eigenvalues: tuple
    vectors_pm: np.ndarray
    coherent_coeff: tuple
    vacuum_coeff: tuple
    alpha_eta: float
    phi: float


def _two_branch_eigensystem(alpha: float, a: float, eta: float):
    """Diagonalize N^2 [|c><c| + a^2|0><0| + q(|c><0| + h.c.)] on its support.

    The 2x2 matrix elements do not involve the phase: it only rotates |c>.
    """
    alpha_eta_sq = eta * alpha**2
    if alpha_eta_sq < 1e-12:
        raise DegenerateCatBasisError(
            "surviving coherent amplitude is (numerically) vacuum; "
            "the +/- basis collapses"
        )
    s = math.exp(-alpha_eta_sq / 2.0)  # <0|c>, independent of phi
    one_minus_s = -math.expm1(-alpha_eta_sq / 2.0)
    q = a * math.exp(-((1.0 - eta) * alpha**2) / 2.0)
    norm_sq = n_u(a, alpha) ** 2
    up_sq = (1.0 + s) / 2.0
    um_sq = one_minus_s / 2.0
    rho_pp = norm_sq * up_sq * (1.0 + a**2 + 2.0 * q)
    rho_mm = norm_sq * um_sq * (1.0 + a**2 - 2.0 * q)
    rho_pm = norm_sq * math.sqrt(up_sq * um_sq) * (1.0 - a**2)
    two = np.array([[rho_pp, rho_pm], [rho_pm, rho_mm]])
    vals, vecs = np.linalg.eigh(two)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    n_plus = 1.0 / math.sqrt(2.0 * (1.0 + s))
    n_minus = 1.0 / math.sqrt(2.0 * one_minus_s)
    p = vecs[0, :] * n_plus + vecs[1, :] * n_minus
    r = vecs[0, :] * n_plus - vecs[1, :] * n_minus
    return vals, vecs, p, r, alpha_eta_sq


def ucs_lossy_eigensystem(
    a: float, n_phi: float, eta: float, phi: float = 0.0
) -> CatBasisEigensystem:
    """Two nonzero eigenpairs of the lossy unbalanced cat, from its 2x2 form.

    Raises :class:`DegenerateCatBasisError` when the surviving amplitude is
    zero (full loss); callers fall back to a full-space decomposition.
    """
    alpha = solve_alpha_of_a(a, n_phi)
    vals, vecs, p, r, ae2 = _two_branch_eigensystem(alpha, a, eta)
    return CatBasisEigensystem(
        eigenvalues=(float(vals[0]), float(vals[1])),
        vectors_pm=vecs,
        coherent_coeff=(float(p[0]), float(p[1])),
        vacuum_coeff=(float(r[0]), float(r[1])),
        alpha_eta=math.sqrt(ae2),
        phi=phi,
    )


def _two_branch_qfi(alpha: float, a: float, eta: float, eps: float) -> float:
    """QFI of the lossy coherent+vacuum superposition via its two eigenpairs.

    The Fisher sum splits into pairs inside the two-dimensional support and
    pairs against the kernel; the latter collapse onto second moments of the
    generator, all of which are closed-form on coherent states:
    <c|n|c> = alpha_eta^2 and <c|n^2|c> = alpha_eta^2 + alpha_eta^4.
    """
    vals, _, p, _, ae2 = _two_branch_eigensystem(alpha, a, eta)
    g1 = ae2
    g2 = ae2 + ae2**2
    keep = vals > eps / 2.0
    total = 0.0
    for k in range(2):
        if not keep[k]:
            continue
        for l in range(2):
            if keep[l] and vals[k] + vals[l] > eps:
                total += (
                    2.0
                    * (vals[k] - vals[l]) ** 2
                    / (vals[k] + vals[l])
                    * (p[k] * p[l] * g1) ** 2
                )
        inside = sum((p[k] * p[l] * g1) ** 2 for l in range(2) if keep[l])
        total += 4.0 * vals[k] * (p[k] ** 2 * g2 - inside)
    return total


def ucs_lossy_qfi(
    a: float, n_phi: float, eta: float, eps: float = DEFAULT_EPS
) -> QfiResult:
    """Lossy unbalanced-cat QFI through the two-eigenvalue route."""
    alpha = solve_alpha_of_a(a, n_phi)
    return QfiResult(
        _two_branch_qfi(alpha, a, eta, eps), method="cat-basis-2x2", eps_used=eps
    )


def cat_lossy_qfi(alpha: float, eta: float, eps: float = DEFAULT_EPS) -> QfiResult:
    """Lossy balanced-cat QFI (the a = 1 case at fixed amplitude)."""
    return QfiResult(
        _two_branch_qfi(alpha, 1.0, eta, eps), method="cat-basis-2x2", eps_used=eps
    )


# ---------------------------------------------------------------------------
# precision bound and the state -> phase -> loss pipeline


def crb(f_q: float, m: float) -> float:
    """Cramér–Rao bound 1 / sqrt(m F_Q); ``m`` may be a non-integer rate."""
    if m <= 0:
        raise ValueError("repetition count must be > 0")
    if f_q < 0:
        raise ValueError("QFI must be >= 0")
    if f_q == 0.0:
        raise ValueError("QFI is zero: the precision bound is infinite")
    return 1.0 / math.sqrt(m * f_q)


def lossy_qfi(
    spec: StateSpec,
    eta: float,
    phi: float = 0.0,
    loss_arms: str = "both",
    cutoff: int | None = None,
    eps: float = DEFAULT_EPS,
) -> QfiResult:
    """Numeric QFI of a probe sent through phase shift then loss.

    ``loss_arms`` selects whether a two-mode probe loses photons in both
    arms (the default) or only in the phase arm.
    """
    if loss_arms not in ("both", "phase"):
        raise ValueError("loss_arms must be 'both' or 'phase'")
    state = build_state(spec, cutoff)
    state = rotate_phase(state, phi)
    rho = density_from_vector(state)
    channel = loss_kraus(eta, rho.cutoff)
    rho = apply_channel(rho, channel, mode=1)
    if state.modes == 2 and loss_arms == "both":
        rho = apply_channel(rho, channel, mode=2)
    gen = phase_generator(rho.cutoff, rho.modes)
    res = qfi_mixed(rho, gen, eps)
    return res
