"""Probe-state families and the photon accounting that makes them comparable.

All coherent amplitudes are real and non-negative.  Two-mode probes put the
phase-carrying branch in mode 1.  The common currency across families is the
mean photon number sent through the phase shift per probe state, ``n_phi``;
repeating a probe ``m`` times spends ``m * n_phi`` photons of a fixed budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw

from .fock import (
    FockVector,
    coherent_vector,
    default_cutoff,
    number_state,
    tensor,
)


@dataclass(frozen=True)
class Coherent:
    """Single coherent state |alpha>."""

    alpha: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")


@dataclass(frozen=True)
class Cat:
    """Balanced superposition N_c (|alpha> + |0>)."""

    alpha: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")


@dataclass(frozen=True)
class UCS:
    """Unbalanced superposition N_u (|alpha(a)> + a |0>).

    ``alpha(a)`` is fixed by requiring the mean photon number through the
    phase shift to equal ``n_phi`` for every ``a``, so the weight ``a`` tunes
    how quantum the probe is without changing its photon cost.
    """

    a: float
    n_phi: float

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise ValueError("unbalancing weight a must be in [0, 1]")
        if self.n_phi <= 0:
            raise ValueError("n_phi must be > 0")


@dataclass(frozen=True)
class NO:
    """Single-mode number superposition (|N> + |0>) / sqrt(2)."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("N must be a positive integer")


@dataclass(frozen=True)
class NOON:
    """Two-mode path-entangled state (|N,0> + |0,N>) / sqrt(2)."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("N must be a positive integer")


@dataclass(frozen=True)
class ECS:
    """Entangled coherent state N_e (|alpha,0> + |0,alpha>)."""

    alpha: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")


StateSpec = Coherent | Cat | UCS | NO | NOON | ECS


# ---------------------------------------------------------------------------
# normalization constants


def n_e(alpha: float) -> float:
    return 1.0 / math.sqrt(2.0 + 2.0 * math.exp(-(alpha**2)))


def n_c(alpha: float) -> float:
    return 1.0 / math.sqrt(2.0 + 2.0 * math.exp(-(alpha**2) / 2.0))


def n_u(a: float, alpha: float) -> float:
    return 1.0 / math.sqrt(1.0 + a**2 + 2.0 * a * math.exp(-(alpha**2) / 2.0))


@dataclass(frozen=True)
class NormalizationSet:
    """The three superposition normalizations at one amplitude."""

    n_e: float
    n_c: float
    n_u: float


def normalization_set(alpha: float, a: float = 1.0) -> NormalizationSet:
    return NormalizationSet(n_e(alpha), n_c(alpha), n_u(a, alpha))


# ---------------------------------------------------------------------------
# the alpha(a) self-consistency


def solve_alpha_of_a(
    a: float, n_phi: float, tol: float = 1e-12, max_iter: int = 500
) -> float:
    """Amplitude alpha(a) keeping the phase-shift photon flux equal to n_phi.

    Solves alpha^2 = n_phi / N_u(alpha)^2, i.e.

        x = n_phi (1 + a^2 + 2 a e^(-x/2)),   x = alpha^2,

    by damped fixed-point iteration; the map is a contraction for all valid
    (a, n_phi).  The residual of the returned root is below ``tol``.
    """
    if not 0.0 <= a <= 1.0:
        raise ValueError("a must be in [0, 1]")
    if n_phi <= 0:
        raise ValueError("n_phi must be > 0")

    def residual(x):
        return x - n_phi * (1.0 + a**2 + 2.0 * a * math.exp(-x / 2.0))

    x = n_phi * (1.0 + a**2)
    for _ in range(max_iter):
        x_new = n_phi * (1.0 + a**2 + 2.0 * a * math.exp(-x / 2.0))
        x = 0.5 * x + 0.5 * x_new
        if abs(residual(x)) <= tol:
            break
    else:
        raise RuntimeError(
            f"alpha(a) iteration did not reach residual {tol} for "
            f"a={a}, n_phi={n_phi}"
        )
    # Newton polish so downstream identities hold to near machine precision.
    for _ in range(4):
        r = residual(x)
        slope = 1.0 + n_phi * a * math.exp(-x / 2.0)
        x -= r / slope
    return math.sqrt(x)


def alpha_of_a_lambertw(a: float, n_phi: float) -> float:
    """Closed form of the same root through the Lambert W function.

    With c = n_phi (1 + a^2):  x = c + 2 W(a n_phi e^(-c/2)).
    Kept as an independent cross-check of the iterative solver.
    """
    if a == 0.0:
        return math.sqrt(n_phi)
    c = n_phi * (1.0 + a**2)
    u = lambertw(a * n_phi * math.exp(-c / 2.0)).real
    return math.sqrt(c + 2.0 * u)


# ---------------------------------------------------------------------------
# resource accounting and construction


def mean_photons_through_phase(spec: StateSpec) -> float:
    """Mean photon number crossing the phase shift per probe state."""
    if isinstance(spec, Coherent):
        return spec.alpha**2
    if isinstance(spec, Cat):
        return n_c(spec.alpha) ** 2 * spec.alpha**2
    if isinstance(spec, ECS):
        return n_e(spec.alpha) ** 2 * spec.alpha**2
    if isinstance(spec, (NO, NOON)):
        return spec.n / 2.0
    if isinstance(spec, UCS):
        return spec.n_phi
    raise TypeError(f"unknown state spec {spec!r}")


def default_spec_cutoff(spec: StateSpec) -> int:
    if isinstance(spec, (NO, NOON)):
        return spec.n
    if isinstance(spec, (Coherent, Cat, ECS)):
        return default_cutoff(spec.alpha**2)
    if isinstance(spec, UCS):
        return default_cutoff(solve_alpha_of_a(spec.a, spec.n_phi) ** 2)
    raise TypeError(f"unknown state spec {spec!r}")


def modes_of(spec: StateSpec) -> int:
    return 2 if isinstance(spec, (NOON, ECS)) else 1


def build_state(spec: StateSpec, cutoff: int | None = None) -> FockVector:
    """Normalized probe state; mode 1 carries the phase for two-mode specs."""
    if cutoff is None:
        cutoff = default_spec_cutoff(spec)

    if isinstance(spec, Coherent):
        return coherent_vector(spec.alpha, cutoff)

    if isinstance(spec, Cat):
        c = coherent_vector(spec.alpha, cutoff)
        vac = number_state(0, cutoff)
        amps = n_c(spec.alpha) * (c.amplitudes + vac.amplitudes)
        return FockVector(amps, cutoff, 1)

    if isinstance(spec, UCS):
        alpha = solve_alpha_of_a(spec.a, spec.n_phi)
        c = coherent_vector(alpha, cutoff)
        vac = number_state(0, cutoff)
        amps = n_u(spec.a, alpha) * (c.amplitudes + spec.a * vac.amplitudes)
        return FockVector(amps, cutoff, 1)

    if isinstance(spec, NO):
        hi = number_state(spec.n, cutoff)
        vac = number_state(0, cutoff)
        amps = (hi.amplitudes + vac.amplitudes) / math.sqrt(2.0)
        return FockVector(amps, cutoff, 1)

    if isinstance(spec, NOON):
        hi = number_state(spec.n, cutoff)
        vac = number_state(0, cutoff)
        amps = (
            tensor(hi, vac).amplitudes + tensor(vac, hi).amplitudes
        ) / math.sqrt(2.0)
        return FockVector(amps, cutoff, 2)

    if isinstance(spec, ECS):
        c = coherent_vector(spec.alpha, cutoff)
        vac = number_state(0, cutoff)
        amps = n_e(spec.alpha) * (
            tensor(c, vac).amplitudes + tensor(vac, c).amplitudes
        )
        return FockVector(amps, cutoff, 2)

    raise TypeError(f"unknown state spec {spec!r}")


# ---------------------------------------------------------------------------
# text form used by the command line


_KINDS = {
    "coh": (Coherent, ("alpha",)),
    "cat": (Cat, ("alpha",)),
    "ucs": (UCS, ("a", "nphi")),
    "no": (NO, ("N",)),
    "noon": (NOON, ("N",)),
    "ecs": (ECS, ("alpha",)),
}


def parse_state_spec(text: str) -> StateSpec:
    """Parse the canonical text form, e.g. ``ucs:a=0.7,nphi=4.45``."""
    head, sep, rest = text.strip().partition(":")
    kind = head.strip().lower()
    if kind not in _KINDS:
        raise ValueError(f"unknown state kind {head!r} in {text!r}")
    cls, keys = _KINDS[kind]
    if not sep or not rest.strip():
        raise ValueError(f"missing parameters in state spec {text!r}")
    values = {}
    for item in rest.split(","):
        key, eq, val = item.partition("=")
        key = key.strip()
        if not eq or key not in keys:
            raise ValueError(f"bad parameter {item!r} in state spec {text!r}")
        values[key] = val.strip()
    if set(values) != set(keys):
        raise ValueError(
            f"state spec {text!r} needs parameters {','.join(keys)}"
        )
    try:
        if cls in (NO, NOON):
            return cls(int(values["N"]))
        if cls is UCS:
            return cls(float(values["a"]), float(values["nphi"]))
        return cls(float(values["alpha"]))
    except ValueError as exc:
        raise ValueError(f"invalid state spec {text!r}: {exc}") from exc


def format_state_spec(spec: StateSpec) -> str:
    if isinstance(spec, Coherent):
        return f"coh:alpha={spec.alpha:.12g}"
    if isinstance(spec, Cat):
        return f"cat:alpha={spec.alpha:.12g}"
    if isinstance(spec, UCS):
        return f"ucs:a={spec.a:.12g},nphi={spec.n_phi:.12g}"
    if isinstance(spec, NO):
        return f"no:N={spec.n}"
    if isinstance(spec, NOON):
        return f"noon:N={spec.n}"
    if isinstance(spec, ECS):
        return f"ecs:alpha={spec.alpha:.12g}"
    raise TypeError(f"unknown state spec {spec!r}")
