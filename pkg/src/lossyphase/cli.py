"""Command-line front end emitting deterministic CSV sweeps.

Subcommands
-----------
curve     CRB sweep for explicit probe families
fig2      preset comparison at alpha = 3: cat, ECS, NOON, NO, CS, SNL
fig3      preset with size/weight optimization at alpha_bal = 3
fig4      counting-measurement preset at alpha_bal = 4, beta = 4 alpha_bal
optimize  joint (size, weight) optimum per transmissivity
measure   seeded Bayesian counting trials

Every file starts with ``#schema=1`` and ``# key=value`` lines recording
the resolved configuration; data rows are sorted and printed with 12
significant digits, so identical configurations produce identical bytes.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .fock import TruncationError
from .measurement import (
    MeasurementConfig,
    bayesian_simulate,
    optimize_measurement,
    optimize_ucs_measurement,
)
from .precision import (
    PrecisionCurve,
    PrecisionPoint,
    budget_repetitions,
    chop_optimize,
    crb_curve,
    noon_chop_curve,
    noon_chop_n_max,
    n_phi_ceiling,
    snl_curve,
    ucs_optimal_curve,
)
from .states import (
    Cat,
    Coherent,
    ECS,
    NO,
    NOON,
    UCS,
    format_state_spec,
    mean_photons_through_phase,
    n_c,
    parse_state_spec,
)

SCHEMA_LINE = "#schema=1"


class PointFailure(RuntimeError):
    def __init__(self, label, eta, cause):
        super().__init__(f"point (spec={label}, eta={eta:g}) failed: {cause}")
        self.label = label
        self.eta = eta


def _fmt(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _parse_eta(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise ValueError(f"--eta expects MIN:MAX:COUNT, got {text!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1 or hi < lo:
        raise ValueError(f"bad eta grid {text!r}")
    if count == 1:
        return np.array([lo])
    return np.linspace(lo, hi, count)


def _split_states(text: str) -> list:
    # Items are comma separated, but 'ucs:a=..,nphi=..' itself contains a
    # comma; fragments lacking ':' belong to the previous item.
    items: list[str] = []
    for frag in text.split(","):
        if ":" in frag or not items:
            items.append(frag)
        else:
            items[-1] += "," + frag
    return [parse_state_spec(item) for item in items if item.strip()]


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, eq, val = line.partition("=")
            if not eq:
                raise ValueError(f"config line {raw!r} is not key=value")
            values[key.strip()] = val.strip()
    return values


def _resolve(args, key, default):
    """Flag > config file > default."""
    flag_val = getattr(args, key, None)
    if flag_val is not None:
        return flag_val
    if args.config_values and key in args.config_values:
        return args.config_values[key]
    return default


def _write_csv(path, command, config_pairs, header, rows, notes=()):
    lines = [SCHEMA_LINE, f"# command={command}"]
    for key, value in config_pairs:
        lines.append(f"# {key}={value}")
    for note in notes:
        lines.append(f"# {note}")
    lines.append(header)
    lines.extend(rows)
    data = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(data)


def _curve_rows(curves) -> list:
    rows = []
    for curve in curves:
        for p in curve.points:
            rows.append(
                (
                    curve.label,
                    p.eta,
                    f"{_fmt(p.eta)},{curve.label},{_fmt(p.delta_phi)},"
                    f"{_fmt(p.m)},{_fmt(p.n_phi)},{_fmt(p.a_opt)}",
                )
            )
    rows.sort(key=lambda r: (r[0], r[1]))
    return [r[2] for r in rows]


def _guarded_curve(build, label):
    try:
        return build()
    except TruncationError as exc:
        raise PointFailure(label, float("nan"), exc) from exc


# ---------------------------------------------------------------------------
# subcommands


def _cmd_curve(args) -> None:
    specs = _split_states(_resolve(args, "states", None) or "")
    if not specs:
        raise ValueError("curve needs --states")
    etas = _parse_eta(_resolve(args, "eta", "0.01:1:101"))
    r_phi = float(_resolve(args, "rphi", 400.0))
    cutoff = _resolve(args, "cutoff", None)
    cutoff = int(cutoff) if cutoff is not None else None
    curves = []
    for spec in specs:
        label = format_state_spec(spec)
        try:
            curves.append(crb_curve(spec, etas, r_phi, cutoff=cutoff, label=label))
        except TruncationError as exc:
            raise PointFailure(label, float("nan"), exc) from exc
    pairs = [
        ("states", ";".join(format_state_spec(s) for s in specs)),
        ("eta", _resolve(args, "eta", "0.01:1:101")),
        ("rphi", _fmt(r_phi)),
    ]
    _write_csv(
        args.out or "curve.csv",
        "curve",
        pairs,
        "eta,label,delta_phi,m,n_phi,a_opt",
        _curve_rows(curves),
    )


def _fig2_curves(etas, r_phi, alpha):
    n_noon = round(2.0 * n_c(alpha) ** 2 * alpha**2)
    curves = [
        crb_curve(Cat(alpha), etas, r_phi, label="cat"),
        crb_curve(ECS(alpha), etas, r_phi, label="ECS"),
        crb_curve(NOON(n_noon), etas, r_phi, label="NOON"),
        crb_curve(NO(n_noon), etas, r_phi, label="NO"),
        crb_curve(Coherent(alpha), etas, r_phi, label="CS"),
        snl_curve(etas, r_phi),
    ]
    return curves, n_noon


def _cmd_fig2(args) -> None:
    etas = _parse_eta(_resolve(args, "eta", "0.01:1:101"))
    r_phi = float(_resolve(args, "rphi", 400.0))
    alpha = 3.0
    curves, n_noon = _fig2_curves(etas, r_phi, alpha)
    pairs = [
        ("alpha", _fmt(alpha)),
        ("eta", _resolve(args, "eta", "0.01:1:101")),
        ("rphi", _fmt(r_phi)),
        ("noon_N", str(n_noon)),
    ]
    _write_csv(
        args.out or "fig2.csv",
        "fig2",
        pairs,
        "eta,label,delta_phi,m,n_phi,a_opt",
        _curve_rows(curves),
        notes=["NOON/NO size matched to the cat photon flux (nearest integer N)"],
    )


def _cmd_fig3(args) -> None:
    etas = _parse_eta(_resolve(args, "eta", "0.01:1:101"))
    r_phi = float(_resolve(args, "rphi", 400.0))
    alpha_bal = 3.0
    alpha_max = float(_resolve(args, "alpha_bal_max", 5.0))
    n_phi = n_c(alpha_bal) ** 2 * alpha_bal**2
    n_noon = round(2.0 * n_phi)

    ucs_curve = ucs_optimal_curve(n_phi, etas, r_phi, label="UCS")
    fixed_points = {p.eta: p.a_opt for p in ucs_curve.points}

    cc_points = []
    for eta in etas:
        extra = ((n_phi, fixed_points[float(eta)]),)
        n_opt, a_opt, delta = chop_optimize(
            float(eta), r_phi, alpha_max, extra_candidates=extra
        )
        cc_points.append(
            PrecisionPoint(
                eta=float(eta),
                delta_phi=delta,
                m=budget_repetitions(n_opt, r_phi),
                n_phi=n_opt,
                a_opt=a_opt,
                spec=format_state_spec(UCS(a_opt, n_opt)),
            )
        )
    curves = [
        crb_curve(Cat(alpha_bal), etas, r_phi, label="cat"),
        ucs_curve,
        PrecisionCurve("CC", tuple(cc_points)),
        crb_curve(NOON(n_noon), etas, r_phi, label="NOON"),
        noon_chop_curve(etas, r_phi, n_max=noon_chop_n_max(alpha_max)),
        snl_curve(etas, r_phi),
    ]
    pairs = [
        ("alpha_bal", _fmt(alpha_bal)),
        ("alpha_bal_max", _fmt(alpha_max)),
        ("eta", _resolve(args, "eta", "0.01:1:101")),
        ("rphi", _fmt(r_phi)),
        ("noon_N", str(n_noon)),
        ("noon_N_max", str(noon_chop_n_max(alpha_max))),
    ]
    _write_csv(
        args.out or "fig3.csv",
        "fig3",
        pairs,
        "eta,label,delta_phi,m,n_phi,a_opt",
        _curve_rows(curves),
    )


def _cmd_fig4(args) -> None:
    etas = _parse_eta(_resolve(args, "eta", "0.01:1:101"))
    r_phi = float(_resolve(args, "rphi", 400.0))
    alpha_bal = 4.0
    beta = float(_resolve(args, "beta", 4.0 * alpha_bal))
    n_phi = n_c(alpha_bal) ** 2 * alpha_bal**2
    n_noon = round(2.0 * n_phi)
    m = budget_repetitions(n_phi, r_phi)

    ucsm_points = []
    for eta in etas:
        try:
            a_opt, _phi_opt, _f_c, delta = optimize_ucs_measurement(
                n_phi, float(eta), beta, r_phi
            )
        except TruncationError as exc:
            raise PointFailure("UCSM", float(eta), exc) from exc
        ucsm_points.append(
            PrecisionPoint(
                eta=float(eta),
                delta_phi=delta,
                m=m,
                n_phi=n_phi,
                a_opt=a_opt,
                spec=format_state_spec(UCS(a_opt, n_phi)),
            )
        )
    curves = [
        PrecisionCurve("UCSM", tuple(ucsm_points)),
        ucs_optimal_curve(n_phi, etas, r_phi, label="UCS"),
        crb_curve(NOON(n_noon), etas, r_phi, label="NOON"),
        snl_curve(etas, r_phi),
    ]
    pairs = [
        ("alpha_bal", _fmt(alpha_bal)),
        ("beta", _fmt(beta)),
        ("eta", _resolve(args, "eta", "0.01:1:101")),
        ("rphi", _fmt(r_phi)),
        ("noon_N", str(n_noon)),
    ]
    _write_csv(
        args.out or "fig4.csv",
        "fig4",
        pairs,
        "eta,label,delta_phi,m,n_phi,a_opt",
        _curve_rows(curves),
        notes=[
            "curve ECSM omitted: the entangled-coherent counting scheme is "
            "an external protocol and out of scope here"
        ],
    )


def _cmd_optimize(args) -> None:
    etas = _parse_eta(_resolve(args, "eta", "0.01:1:101"))
    r_phi = float(_resolve(args, "rphi", 400.0))
    alpha_max = float(_resolve(args, "alpha_bal_max", 5.0))
    rows = []
    for eta in etas:
        try:
            n_opt, a_opt, delta = chop_optimize(float(eta), r_phi, alpha_max)
        except TruncationError as exc:
            raise PointFailure("chop", float(eta), exc) from exc
        rows.append(
            f"{_fmt(eta)},{_fmt(a_opt)},{_fmt(n_opt)},{_fmt(delta)}"
        )
    pairs = [
        ("alpha_bal_max", _fmt(alpha_max)),
        ("eta", _resolve(args, "eta", "0.01:1:101")),
        ("rphi", _fmt(r_phi)),
        ("n_phi_ceiling", _fmt(n_phi_ceiling(alpha_max))),
    ]
    _write_csv(
        args.out or "optimize.csv",
        "optimize",
        pairs,
        "eta,a_opt,n_phi_opt,delta_phi",
        rows,
    )


def _cmd_measure(args) -> None:
    seed = _resolve(args, "seed", None)
    if seed is None:
        raise ValueError("measure needs --seed")
    seed = int(seed)
    etas = _parse_eta(_resolve(args, "eta", "0.8"))
    if len(etas) != 1:
        raise ValueError("measure runs at a single transmissivity")
    eta = float(etas[0])
    spec_text = _resolve(args, "states", None)
    alpha_bal = 4.0
    n_phi = n_c(alpha_bal) ** 2 * alpha_bal**2
    spec = parse_state_spec(spec_text) if spec_text else UCS(0.5, n_phi)
    beta = float(_resolve(args, "beta", 4.0 * alpha_bal))
    trials = int(_resolve(args, "trials", 200))
    counts = int(_resolve(args, "counts", 10000))
    cutoff = _resolve(args, "cutoff", None)
    cutoff = int(cutoff) if cutoff is not None else None

    phi_opt, _ = optimize_measurement(spec, eta, beta)
    phi_true_val = _resolve(args, "phi_true", None)
    phi_true = float(phi_true_val) if phi_true_val is not None else phi_opt

    rows = []
    for trial in range(trials):
        config = MeasurementConfig(
            spec=spec,
            eta=eta,
            beta=beta,
            phi0=phi_opt,
            m=counts,
            seed=seed + 1000003 * trial,
            cutoff=cutoff,
        )
        try:
            summary = bayesian_simulate(config, phi_true)
        except TruncationError as exc:
            raise PointFailure(format_state_spec(spec), eta, exc) from exc
        rows.append(
            f"{trial},{_fmt(phi_true)},{_fmt(summary.mean_phi)},"
            f"{_fmt(summary.std_phi)},{counts}"
        )
    pairs = [
        ("states", format_state_spec(spec)),
        ("eta", _fmt(eta)),
        ("beta", _fmt(beta)),
        ("seed", str(seed)),
        ("trials", str(trials)),
        ("counts", str(counts)),
        ("phi0", _fmt(phi_opt)),
        ("phi_true", _fmt(phi_true)),
    ]
    _write_csv(
        args.out or "measure.csv",
        "measure",
        pairs,
        "trial,phi_true,mean_phi,std_phi,m",
        rows,
    )


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lossyphase",
        description="Precision bounds and counting-measurement sweeps "
        "for lossy optical phase estimation (CSV output).",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "curve": _cmd_curve,
        "fig2": _cmd_fig2,
        "fig3": _cmd_fig3,
        "fig4": _cmd_fig4,
        "optimize": _cmd_optimize,
        "measure": _cmd_measure,
    }
    for name, func in commands.items():
        p = sub.add_parser(name)
        p.set_defaults(func=func)
        p.add_argument("--states", help="comma-separated state specs, e.g. "
                       "cat:alpha=3,ecs:alpha=3,ucs:a=0.7,nphi=4.45")
        p.add_argument("--eta", help="transmissivity grid MIN:MAX:COUNT")
        p.add_argument("--rphi", type=float, help="photon budget through the "
                       "phase shift (default 400)")
        p.add_argument("--beta", type=float, help="displacement amplitude")
        p.add_argument("--alpha-bal-max", dest="alpha_bal_max", type=float,
                       help="size ceiling for chopped probes (default 5)")
        p.add_argument("--seed", type=int, help="RNG seed (measure)")
        p.add_argument("--trials", type=int, help="number of seeded trials")
        p.add_argument("--counts", type=int, help="counted probes per trial")
        p.add_argument("--phi-true", dest="phi_true", type=float,
                       help="true phase for measure (default: optimal)")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--cutoff", type=int, help="override the basis cutoff")
        p.add_argument("--config", help="key=value config file; flags win")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    args.config_values = _read_config_file(args.config) if args.config else {}
    try:
        args.func(args)
    except PointFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TruncationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
