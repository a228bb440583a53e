"""Command-line front end: angle sweeps, sphere maps, tomography runs.

Subcommands
-----------
sweep    DOP and Stokes output versus tuning angle, as CSV.
map      Channel matrix plus mapped Poincare-sphere surface points, as JSON.
tomo     Full simulated tomography pipeline for one scheme angle, as JSON.
compare  Engine DOP against the scheme-2 closed form on an angle grid, as CSV.

Angles are degrees everywhere.  A scheme is selected either by name
(scheme1, scheme2, scheme3, lyot, single_crystal, isotropic_triple) or
by the path of a JSON element-list file.  All commands are deterministic
for fixed flags and seed; errors are reported as JSON on stderr with a
nonzero exit code.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .channels import (
    SCHEME_NAMES,
    build_scheme,
    extract_channel,
    analytic_scheme2_dop,
    mutually_unbiased_triad,
)
from .measurement import sample_counts
from .polarization import JONES_STATES, dop, jones_from_stokes, stokes_from_density
from .temporal import SchemeConfig, run_scheme
from .tomography import ConvergenceError, process_fidelity, qpt, qst_mle

QPT_INPUT_LABELS = ("h", "v", "p", "r")


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _parse_theta_range(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError(f"theta range must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise CliError(f"theta range must be numeric, got {text!r}") from None
    if step <= 0:
        raise CliError("theta range step must be positive")
    if start > stop:
        raise CliError("theta range start must not exceed stop")
    thetas = []
    k = 0
    while True:
        value = start + k * step
        if value > stop + 1e-9:
            break
        thetas.append(value)
        k += 1
    return thetas


def _load_scheme(name: str, theta_deg, gamma: float) -> SchemeConfig:
    """Scheme by registered name, or by path of a SchemeConfig JSON file."""
    if name in SCHEME_NAMES:
        return build_scheme(name, theta_deg, coherence=gamma)
    if name.endswith(".json") or os.path.exists(name):
        with open(name, "r", encoding="utf-8") as fh:
            config = SchemeConfig.from_json(json.load(fh))
        if gamma > 0.0:
            config = SchemeConfig(config.elements, coherence=gamma)
        return config
    raise CliError(f"unknown scheme {name!r}: not a scheme name or a config file")


def _parse_inputs(tokens) -> list[tuple[str, np.ndarray]]:
    """Input tokens: basis labels, 'triad:<s1>' triples, or 's1,s2,s3'."""
    out = []
    for token in tokens:
        if token in JONES_STATES:
            out.append((token, JONES_STATES[token]))
        elif token.startswith("triad:"):
            s1 = float(token.split(":", 1)[1])
            for i, svec in enumerate(mutually_unbiased_triad(s1)):
                out.append((f"triad{i}", jones_from_stokes(svec)))
        elif "," in token:
            svec = np.array([float(x) for x in token.split(",")], dtype=float)
            if svec.shape != (3,):
                raise CliError(f"Stokes input needs three components, got {token!r}")
            out.append((token, jones_from_stokes(svec)))
        else:
            raise CliError(f"cannot parse input {token!r}")
    return out


def fibonacci_sphere(n: int) -> np.ndarray:
    """n deterministic, nearly uniform points on the unit sphere."""
    golden = np.pi * (3.0 - np.sqrt(5.0))
    k = np.arange(n)
    z = 1.0 - 2.0 * (k + 0.5) / n
    radius = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    azimuth = golden * k
    return np.column_stack([radius * np.cos(azimuth), radius * np.sin(azimuth), z])


def cmd_sweep(args) -> str:
    if args.scheme not in SCHEME_NAMES:
        raise CliError("sweep needs a named scheme (a config file has no angle knob)")
    thetas = _parse_theta_range(args.theta_range)
    inputs = _parse_inputs(args.inputs)
    lines = ["theta_deg,input,s1,s2,s3,dop"]
    for theta in thetas:
        config = build_scheme(args.scheme, theta, coherence=args.gamma)
        for name, jones in inputs:
            rho = run_scheme(config, jones)
            s = stokes_from_density(rho)
            lines.append(
                f"{_fmt(theta)},{name},{_fmt(s[0])},{_fmt(s[1])},{_fmt(s[2])},{_fmt(dop(rho))}"
            )
    return "\n".join(lines) + "\n"


def cmd_map(args) -> str:
    if args.samples < 3:
        raise CliError("need at least 3 surface samples")
    config = _load_scheme(args.scheme, args.theta, args.gamma)
    channel = extract_channel(config)
    points = fibonacci_sphere(args.samples) @ channel.m.T + channel.b
    report = {
        "scheme": args.scheme,
        "theta_deg": args.theta,
        "n_samples": args.samples,
        "channel": channel.to_json(),
        "points": [[float(x) for x in row] for row in points],
    }
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def cmd_tomo(args) -> str:
    if args.shots < 1:
        raise CliError("shots must be >= 1")
    config = _load_scheme(args.scheme, args.theta, args.gamma)
    true_outputs = {lbl: run_scheme(config, JONES_STATES[lbl]) for lbl in QPT_INPUT_LABELS}
    chi_theory = qpt(*(true_outputs[lbl] for lbl in QPT_INPUT_LABELS))

    reconstructed = {}
    for i, lbl in enumerate(QPT_INPUT_LABELS):
        record = sample_counts(true_outputs[lbl], args.shots, args.seed + i, exact=args.exact)
        reconstructed[lbl] = qst_mle(record)
    chi_hat = qpt(*(reconstructed[lbl] for lbl in QPT_INPUT_LABELS))

    report = {
        "scheme": args.scheme,
        "theta_deg": args.theta,
        "shots": args.shots,
        "seed": args.seed,
        "exact": bool(args.exact),
        "process_fidelity": float(process_fidelity(chi_hat, chi_theory)),
        "dop": {lbl: float(dop(reconstructed[lbl])) for lbl in QPT_INPUT_LABELS},
        "chi": chi_hat.to_json(),
        "chi_theory": chi_theory.to_json(),
    }
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def cmd_compare(args) -> str:
    thetas = _parse_theta_range(args.theta_range)
    probes = [
        (0.0, JONES_STATES["p"]),
        (1.0 / 3.0, jones_from_stokes([1.0 / np.sqrt(3.0), np.sqrt(2.0 / 3.0), 0.0])),
        (1.0, JONES_STATES["h"]),
    ]
    lines = ["theta_deg,s1_sq,dop_engine,dop_analytic,abs_diff"]
    for theta in thetas:
        config = build_scheme("scheme2", theta)
        for s1_sq, jones in probes:
            d_engine = dop(run_scheme(config, jones))
            d_analytic = analytic_scheme2_dop(theta, np.sqrt(s1_sq))
            lines.append(
                f"{_fmt(theta)},{_fmt(s1_sq)},{_fmt(d_engine)},{_fmt(d_analytic)},"
                f"{_fmt(abs(d_engine - d_analytic))}"
            )
    return "\n".join(lines) + "\n"


def build_parser() -> _Parser:
    parser = _Parser(prog="depolsim", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="DOP versus tuning angle, CSV")
    sweep.add_argument("--scheme", required=True)
    sweep.add_argument("--theta-range", required=True, metavar="START:STOP:STEP")
    sweep.add_argument("--inputs", nargs="+", default=["h", "p", "r"])
    sweep.add_argument("--gamma", type=float, default=0.0)
    sweep.add_argument("--out")
    sweep.set_defaults(func=cmd_sweep)

    pmap = sub.add_parser("map", help="channel map and mapped sphere points, JSON")
    pmap.add_argument("--scheme", required=True)
    pmap.add_argument("--theta", type=float)
    pmap.add_argument("--samples", type=int, default=200)
    pmap.add_argument("--gamma", type=float, default=0.0)
    pmap.add_argument("--out")
    pmap.set_defaults(func=cmd_map)

    tomo = sub.add_parser("tomo", help="simulated tomography pipeline, JSON")
    tomo.add_argument("--scheme", required=True)
    tomo.add_argument("--theta", type=float)
    tomo.add_argument("--shots", type=int, default=100_000)
    tomo.add_argument("--exact", action="store_true")
    tomo.add_argument("--seed", type=int, default=0)
    tomo.add_argument("--gamma", type=float, default=0.0)
    tomo.add_argument("--out")
    tomo.set_defaults(func=cmd_tomo)

    comp = sub.add_parser("compare", help="engine DOP versus scheme-2 closed form, CSV")
    comp.add_argument("--theta-range", required=True, metavar="START:STOP:STEP")
    comp.add_argument("--out")
    comp.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text = args.func(args)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (CliError, ValueError, OSError, ConvergenceError) as exc:
        sys.stderr.write(json.dumps({"error": str(exc)}) + "\n")
        return 2
    return 0
