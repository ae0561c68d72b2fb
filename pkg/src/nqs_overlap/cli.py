"""Command-line interface for the benchmark experiments and planners.

Subcommands: ``variance``, ``bounds``, ``scaling``, ``size``, ``plan``,
``exact``.  Every flag can also be given in a ``key=value`` config file
(``--config``); explicit flags win.  Exit codes: 0 success, 1 validation
error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from . import bench
from . import bounds as bd
from .estimator import estimate_normalized, estimate_two_sided
from .configs import RandomStream
from .sampling import sample_exact_autoregressive, sample_metropolis_chains


# argparse exits with status 2 on bad usage; exit code 2 is reserved for
# I/O failures here, so usage problems are remapped to 1 in main()


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part]


def _add_common(parser):
    parser.add_argument("--ansatz", choices=bench.ANSATZ_KINDS, help="state family")
    parser.add_argument("--length", type=int, help="number of sites L")
    parser.add_argument("--samples", type=int, help="total samples per estimate")
    parser.add_argument("--reps", type=int, help="repetitions per pair")
    parser.add_argument("--pairs", type=int, help="number of state pairs")
    parser.add_argument("--delta", type=float, help="failure probability")
    parser.add_argument("--seed", type=int, help="root seed")
    parser.add_argument("--out", help="output file path")
    parser.add_argument("--format", choices=("csv", "json"), help="output format")
    parser.add_argument("--config", help="key=value config file; flags override")


_DEFAULTS = {
    "ansatz": "rbm",
    "length": 12,
    "samples": 16384,
    "reps": 100,
    "pairs": 10,
    "delta": 0.32,
    "seed": 20240901,
    "out": None,
    "format": "json",
}

_CASTS = {
    "length": int,
    "samples": int,
    "reps": int,
    "pairs": int,
    "delta": float,
    "seed": int,
    "n_grid": _int_list,
    "l_grid": _int_list,
    "t": float,
    "epsilon": float,
    "fidelity": float,
}


def _read_config(path: str) -> dict:
    settings = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            settings[key.strip()] = value.strip()
    return settings


def _merge_settings(args, extra_keys=()) -> dict:
    """Defaults < config file < explicit flags."""
    merged = dict(_DEFAULTS)
    for key in extra_keys:
        merged.setdefault(key, None)
    if args.config:
        for key, value in _read_config(args.config).items():
            if key not in merged:
                raise ValueError(f"unknown config key {key!r}")
            merged[key] = _CASTS.get(key, str)(value)
    for key in merged:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


def _build_spec(settings) -> bench.ExperimentSpec:
    return bench.ExperimentSpec(
        ansatz_kind=settings["ansatz"],
        n_sites=settings["length"],
        n_samples=settings["samples"],
        repetitions=settings["reps"],
        n_pairs=settings["pairs"],
        delta=settings["delta"],
        seed=settings["seed"],
    )


def _finish(result: bench.ExperimentResult, settings) -> int:
    for row in result.rows:
        print(" ".join(f"{key}={value}" for key, value in row.items()))
    if result.extras:
        print(" ".join(f"{key}={value}" for key, value in result.extras.items()))
    if settings["out"]:
        bench.emit(result, settings["out"], settings["format"])
        print(f"wrote {settings['format']} to {settings['out']}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nqs-overlap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("variance", "empirical vs analytic estimator variance"),
        ("bounds", "mean errors and coverage vs the analytic bounds"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)

    p = sub.add_parser("scaling", help="error vs sample count at fidelity 0.5")
    _add_common(p)
    p.add_argument("--n-grid", dest="n_grid", type=_int_list, help="comma-separated sample counts")

    p = sub.add_parser("size", help="error vs system size at fidelity 0.5")
    _add_common(p)
    p.add_argument("--l-grid", dest="l_grid", type=_int_list, help="comma-separated system sizes")

    p = sub.add_parser("plan", help="sample budgets and bound report")
    _add_common(p)
    p.add_argument("--epsilon", type=float, help="target overlap radius")
    p.add_argument("--fidelity", type=float, help="fidelity at which to evaluate bounds")

    p = sub.add_parser("exact", help="one pair: oracle vs a single MC estimate")
    _add_common(p)
    p.add_argument("--t", type=float, help="interpolation magnitude")

    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return 0 if err.code in (None, 0) else 1
    try:
        return _dispatch(args)
    except (ValueError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    command = args.command
    if command == "variance":
        settings = _merge_settings(args)
        return _finish(bench.run_variance_experiment(_build_spec(settings)), settings)
    if command == "bounds":
        settings = _merge_settings(args)
        return _finish(bench.run_bound_experiment(_build_spec(settings)), settings)
    if command == "scaling":
        settings = _merge_settings(args, ("n_grid",))
        grid = settings["n_grid"] or [2**k for k in range(8, 17)]
        return _finish(bench.run_scaling_experiment(_build_spec(settings), grid), settings)
    if command == "size":
        settings = _merge_settings(args, ("l_grid",))
        grid = settings["l_grid"] or [8, 10, 12, 14]
        return _finish(bench.run_size_experiment(_build_spec(settings), grid), settings)
    if command == "plan":
        settings = _merge_settings(args, ("epsilon", "fidelity"))
        return _plan(settings)
    if command == "exact":
        settings = _merge_settings(args, ("t",))
        return _exact(settings)
    raise ValueError(f"unknown command {command!r}")


def _plan(settings) -> int:
    rows = []
    if settings["epsilon"] is not None:
        needed = bd.required_samples_normalized(settings["epsilon"], settings["delta"])
        rows.append(
            {
                "target_radius": settings["epsilon"],
                "delta": settings["delta"],
                "required_samples_normalized": needed,
            }
        )
    fidelity = settings["fidelity"]
    if fidelity is not None:
        report = bd.bound_report(fidelity, settings["samples"], settings["delta"])
        rows.append(
            {
                "fidelity": fidelity,
                "n_samples": settings["samples"],
                "delta": settings["delta"],
                "overlap_radius": report.overlap_radius,
                "fidelity_halfwidth_normalized": report.fidelity_halfwidth_normalized,
                "fidelity_halfwidth": report.fidelity_halfwidth,
                "phase_halfwidth": report.phase_halfwidth,
                "magnitude_lo": report.magnitude_interval[0],
                "magnitude_hi": report.magnitude_interval[1],
                "median_halfwidth": report.median_halfwidth,
                "chebyshev_tighter": report.chebyshev_tighter,
            }
        )
    if not rows:
        raise ValueError("plan needs --epsilon and/or --fidelity")
    spec = _build_spec(settings)
    result = bench.ExperimentResult("plan", spec, rows)
    return _finish(result, settings)


def _exact(settings) -> int:
    if settings["t"] is None:
        raise ValueError("exact needs --t (interpolation magnitude)")
    spec = _build_spec(settings)
    pair = bench.generate_state_pair(spec.ansatz_kind, spec.n_sites, settings["t"], spec.seed)
    stream = RandomStream(spec.seed).split(1)[0]
    if spec.normalized_mode:
        batch = sample_exact_autoregressive(pair.phi, spec.n_samples, stream)
        report = estimate_normalized(pair.psi, pair.phi, batch)
    else:
        n_phi, n_psi = bd.split_sample_budget(spec.n_samples)
        phi_stream, psi_stream = stream.split(2)
        batch_phi = sample_metropolis_chains(pair.phi, n_phi, 1, phi_stream)[0]
        batch_psi = sample_metropolis_chains(pair.psi, n_psi, 1, psi_stream)[0]
        report = estimate_two_sided(pair.psi, pair.phi, batch_phi, batch_psi)
    summary = pair.summary
    bounds_at = bd.bound_report(min(summary.fidelity, 1.0), spec.n_samples, spec.delta)
    rows = [
        {
            "magnitude": pair.magnitude,
            "fidelity_exact": summary.fidelity,
            "fidelity_estimate": report.fidelity_estimate,
            "fidelity_error": abs(report.fidelity_estimate - summary.fidelity),
            "overlap_exact": summary.overlap,
            "overlap_estimate": report.overlap_estimate,
            "overlap_error": abs(report.overlap_estimate - summary.overlap),
            "fidelity_halfwidth": bounds_at.fidelity_halfwidth,
            "overlap_radius": bounds_at.overlap_radius,
            "imag_residual": report.imag_residual,
            "overflow_count": report.overflow_count,
        }
    ]
    result = bench.ExperimentResult("exact", spec, rows)
    return _finish(result, settings)


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
