"""Command-line interface: sample settings, simulate acquisition, estimate.

Exit codes: 0 success, 1 argument error, 2 I/O error, 3 corrupt input,
4 semantic mismatch between task and data.

Every command is deterministic under a fixed --seed. Derived random streams
are fixed by convention so that independent commands can reconstruct shared
objects: settings use substreams of (seed, 0), the simulated state uses
(seed, 1), shot sampling uses (seed, 2), and random noise strengths use
(seed, 3). In particular ``estimate --task xeb --state random-mps:2 --seed S``
rebuilds the state that ``simulate --state random-mps:2 --seed S`` measured.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import io
from .core import (
    ComputationalBasisSetting,
    MeasurementData,
    MeasurementGroup,
    PauliObservable,
    Subsystem,
    reduce_group_to_subsystem,
    reduce_observable_to_subsystem,
)
from .errors import (
    CorruptFile,
    InvalidSize,
    RandomizedMeasurementError,
    SizeMismatch,
    UnsupportedSetting,
)
from .estimators import (
    cross_platform_fidelity,
    expect_shadow,
    overlap_direct,
    purity_direct,
    self_xeb,
    trace_moments,
    xeb,
)
from .sampling import RngSeed, sample_settings
from .shadows import calibration_vector, dense_shadows, factorized_shadows
from .sim import NoiseModel, ghz_state, product_zero, random_mps, simulate_group
from .stats import jackknife_moments

_STATE_STREAM = 1
_SHOTS_STREAM = 2
_NOISE_STREAM = 3


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        raise _ArgumentError(message)


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("SHADOWMEAS_THREADS", "1")))
    except ValueError:
        return 1


def _parse_state(spec: str, n_qubits: int, seed: int):
    name, _, arg = spec.partition(":")
    if name == "ghz":
        n = int(arg) if arg else n_qubits
        if n != n_qubits:
            raise SizeMismatch(f"state spec asks for {n} qubits, data has {n_qubits}")
        return ghz_state(n)
    if name == "zero":
        n = int(arg) if arg else n_qubits
        if n != n_qubits:
            raise SizeMismatch(f"state spec asks for {n} qubits, data has {n_qubits}")
        return product_zero(n)
    if name == "random-mps":
        if not arg:
            raise _ArgumentError("random-mps needs a bond dimension, e.g. random-mps:2")
        rng = RngSeed(seed, _STATE_STREAM).generator()
        return random_mps(n_qubits, int(arg), rng)
    raise _ArgumentError(f"unknown state spec {spec!r}; use ghz[:N], zero[:N], random-mps:CHI")


def _parse_noise(spec: str) -> tuple:
    parts = spec.split(",")
    if len(parts) == 1:
        return float(parts[0]), 0.0
    if len(parts) == 2:
        return float(parts[0]), float(parts[1])
    raise _ArgumentError(f"noise spec {spec!r} must be MEAN or MEAN,SD")


def _parse_ints(spec: str) -> list:
    if ":" in spec:
        lo, hi = spec.split(":")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in spec.split(",")]


def _print_rows(rows, show_error: bool) -> None:
    name_width = max([len(r["name"]) for r in rows] + [4])
    header = f"{'name':<{name_width}}  {'value':>12}"
    if show_error:
        header += f"  {'2sigma':>12}"
    header += f"  {'NU':>6}  {'NM':>6}  {'NB':>4}"
    print(header)
    for r in rows:
        line = f"{r['name']:<{name_width}}  {r['value']:>12.6f}"
        if show_error:
            err = r.get("two_sigma")
            line += f"  {err:>12.6f}" if err is not None else f"  {'-':>12}"
        line += f"  {r.get('n_u', 0):>6}  {r.get('n_m', 0):>6}  {r.get('n_b', 0):>4}"
        print(line)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_sample(args) -> int:
    if args.n < 1 or args.nu < 1:
        raise _ArgumentError("--n and --nu must be >= 1")
    if args.depth < 0:
        raise _ArgumentError("--depth must be >= 0")
    settings = sample_settings(
        args.n, args.nu, args.ensemble, RngSeed(args.seed), depth=args.depth
    )
    io.save_settings(args.out, settings)
    return 0


def _cmd_simulate(args) -> int:
    settings = io.load_settings(args.settings)
    n = settings[0].n_qubits
    state = _parse_state(args.state, n, args.seed)
    noise = None
    if args.noise is not None:
        mean, sd = _parse_noise(args.noise)
        noise = NoiseModel.random(n, mean, sd, RngSeed(args.seed, _NOISE_STREAM).generator())
    group = simulate_group(
        state,
        settings,
        args.nm,
        noise,
        seed=RngSeed(args.seed, _SHOTS_STREAM),
        n_workers=args.threads,
    )
    io.save_group(args.out, group)
    return 0


def _load_reduced(path, sub):
    group = io.load_group(path)
    if sub is not None:
        group = reduce_group_to_subsystem(group, sub)
    return group


def _pooled_computational_data(group: MeasurementGroup) -> MeasurementData:
    from .estimators import _is_computational

    for d in group:
        if not _is_computational(d.setting):
            raise UnsupportedSetting("xeb needs computational-basis measurement data")
    outcomes = np.vstack([d.outcomes for d in group])
    return MeasurementData(ComputationalBasisSetting(group.n_qubits), outcomes)


def _cmd_estimate(args) -> int:
    group = io.load_group(args.group)
    full_n = group.n_qubits
    sub = Subsystem(tuple(_parse_ints(args.sites))) if args.sites else None

    calibration = None
    if args.calibration:
        cal_group = io.load_group(args.calibration)
        calibration = calibration_vector(product_zero(cal_group.n_qubits), cal_group)

    if sub is not None:
        group = reduce_group_to_subsystem(group, sub)
        if calibration is not None:
            calibration = calibration.reduce(sub)

    n_u, n_m = group.n_settings, group.n_shots
    rows = []
    show_error = args.sem or args.cov

    if args.task == "expect":
        if not args.pauli:
            raise _ArgumentError("--task expect needs at least one --pauli string")
        shadows = factorized_shadows(group, calibration)
        for letters in args.pauli:
            obs = PauliObservable.from_string(letters)
            if obs.n_qubits != full_n:
                raise SizeMismatch(
                    f"--pauli {letters!r} has {obs.n_qubits} letters, data has {full_n} qubits"
                )
            if sub is not None:
                obs = reduce_observable_to_subsystem(obs, sub)
            est = expect_shadow(obs, shadows, compute_sem=args.sem)
            rows.append(
                {
                    "name": letters,
                    "value": est.value,
                    "two_sigma": 2 * est.sem if est.sem is not None else None,
                    "n_u": n_u,
                    "n_m": n_m,
                    "n_b": 0,
                }
            )
    elif args.task == "moments":
        ks = _parse_ints(args.k) if args.k else [2]
        batches = dense_shadows(group, n_batches=args.batches, calibration=calibration)
        if args.sem or args.cov:
            jk = jackknife_moments(batches, ks, compute_cov=args.cov)
            results, cov = jk if args.cov else (jk, None)
            for k, res in zip(ks, results):
                rows.append(
                    {
                        "name": f"p{k}",
                        "value": res.point_estimate,
                        "two_sigma": 2 * res.std,
                        "n_u": n_u,
                        "n_m": n_m,
                        "n_b": batches.n_batches,
                    }
                )
        else:
            cov = None
            for k, est in zip(ks, trace_moments(batches, ks)):
                rows.append(
                    {
                        "name": f"p{k}",
                        "value": est.value,
                        "two_sigma": None,
                        "n_u": n_u,
                        "n_m": n_m,
                        "n_b": batches.n_batches,
                    }
                )
        if args.cov and cov is not None:
            print("jackknife covariance matrix:")
            for r in cov:
                print("  " + "  ".join(f"{x:>12.4e}" for x in r))
    elif args.task == "purity":
        if calibration is not None:
            raise UnsupportedSetting(
                "direct purity has no robust variant; use --task moments --k 2"
            )
        est = purity_direct(group, compute_sem=args.sem)
        rows.append(
            {
                "name": "purity",
                "value": est.value,
                "two_sigma": 2 * est.sem if est.sem is not None else None,
                "n_u": n_u,
                "n_m": n_m,
                "n_b": 0,
            }
        )
    elif args.task in ("overlap", "fidelity"):
        if not args.group2:
            raise _ArgumentError(f"--task {args.task} needs --group2")
        group2 = _load_reduced(args.group2, sub)
        fn = overlap_direct if args.task == "overlap" else cross_platform_fidelity
        est = fn(group, group2, compute_sem=args.sem)
        rows.append(
            {
                "name": args.task,
                "value": est.value,
                "two_sigma": 2 * est.sem if est.sem is not None else None,
                "n_u": n_u,
                "n_m": n_m,
                "n_b": 0,
            }
        )
    else:  # xeb
        if not args.state:
            raise _ArgumentError("--task xeb needs --state for the ideal amplitudes")
        state = _parse_state(args.state, group.n_qubits, args.seed)
        data = _pooled_computational_data(group)
        value = xeb(state, data)
        norm = self_xeb(state)
        rows.append(
            {"name": "xeb", "value": value, "two_sigma": None, "n_u": n_u, "n_m": n_m, "n_b": 0}
        )
        rows.append(
            {"name": "self_xeb", "value": norm, "two_sigma": None, "n_u": n_u, "n_m": n_m, "n_b": 0}
        )
        if norm != 0:
            rows.append(
                {
                    "name": "xeb_corrected",
                    "value": value / norm,
                    "two_sigma": None,
                    "n_u": n_u,
                    "n_m": n_m,
                    "n_b": 0,
                }
            )

    _print_rows(rows, show_error)
    if args.out:
        io.save_results(args.out, rows)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="shadowmeas", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample randomized measurement settings")
    p.add_argument("--n", type=int, required=True, help="number of qubits")
    p.add_argument("--nu", type=int, required=True, help="number of settings")
    p.add_argument(
        "--ensemble",
        choices=("haar", "pauli", "computational", "shallow"),
        default="haar",
    )
    p.add_argument("--depth", type=int, default=0, help="circuit depth (shallow only)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output settings manifest (.json)")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("simulate", help="simulate randomized measurements on a state")
    p.add_argument("--state", required=True, help="ghz[:N] | zero[:N] | random-mps:CHI")
    p.add_argument("--settings", required=True, help="settings manifest to measure in")
    p.add_argument("--nm", type=int, required=True, help="shots per setting")
    p.add_argument("--noise", default=None, help="depolarizing strengths: MEAN or MEAN,SD")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", required=True, help="output group manifest (.json)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="estimate properties from a measurement group")
    p.add_argument("--group", required=True, help="measurement group manifest")
    p.add_argument("--group2", default=None, help="second group (overlap/fidelity)")
    p.add_argument(
        "--task",
        required=True,
        choices=("expect", "moments", "purity", "overlap", "fidelity", "xeb"),
    )
    p.add_argument("--pauli", action="append", default=[], help="Pauli string (repeatable)")
    p.add_argument("--k", default=None, help="moment orders, e.g. 2:5 or 2,3,5")
    p.add_argument("--batches", type=int, default=10, help="batch count for moments")
    p.add_argument("--sites", default=None, help="restrict to subsystem, e.g. 1,4")
    p.add_argument("--calibration", default=None, help="|0...0> group for robust shadows")
    p.add_argument("--state", default=None, help="ideal state for xeb (see simulate)")
    p.add_argument("--seed", type=int, default=0, help="seed for random-mps state specs")
    p.add_argument("--sem", action="store_true", help="report 2-sigma standard errors")
    p.add_argument("--cov", action="store_true", help="report jackknife covariance")
    p.add_argument("--out", default=None, help="optional machine-readable results file")
    p.set_defaults(func=_cmd_estimate)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _ArgumentError as exc:
        print(f"shadowmeas: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, InvalidSize) as exc:
        print(f"shadowmeas: error: {exc}", file=sys.stderr)
        return 1
    except CorruptFile as exc:
        print(f"shadowmeas: corrupt input: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"shadowmeas: i/o error: {exc}", file=sys.stderr)
        return 2
    except RandomizedMeasurementError as exc:
        print(f"shadowmeas: {exc}", file=sys.stderr)
        return 4


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
