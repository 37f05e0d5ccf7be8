"""Command-line interface: ``photon-locality {sweep,state,density,modes,verify}``.

Exit codes: 0 success, 1 verification failure, 2 sweep finished with error
rows, 64 usage error, 65 data error (degenerate or out-of-range input,
accuracy or truncation failure), 74 I/O error.
"""

import argparse
import datetime
import json
import logging
import math
import sys

import numpy as np

from . import __version__
from .bounds import SweepConfig, parse_range, parse_tau_list, sweep, write_bounds_csv
from .exceptions import (
    AccuracyError,
    DegenerateInputError,
    DomainError,
    ExactSinglePhotonError,
    ParameterError,
    TruncationError,
    UnsupportedMethodError,
)
from .fockspace import (
    FockTruncation,
    basis_state,
    fidelity_single_photon,
    localized_state,
    write_state_json,
)
from .modes import (
    ModeFunction,
    canonicalize,
    compensation_constant,
    extract_modes,
    field_profile,
    orthogonalize,
    write_modes_csv,
    write_profile_csv,
)
from .observables import (
    energy_density_coherent,
    energy_density_single_photon,
    energy_density_state,
    glauber_intensity,
    localization_metric,
    localized_coherent_mode,
    write_intensity_csv,
    write_series_csv,
)
from .spectral import (
    DEFAULT_N_POINTS,
    FrequencyGrid,
    TruncatedGaussianParams,
    spectrum_of,
    write_spectrum_csv,
)
from .verify import CHECKS, FAULTS, run_checks

EXIT_OK, EXIT_VERIFY, EXIT_SWEEP_ERRORS = 0, 1, 2
EXIT_USAGE, EXIT_DATA, EXIT_IO = 64, 65, 74

log = logging.getLogger("photon_locality")

DEFAULTS = {
    "sweep": {"omega_sigma": "0.2:3.0:0.1", "tau_ratio": "3", "alpha": 1.0, "exact": True,
              "n_points": DEFAULT_N_POINTS, "ncut": None, "threads": None, "out": "bounds.csv"},
    "state": {"omega_sigma": 1.0, "tau_ratio": 3.0, "eta_tilde": None, "ncut": None,
              "n_points": DEFAULT_N_POINTS, "method": "closed_form", "out": "state.json",
              "spectrum_out": None},
    "density": {"omega_sigma": 1.0, "tau_ratio": 3.0, "alpha": 1.0, "n_points": DEFAULT_N_POINTS,
                "method": "closed_form", "ncut": None, "t_min": -10.0, "t_max": None,
                "samples": 1200, "out": "density"},
    "modes": {"omega_sigma": 1.0, "tau_ratio": 3.0, "n_points": DEFAULT_N_POINTS,
              "method": "closed_form", "t_min": -10.0, "t_max": None, "samples": 1200,
              "out": "modes"},
    "verify": {"list": False, "check": None, "inject_fault": None},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _finite_float(text):
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return value


def _bool(text):
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def build_parser():
    parser = _Parser(prog="photon-locality", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="plain 'key = value' file; command-line flags win")
    common.add_argument("-v", "--verbose", action="count", help="more log output on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, help=help_text, parents=[common], argument_default=argparse.SUPPRESS)

    p = add("sweep", "fidelity bounds over pulse shapes (CSV)")
    p.add_argument("--omega-sigma", help="range start:stop:step of omega0*sigma")
    p.add_argument("--tau-ratio", help="comma-separated tau/sigma values, 'inf' allowed")
    p.add_argument("--alpha", type=_finite_float, help="coherent-state amplitude for the baseline")
    p.add_argument("--exact", action=argparse.BooleanOptionalAction,
                   help="compute the exact Fock-space lower bound (default on)")
    p.add_argument("--n-points", type=int, help="frequency grid size (odd)")
    p.add_argument("--ncut", type=int, help="starting Fock cutoff (raised where needed)")
    p.add_argument("--threads", type=int, help="worker threads (default PHOTON_LOCALITY_THREADS)")
    p.add_argument("--out", help="output CSV path")

    p = add("state", "localized state for one pulse (JSON)")
    p.add_argument("--omega-sigma", type=_finite_float)
    p.add_argument("--tau-ratio", type=_finite_float)
    p.add_argument("--eta-tilde", type=_finite_float, help="skip the pulse and use this eta~ directly")
    p.add_argument("--ncut", type=int, help="Fock cutoff (an error if too small)")
    p.add_argument("--n-points", type=int)
    p.add_argument("--method", choices=["closed_form", "quadrature"])
    p.add_argument("--out", help="output JSON path")
    p.add_argument("--spectrum-out", help="also write the spectrum CSV here")

    for name, help_text in (("density", "energy densities on a time grid (CSVs)"),
                            ("modes", "mode functions and field profiles (CSVs)")):
        p = add(name, help_text)
        p.add_argument("--omega-sigma", type=_finite_float)
        p.add_argument("--tau-ratio", type=_finite_float)
        p.add_argument("--n-points", type=int)
        p.add_argument("--method", choices=["closed_form", "quadrature"])
        p.add_argument("--t-min", type=_finite_float, help="first time sample (units of sigma)")
        p.add_argument("--t-max", type=_finite_float, help="last time sample (default tau + 6 sigma)")
        p.add_argument("--samples", type=int)
        p.add_argument("--out", help="output prefix")
        if name == "density":
            p.add_argument("--alpha", type=_finite_float)
            p.add_argument("--ncut", type=int)

    p = add("verify", "run the invariant checks")
    p.add_argument("--list", action="store_true", help="list checks without running them")
    p.add_argument("--check", action="append", help="run only this check (repeatable)")
    p.add_argument("--inject-fault", choices=FAULTS, help="deliberately break a step")
    return parser


def read_config(path):
    """Parse ``key = value`` lines (``#`` comments); keys may use dashes or underscores."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def resolve(parser, args):
    """Merge defaults < config file < command-line flags into a plain dict."""
    command = args.command
    supplied = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    resolved = dict(DEFAULTS[command])
    if getattr(args, "config", None):
        sub = parser._subparsers._group_actions[0].choices[command]
        types = {a.dest: a for a in sub._actions}
        for key, value in read_config(args.config).items():
            if key not in resolved:
                raise UsageError(f"unknown config key {key!r} for '{command}'")
            action = types.get(key)
            try:
                if isinstance(action, (argparse.BooleanOptionalAction, argparse._StoreTrueAction)):
                    value = _bool(value)
                elif action is not None and action.type is not None:
                    value = action.type(value)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
            resolved[key] = value
    resolved.update(supplied)
    return resolved


def _pulse(cfg):
    if math.isinf(cfg["tau_ratio"]):
        raise UsageError("an infinite delay is only available in 'sweep'")
    try:
        return TruncatedGaussianParams.from_dimensionless(cfg["omega_sigma"], cfg["tau_ratio"])
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc


def _spectrum(params, cfg):
    grid = FrequencyGrid.default_for(params, cfg["n_points"])
    return canonicalize(spectrum_of(params, grid, cfg["method"]))


def _times(cfg, params):
    t_max = cfg["t_max"] if cfg["t_max"] is not None else params.tau_over_sigma + 6.0
    if cfg["samples"] < 2 or not cfg["t_min"] < t_max:
        raise UsageError("need --samples >= 2 and --t-min < --t-max")
    times = np.linspace(cfg["t_min"], t_max, cfg["samples"]) * params.sigma
    # the field of a pulse switched on at t = 0 is singular there
    return times[times != 0.0]


def _write_manifest(path, command, cfg, outputs, extra=None):
    record = {
        "command": command,
        "version": __version__,
        "resolved": {k: (v if not isinstance(v, float) or math.isfinite(v) else str(v))
                     for k, v in sorted(cfg.items())},
        "outputs": outputs,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }
    if extra:
        record.update(extra)
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_sweep(cfg):
    try:
        omegas = parse_range(cfg["omega_sigma"])
        taus = parse_tau_list(cfg["tau_ratio"])
        config = SweepConfig(omegas, taus, cfg["alpha"], cfg["exact"], cfg["n_points"],
                             cfg["ncut"], cfg["threads"])
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc
    log.info("sweeping %d x %d points", len(omegas), len(taus))
    rows = sweep(config)
    write_bounds_csv(rows, cfg["out"])
    errors = [{"omega0_sigma": r.omega0_sigma, "tau_over_sigma": str(r.tau_over_sigma), "error": r.error}
              for r in rows if r.error]
    for e in errors:
        print(f"error row omega0_sigma={e['omega0_sigma']} tau_over_sigma={e['tau_over_sigma']}: "
              f"{e['error']}", file=sys.stderr)
    _write_manifest(cfg["out"] + ".manifest.json", "sweep", cfg, [cfg["out"]], {"error_rows": errors})
    return EXIT_SWEEP_ERRORS if errors else EXIT_OK


def _trunc(cfg):
    return None if cfg["ncut"] is None else FockTruncation(cfg["ncut"], auto=False)


def run_state(cfg):
    extra = {}
    if cfg["eta_tilde"] is not None:
        eta_tilde = cfg["eta_tilde"]
        extra["eta"] = None
    else:
        params = _pulse(cfg)
        spectrum = _spectrum(params, cfg)
        if cfg["spectrum_out"]:
            write_spectrum_csv(spectrum, cfg["spectrum_out"])
        modified = orthogonalize(spectrum)
        eta_tilde = modified.eta_tilde
        extra.update(eta=modified.eta, beta_re=modified.beta.real, beta_im=modified.beta.imag,
                     J=modified.J, reflected=spectrum.reflected,
                     omega0_sigma=params.omega0_sigma, tau_over_sigma=params.tau_over_sigma)
    try:
        C, gamma = compensation_constant(eta_tilde)
    except ExactSinglePhotonError:
        # the desired pulse has no negative-frequency content left: |1, 0>
        state = localized_state(0.0, _trunc(cfg) or FockTruncation())
        C, exact = None, True
    else:
        state = localized_state(eta_tilde, _trunc(cfg))
        exact = False
    fidelity = fidelity_single_photon(state)
    extra.update(C=C, fidelity=fidelity, exact_single_photon=exact, tail_mass=state.tail_mass)
    write_state_json(state, cfg["out"], extra)
    _write_manifest(cfg["out"] + ".manifest.json", "state", cfg, [cfg["out"]])
    print(f"eta_tilde={state.eta_tilde:.10g} gamma={state.gamma:.10g} fidelity={fidelity:.12f} "
          f"n_cut={state.n_cut}")
    return EXIT_OK


def run_density(cfg):
    params = _pulse(cfg)
    spectrum = _spectrum(params, cfg)
    modified = orthogonalize(spectrum)
    times = _times(cfg, params)
    prefix = cfg["out"]
    outputs = {}
    coherent = localized_coherent_mode(modified.spectrum, cfg["alpha"])
    try:
        pair = extract_modes(modified)
    except ExactSinglePhotonError:
        spec = modified.spectrum
        n = math.sqrt(spec.norm2_plus)
        E1 = field_profile(ModeFunction(spec.grid, spec.positive / n, spec.tail_plus / n, "xi1"), times)
        state = basis_state(1, 0, 2)
        E2 = E1.scaled(0.0)
    else:
        state = localized_state(pair.eta_tilde, _trunc(cfg))
        E1, E2 = field_profile(pair.xi1, times), field_profile(pair.xi2, times)
    series = {
        "localized": energy_density_state(state, E1, E2),
        "single": energy_density_single_photon(E1),
        "coherent": energy_density_coherent(coherent, times),
    }
    window = (max(cfg["t_min"], -10.0) * params.sigma, -0.1 * params.sigma)
    metrics = {}
    for name, s in series.items():
        path = f"{prefix}_{name}.csv"
        write_series_csv(s, path)
        outputs[name] = path
        if times.min() <= window[1] and window[0] < window[1]:
            metrics[name] = localization_metric(s, window)
    path = f"{prefix}_glauber.csv"
    write_intensity_csv(glauber_intensity(state, E1, E2), path)
    outputs["glauber"] = path
    for name, value in metrics.items():
        print(f"localization {name}: {value:.3e}")
    _write_manifest(prefix + ".manifest.json", "density", cfg, sorted(outputs.values()),
                    {"localization": metrics, "eta": modified.eta, "eta_tilde": modified.eta_tilde})
    return EXIT_OK


def run_modes(cfg):
    params = _pulse(cfg)
    spectrum = _spectrum(params, cfg)
    pair = extract_modes(orthogonalize(spectrum))
    times = _times(cfg, params)
    prefix = cfg["out"]
    outputs = [f"{prefix}_spectrum.csv", f"{prefix}_modes.csv", f"{prefix}_E1.csv", f"{prefix}_E2.csv"]
    write_spectrum_csv(spectrum, outputs[0])
    write_modes_csv(pair, outputs[1])
    write_profile_csv(field_profile(pair.xi1, times), outputs[2])
    write_profile_csv(field_profile(pair.xi2, times), outputs[3])
    _write_manifest(prefix + ".manifest.json", "modes", cfg, outputs,
                    {"C": pair.C, "gamma": pair.gamma, "eta_tilde": pair.eta_tilde})
    print(f"C={pair.C:.10g} gamma={pair.gamma:.10g} eta_tilde={pair.eta_tilde:.10g}")
    return EXIT_OK


def run_verify(cfg):
    if cfg["list"]:
        for check in CHECKS:
            print(f"{check.name}: {check.description}")
        return EXIT_OK
    known = {c.name for c in CHECKS}
    unknown = [c for c in (cfg["check"] or []) if c not in known]
    if unknown:
        raise UsageError(f"unknown check(s): {', '.join(unknown)}")
    results = run_checks(cfg["check"], cfg["inject_fault"])
    failed = [name for name, ok, _ in results if not ok]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        print("failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


COMMANDS = {"sweep": run_sweep, "state": run_state, "density": run_density,
            "modes": run_modes, "verify": run_verify}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * (getattr(args, "verbose", 0) or 0)
    logging.basicConfig(level=max(level, logging.DEBUG), format="%(levelname)s %(message)s")
    try:
        cfg = resolve(parser, args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"photon-locality {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateInputError, DomainError, TruncationError, AccuracyError,
            UnsupportedMethodError, ParameterError) as exc:
        print(f"photon-locality {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"photon-locality {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
