"""Command-line entry point: ``latticeweak <subcommand> [options]``.

Heavy modules are imported inside the handlers so that ``LATTICEWEAK_THREADS``
can cap the BLAS thread pools before numpy loads.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile

from . import __version__

THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

PARAM_TYPES = {"L": int, "m_u": float, "m_d": float, "m_e": float, "m_nu": float,
               "g": float, "G": float, "m_M": float}

# keys accepted in a --config file, per subcommand, with their JSON types
SCHEMA = {
    "ham": {"params": dict, "preset": str, "layout": str, "leptons": str, "beta": str, "majorana": bool},
    "spectrum": {"params": dict, "preset": str, "lepton_pairs": int},
    "evolve": {"params": dict, "preset": str, "method": str, "tmax": float, "dt": float,
               "operator": str, "steps": int, "entropy": bool, "no_ancilla": bool},
    "circuit": {"params": dict, "preset": str, "prep": bool, "with_prep": bool, "trotter": int, "t": float,
                "no_ancilla": bool, "no_cancel": bool},
    "sample": {"circuit": str, "shots": int, "seed": int, "post_select": str},
    "resources": {"L": str},
    "ensemble": {"ensemble": dict, "yf": str, "samples": int, "seed": int, "t_max": float, "n_times": int},
    "widths": {"physical": dict, "G": float, "g_V": float, "Q": float, "y": float},
}
ENSEMBLE_TYPES = {"y_f": int, "n_initial": int, "initial_range": list, "initial_rank": int,
                  "final_range": list, "samples": int, "t_max": float, "n_times": int, "seed": int,
                  "coupling_scale": float}


class ConfigError(Exception):
    """Invalid or malformed configuration; reported with exit status 2."""


# -- config handling -------------------------------------------------------------------

def _key_position(text: str, key: str) -> str:
    needle = json.dumps(key)
    at = text.find(needle)
    if at < 0:
        return ""
    line = text.count("\n", 0, at) + 1
    col = at - (text.rfind("\n", 0, at) + 1) + 1
    return f"{line}:{col}: "


def load_json(path: str) -> tuple[dict, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1:1: top level must be a JSON object")
    return data, text


def _check_type(value, kind, where: str):
    ok = {
        int: isinstance(value, int) and not isinstance(value, bool),
        float: isinstance(value, (int, float)) and not isinstance(value, bool),
        bool: isinstance(value, bool),
        str: isinstance(value, str),
        dict: isinstance(value, dict),
        list: isinstance(value, list),
    }[kind]
    if not ok:
        raise ConfigError(f"{where}expected {kind.__name__}, got {type(value).__name__}")


def validate(data: dict, schema: dict, path: str, text: str) -> dict:
    for key, value in data.items():
        where = f"{path}:{_key_position(text, key)}"
        if key not in schema:
            raise ConfigError(f"{where}unknown key {key!r}; allowed: {', '.join(sorted(schema))}")
        _check_type(value, schema[key], f"{where}{key}: ")
    return data


def resolve_params(args, source: str = "", text: str = ""):
    from .layout import LatticeParams, preset
    params = dict(getattr(args, "params_data", None) or {})
    name = params.pop("preset", args.preset)
    try:
        base = preset(name)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    validate(params, PARAM_TYPES, source or "params", text)
    try:
        return LatticeParams.from_dict({**base.to_dict(), **params})
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from None


def apply_config(args, argv: list[str], parser: argparse.ArgumentParser):
    """Fill options from ``--config`` unless they were given on the command line."""
    explicit = set()
    for action in parser._actions:
        if any(tok == o or tok.startswith(o + "=") for o in action.option_strings for tok in argv):
            explicit.add(action.dest)
    args.params_data = None
    if getattr(args, "params", None):
        data, text = load_json(args.params)
        allowed = dict(PARAM_TYPES, preset=str)
        validate(data, allowed, args.params, text)
        args.params_data = data
    if not args.config:
        return
    data, text = load_json(args.config)
    validate(data, SCHEMA[args.command], args.config, text)
    for key, value in data.items():
        if key == "params":
            validate(value, dict(PARAM_TYPES, preset=str), args.config, text)
            if "params" not in explicit:
                args.params_data = value
        elif key in ("ensemble", "physical"):
            setattr(args, key + "_data", value)
        elif key not in explicit:
            setattr(args, key, value)


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def header(command: str, config: dict, seed) -> dict:
    return {"version": __version__, "command": command, "config_sha256": config_hash(config), "seed": seed}


def header_lines(command: str, config: dict, seed) -> list[str]:
    h = header(command, config, seed)
    return [f"latticeweak {h['version']}", f"command: {command}",
            f"config_sha256: {h['config_sha256']}", f"seed: {'none' if seed is None else seed}"]


def write_outputs(outputs: list[tuple[str | None, str]]):
    """Write every artifact through a temporary file so a failure leaves none behind."""
    staged = []
    try:
        for path, text in outputs:
            if path is None:
                continue
            folder = os.path.dirname(os.path.abspath(path))
            fd, tmp = tempfile.mkstemp(dir=folder, prefix=".latticeweak-", suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.remove(tmp)
    for path, text in outputs:
        if path is None:
            sys.stdout.write(text)


def _csv_list(text: str, kind=int) -> list:
    try:
        values = [kind(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse list {text!r}") from None
    if not values:
        raise ConfigError("empty list")
    return values


# -- subcommands -----------------------------------------------------------------------

def cmd_ham(args):
    from .hamiltonians import BETA_FORMS, build_full
    from .layout import QubitLayout
    from .pauli import dump_terms
    p = resolve_params(args)
    beta = None if args.beta == "none" else args.beta
    if beta is not None and beta not in BETA_FORMS:
        raise ConfigError(f"beta must be one of {', '.join(BETA_FORMS)} or none")
    layout = QubitLayout(p.L, args.layout)
    H = build_full(p, layout, leptons=args.leptons, beta=beta, majorana=args.majorana)
    config = {"params": p.to_dict(), "layout": args.layout, "leptons": args.leptons,
              "beta": args.beta, "majorana": args.majorana}
    head = header_lines("ham", config, None) + [f"qubits: {H.nqubits}", f"terms: {len(H)}",
                                                "format: <re> <im> <pauli label, qubit 0 rightmost>"]
    return [(args.out, "".join(f"# {h}\n" for h in head) + dump_terms(H))]


def cmd_spectrum(args):
    from .spectra import spectrum_table
    p = resolve_params(args).with_(G=0.0)
    table = spectrum_table(p, args.lepton_pairs)
    config = {"params": p.to_dict(), "lepton_pairs": args.lepton_pairs}
    head = header_lines("spectrum", config, None) + ["gaps of the G = 0 Hamiltonian above the vacuum"]
    return [(args.out, table.to_csv("\n".join(head)))]


def cmd_evolve(args):
    from .evolution import exact_decay_curve, time_grid, trotter_decay_curve
    p = resolve_params(args)
    if args.tmax <= 0 or args.dt <= 0:
        raise ConfigError("tmax and dt must be positive")
    if args.steps < 1:
        raise ConfigError("steps must be >= 1")
    times = time_grid(args.tmax, args.dt)
    config = {"params": p.to_dict(), "method": args.method, "tmax": args.tmax, "dt": args.dt,
              "operator": args.operator}
    if args.method == "exact":
        config["entropy"] = args.entropy
        curve = exact_decay_curve(p, times, args.operator, with_entropy=args.entropy)
    elif args.method == "trotter":
        config["steps"] = args.steps
        curve = trotter_decay_curve(p, times, args.steps)
    else:
        from .simulator import trotter_decay_table
        config.update(steps=args.steps, ancilla=not args.no_ancilla)
        curve = trotter_decay_table(p, args.steps, times, ancilla=not args.no_ancilla)
    from .trotter import TROTTER_ORDER_VERSION
    head = header_lines("evolve", config, None) + [f"trotter_order: {TROTTER_ORDER_VERSION}"]
    return [(args.out, curve.to_csv("\n".join(head)))]


def cmd_circuit(args):
    from .circuits import state_prep_circuit, trotter_step_circuit
    p = resolve_params(args)
    if args.prep == (args.trotter is not None):
        raise ConfigError("choose exactly one of --prep or --trotter N")
    if args.with_prep and args.prep:
        raise ConfigError("--with-prep only applies to --trotter N")
    if args.prep:
        circ = state_prep_circuit(p)
        config = {"params": p.to_dict(), "prep": True}
    else:
        if args.trotter < 1:
            raise ConfigError("--trotter needs N >= 1")
        circ = trotter_step_circuit(p, args.t, args.trotter, ancilla=not args.no_ancilla,
                                    cancel_cnots_pass=not args.no_cancel)
        config = {"params": p.to_dict(), "trotter": args.trotter, "t": args.t,
                  "ancilla": not args.no_ancilla, "cancel": not args.no_cancel}
        if args.with_prep:
            prep = state_prep_circuit(p, nqubits=circ.nqubits)
            prep.gates += circ.gates
            circ = prep
            config["with_prep"] = True
    head = header_lines("circuit", config, None)
    report = {"header": header("circuit", config, None), **circ.report()}
    text = "".join(f"# {h}\n" for h in head) + circ.to_text()
    return [(args.out, text), (args.report, json.dumps(report, indent=2, default=float) + "\n")]


def cmd_sample(args):
    from .circuits import Circuit
    from .layout import QubitLayout
    from .simulator import ancilla_filter, post_select, run
    try:
        with open(args.circuit, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{args.circuit}: cannot read ({exc.strerror})") from None
    try:
        circ = Circuit.from_text(text)
    except ValueError as exc:
        raise ConfigError(f"{args.circuit}: {exc}") from None
    if args.shots < 1:
        raise ConfigError("shots must be >= 1")
    unknown = set(args.post_select) - set("BLA")
    if unknown:
        raise ConfigError(f"--post-select takes letters from B (baryon), L (lepton), A (ancilla); got {''.join(sorted(unknown))}")
    result = run(circ, args.shots, args.seed)
    filters = {}
    if args.post_select:
        layout = QubitLayout(1, "grouped")
        if circ.nqubits < layout.nqubits:
            raise ConfigError("charge post-selection needs the 16-qubit L = 1 register")
        if "B" in args.post_select:
            filters["baryon"] = _baryon_only(layout)
        if "L" in args.post_select:
            filters["lepton"] = _lepton_only(layout)
        if "A" in args.post_select:
            if circ.nqubits == layout.nqubits:
                raise ConfigError("circuit has no ancilla qubit")
            filters["ancilla"] = ancilla_filter(layout.nqubits)
        result = post_select(result, filters)
    config = {"circuit_sha256": hashlib.sha256(text.encode()).hexdigest(), "shots": args.shots,
              "post_select": args.post_select}
    return [(args.out, result.to_json(header("sample", config, args.seed)))]


def _charge_predicate(op, value: float, low: int):
    import numpy as np

    def keep(bits: int) -> bool:
        return abs(op.diagonal_values(np.array([bits & low], dtype=np.int64))[0].real - value) < 1e-9
    return keep


def _baryon_only(layout):
    from .hamiltonians import baryon_number
    return _charge_predicate(baryon_number(layout), 1.0, (1 << layout.nqubits) - 1)


def _lepton_only(layout):
    from .hamiltonians import lepton_number
    return _charge_predicate(lepton_number(layout), 0.0, (1 << layout.nqubits) - 1)


def cmd_resources(args):
    from .circuits import resource_estimate
    Ls = _csv_list(args.L)
    rows = [resource_estimate(L).to_dict() for L in Ls]
    cols = list(rows[0])
    head = header_lines("resources", {"L": Ls}, None)
    body = ",".join(cols) + "\n" + "".join(",".join(str(r[c]) for c in cols) + "\n" for r in rows)
    return [(args.out, "".join(f"# {h}\n" for h in head) + body)]


def cmd_ensemble(args):
    import numpy as np

    from .decay_models import (EARLY_WINDOW, EnsembleConfig, early_time_exponent, early_times,
                               ensemble_persistence, exponential_fit, exponential_window, golden_rule_rate)
    base = dict(getattr(args, "ensemble_data", None) or {})
    validate(base, ENSEMBLE_TYPES, args.config or "ensemble", "")
    base.update(samples=args.samples, seed=args.seed, t_max=args.t_max, n_times=args.n_times)
    yfs = _csv_list(args.yf)
    try:
        cfgs = [EnsembleConfig(**{**base, "y_f": y}) for y in yfs]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"ensemble: {exc}") from None
    # a fine early grid rides along for the t^2 exponent; only the requested grid is written
    results = [ensemble_persistence(c, np.union1d(early_times(), c.times())) for c in cfgs]
    keep = np.isin(results[0].times, cfgs[0].times())
    config = {"ensemble": {k: v for k, v in cfgs[0].to_dict().items() if k != "y_f"}, "yf": yfs}
    head = header_lines("ensemble", config, args.seed)
    head.append("fit window: first P < 0.95 until P <= 1.5 x plateau")
    for c, r in zip(cfgs, results):
        line = f"y_f={c.y_f}: plateau={r.plateau:.6f} +- {r.plateau_stderr:.6f}"
        try:
            fit = exponential_fit(r.times, r.persistence, exponential_window(r.times, r.persistence, r.plateau))
            line += (f" rate={fit['rate']:.6f} r2={fit['r2']:.6f} window=[{fit['window'][0]:g}, {fit['window'][1]:g}]"
                     f" golden_rule={golden_rule_rate(c):.6f}")
        except (ValueError, RuntimeError) as exc:
            line += f" fit unavailable ({exc})"
        try:
            line += f" early_exponent={early_time_exponent(r.times, r.persistence, *EARLY_WINDOW):.4f}"
        except ValueError:
            pass
        head.append(line)
    cols = ["t"] + [f"{name}_yf{c.y_f}" for c in cfgs for name in ("persistence", "stderr")]
    lines = [",".join(cols)]
    for i in np.nonzero(keep)[0]:
        t = results[0].times[i]
        vals = [f"{t:.6f}"] + [f"{v:.10f}" for r in results for v in (r.persistence[i], r.stderr[i])]
        lines.append(",".join(vals))
    return [(args.out, "".join(f"# {h}\n" for h in head) + "\n".join(lines) + "\n")]


def cmd_widths(args):
    from .decay_models import HBAR_GEV_S, PHYSICAL, delta_width_1p1, neutron_width, phase_space_fprime
    phys = dict(PHYSICAL)
    override = dict(getattr(args, "physical_data", None) or {})
    validate(override, {k: float for k in PHYSICAL}, args.config or "physical", "")
    phys.update(override)
    try:
        width = neutron_width(**phys)
        y = phys["m_e"] / (phys["M_n"] - phys["M_p"])
        out = {
            "physical": phys,
            "y": y,
            "fprime": phase_space_fprime(y),
            "fprime_at": {"y": args.y, "value": phase_space_fprime(args.y)} if args.y is not None else None,
            "neutron_width_GeV": width,
            "neutron_lifetime_s": HBAR_GEV_S / width,
            "delta_width_1p1": {"G": args.G, "g_V": args.g_V, "Q": args.Q,
                                "value": delta_width_1p1(args.G, args.g_V, args.Q)},
        }
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    config = {"physical": phys, "G": args.G, "g_V": args.g_V, "Q": args.Q, "y": args.y}
    out = {"header": header("widths", config, None), **out}
    return [(args.out, json.dumps(out, indent=2) + "\n")]


# -- parser ----------------------------------------------------------------------------

def _add_params(sp):
    sp.add_argument("--params", help="JSON file with lattice parameters (optional 'preset' key)")
    sp.add_argument("--preset", default="benchmark-l1", help="named parameter set")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latticeweak", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"latticeweak {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("--config", help="JSON run configuration (keys: see README)")
        sp.add_argument("--out", help="output file (default: stdout)")
        return sp

    sp = add("ham", cmd_ham, "dump the Hamiltonian as Pauli terms")
    _add_params(sp)
    sp.add_argument("--layout", default="grouped", choices=("grouped", "interleaved"))
    sp.add_argument("--leptons", default=None, choices=("standard", "tilde"))
    sp.add_argument("--beta", default="valence", help="decay term form or 'none'")
    sp.add_argument("--majorana", action="store_true")

    sp = add("spectrum", cmd_spectrum, "labeled gaps of the L = 1 spectrum")
    _add_params(sp)
    sp.add_argument("--lepton-pairs", type=int, default=2)

    sp = add("evolve", cmd_evolve, "decay probability against time")
    _add_params(sp)
    sp.add_argument("--method", default="exact", choices=("exact", "trotter", "circuit"))
    sp.add_argument("--tmax", type=float, default=8.0)
    sp.add_argument("--dt", type=float, default=0.05)
    sp.add_argument("--operator", default="valence", choices=("valence", "full"))
    sp.add_argument("--steps", type=int, default=1)
    sp.add_argument("--entropy", action="store_true", help="add the quark linear entropy column")
    sp.add_argument("--no-ancilla", action="store_true")

    sp = add("circuit", cmd_circuit, "compile a preparation or Trotter circuit")
    _add_params(sp)
    sp.add_argument("--prep", action="store_true")
    sp.add_argument("--trotter", type=int)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--no-ancilla", action="store_true")
    sp.add_argument("--no-cancel", action="store_true")
    sp.add_argument("--with-prep", action="store_true", help="prepend the Delta- preparation to --trotter")
    sp.add_argument("--report", help="gate-count JSON file (default: stdout)")

    sp = add("sample", cmd_sample, "sample measurement counts from a circuit file")
    sp.add_argument("--circuit", required=False)
    sp.add_argument("--shots", type=int, default=200)
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--post-select", default="", help="letters: B baryon, L lepton, A ancilla")

    sp = add("resources", cmd_resources, "per-step gate estimates for L sites")
    sp.add_argument("--L", default="5,10,50,100", help="comma-separated lattice sizes")

    sp = add("ensemble", cmd_ensemble, "random-matrix persistence curves")
    sp.add_argument("--yf", default="20,50,100,400")
    sp.add_argument("--samples", type=int, default=2000)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--t-max", type=float, default=40.0)
    sp.add_argument("--n-times", type=int, default=401)

    sp = add("widths", cmd_widths, "analytic decay widths")
    sp.add_argument("--G", type=float, default=1.0)
    sp.add_argument("--g-V", type=float, default=1.0)
    sp.add_argument("--Q", type=float, default=1.0)
    sp.add_argument("--y", type=float, default=None, help="evaluate the phase-space factor here")
    return parser


def main(argv=None) -> int:
    threads = os.environ.get("LATTICEWEAK_THREADS")
    if threads:
        for var in THREAD_VARS:
            os.environ[var] = threads
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    try:
        apply_config(args, argv, sub)
        if args.command == "sample" and not args.circuit:
            raise ConfigError("sample needs --circuit")
        outputs = args.func(args)
    except ConfigError as exc:
        print(f"latticeweak: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"latticeweak: {args.command} failed: {exc}", file=sys.stderr)
        return 1
    write_outputs(outputs)
    return 0


if __name__ == "__main__":
    sys.exit(main())
