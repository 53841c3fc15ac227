"""Command-line drivers producing plot-ready CSV/JSON tables.

    qamp machine --p 1 --q 2
    qamp snr-sweep --p 1 --q 5 --levels 0-10 --mc --trials 10000 --seed 7
    qamp cascade --p 1 --q 5 --levels 3 --theta 1.0472
    qamp attack --p 1 --q 2,5 --levels 2,4,6,8 --trials 1000 --seed 1
    qamp y00 --m 64 --alpha-sq 100 --p 25 --q 50 --levels 2 --trials 500 --seed 1

Values come from built-in defaults, then ``--config`` (a flat JSON object
keyed by flag name), then explicit flags. Exit status: 0 ok, 2 invalid
input, 3 simulation failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Any, Callable

from qamp import __version__
from qamp.attack import AttackConfig, exact_aux, random_aux, success_rate
from qamp.cloning import CloneMachineParams, cascade, closed_form_weights
from qamp.errors import QampError, ValidationError
from qamp.measurement import (
    BinomialModel,
    MeasurementMode,
    empirical_snr,
    quantum_snr,
    snr_grows,
    snr_index,
    statistical_moments,
)
from qamp.qubit_core import Qubit
from qamp.results import FORMATS, ResultTable, write_atomic
from qamp.rng import trial_rng
from qamp.y00 import WHEEL, Y00AttackConfig, Y00Params, security_margin, y00_campaign

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3

COMMON_DEFAULTS = {"seed": None, "format": "csv", "out": None, "config": None, "trials": None, "mode": "idealized"}

DEFAULTS = {
    "machine": {"p": None, "q": None, "p_max": None, "q_max": None},
    "snr-sweep": {"p": "1", "q": "5", "levels": "0-10", "n0": 1, "mc": False},
    "cascade": {"p": 1, "q": 5, "levels": 3, "n0": 1, "theta": 0.0, "phi": 0.0},
    "attack": {"p": "1", "q": "5", "levels": "6", "n0": 2, "split": 0.5, "trials": 1000, "aux": "estimate"},
    "y00": {
        "m": 64, "alpha_sq": 100.0, "split": 0.5, "j": 1000,
        "p": 25, "q": 50, "levels": "2", "trials": 500,
    },
}

# table schema version; bump when columns change
SCHEMA_VERSION = 1


def int_list(text) -> list[int]:
    """Parse ``"1,3,5"`` / ``"0-10"`` / ``"0-4,8"`` into a list of ints."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(x) for x in text]
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        lo, _, hi = part.partition("-")
        try:
            lo_i = int(lo)
            hi_i = int(hi) if hi else lo_i
        except ValueError as exc:
            raise ValidationError(f"bad integer list {text!r}") from exc
        if hi_i < lo_i:
            raise ValidationError(f"empty range {part!r}")
        out.extend(range(lo_i, hi_i + 1))
    if not out:
        raise ValidationError(f"no values in {text!r}")
    return out


def _add_common(parser: argparse.ArgumentParser) -> None:
    s = argparse.SUPPRESS
    parser.add_argument("--seed", type=int, default=s, help="master seed (required for Monte Carlo)")
    parser.add_argument("--format", choices=FORMATS, default=s)
    parser.add_argument("--out", default=s, help="output path (default: stdout)")
    parser.add_argument("--config", default=s, help="flat JSON object of flag values")
    parser.add_argument("--trials", type=int, default=s)
    parser.add_argument("--mode", choices=[m.value for m in MeasurementMode], default=s)


def build_parser() -> argparse.ArgumentParser:
    s = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="qamp", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"qamp {__version__}")
    _add_common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("machine", help="cloner constants F, D, eta and S/N growth")
    p.add_argument("--p", type=int, default=s)
    p.add_argument("--q", type=int, default=s)
    p.add_argument("--p-max", type=int, default=s)
    p.add_argument("--q-max", type=int, default=s)

    p = sub.add_parser("snr-sweep", help="analytic (and optional Monte Carlo) S/N over L")
    p.add_argument("--p", default=s, help="int list, e.g. 1,2")
    p.add_argument("--q", default=s)
    p.add_argument("--levels", default=s, help="int list or range, e.g. 0-10")
    p.add_argument("--n0", type=int, default=s)
    p.add_argument("--mc", action="store_true", default=s, help="add a sampled S/N column")

    p = sub.add_parser("cascade", help="cascade weights level by level")
    p.add_argument("--p", type=int, default=s)
    p.add_argument("--q", type=int, default=s)
    p.add_argument("--levels", type=int, default=s)
    p.add_argument("--n0", type=int, default=s)
    p.add_argument("--theta", type=float, default=s)
    p.add_argument("--phi", type=float, default=s)

    p = sub.add_parser("attack", help="Monte Carlo success rate of the generic attack")
    p.add_argument("--p", default=s)
    p.add_argument("--q", default=s)
    p.add_argument("--levels", default=s)
    p.add_argument("--n0", type=int, default=s, help="photons per source pulse")
    p.add_argument("--split", type=float, default=s)
    p.add_argument("--aux", choices=["estimate", "exact", "random"], default=s)

    p = sub.add_parser("y00", help="attack vs direct-measurement baseline on Y-00")
    p.add_argument("--m", type=int, default=s, help="number of bases M")
    p.add_argument("--alpha-sq", type=float, default=s, help="mean photon number")
    p.add_argument("--split", type=float, default=s)
    p.add_argument("--j", type=int, default=s, help="number of weak pulses J")
    p.add_argument("--p", type=int, default=s)
    p.add_argument("--q", type=int, default=s)
    p.add_argument("--levels", default=s)

    for sp in sub.choices.values():
        _add_common(sp)
    return parser


def resolve_config(command: str, explicit: dict[str, Any]) -> dict[str, Any]:
    cfg = dict(COMMON_DEFAULTS)
    cfg.update(DEFAULTS[command])
    path = explicit.get("config")
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ValidationError("config file must hold a JSON object")
        for key, value in file_cfg.items():
            key = key.lstrip("-").replace("-", "_")
            if key not in cfg:
                raise ValidationError(f"unknown config key {key!r} for {command}")
            cfg[key] = value
    cfg.update({k: v for k, v in explicit.items() if k != "command"})
    return cfg


def _require_seed(cfg: dict[str, Any]) -> int:
    seed = cfg.get("seed")
    if seed is None:
        raise ValidationError("--seed is required for Monte Carlo runs")
    if int(seed) < 0:
        raise ValidationError("--seed must be non-negative")
    return int(seed)


def _require_trials(cfg: dict[str, Any]) -> int:
    trials = cfg.get("trials")
    if trials is None or int(trials) < 1:
        raise ValidationError(f"--trials must be a positive integer, got {trials!r}")
    return int(trials)


def _machines(cfg) -> list[CloneMachineParams]:
    return [CloneMachineParams(p, q) for p in int_list(cfg["p"]) for q in int_list(cfg["q"])]


def cmd_machine(cfg: dict[str, Any]) -> ResultTable:
    if cfg["p"] is not None or cfg["q"] is not None:
        if cfg["p"] is None or cfg["q"] is None:
            raise ValidationError("give both --p and --q, or --p-max and --q-max")
        machines = [CloneMachineParams(cfg["p"], cfg["q"])]
    elif cfg["p_max"] is not None and cfg["q_max"] is not None:
        machines = [
            CloneMachineParams(p, q)
            for p in range(1, cfg["p_max"] + 1)
            for q in range(p + 1, cfg["q_max"] + 1)
        ]
    else:
        raise ValidationError("give --p and --q, or --p-max and --q-max")
    table = ResultTable(["p", "q", "fidelity", "disturbance", "eta", "snr_index", "snr_grows"])
    for m in machines:
        table.add_row(m.p, m.q, m.fidelity, m.disturbance, m.eta, snr_index(m), snr_grows(m))
    return table


def cmd_snr_sweep(cfg: dict[str, Any]) -> ResultTable:
    n0 = int(cfg["n0"])
    mc = bool(cfg["mc"])
    seed = _require_seed(cfg) if mc else cfg.get("seed")
    trials = _require_trials(cfg) if mc else None
    levels = int_list(cfg["levels"])
    if min(levels) < 0:
        raise ValidationError("levels must be non-negative")
    probe = Qubit(0.0, 0.0)
    table = ResultTable([
        "p", "q", "L", "n0", "eta_L", "clone_count", "total_factor",
        "snr_analytic", "snr_statistical", "snr_mc",
    ])
    for mi, m in enumerate(_machines(cfg)):
        for L in levels:
            model = BinomialModel.from_cascade(m, L, n0)
            stat = statistical_moments(model, probe)
            snr_mc = empirical_snr(model, probe, trials, trial_rng(seed, mi, L)) if mc else math.nan
            table.add_row(
                m.p, m.q, L, n0, m.eta ** L, float(m.gain ** L * n0),
                float(Fraction(m.q + 2, m.p + 2) ** L * n0),
                quantum_snr(m, L, n0), stat.snr, snr_mc,
            )
    return table


def cmd_cascade(cfg: dict[str, Any]) -> ResultTable:
    m = CloneMachineParams(cfg["p"], cfg["q"])
    q0 = Qubit.normalized(float(cfg["theta"]), float(cfg["phi"]))
    result = cascade(q0, m, int(cfg["levels"]), int(cfg["n0"]))
    table = ResultTable(["k", "a_k", "b_k", "a_closed", "b_closed", "eta_k", "clone_count"])
    for k, (a, b) in enumerate(result.levels):
        ac, bc = closed_form_weights(result.eta, k)
        table.add_row(k, a, b, ac, bc, result.eta ** k, float(m.gain ** k * result.n0))
    return table


def cmd_attack(cfg: dict[str, Any]) -> ResultTable:
    seed = _require_seed(cfg)
    trials = _require_trials(cfg)
    oracle = {"estimate": None, "exact": exact_aux, "random": random_aux}[cfg["aux"]]
    table = ResultTable([
        "p", "q", "L", "n0", "split", "mode", "aux", "trials",
        "rate", "ci95", "mean_angular_error", "failures", "snr_analytic",
    ])
    for m in _machines(cfg):
        for L in int_list(cfg["levels"]):
            ac = AttackConfig(m, L, int(cfg["n0"]), float(cfg["split"]), cfg["mode"], trials, seed)
            fed = ac.n_amplify // m.p * m.p
            res = success_rate(ac, aux_oracle=oracle)
            table.add_row(
                m.p, m.q, L, ac.source_photons, ac.split, ac.mode.value, cfg["aux"], trials,
                res.rate, res.ci95, res.mean_angular_error, res.failures,
                quantum_snr(m, L, fed) if fed else 0.0,
            )
    return table


def cmd_y00(cfg: dict[str, Any]) -> ResultTable:
    seed = _require_seed(cfg)
    trials = _require_trials(cfg)
    params = Y00Params(int(cfg["m"]), float(cfg["alpha_sq"]))
    machine = CloneMachineParams(cfg["p"], cfg["q"])
    secure, ratio = security_margin(params)
    table = ResultTable([
        "M", "alpha_sq", "p", "q", "L", "J", "split", "mode", "trials",
        "rate", "ci95", "k_error_rate",
        "baseline_rate", "baseline_ci95", "baseline_k_error_rate", "failures",
    ])
    table.meta.update({
        "security_secure": secure,
        "security_ratio": ratio,
        "delta_k_threshold": ratio,
        "wheel": [[int(par), k, bit] for (par, k), bit in WHEEL.items()],
    })
    for L in int_list(cfg["levels"]):
        yc = Y00AttackConfig(
            params, machine, L, float(cfg["split"]), int(cfg["j"]), cfg["mode"], trials, seed
        )
        s = y00_campaign(yc)
        table.add_row(
            params.m_levels, params.alpha_sq, machine.p, machine.q, L, yc.j_pulses, yc.split,
            yc.mode.value, trials, s.rate, s.ci95, s.k_error_rate,
            s.baseline_rate, s.baseline_ci95, s.baseline_k_error_rate, s.failures,
        )
    return table


COMMANDS: dict[str, Callable[[dict[str, Any]], ResultTable]] = {
    "machine": cmd_machine,
    "snr-sweep": cmd_snr_sweep,
    "cascade": cmd_cascade,
    "attack": cmd_attack,
    "y00": cmd_y00,
}


def run(argv: list[str] | None = None) -> tuple[ResultTable, dict[str, Any]]:
    args = build_parser().parse_args(argv)
    explicit = vars(args)
    cfg = resolve_config(args.command, explicit)
    table = COMMANDS[args.command](cfg)
    echo = {k: v for k, v in sorted(cfg.items()) if k not in ("out", "config")}
    table.meta = {
        "tool": "qamp",
        "version": __version__,
        "schema": SCHEMA_VERSION,
        "command": args.command,
        "seed": cfg.get("seed"),
        "config": echo,
        **table.meta,
    }
    return table, cfg


def main(argv: list[str] | None = None) -> int:
    try:
        table, cfg = run(argv)
        text = table.render(cfg["format"])
        if cfg.get("out"):
            write_atomic(cfg["out"], text)
        else:
            sys.stdout.write(text)
    except (ValidationError, ValueError) as exc:
        print(f"qamp: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except QampError as exc:
        print(f"qamp: simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
