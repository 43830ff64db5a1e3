"""Command-line front end: ``funbandit run | bound | schedule``.

Exit codes: 0 success, 1 internal error, 2 invalid config or flags,
3 insufficient budget, 4 vacuous bound (bias dominates / sample condition unmet).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import jsonschema

from .bounds import (
    BoundConstants,
    Q_MEAN,
    avar_error_bound,
    clamp_probability,
    entropy_error_bound,
    generic_error_bound,
    mean_case_bound,
    mv_error_bound,
    regret_and_pac_bounds,
    var_bias_variance,
    var_error_bound,
)
from .distributions import distribution_from_dict
from .elimination import BanditInstance, make_schedule
from .errors import (
    BiasDominates,
    ConfigError,
    DomainError,
    FunBanditError,
    InsufficientBudget,
    SampleConditionUnmet,
)
from .estimators import functional_from_dict
from .harness import ExperimentConfig, sweep_budgets

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_BUDGET, EXIT_VACUOUS = 0, 1, 2, 3, 4

_NUMBER = {"type": "number"}
_PROB = {"type": "number", "minimum": 0, "maximum": 1}

ARM_SCHEMAS = {
    "bernoulli": {"p": _PROB},
    "categorical": {
        "values": {"type": "array", "items": _NUMBER, "minItems": 1},
        "probs": {"type": "array", "items": _PROB, "minItems": 1},
    },
    "uniform": {"a": _NUMBER, "b": _NUMBER},
    "truncated_gaussian": {"mu": _NUMBER, "sigma": _NUMBER, "a": _NUMBER, "b": _NUMBER},
    "beta": {"alpha": _NUMBER, "beta": _NUMBER},
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["arms", "functional", "schedule", "budgets", "trials", "seed"],
    "properties": {
        "arms": {
            "type": "array",
            "minItems": 2,
            "items": {
                "type": "object",
                "required": ["dist"],
                "properties": {"dist": {"enum": sorted(ARM_SCHEMAS)}},
            },
        },
        "functional": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": ["mean", "mean_variance", "var", "avar", "entropy"]},
                "lambda": _NUMBER,
                "mode": {"enum": ["plugin", "knn"]},
                "k": {"type": "integer", "minimum": 1},
            },
        },
        "schedule": {
            "type": "object",
            "additionalProperties": False,
            "required": ["policy"],
            "properties": {
                "policy": {"enum": ["sr", "sh", "custom"]},
                "x": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            },
        },
        "budgets": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "constants": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                **{k: {"type": "number", "minimum": 0} for k in ("C1", "C2", "c1", "c2", "c4", "c5")},
                "M_knn": {"type": "integer", "minimum": 1},
                "D": {"type": "number", "exclusiveMinimum": 0},
                "D_prime": {"type": "number", "minimum": 0},
            },
        },
    },
}


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def parse_config(doc: dict, seed_override: Optional[int] = None) -> ExperimentConfig:
    """Validate a config document and build the experiment; raises ConfigError."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(f"{_path(err.absolute_path)}: {err.message}")

    arms = []
    for i, arm in enumerate(doc["arms"]):
        allowed = ARM_SCHEMAS[arm["dist"]]
        for key in arm:
            if key != "dist" and key not in allowed:
                raise ConfigError(f"arms[{i}].{key}: unknown key for {arm['dist']}")
        for key, schema in allowed.items():
            if key not in arm:
                raise ConfigError(f"arms[{i}].{key}: required for {arm['dist']}")
            try:
                jsonschema.validate(arm[key], schema)
            except jsonschema.ValidationError as exc:
                raise ConfigError(f"arms[{i}].{key}: {exc.message}") from None
        try:
            arms.append(distribution_from_dict(arm))
        except FunBanditError as exc:
            raise ConfigError(f"arms[{i}]: {exc}") from None

    try:
        functional = functional_from_dict(doc["functional"])
    except FunBanditError as exc:
        raise ConfigError(f"functional: {exc}") from None
    try:
        instance = BanditInstance(arms, functional)
    except FunBanditError as exc:
        raise ConfigError(f"arms: {exc}") from None
    try:
        constants = BoundConstants(**doc.get("constants", {}))
        sched = doc["schedule"]
        return ExperimentConfig(
            instance=instance,
            policy=sched["policy"],
            x=sched.get("x"),
            budgets=list(doc["budgets"]),
            trials=doc["trials"],
            master_seed=doc["seed"] if seed_override is None else seed_override,
            constants=constants,
        )
    except FunBanditError as exc:
        raise ConfigError(f"schedule: {exc}") from None


def load_config(path: str | Path, seed_override: Optional[int] = None) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(doc, seed_override)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = sweep_budgets(config, workers=args.workers)
    text = report.to_json(args.timing) if args.format == "json" else report.to_csv(args.timing)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)

    failed = [row for row in report.rows if row.error is not None]
    for row in failed:
        print(f"T={row.T}: {row.error_kind}: {row.error}", file=sys.stderr)
    if any(row.error_kind == InsufficientBudget.__name__ for row in failed):
        return EXIT_BUDGET
    return EXIT_INTERNAL if failed else EXIT_OK


def _constants(args: argparse.Namespace) -> BoundConstants:
    return BoundConstants(
        C1=args.C1, C2=args.C2, c1=args.c1, c2=args.c2, c4=args.c4, c5=args.c5,
        M_knn=args.M_knn, D=args.D, D_prime=args.D_prime,
    )


def _need(args: argparse.Namespace, *names: str) -> None:
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise DomainError("missing flag(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _bound_value(args: argparse.Namespace, H: int, K: int) -> float:
    f, T, d = args.functional, args.T, args.d
    if f == "mean":
        return generic_error_bound(H, K, T, d, Q_MEAN)
    if f == "mv":
        _need(args, "lam")
        return mv_error_bound(H, K, T, d, args.lam, args.A, args.B)
    if f == "var":
        if args.V is not None or args.W is not None:
            _need(args, "V", "W")
            v, w = args.V, args.W
        else:
            _need(args, "lam", "pdf")
            v, w = var_bias_variance(args.lam, T // H, args.pdf, args.pdf_deriv, _constants(args))
        print(f"V={v:.12g} W={w:.12g}")
        return var_error_bound(H, K, T, d, v, w)
    if f == "avar":
        _need(args, "lam", "M")
        return avar_error_bound(H, K, T, d, args.lam, args.M, _constants(args))
    if f == "entropy":
        n = T // H
        k = args.k if args.k is not None else max(1, int(n**0.5))
        return entropy_error_bound(H, K, T, d, n, _constants(args), k)
    raise DomainError(f"unknown functional {f!r}")


def cmd_bound(args: argparse.Namespace) -> int:
    try:
        schedule = make_schedule(args.K, args.schedule, args.x)
        H, K, T = schedule.H, schedule.K, args.T
        if not T > H:
            raise DomainError(f"need T > H, got T={T}, H={H}")
        raw = _bound_value(args, H, K)
        print(f"functional={args.functional} K={K} H={H} T={T} d={args.d:.12g}")
        print(f"raw={raw:.12g}")
        print(f"clamped={clamp_probability(raw):.12g}")
        if args.functional == "mean":
            if T > 2 * K:
                print(f"mean_case_bound={mean_case_bound(K, T, args.d):.12g}")
            if args.gamma_max is not None and args.delta is not None:
                reg, pac = regret_and_pac_bounds(H, K, T, args.d, args.gamma_max, args.delta)
                print(f"regret_bound={reg:.12g}")
                print(f"pac_regret_bound={pac:.12g}")
        elif args.gamma_max is not None:
            print(f"regret_bound={args.gamma_max * raw:.12g}")
    except (BiasDominates, SampleConditionUnmet) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VACUOUS
    except FunBanditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def cmd_schedule(args: argparse.Namespace) -> int:
    try:
        s = make_schedule(args.K, args.policy, args.x)
    except FunBanditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"policy={args.policy} K={s.K} L={s.L} H={s.H}")
    print("x=" + ",".join(map(str, s.x)))
    print("survivors=" + ",".join(map(str, s.survivors())))
    if args.T is not None:
        per_arm = args.T // s.H
        rounds = s.pulls_per_round(args.T)
        print(f"per_arm_per_round={per_arm}")
        print("round_pulls=" + ",".join(map(str, rounds)))
        print(f"total_pulls={sum(rounds)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="funbandit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte Carlo budget sweep from a JSON config")
    run.add_argument("config")
    run.add_argument("--out", "-o", default=None, help="output path (default stdout)")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--workers", type=int, default=None,
                     help="worker processes (default $FUNBANDIT_WORKERS or 1)")
    run.add_argument("--no-timing", dest="timing", action="store_false",
                     help="write wall_time_ms as 0 for byte-stable output")
    run.set_defaults(func=cmd_run)

    b = sub.add_parser("bound", help="evaluate a theoretical error bound")
    b.add_argument("--functional", choices=("mean", "mv", "var", "avar", "entropy"), required=True)
    b.add_argument("--K", type=int, required=True)
    b.add_argument("--T", type=int, required=True)
    b.add_argument("--d", type=float, required=True, help="minimum gap")
    b.add_argument("--schedule", choices=("sr", "sh", "custom"), default="sh")
    b.add_argument("--x", type=_int_list, default=None)
    b.add_argument("--lambda", dest="lam", type=float, default=None)
    b.add_argument("--A", type=float, default=0.0)
    b.add_argument("--B", type=float, default=1.0)
    b.add_argument("--M", type=float, default=None, help="reward magnitude bound (AVaR)")
    b.add_argument("--pdf", type=float, default=None, help="density at the true quantile (VaR)")
    b.add_argument("--pdf-deriv", type=float, default=0.0)
    b.add_argument("--V", type=float, default=None, help="bias bound override (VaR)")
    b.add_argument("--W", type=float, default=None, help="variance bound override (VaR)")
    b.add_argument("--k", type=int, default=None)
    b.add_argument("--gamma-max", type=float, default=None)
    b.add_argument("--delta", type=float, default=None)
    for name in ("C1", "C2", "c1", "c2", "c4", "c5"):
        b.add_argument(f"--{name}", type=float, default=0.0)
    b.add_argument("--M-knn", type=int, default=None)
    b.add_argument("--D", type=float, default=None)
    b.add_argument("--D-prime", type=float, default=None)
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("schedule", help="print an elimination schedule")
    s.add_argument("--K", type=int, required=True)
    s.add_argument("--policy", choices=("sr", "sh", "custom"), default="sh")
    s.add_argument("--x", type=_int_list, default=None)
    s.add_argument("--T", type=int, default=None)
    s.set_defaults(func=cmd_schedule)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FunBanditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
