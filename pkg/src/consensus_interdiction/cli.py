"""Command-line entry point: simulate, compare, spe-check, sweep.

Exit codes are a stable contract: 0 success, 1 usage/configuration error,
2 runtime enumeration guard. Machine files carry floats at 17 significant
digits (CSV) or exact shortest-round-trip form (JSON); console summaries
round to 6. Identical inputs produce byte-identical files, so volatile
fields such as wall-clock time go to the console only.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional

from .config import ConfigError, GameConfig, parse_config, to_document
from .dynamics import trajectory_to_csv
from .game import run, upper_lower_values
from .oracle import DEFAULT_BRUTE_FORCE_GUARD, brute_force_value, spe_check
from .strategies import EnumerationGuardError

COMPARE_TOLERANCE = 1e-3


def _load(config_path: str):
    try:
        text = Path(config_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {config_path}: {exc}") from exc
    return parse_config(text)


def _apply_overrides(cfg: GameConfig, args) -> GameConfig:
    updates = {}
    if getattr(args, "dt_override", None) is not None:
        updates["dt"] = args.dt_override
    if getattr(args, "k_override", None) is not None:
        updates["switching_count"] = args.k_override
    if getattr(args, "guard", None) is not None:
        updates["subset_guard"] = args.guard
    if not updates:
        return cfg
    try:
        return replace(cfg, **updates)
    except ValueError as exc:
        raise ConfigError(f"override rejected: {exc}") from exc


def _dump_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _relative_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    if scale == 0.0:
        return 0.0
    return abs(a - b) / scale


def cmd_simulate(args) -> int:
    g, cfg = _load(args.config)
    cfg = _apply_overrides(cfg, args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    result = run(g, cfg)
    elapsed = time.perf_counter() - started
    (out_dir / "trajectory.csv").write_text(
        trajectory_to_csv(result.trajectory), encoding="utf-8"
    )
    record = result.to_record()
    record["config"] = to_document(g, cfg)
    _dump_json(record, out_dir / "result.json")
    print(f"mode={cfg.mode} J={result.value:.6g} wall_clock={elapsed:.3f}s")
    print(f"wrote {out_dir / 'trajectory.csv'} and {out_dir / 'result.json'}")
    return 0


def cmd_compare(args) -> int:
    g, cfg = _load(args.config)
    cfg = _apply_overrides(cfg, args)
    guard = args.guard if args.guard is not None else DEFAULT_BRUTE_FORCE_GUARD
    all_pass = True
    for mode in ("maxmin", "minmax"):
        mode_cfg = replace(cfg, mode=mode)
        greedy = run(g, mode_cfg).value
        exact = brute_force_value(g, mode_cfg, guard=guard)
        gap = _relative_gap(greedy, exact.value)
        verdict = "PASS" if gap <= COMPARE_TOLERANCE else "FAIL"
        all_pass = all_pass and gap <= COMPARE_TOLERANCE
        print(
            f"{mode}: greedy={greedy:.6g} brute_force={exact.value:.6g} "
            f"gap={gap:.6g} [{verdict}] (enumerated {exact.enumerated} sequences)"
        )
    print("comparison " + ("PASS" if all_pass else "FAIL") + f" at {COMPARE_TOLERANCE:g}")
    return 0


def cmd_spe_check(args) -> int:
    g, cfg = _load(args.config)
    cfg = _apply_overrides(cfg, args)
    try:
        certificate = spe_check(g, cfg.x0, cfg.horizon, args.epsilon, cfg.b)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(json.dumps(certificate.to_record(), indent=2, sort_keys=True))
    print(certificate.verdict_line())
    if certificate.satisfied:
        lower, upper = upper_lower_values(g, cfg)
        gap = _relative_gap(lower, upper)
        print(
            f"lower_value={lower:.6g} upper_value={upper:.6g} relative_gap={gap:.6g}"
        )
    return 0


def _sweep_config(base: GameConfig, parameter: str, value) -> GameConfig:
    try:
        if parameter == "b":
            return replace(base, b=float(value))
        if parameter == "ell":
            return replace(base, ell=int(value))
        if parameter == "K":
            return replace(base, switching_count=int(value))
        return replace(base, horizon=float(value))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sweep value {value!r} rejected: {exc}") from exc


def cmd_sweep(args) -> int:
    try:
        doc = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read sweep spec {args.spec}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed sweep spec: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) != {"parameter", "values", "config"}:
        raise ConfigError("sweep spec must have exactly: parameter, values, config")
    parameter = doc["parameter"]
    if parameter not in ("b", "ell", "K", "T"):
        raise ConfigError(f"sweep parameter must be one of b, ell, K, T, got {parameter!r}")
    values = doc["values"]
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep values must be a non-empty list")
    g, base = parse_config(json.dumps(doc["config"]))
    base = _apply_overrides(base, args)
    configs = []
    for value in values:
        cfg = _sweep_config(base, parameter, value)
        if cfg.ell > g.edge_count:
            raise ConfigError(f"swept ell={cfg.ell} exceeds edge count {g.edge_count}")
        configs.append((value, cfg))

    def one_row(item):
        value, cfg = item
        lower, upper = upper_lower_values(g, cfg)
        baseline = run(g, replace(cfg, mode="uncontrolled")).value
        return f"{parameter},{value},{lower:.17g},{upper:.17g},{baseline:.17g}"

    out_path = Path(args.out)
    try:
        if args.threads and args.threads > 1:
            with ThreadPoolExecutor(max_workers=args.threads) as pool:
                rows = list(pool.map(one_row, configs))
        else:
            rows = [one_row(item) for item in configs]
    except Exception:
        # Abort without leaving a partial file behind.
        if out_path.exists():
            out_path.unlink()
        raise
    header = "parameter,value,V_lower,V_upper,J_uncontrolled"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")
    print(f"wrote {len(rows)} rows to {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="consensus-interdiction",
        description="Link-interdiction games over continuous-time averaging",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_out: bool) -> None:
        p.add_argument("--config", required=True, help="path to a configuration JSON")
        if with_out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--guard", type=int, default=None, help="enumeration guard override")
        p.add_argument("--dt-override", type=float, default=None, dest="dt_override")
        p.add_argument("--k-override", type=int, default=None, dest="k_override")

    p_sim = sub.add_parser("simulate", help="run one game and write trajectory + result")
    common(p_sim, with_out=True)
    p_sim.set_defaults(handler=cmd_simulate)

    p_cmp = sub.add_parser("compare", help="greedy vs brute-force values, both orders")
    common(p_cmp, with_out=False)
    p_cmp.set_defaults(handler=cmd_compare)

    p_spe = sub.add_parser("spe-check", help="evaluate the saddle-point certificate")
    common(p_spe, with_out=False)
    p_spe.add_argument("--epsilon", type=float, required=True)
    p_spe.set_defaults(handler=cmd_spe_check)

    p_swp = sub.add_parser("sweep", help="sweep one parameter and tabulate game values")
    p_swp.add_argument("--spec", required=True, help="path to a sweep spec JSON")
    p_swp.add_argument("--out", required=True, help="output CSV path")
    p_swp.add_argument("--threads", type=int, default=1)
    p_swp.add_argument("--guard", type=int, default=None)
    p_swp.add_argument("--dt-override", type=float, default=None, dest="dt_override")
    p_swp.add_argument("--k-override", type=int, default=None, dest="k_override")
    p_swp.set_defaults(handler=cmd_sweep)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except EnumerationGuardError as exc:
        print(f"enumeration guard: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
