"""Command-line front end: DMT curves, thresholds, validation, Monte-Carlo.

Subcommands:

* ``curve``     -- composed DMT over a gain sweep (full and no-side-info).
* ``threshold`` -- when does forgoing transmitter side information cost
  nothing: interference-exponent threshold for square channels, receive-
  antenna threshold under equal scaling.
* ``validate``  -- run the cross-checking suites (LP vs lattice oracle,
  closed form vs LP, the two program assemblies, Monte-Carlo slope vs
  theory) and emit JSON verdicts.
* ``mc``        -- outage sampling over an SNR sweep with slope fits.

Options may come from a JSON config file (``--config``); explicit flags win
over file values.  Outputs are deterministic: fixed header rows, numbers at
9 significant digits, JSON with sorted keys and no timestamps, so a rerun
with the same configuration is byte-identical.

Exit codes: 0 success, 1 domain/config error, 2 validation failure,
3 inconclusive Monte-Carlo.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .closedform import (
    DmtQuery,
    full_dmt,
    fcsit_symmetric_sum,
    nocsit_threshold_antennas,
    nocsit_threshold_symmetric,
)
from .exponents import (
    AntennaConfig,
    MultiplexingGainPair,
    ScalingExponents,
    build_fcsit_presimplified_program,
    build_fcsit_sum_program,
    build_iml_sum_program,
)
from .montecarlo import InsufficientOutageError, estimate_outage_slope
from .optengine import oracle_gap_bound, solve_grid_oracle, solve_lp
from .ptp import DomainError

__all__ = ["RunConfig", "main"]

_GRID_TOL = 1e-9


def _sig9(x: float) -> float:
    """Round to the 9 significant digits used everywhere in output."""
    return float(f"{x:.9g}")


def _fmt(x: float) -> str:
    return f"{x:.9g}"


@dataclass(frozen=True)
class RunConfig:
    """Effective options of one invocation, after config-file/flag merging."""

    command: str
    antennas: tuple[int, int, int, int] = (1, 1, 1, 1)
    alphas: tuple[float, float, float] = (1.0, 1.0, 1.0)
    r_start: float = 0.0
    r_stop: float | None = None
    r_step: float = 0.1
    r_pairs: tuple[tuple[float, float], ...] | None = None
    csit: str = "full"
    snr_grid: tuple[float, ...] = (15.0, 20.0, 25.0, 30.0, 35.0)
    samples: int = 200_000
    seed: int = 1
    r1: float = 0.25
    r2: float = 0.25
    workers: int = 1
    out: str | None = None
    fmt: str = "csv"
    inject_weight_perturbation: float = 0.0

    def __post_init__(self) -> None:
        if len(self.antennas) != 4 or any(
            not isinstance(v, int) or v < 1 for v in self.antennas
        ):
            raise ValueError("antennas must be four positive integers M1,N1,M2,N2")
        if len(self.alphas) != 3 or any(v <= 0 for v in self.alphas):
            raise ValueError("alphas must be three positive reals a11,a21,a22")
        if self.r_step <= 0:
            raise ValueError("r-step must be positive")
        if self.r_stop is not None and self.r_stop < self.r_start - _GRID_TOL:
            raise ValueError("r-stop must not be below r-start")
        if self.csit not in ("full", "none"):
            raise ValueError("csit must be 'full' or 'none'")
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be 'csv' or 'json'")

    @property
    def antenna_config(self) -> AntennaConfig:
        return AntennaConfig(*self.antennas)

    @property
    def scaling(self) -> ScalingExponents:
        return ScalingExponents(*self.alphas)

    def echo(self) -> dict:
        """Config as emitted in JSON outputs (stable, timestamp-free)."""
        data = {
            "command": self.command,
            "antennas": list(self.antennas),
            "alphas": [_sig9(v) for v in self.alphas],
            "csit": self.csit,
            "seed": self.seed,
            "format": self.fmt,
        }
        if self.command == "curve":
            if self.r_pairs is not None:
                data["r_pairs"] = [[_sig9(a), _sig9(b)] for a, b in self.r_pairs]
            else:
                data["r_start"] = _sig9(self.r_start)
                data["r_stop"] = None if self.r_stop is None else _sig9(self.r_stop)
                data["r_step"] = _sig9(self.r_step)
        if self.command in ("mc", "validate"):
            data["samples"] = self.samples
            data["workers"] = self.workers
        if self.command == "mc":
            data["snr_grid"] = [_sig9(v) for v in self.snr_grid]
            data["r1"] = _sig9(self.r1)
            data["r2"] = _sig9(self.r2)
        return data


def _parse_numbers(text: str, count: int, kind, label: str):
    parts = [p.strip() for p in text.split(",") if p.strip() != ""]
    if len(parts) != count:
        raise ValueError(f"{label} needs {count} comma-separated values")
    try:
        return tuple(kind(p) for p in parts)
    except ValueError as exc:
        raise ValueError(f"could not parse {label}: {exc}") from None


def _merge_config(args: argparse.Namespace) -> RunConfig:
    file_values: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_values = json.load(fh)
        if not isinstance(file_values, dict):
            raise ValueError("config file must hold a JSON object")

    def pick(flag_value, key: str, default):
        if flag_value is not None:
            return flag_value
        if key in file_values:
            return file_values[key]
        return default

    antennas = pick(
        _parse_numbers(args.antennas, 4, int, "--antennas") if args.antennas else None,
        "antennas",
        (1, 1, 1, 1),
    )
    alphas = pick(
        _parse_numbers(args.alphas, 3, float, "--alphas") if args.alphas else None,
        "alphas",
        (1.0, 1.0, 1.0),
    )
    snr_grid = pick(
        _parse_numbers(args.snr_grid, len(args.snr_grid.split(",")), float, "--snr-grid")
        if getattr(args, "snr_grid", None)
        else None,
        "snr_grid",
        (15.0, 20.0, 25.0, 30.0, 35.0),
    )
    r_pairs = file_values.get("r_pairs")
    if r_pairs is not None:
        r_pairs = tuple((float(a), float(b)) for a, b in r_pairs)
    return RunConfig(
        command=args.command,
        antennas=tuple(int(v) for v in antennas),
        alphas=tuple(float(v) for v in alphas),
        r_start=float(pick(getattr(args, "r_start", None), "r_start", 0.0)),
        r_stop=(
            None
            if pick(getattr(args, "r_stop", None), "r_stop", None) is None
            else float(pick(getattr(args, "r_stop", None), "r_stop", None))
        ),
        r_step=float(pick(getattr(args, "r_step", None), "r_step", 0.1)),
        r_pairs=r_pairs,
        csit=pick(args.csit, "csit", "full"),
        snr_grid=tuple(float(v) for v in snr_grid),
        samples=int(pick(getattr(args, "samples", None), "samples", 200_000)),
        seed=int(pick(args.seed, "seed", 1)),
        r1=float(pick(getattr(args, "r1", None), "r1", 0.25)),
        r2=float(pick(getattr(args, "r2", None), "r2", 0.25)),
        workers=int(pick(getattr(args, "workers", None), "workers", 1)),
        out=pick(args.out, "out", None),
        fmt=pick(args.fmt, "format", "csv"),
        inject_weight_perturbation=float(
            pick(
                getattr(args, "inject_weight_perturbation", None),
                "inject_weight_perturbation",
                0.0,
            )
        ),
    )


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; explicit flags win")
    common.add_argument("--antennas", help="M1,N1,M2,N2 (default 1,1,1,1)")
    common.add_argument("--alphas", help="a11,a21,a22 (default 1,1,1)")
    common.add_argument("--csit", choices=("full", "none"))
    common.add_argument("--seed", type=int, help="master RNG seed (default 1)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"))

    parser = argparse.ArgumentParser(
        prog="zicdmt",
        description="Diversity-multiplexing tradeoff of the MIMO Z interference channel",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    curve = sub.add_parser(
        "curve", parents=[common], help="DMT over a symmetric gain sweep r1=r2=r"
    )
    curve.add_argument("--r-start", type=float, dest="r_start")
    curve.add_argument("--r-stop", type=float, dest="r_stop")
    curve.add_argument("--r-step", type=float, dest="r_step")

    sub.add_parser(
        "threshold", parents=[common], help="no-side-information optimality threshold"
    )

    validate = sub.add_parser(
        "validate", parents=[common], help="run the cross-check suites"
    )
    validate.add_argument("--samples", type=int)
    validate.add_argument("--workers", type=int)
    validate.add_argument(
        "--inject-weight-perturbation",
        type=float,
        dest="inject_weight_perturbation",
        help=argparse.SUPPRESS,
    )

    mc = sub.add_parser(
        "mc", parents=[common], help="Monte-Carlo outage sweep and slope fit"
    )
    mc.add_argument("--snr-grid", dest="snr_grid", help="comma-separated dB values")
    mc.add_argument("--samples", type=int)
    mc.add_argument("--workers", type=int)
    mc.add_argument("--r1", type=float)
    mc.add_argument("--r2", type=float)
    return parser


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_curve(rc: RunConfig) -> tuple[int, str]:
    cfg = rc.antenna_config
    alphas = rc.scaling
    pair_mode = rc.r_pairs is not None
    if pair_mode:
        pairs = list(rc.r_pairs)
    else:
        stop = rc.r_stop
        if stop is None:
            stop = min(
                min(cfg.m1, cfg.n1) * alphas.alpha11,
                min(cfg.m2, cfg.n2) * alphas.alpha22,
            )
        count = int(math.floor((stop - rc.r_start) / rc.r_step + _GRID_TOL)) + 1
        pairs = [(rc.r_start + i * rc.r_step,) * 2 for i in range(max(count, 0))]

    rows = []
    for r1, r2 in pairs:
        try:
            gains = MultiplexingGainPair(r1, r2)
            point_full = full_dmt(DmtQuery(cfg, alphas, gains, "full"))
            point_none = full_dmt(DmtQuery(cfg, alphas, gains, "none"))
        except (DomainError, ValueError) as exc:
            raise DomainError(f"at r1={_fmt(r1)}, r2={_fmt(r2)}: {exc}") from None
        rows.append(
            (r1, r2, point_full.d, point_none.d, point_full.d1, point_full.d2, point_full.ds)
        )

    columns = ["d_full", "d_nocsit", "d_O1", "d_O2", "d_Os"]
    if rc.fmt == "csv":
        head = ("r1,r2," if pair_mode else "r,") + ",".join(columns)
        lines = [head]
        for row in rows:
            gains = row[:2] if pair_mode else row[:1]
            lines.append(",".join(_fmt(v) for v in (*gains, *row[2:])))
        return 0, "\n".join(lines) + "\n"
    payload = {
        "config": rc.echo(),
        "rows": [
            {
                **({"r1": _sig9(r1), "r2": _sig9(r2)} if pair_mode else {"r": _sig9(r1)}),
                **{name: _sig9(v) for name, v in zip(columns, rest)},
            }
            for r1, r2, *rest in rows
        ],
    }
    return 0, json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _cmd_threshold(rc: RunConfig) -> tuple[int, str]:
    cfg = rc.antenna_config
    alphas = rc.scaling
    if cfg.m1 == cfg.n1 == cfg.m2 == cfg.n2:
        threshold = nocsit_threshold_symmetric(cfg.m1)
        kind, parameter = "symmetric", "alpha21"
        value = alphas.alpha21
        met = value >= threshold - _GRID_TOL
    elif cfg.m1 == cfg.m2 and cfg.m1 <= min(cfg.n1, cfg.n2):
        threshold, met = nocsit_threshold_antennas(cfg.m1, cfg.n1, cfg.n2)
        kind, parameter = "antennas", "n1"
        value = float(cfg.n1)
    else:
        raise DomainError(
            "no threshold result applies: need a square channel or equal "
            "transmitter counts with m <= min(n1, n2)"
        )
    if rc.fmt == "csv":
        lines = [
            "kind,parameter,threshold,value,met",
            f"{kind},{parameter},{_fmt(threshold)},{_fmt(value)},{str(met).lower()}",
        ]
        return 0, "\n".join(lines) + "\n"
    payload = {
        "config": rc.echo(),
        "kind": kind,
        "parameter": parameter,
        "threshold": _sig9(threshold),
        "value": _sig9(value),
        "met": met,
    }
    return 0, json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _check_lp_vs_oracle() -> dict:
    step = 0.25
    cases = [
        (build_fcsit_sum_program, AntennaConfig(1, 1, 1, 1), (0.0, 0.5, 1.0)),
        (build_fcsit_sum_program, AntennaConfig(2, 2, 2, 2), (0.0, 1.0, 2.0)),
        (build_iml_sum_program, AntennaConfig(1, 2, 1, 2), (0.0, 1.0, 2.0)),
    ]
    alphas = ScalingExponents(1.0, 1.0, 1.0)
    worst = 0.0
    points = 0
    for builder, cfg, grid in cases:
        for r_s in grid:
            program = builder(cfg, alphas, r_s)
            lp = solve_lp(program).optimal_value
            oracle = solve_grid_oracle(program, step).optimal_value
            bound = oracle_gap_bound(program, step)
            if oracle < lp - 1e-9 or oracle > lp + bound + 1e-9:
                return {
                    "name": "lp_vs_oracle",
                    "status": "fail",
                    "detail": f"violation at r_s={r_s}: lp={lp:.9g} oracle={oracle:.9g}",
                }
            worst = max(worst, oracle - lp)
            points += 1
    return {
        "name": "lp_vs_oracle",
        "status": "pass",
        "detail": f"{points} instances, max oracle excess {worst:.3g}",
    }


def _check_closed_form_vs_lp(perturbation: float) -> dict:
    alphas_of = lambda a: ScalingExponents(1.0, a, 1.0)  # noqa: E731
    worst = 0.0
    points = 0
    for n in (1, 2):
        cfg = AntennaConfig(n, n, n, n)
        for alpha in (0.5, 1.0, 2.0):
            end = n * (2 - alpha) if alpha <= 1 else n * alpha
            steps = int(round(end / 0.25))
            for i in range(steps + 1):
                r_s = min(i * 0.25, end)
                program = build_fcsit_sum_program(cfg, alphas_of(alpha), r_s)
                if perturbation:
                    weights = (
                        program.linear_weights[0] + perturbation,
                    ) + program.linear_weights[1:]
                    program = dataclasses.replace(program, linear_weights=weights)
                lp = max(0.0, solve_lp(program).optimal_value)
                closed = fcsit_symmetric_sum(n, alpha, r_s)
                gap = abs(lp - closed)
                worst = max(worst, gap)
                points += 1
                if gap > 1e-6:
                    return {
                        "name": "closed_form_vs_lp",
                        "status": "fail",
                        "detail": (
                            f"n={n} alpha={alpha} r_s={r_s:.9g}: "
                            f"closed={closed:.9g} lp={lp:.9g}"
                        ),
                    }
    return {
        "name": "closed_form_vs_lp",
        "status": "pass",
        "detail": f"{points} points, max gap {worst:.3g}",
    }


def _check_presimplified(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        cfg = AntennaConfig(*(int(v) for v in rng.integers(1, 3, size=4)))
        alphas = ScalingExponents(*(float(v) for v in rng.uniform(0.25, 2.5, size=3)))
        capacity = (
            cfg.p * alphas.alpha21
            + cfg.q1 * alphas.alpha11
            + cfg.q2 * alphas.alpha22
        )
        r_s = float(rng.uniform(0.0, 1.0)) * capacity
        direct = solve_lp(build_fcsit_sum_program(cfg, alphas, r_s)).optimal_value
        pieces = solve_lp(
            build_fcsit_presimplified_program(cfg, alphas, r_s)
        ).optimal_value
        gap = abs(direct - pieces)
        worst = max(worst, gap)
        if gap > 1e-7:
            return {
                "name": "presimplified_vs_simplified",
                "status": "fail",
                "detail": f"gap {gap:.3g} at cfg={cfg} r_s={r_s:.9g}",
            }
    return {
        "name": "presimplified_vs_simplified",
        "status": "pass",
        "detail": f"20 instances, max gap {worst:.3g}",
    }


def _check_mc_slope(samples: int, seed: int, workers: int) -> dict:
    try:
        estimate = estimate_outage_slope(
            AntennaConfig(1, 1, 1, 1),
            ScalingExponents(1.0, 1.0, 1.0),
            MultiplexingGainPair(0.25, 0.25),
            "full",
            (15.0, 20.0, 25.0, 30.0, 35.0),
            samples,
            seed,
            workers=workers,
        )
    except InsufficientOutageError as exc:
        return {"name": "mc_slope_vs_theory", "status": "inconclusive", "detail": str(exc)}
    slope = estimate.composed_slope
    gap = abs(slope - 0.75)
    status = "pass" if gap <= 0.2 else "fail"
    return {
        "name": "mc_slope_vs_theory",
        "status": status,
        "detail": f"composed slope {slope:.4g} vs theory 0.75 (tolerance 0.2)",
    }


def _cmd_validate(rc: RunConfig) -> tuple[int, str]:
    checks = [
        _check_lp_vs_oracle(),
        _check_closed_form_vs_lp(rc.inject_weight_perturbation),
        _check_presimplified(rc.seed),
        _check_mc_slope(rc.samples, rc.seed, rc.workers),
    ]
    if any(c["status"] == "fail" for c in checks):
        overall, code = "fail", 2
    elif any(c["status"] == "inconclusive" for c in checks):
        overall, code = "inconclusive", 3
    else:
        overall, code = "pass", 0
    payload = {"config": rc.echo(), "checks": checks, "status": overall}
    return code, json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _cmd_mc(rc: RunConfig) -> tuple[int, str]:
    estimate = estimate_outage_slope(
        rc.antenna_config,
        rc.scaling,
        MultiplexingGainPair(rc.r1, rc.r2),
        rc.csit,
        rc.snr_grid,
        rc.samples,
        rc.seed,
        workers=rc.workers,
    )
    print(
        f"composed slope {estimate.composed_slope:.4g} "
        f"(+/- {estimate.composed_halfwidth:.4g})",
        file=sys.stderr,
    )
    if rc.fmt == "csv":
        return 0, "\n".join(estimate.csv_lines()) + "\n"

    def clean(x: float):
        return None if math.isnan(x) else _sig9(x)

    payload = {
        "config": rc.echo(),
        "rho_db": [_sig9(v) for v in estimate.rho_db],
        "samples": list(estimate.samples),
        "outages": {k: list(v) for k, v in estimate.outages.items()},
        "slopes": {k: clean(v) for k, v in estimate.slopes.items()},
        "halfwidths": {k: clean(v) for k, v in estimate.halfwidths.items()},
        "min_hits": estimate.min_hits,
        "resampled": estimate.resampled,
    }
    return 0, json.dumps(payload, sort_keys=True, indent=2) + "\n"


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        rc = _merge_config(args)
        if rc.command == "curve":
            code, text = _cmd_curve(rc)
        elif rc.command == "threshold":
            code, text = _cmd_threshold(rc)
        elif rc.command == "validate":
            code, text = _cmd_validate(rc)
        else:
            code, text = _cmd_mc(rc)
    except InsufficientOutageError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return 3
    except (DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if rc.out:
        with open(rc.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
