"""Command-line front end.

Subcommands: ``gsvd`` (factor a channel pair and report its structure),
``region`` (exact inner/outer slope regions for given subchannel counts),
``sweep`` (rate-versus-power table and estimated slopes for one scheme),
``verify`` (the end-to-end check suite). Channel specs and reports are
JSON; sweep tables can be emitted as CSV. Exit codes: 0 success,
1 validation or parse error, 2 check failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .channel import MimoBcChannel, transform_channel
from .dofregion import inner_region, outer_region, regions_equal, vertices
from .errors import MimodofError, NumericalError, ValidationError
from .matdecomp import DEFAULT_RANK_TOL, gsvd
from .rates import DofParams, estimate_dof
from .verify import RNG_NAME, dpc_rate_curve, run_verification, zf_rate_curve

DEFAULT_SLOPE_TOL = 0.05
DEFAULT_RECONSTRUCTION_TOL = 1e-8


@dataclass(frozen=True)
class ChannelSpec:
    """Channel description: explicit matrices, or dims plus a seed."""

    h1: tuple | None = None
    h2: tuple | None = None
    power: float = 1.0
    seed: int | None = None
    dims: tuple[int, int, int] | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelSpec":
        if not isinstance(data, dict):
            raise ValidationError("channel spec must be a JSON object")
        known = {"h1", "h2", "power", "seed", "dims"}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown channel spec fields: {sorted(unknown)}")
        explicit = "h1" in data or "h2" in data
        generated = "dims" in data
        if explicit == generated:
            raise ValidationError(
                "provide exactly one of: explicit matrices (h1, h2) or dims with a seed"
            )
        power = float(data.get("power", 1.0))
        if explicit:
            if "h1" not in data or "h2" not in data:
                raise ValidationError("both h1 and h2 are required")
            h1 = _as_rectangular(data["h1"], "h1")
            h2 = _as_rectangular(data["h2"], "h2")
            return cls(h1=h1, h2=h2, power=power, seed=data.get("seed"))
        dims = data["dims"]
        if not (isinstance(dims, (list, tuple)) and len(dims) == 3):
            raise ValidationError("dims must be [t, r1, r2]")
        t, r1, r2 = (int(x) for x in dims)
        if min(t, r1, r2) < 1:
            raise ValidationError("dims must be positive")
        if data.get("seed") is None:
            raise ValidationError("generated channels require a seed")
        return cls(power=power, seed=int(data["seed"]), dims=(t, r1, r2))

    def to_dict(self) -> dict:
        out: dict = {"power": self.power}
        if self.dims is not None:
            out["dims"] = list(self.dims)
        if self.h1 is not None:
            out["h1"] = [list(row) for row in self.h1]
            out["h2"] = [list(row) for row in self.h2]
        if self.seed is not None:
            out["seed"] = self.seed
        return out


def _as_rectangular(rows, name) -> tuple:
    if not isinstance(rows, (list, tuple)) or not rows:
        raise ValidationError(f"{name} must be a non-empty array of rows")
    width = None
    out = []
    for row in rows:
        if not isinstance(row, (list, tuple)) or not row:
            raise ValidationError(f"{name} rows must be non-empty arrays")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValidationError(f"{name} must be rectangular")
        out.append(tuple(float(v) for v in row))
    return tuple(out)


def realize_channel(spec: ChannelSpec) -> tuple[MimoBcChannel, dict]:
    """Instantiate the channel, generating matrices from the seed if needed."""
    if spec.h1 is not None:
        ch = MimoBcChannel(h1=np.array(spec.h1), h2=np.array(spec.h2), power=spec.power)
        return ch, {"source": "explicit"}
    t, r1, r2 = spec.dims
    rng = np.random.default_rng(spec.seed)
    h1 = rng.standard_normal((r1, t))
    h2 = rng.standard_normal((r2, t))
    ch = MimoBcChannel(h1=h1, h2=h2, power=spec.power)
    return ch, {"source": "generated", "generator": RNG_NAME, "seed": spec.seed}


def load_spec_file(path: str) -> ChannelSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"malformed JSON in {path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return ChannelSpec.from_dict(data)


def _digest(payload) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_report(command: str, inputs: dict, tolerances: dict, results: dict) -> dict:
    return {
        "tool": {"name": "mimodof", "version": __version__},
        "command": command,
        "inputs": inputs,
        "inputs_digest": _digest(inputs),
        "tolerances": tolerances,
        "results": results,
    }


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_report(report: dict, output: str | None) -> None:
    _emit(json.dumps(report, sort_keys=True, indent=2) + "\n", output)


def _matrix_list(a: np.ndarray) -> list:
    return [[float(v) for v in row] for row in a]


# ---------------------------------------------------------------------------
# subcommands


def cmd_gsvd(args) -> int:
    spec = load_spec_file(args.input)
    ch, gen = realize_channel(spec)
    factors = gsvd(ch.h1, ch.h2, tol=args.tol)
    pch = transform_channel(ch, factors)
    rec1, rec2 = factors.reconstruction_residuals(ch.h1, ch.h2)
    n1, nc, n2 = factors.set_sizes
    results = {
        "k": factors.k,
        "p": factors.p,
        "s": factors.s,
        "set_sizes": {"s1": n1, "sc": nc, "s2": n2},
        "zeta": pch.zeta,
        "relaxed_power": pch.relaxed_power,
        "gains1": {str(l): g for l, g in sorted(pch.gains1.items())},
        "gains2": {str(l): g for l, g in sorted(pch.gains2.items())},
        "partition": {
            "s1": list(pch.partition.s1),
            "sc": list(pch.partition.sc),
            "s2": list(pch.partition.s2),
            "sc1": list(pch.partition.sc1),
            "sc2": list(pch.partition.sc2),
        },
        "factors": {
            "psi1": _matrix_list(factors.psi1),
            "psi2": _matrix_list(factors.psi2),
            "psi0": _matrix_list(factors.psi0),
            "omega": _matrix_list(factors.omega),
            "sigma1": _matrix_list(factors.sigma1),
            "sigma2": _matrix_list(factors.sigma2),
        },
        "residuals": {
            "reconstruction": [rec1, rec2],
            "orthonormality": list(factors.orthonormality_residuals()),
        },
        "channel": gen,
    }
    report = build_report(
        "gsvd", spec.to_dict(), {"rank_tol": args.tol}, results
    )
    _emit_report(report, args.output)
    return 0


def _parse_sizes(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValidationError("sizes must be three comma-separated integers: n1,nc,n2")
    try:
        sizes = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise ValidationError(f"sizes must be integers: {exc}") from exc
    if min(sizes) < 0:
        raise ValidationError("sizes must be non-negative")
    return sizes


def _region_payload(region) -> dict:
    payload = region.to_dict()
    payload["vertices"] = sorted(
        [str(c) for c in v] for v in vertices(region)
    )
    return payload


def cmd_region(args) -> int:
    sizes = _parse_sizes(args.sizes)
    results: dict = {"sizes": list(sizes)}
    if args.which in ("inner", "both"):
        results["inner"] = _region_payload(inner_region(sizes))
    if args.which in ("outer", "both"):
        results["outer"] = _region_payload(outer_region(sizes))
    if args.which == "both":
        results["equal"] = regions_equal(inner_region(sizes), outer_region(sizes))
    report = build_report(
        "region", {"sizes": list(sizes), "which": args.which}, {}, results
    )
    _emit_report(report, args.output)
    return 0


def _parse_params(text: str) -> DofParams:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValidationError("params must be three comma-separated integers: a1,a2,b")
    try:
        a1, a2, b = (int(p) for p in parts)
    except ValueError as exc:
        raise ValidationError(f"params must be integers: {exc}") from exc
    return DofParams(alpha1=a1, alpha2=a2, beta=b)


def _parse_powers(text: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValidationError("powers must be min,max,count (geometric grid)")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ValidationError(f"bad powers grid: {exc}") from exc
    if count < 2:
        raise ValidationError("the powers grid needs at least 2 points")
    if not (0 < lo < hi):
        raise ValidationError("powers must satisfy 0 < min < max")
    return [float(p) for p in np.geomspace(lo, hi, count)]


def cmd_sweep(args) -> int:
    spec = load_spec_file(args.input)
    if args.seed is not None and spec.dims is not None:
        spec = ChannelSpec(power=spec.power, seed=args.seed, dims=spec.dims)
    ch, gen = realize_channel(spec)
    factors = gsvd(ch.h1, ch.h2, tol=args.rank_tol)
    pch = transform_channel(ch, factors)
    sizes = pch.partition.sizes
    params = _parse_params(args.params)
    params.validate_for(sizes)
    powers = _parse_powers(args.powers)

    if args.scheme == "dpc":
        curve = dpc_rate_curve(ch, factors, pch, params, powers)
    else:
        curve = zf_rate_curve(pch, params, powers)
    est = estimate_dof(curve)
    expected = params.dof_point(sizes)
    slopes = est.as_floats()
    verdict = all(abs(a - b) <= args.slope_tol for a, b in zip(slopes, expected))

    if args.format == "csv":
        _emit(_sweep_csv(curve), args.output)
        return 0 if verdict else 2

    results = {
        "scheme": args.scheme,
        "sizes": list(sizes),
        "params": [params.alpha1, params.alpha2, params.beta],
        "table": [
            {"power": p, "r0": rt.r0, "r1": rt.r1, "r2": rt.r2} for p, rt in curve
        ],
        "slopes": list(slopes),
        "expected_point": list(expected),
        "verdict": verdict,
        "channel": gen,
    }
    report = build_report(
        "sweep",
        {
            "spec": spec.to_dict(),
            "params": [params.alpha1, params.alpha2, params.beta],
            "powers": powers,
            "scheme": args.scheme,
        },
        {"slope_tol": args.slope_tol, "rank_tol": args.rank_tol},
        results,
    )
    _emit_report(report, args.output)
    return 0 if verdict else 2


def _sweep_csv(curve) -> str:
    lines = ["P,R0,R1,R2"]
    for p, rt in curve:
        lines.append(f"{p:.12e},{rt.r0:.12e},{rt.r1:.12e},{rt.r2:.12e}")
    return "\n".join(lines) + "\n"


def cmd_verify(args) -> int:
    report = run_verification(
        trials=args.trials,
        max_dim=args.max_dim,
        seed=args.seed,
        tol=args.tol,
        slope_tol=args.slope_tol,
        rank_tol=args.rank_tol,
        region_grid=args.region_grid,
    )
    payload = build_report(
        "verify",
        {
            "trials": args.trials,
            "max_dim": args.max_dim,
            "seed": args.seed,
            "region_grid": args.region_grid,
        },
        {
            "reconstruction_tol": args.tol,
            "slope_tol": args.slope_tol,
            "rank_tol": args.rank_tol,
        },
        report.to_dict(),
    )
    _emit_report(payload, args.output)
    if not report.ok:
        for check in report.checks:
            if not check.passed:
                print(f"FAILED: {check.name}: {check.detail}", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep 2 for check failures
        raise ValidationError(message)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mimodof", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mimodof {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_gsvd = sub.add_parser("gsvd", help="factor a channel pair and report its structure")
    p_gsvd.add_argument("--input", required=True, help="channel spec JSON file")
    p_gsvd.add_argument("--output", help="write the JSON report here instead of stdout")
    p_gsvd.add_argument("--tol", type=float, default=DEFAULT_RANK_TOL, help="rank threshold")
    p_gsvd.set_defaults(func=cmd_gsvd)

    p_region = sub.add_parser("region", help="exact slope regions for subchannel counts")
    p_region.add_argument("--sizes", required=True, help="n1,nc,n2")
    p_region.add_argument("--which", choices=("inner", "outer", "both"), default="both")
    p_region.add_argument("--output")
    p_region.set_defaults(func=cmd_region)

    p_sweep = sub.add_parser("sweep", help="rate table and slope estimate for one scheme")
    p_sweep.add_argument("--input", required=True, help="channel spec JSON file")
    p_sweep.add_argument("--params", required=True, help="a1,a2,b allocation counters")
    p_sweep.add_argument("--powers", default="1e6,1e12,3", help="min,max,count geometric grid")
    p_sweep.add_argument("--scheme", choices=("dpc", "zf"), default="dpc")
    p_sweep.add_argument("--format", choices=("json", "csv"), default="json")
    p_sweep.add_argument("--output")
    p_sweep.add_argument("--seed", type=int, help="override the spec seed")
    p_sweep.add_argument("--slope-tol", type=float, default=DEFAULT_SLOPE_TOL)
    p_sweep.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the end-to-end check suite")
    p_verify.add_argument("--trials", type=int, default=10)
    p_verify.add_argument("--max-dim", type=int, default=5)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--tol", type=float, default=DEFAULT_RECONSTRUCTION_TOL,
                          help="reconstruction residual tolerance")
    p_verify.add_argument("--slope-tol", type=float, default=DEFAULT_SLOPE_TOL)
    p_verify.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL)
    p_verify.add_argument("--region-grid", type=int, default=2,
                          help="region equality checked on sizes 0..grid cubed")
    p_verify.add_argument("--output")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except MimodofError as exc:  # any other package error is a validation issue
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
