"""Command-line entry point.

Subcommands: generate-profile, validate-profile, run, sweep, oracle.
Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import re
import statistics
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from . import reports
from .cost_model import DEFAULT_BANDWIDTH_BPS, SimulationConfig
from .errors import ParameterError, ValidationError
from .optimizer import GATE_CANDIDATE, GATE_CURRENT, AnnealerParams, brute_force_select, sa_select
from .policies import OnDeviceParams, PolicyKind, PolicyName
from .profile import (
    EnhancementLadder,
    QualityLadder,
    SyntheticProfileParams,
    generate_synthetic_profile,
    load_profile,
    profile_to_csv,
    save_profile,
    shape_report,
)
from .simulator import DEFAULT_SWEEP_BPS, BandwidthTrace, load_trace, run_simulation, sweep_bandwidth

log = logging.getLogger("lowlight_va")

_PREFIX = {"": 1.0, "k": 1e3, "m": 1e6, "g": 1e9, "t": 1e12}
_QUANTITY = re.compile(r"^\s*([-+0-9.eE]+)\s*([kKmMgGtT]?)(bps|flops|bit|bits|b)?\s*$", re.IGNORECASE)


def parse_quantity(text: str, unit: str) -> float:
    """Parse a number with an optional SI prefix and unit, e.g. ``2Mbps`` or ``34.1TFLOPS``.

    A bare number is taken in base units (bps, FLOP/s, bits).
    """
    m = _QUANTITY.match(str(text))
    if not m:
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} as {unit}")
    number, prefix, suffix = m.groups()
    if suffix is not None and not _unit_matches(suffix.lower(), unit):
        raise argparse.ArgumentTypeError(f"unit {suffix!r} in {text!r} is not {unit}")
    if prefix and suffix is None:
        raise argparse.ArgumentTypeError(f"prefix without unit in {text!r}")
    try:
        value = float(number)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} as {unit}") from None
    return value * _PREFIX[prefix.lower()]


def _unit_matches(suffix, unit):
    if unit == "bps":
        return suffix == "bps"
    if unit == "flops":
        return suffix == "flops"
    return suffix in ("bit", "bits", "b")


def _bps(text):
    return parse_quantity(text, "bps")


def _flops(text):
    return parse_quantity(text, "flops")


def _bits(text):
    return parse_quantity(text, "bits")


def _bitrate_list(text):
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty bitrate list")
    # bare numbers in a sweep list are Mbps, matching the default grid
    return [parse_quantity(t, "bps") if re.search(r"[a-zA-Z]", t) else float(t) * 1e6 for t in items]


def _policy_list(text):
    try:
        return [PolicyKind.parse(t) for t in text.split(",") if t.strip()]
    except ParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text):
    return tuple(int(t) for t in text.split(","))


def _float_list(text):
    return tuple(float(t) for t in text.split(","))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    profile_path: Path | None = None
    trace_path: Path | None = None
    cyclic: bool = False
    bandwidth_bps: float = DEFAULT_BANDWIDTH_BPS
    sim: SimulationConfig = field(default_factory=SimulationConfig)
    annealer: AnnealerParams = field(default_factory=AnnealerParams)
    policies: list = field(default_factory=lambda: [PolicyKind(PolicyName.PROPOSED)])
    out_dir: Path = Path("out")
    seed: int = 42
    workers: int = 1

    @classmethod
    def from_args(cls, args, default_policies=(PolicyName.PROPOSED,)) -> "RunManifest":
        for p in (args.profile, args.trace):
            if p is not None and not Path(p).is_file():
                raise ValidationError(f"{p}: file not found")
        sim_kwargs = {
            f.name: getattr(args, f.name)
            for f in fields(SimulationConfig)
            if getattr(args, f.name, None) is not None
        }
        ann_kwargs = {
            name: getattr(args, name)
            for name in ("initial_temperature", "min_temperature", "cooling_coefficient", "inner_iterations", "latency_gate")
            if getattr(args, name, None) is not None
        }
        ann_kwargs["rng_seed"] = args.seed
        device = OnDeviceParams(
            device_flops_per_s=args.device_flops,
            device_flops_per_frame=args.device_flops_per_frame,
            accuracy_penalty=args.device_penalty,
        )
        names = [p.name for p in args.policy] if args.policy else list(default_policies)
        policies = [PolicyKind(n, device) if n is PolicyName.ON_DEVICE else PolicyKind(n) for n in names]
        return cls(
            profile_path=Path(args.profile) if args.profile else None,
            trace_path=Path(args.trace) if args.trace else None,
            cyclic=args.cyclic,
            bandwidth_bps=args.bandwidth,
            sim=SimulationConfig(**sim_kwargs),
            annealer=AnnealerParams(**ann_kwargs),
            policies=policies,
            out_dir=Path(args.out),
            seed=args.seed,
            workers=args.workers,
        )

    def load_profile(self):
        if self.profile_path is None:
            return generate_synthetic_profile()
        try:
            return load_profile(self.profile_path)
        except ValidationError as exc:
            raise ValidationError(f"{self.profile_path}: {exc}") from exc

    def load_trace(self) -> BandwidthTrace:
        if self.trace_path is None:
            return BandwidthTrace.constant(self.bandwidth_bps)
        try:
            trace = load_trace(self.trace_path, cyclic=self.cyclic)
            trace.check_covers(self.sim.segment_count)
        except ValidationError as exc:
            raise ValidationError(f"{self.trace_path}: {exc}") from exc
        return trace


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("inputs and outputs")
    g.add_argument("--profile", metavar="PATH", help="profile JSON (default: built-in synthetic profile)")
    g.add_argument("--trace", metavar="PATH", help="bandwidth trace CSV (default: constant --bandwidth)")
    g.add_argument("--cyclic", action="store_true", help="repeat a short trace instead of failing")
    g.add_argument("--bandwidth", type=_bps, default=DEFAULT_BANDWIDTH_BPS, help="constant bitrate, e.g. 100Mbps")
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--out", metavar="DIR", default="out")
    g.add_argument("--policy", type=_policy_list, metavar="NAME[,NAME...]",
                   help="proposed, no-enhance, greedy, on-device")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("-v", "--verbose", action="store_true")

    s = p.add_argument_group("simulation")
    s.add_argument("--lambda-weight", dest="lambda_weight", type=float)
    s.add_argument("--latency-budget", dest="latency_budget_s", type=float, metavar="SECONDS")
    s.add_argument("--edge-flops", dest="edge_flops_per_s", type=_flops, metavar="RATE", help="e.g. 34.1TFLOPS")
    s.add_argument("--frames-per-segment", dest="frames_per_segment", type=int)
    s.add_argument("--inference-latency", dest="inference_latency_s", type=float, metavar="SECONDS")
    s.add_argument("--segment-count", dest="segment_count", type=int)
    s.add_argument("--segment-duration", dest="segment_duration_s", type=float, metavar="SECONDS")

    a = p.add_argument_group("annealer")
    a.add_argument("--initial-temperature", type=float)
    a.add_argument("--min-temperature", type=float)
    a.add_argument("--cooling-coefficient", type=float)
    a.add_argument("--inner-iterations", type=int)
    a.add_argument("--latency-gate", choices=(GATE_CANDIDATE, GATE_CURRENT))

    d = p.add_argument_group("on-device baseline")
    d.add_argument("--device-flops", type=_flops, metavar="RATE", help="default: edge rate / 20")
    d.add_argument("--device-flops-per-frame", type=float, default=OnDeviceParams.device_flops_per_frame)
    d.add_argument("--device-penalty", type=float, default=OnDeviceParams.accuracy_penalty)
    return p


_PARAM_TYPES = {"d_max_bits": _bits, "w_full_flops": float, "rng_seed": int}


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(prog="lowlight-va", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate-profile", parents=[common], help="write a synthetic profile")
    gen.add_argument("--qp-values", type=_int_list, default=QualityLadder().qp_values)
    gen.add_argument("--scale-ratios", type=_float_list, default=EnhancementLadder().scale_ratios)
    defaults = SyntheticProfileParams()
    for f in fields(SyntheticProfileParams):
        gen.add_argument(
            "--" + f.name.replace("_", "-"),
            dest=f.name,
            type=_PARAM_TYPES.get(f.name, float),
            default=getattr(defaults, f.name),
        )

    sub.add_parser("validate-profile", parents=[common], help="check a profile document")
    sub.add_parser("run", parents=[common], help="simulate one trace per policy")
    sw = sub.add_parser("sweep", parents=[common], help="constant-bitrate sweep per policy")
    sw.add_argument("--bitrates", type=_bitrate_list, default=list(DEFAULT_SWEEP_BPS),
                    help="comma list; bare numbers are Mbps (default 2,5,10,20,30,50,100)")
    sub.add_parser("oracle", parents=[common], help="annealing vs exhaustive search per segment")
    return parser


def cmd_generate_profile(args) -> int:
    params = SyntheticProfileParams(**{f.name: getattr(args, f.name) for f in fields(SyntheticProfileParams)})
    quality = QualityLadder(args.qp_values)
    enhancement = EnhancementLadder(args.scale_ratios)
    profile = generate_synthetic_profile(params, quality, enhancement)
    text = save_profile(profile)
    # round-trip before anything touches disk
    if load_profile(text) != profile:
        raise ValidationError("generated profile does not round-trip")
    out = Path(args.out)
    reports.write_atomic(out / "profile.json", text)
    reports.write_atomic(out / "profile.csv", profile_to_csv(profile))
    for name, ok in shape_report(profile, params.pivot_qp).items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"wrote {out / 'profile.json'} ({profile.shape[0]}x{profile.shape[1]})")
    return 0


def cmd_validate_profile(args) -> int:
    if not args.profile:
        raise ValidationError("validate-profile needs --profile PATH")
    manifest = RunManifest.from_args(args)
    profile = manifest.load_profile()
    for name, ok in shape_report(profile).items():
        print(f"{'PASS' if ok else 'WARN'} {name}")
    print(f"{args.profile}: valid ({profile.shape[0]}x{profile.shape[1]})")
    return 0


def cmd_run(args) -> int:
    manifest = RunManifest.from_args(args)
    profile = manifest.load_profile()
    trace = manifest.load_trace()
    segments, summaries = [], []
    for policy in manifest.policies:
        results, summary = run_simulation(
            profile, manifest.sim, trace, policy, manifest.annealer, workers=manifest.workers
        )
        segments.extend(results)
        summaries.append(summary)
    seg_csv = reports.to_csv(reports.SEGMENT_SCHEMA, reports.segment_rows(segments))
    sum_csv = reports.to_csv(reports.SUMMARY_SCHEMA, reports.summary_rows(summaries))
    reports.write_atomic(manifest.out_dir / "segments.csv", seg_csv)
    reports.write_atomic(manifest.out_dir / "summary.csv", sum_csv)
    for s in summaries:
        print(f"{s.policy}: accuracy={s.mean_accuracy:.4f} latency={s.mean_latency_s:.4f}s "
              f"utility={s.total_utility:.6f} feasible={s.feasibility_rate:.2f}")
    return 0


def cmd_sweep(args) -> int:
    manifest = RunManifest.from_args(args, default_policies=tuple(PolicyName))
    profile = manifest.load_profile()
    rows = sweep_bandwidth(profile, manifest.sim, args.bitrates, manifest.policies, manifest.annealer,
                           workers=manifest.workers)
    reports.write_atomic(manifest.out_dir / "sweep.csv", reports.to_csv(reports.SWEEP_SCHEMA, reports.sweep_rows(rows)))
    print(f"wrote {len(rows)} rows to {manifest.out_dir / 'sweep.csv'}")
    return 0


def oracle_rows(profile, sim, trace, annealer) -> list[list]:
    rows = []
    for t in range(1, sim.segment_count + 1):
        b = trace.at(t)
        params = replace(annealer, rng_seed=annealer.rng_seed + t)
        sa = sa_select(profile, sim, b, params)
        bf = brute_force_select(profile, sim, b)
        gap = bf.utility_value - sa.utility_value
        rel = gap / abs(bf.utility_value) if bf.utility_value else 0.0
        rows.append([t, b, sa.utility_value, bf.utility_value, gap, rel, sa.evaluations, bf.evaluations])
    return rows


def cmd_oracle(args) -> int:
    manifest = RunManifest.from_args(args)
    profile = manifest.load_profile()
    trace = manifest.load_trace()
    rows = oracle_rows(profile, manifest.sim, trace, manifest.annealer)
    reports.write_atomic(manifest.out_dir / "oracle.csv", reports.to_csv(reports.ORACLE_SCHEMA, rows))
    rel = [r[5] for r in rows]
    print(f"segments={len(rows)} median_relative_gap={statistics.median(rel):.6f} max={max(rel):.6f}")
    return 0


COMMANDS = {
    "generate-profile": cmd_generate_profile,
    "validate-profile": cmd_validate_profile,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
