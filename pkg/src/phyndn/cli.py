"""Command-line entry point: scenario files in, figure-ready tables out.

Each experiment command writes one table (CSV or JSON) plus a run manifest
(seed, config digest, package version, argv) sufficient to reproduce the run.
Exit codes: 0 success, 1 scenario/usage error, 2 infeasible configuration or
failed validation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .auth import glrt_threshold, np_diff_rate, glrt_diff_rate
from .harness import (
    Scenario,
    ScenarioError,
    load_scenario,
    population_pdf,
    run_attack_suite,
    run_cap_experiment,
    run_offline,
    run_offload_experiment,
    run_online,
    substream,
)
from .ndn import (
    NdnName,
    NdnPacket,
    WireError,
    decode,
    encode,
    generate_rsa_key,
    load_private_key_pem,
    sign,
)
from .quantizer import build_from_pdf

EXIT_OK = 0
EXIT_SCENARIO = 1
EXIT_VALIDATION = 2


def _load(args) -> Scenario:
    scenario = load_scenario(args.scenario) if args.scenario else Scenario()
    if args.seed is not None:
        scenario.seed = args.seed
    return scenario


def _write_table(rows: list[dict], args, schema: str):
    if not rows:
        raise ScenarioError("experiment produced no rows")
    out = Path(args.out) if args.out else None
    if args.format == "json":
        text = json.dumps(rows, indent=2, default=str)
    else:
        headers: list[str] = []
        for row in rows:
            for key in row:
                if key not in headers:
                    headers.append(key)
        import io

        buf = io.StringIO()
        buf.write(f"# schema: {schema}/1 phyndn-{__version__}\n")
        writer = csv.DictWriter(buf, fieldnames=headers)
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text if text.endswith("\n") else text + "\n")


def _write_manifest(args, scenario: Scenario | None):
    if not args.out:
        return
    manifest = {
        "version": __version__,
        "argv": sys.argv[1:],
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "seed": scenario.seed if scenario else None,
        "scenario_digest": scenario.digest() if scenario else None,
    }
    Path(str(args.out) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def cmd_boundaries(args) -> int:
    scenario = _load(args)
    if args.levels:
        scenario.quantizer.levels = args.levels
    if args.theta_m:
        scenario.population.theta_m = args.theta_m
    if args.alpha_m:
        scenario.population.alpha_m = args.alpha_m
    pdf = population_pdf(scenario.population)
    lo, hi = pdf.support
    m = scenario.quantizer.levels
    max_entropy = build_from_pdf(pdf, m).base_boundaries
    uniform = np.linspace(lo, hi, m + 1)
    rng = substream(scenario.seed, "quantizer-random")
    random_b = np.concatenate([[lo], np.sort(rng.uniform(lo, hi, m - 1)), [hi]])
    rows = [
        {"m": i, "max_entropy": max_entropy[i], "uniform": uniform[i], "random": random_b[i]}
        for i in range(m + 1)
    ]
    _write_table(rows, args, "boundaries")
    _write_manifest(args, scenario)
    return EXIT_OK


def cmd_diffrate(args) -> int:
    n_s = args.n_s
    rhos = _parse_floats(args.rho) if args.rho else list(np.geomspace(1e-3, 0.2, 25))
    rs = _parse_floats(args.r)
    tests = args.test.split(",")
    a_delta = args.a_delta
    rows = []
    for test in tests:
        for r in rs:
            sigma = a_delta / np.sqrt(r)
            for rho in rhos:
                if test == "np":
                    rd = np_diff_rate(r, n_s, rho)
                    b_v = float(-np.sqrt(r / n_s) * _norm_ppf(rho))
                elif test == "glrt":
                    rd = glrt_diff_rate(a_delta, sigma, n_s, rho)
                    b_v = glrt_threshold(n_s, rho)
                else:
                    raise ScenarioError(f"unknown test {test!r}")
                rows.append(
                    {"test": test, "r": r, "rho": rho, "n_s": n_s, "r_d": rd, "b_v": b_v}
                )
    _write_table(rows, args, "diffrate")
    _write_manifest(args, None)
    return EXIT_OK


def _norm_ppf(rho: float) -> float:
    from scipy.special import ndtri

    return float(ndtri(rho))


def cmd_cap(args) -> int:
    scenario = _load(args)
    populations = tuple(int(x) for x in args.populations.split(","))
    seeds = tuple(range(scenario.seed, scenario.seed + args.seeds))
    rows = run_cap_experiment(scenario, populations, seeds)
    _write_table(rows, args, "cap")
    if args.rounds_log:
        art = run_offline(scenario)
        report = run_online(scenario, art, collect_rows=True)
        with open(args.rounds_log, "w") as fh:
            for row in report.rows:
                fh.write(json.dumps(row) + "\n")
    _write_manifest(args, scenario)
    return EXIT_OK


def cmd_offload(args) -> int:
    scenario = _load(args)
    rows = run_offload_experiment(scenario)
    _write_table(rows, args, "offload")
    _write_manifest(args, scenario)
    if any(not row["feasible"] for row in rows):
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_attacks(args) -> int:
    scenario = _load(args)
    art = run_offline(scenario)
    rows = run_attack_suite(scenario, art)
    _write_table(rows, args, "attacks")
    _write_manifest(args, scenario)
    return EXIT_OK


def cmd_packet(args) -> int:
    if args.action == "make":
        name = NdnName.from_uri(args.name)
        packet = NdnPacket(name=name, content=args.content.encode())
        if args.sign or args.key:
            if args.key:
                key = load_private_key_pem(args.key)
            else:
                key = generate_rsa_key(args.key_bits)
            packet = sign(packet, key, NdnName.from_uri("/keys/cli"))
        Path(args.out or "packet.bin").write_bytes(encode(packet))
        return EXIT_OK
    wire = Path(args.file).read_bytes()
    try:
        packet = decode(wire)
    except WireError as exc:
        print(f"malformed packet: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"type: {type(packet).__name__}")
    print(f"name: {packet.name.to_uri()}")
    if isinstance(packet, NdnPacket):
        print(f"content ({len(packet.content)} bytes): {packet.content.hex()}")
        print(f"signed: {packet.signed}")
        if packet.key_locator:
            print(f"key locator: {packet.key_locator.to_uri()}")
    print(f"wire ({len(wire)} bytes): {wire.hex()}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    """Quick oracle cross-checks; the full suite lives in the pytest tests."""
    from scipy import stats

    from . import _accel
    from .pdfs import cos_theta_alpha_pdf

    failures = []

    def check(name, ok):
        print(f"{'PASS' if ok else 'FAIL'}: {name}")
        if not ok:
            failures.append(name)

    pdf = cos_theta_alpha_pdf(5 * np.pi / 36, 0.04)
    spec = build_from_pdf(pdf, 20)
    masses = np.diff([pdf.cdf(b) for b in spec.base_boundaries])
    check("equal-mass quantizer (M=20)", np.abs(masses - 0.05).max() < 1e-6)
    check(
        "round trip inverse_cdf(cdf(x))",
        abs(pdf.inverse_cdf(pdf.cdf(0.98)) - 0.98) < 1e-8,
    )
    rng = substream(7, "selftest")
    stats_glrt = _accel.mc_glrt_stats(rng, 20_000, 16, 0.0, 1.0)
    emp = float((stats_glrt > glrt_threshold(16, 0.05)).mean())
    check("variance-free test false alarm ~ 5%", abs(emp - 0.05) < 0.01)
    check(
        "threshold matches F(1,1) 5% point",
        abs(glrt_threshold(2, 0.05) - stats.f.isf(0.05, 1, 1)) / stats.f.isf(0.05, 1, 1)
        < 0.005,
    )
    packet = NdnPacket(NdnName.from_uri("/app/x"), b"payload")
    check("wire round trip", decode(encode(packet)) == packet)
    return EXIT_OK if not failures else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phyndn",
        description="PHY-identity NDN-IoT experiments: quantizer tables, "
        "detection-rate curves, authentication accuracy, attack analyses, "
        "and signing-offload timings.",
    )
    parser.add_argument("--version", action="version", version=f"phyndn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", help="TOML scenario file")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("boundaries", help="quantizer boundary tables (max-entropy/uniform/random)")
    common(p)
    p.add_argument("--levels", "--M", dest="levels", type=int)
    p.add_argument("--theta-m", dest="theta_m", type=float)
    p.add_argument("--alpha-m", dest="alpha_m", type=float)
    p.set_defaults(func=cmd_boundaries)

    p = sub.add_parser("diffrate", help="differentiation-rate curves vs rho")
    common(p)
    p.add_argument("--Ns", dest="n_s", type=int, default=400)
    p.add_argument("--r", default="0.01,0.02,0.04", help="comma list of offset-to-noise ratios")
    p.add_argument("--rho", help="comma list of false-alarm rates (default: log grid)")
    p.add_argument("--test", default="np,glrt")
    p.add_argument("--a-delta", dest="a_delta", type=float, default=1.1e-4)
    p.set_defaults(func=cmd_diffrate)

    p = sub.add_parser("cap", help="correct-authentication probability vs population")
    common(p)
    p.add_argument("--populations", default="25,50,100,200,500,1000,2000")
    p.add_argument("--seeds", type=int, default=10, help="number of seeds, starting at --seed")
    p.add_argument(
        "--rounds-log",
        dest="rounds_log",
        help="also write the scenario's per-round decisions as JSON lines",
    )
    p.set_defaults(func=cmd_cap)

    p = sub.add_parser("offload", help="signing-offload timing table")
    common(p)
    p.set_defaults(func=cmd_offload)

    p = sub.add_parser("attacks", help="replay / close-pair / key-compromise analyses")
    common(p)
    p.set_defaults(func=cmd_attacks)

    p = sub.add_parser("packet", help="wire-format debug: make or show packets")
    p.add_argument("action", choices=("make", "show"))
    p.add_argument("file", nargs="?", help="packet file (for show)")
    p.add_argument("--name", default="/app/demo/1")
    p.add_argument("--content", default="demo")
    p.add_argument("--sign", action="store_true")
    p.add_argument("--key", help="PEM private key used for signing")
    p.add_argument("--key-bits", type=int, default=2048)
    p.add_argument("--out")
    p.set_defaults(func=cmd_packet)

    p = sub.add_parser("selftest", help="quick oracle cross-checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return EXIT_SCENARIO


if __name__ == "__main__":
    sys.exit(main())
