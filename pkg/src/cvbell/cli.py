"""Command-line front end.

Exit codes: 0 ok, 1 check failed, 2 usage error, 3 oracle convergence
failure, 4 optimizer robustness failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from cvbell import __version__
from cvbell.core import MAX_MODES, SqueezedParams
from cvbell.fock import (
    MAX_ORACLE_MODES,
    CutoffError,
    TruncationError,
    build_workspace,
    displaced_parity_expectation,
    squeezed_state_vector,
)
from cvbell.kernel import squeezed_correlation
from cvbell.optimizer import FORMS, OptimizerConfig, optimize_bell, visibility_table

log = logging.getLogger("cvbell")

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_ORACLE, EXIT_ROBUST = 0, 1, 2, 3, 4


@dataclass
class Outcome:
    payload: str
    code: int = EXIT_OK
    files: dict[str, str] = field(default_factory=dict)


def sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def make_manifest(command: str, argv: list[str], args: argparse.Namespace, payload: str) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
    return {
        "command": command,
        "argv": list(argv),
        "parameters": params,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "output_sha256": sha256(payload),
    }


def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _alpha(text: str) -> complex:
    try:
        re_, im = text.split(",")
        return complex(float(re_), float(im))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")


def _r_value(text: str):
    if text == "free":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'free', got {text!r}")


def cmd_correlate(args, parser) -> Outcome:
    if len(args.alpha) != args.n:
        parser.error(f"--alpha given {len(args.alpha)} times but --n is {args.n}")
    try:
        params = SqueezedParams(args.n, args.r)
    except ValueError as exc:
        parser.error(f"--n/--r: {exc}")
    return Outcome(f"{squeezed_correlation(params, args.alpha):.15f}\n")


def _sample_alphas(rng: np.random.Generator, n: int, samples: int) -> np.ndarray:
    radius = np.sqrt(rng.uniform(0, 1, (samples, n)))
    phase = rng.uniform(0, 2 * np.pi, (samples, n))
    return radius * np.exp(1j * phase)


def cmd_oracle_check(args, parser) -> Outcome:
    if args.n >= MAX_ORACLE_MODES + 1 or args.n < 1:
        parser.error(f"--n: oracle unsupported for N >= {MAX_ORACLE_MODES + 1} (got {args.n})")
    params = SqueezedParams(args.n, args.r)
    alphas = _sample_alphas(np.random.default_rng(args.seed), args.n, args.samples)
    lines = [f"n={args.n} r={args.r:.15g} cutoff={args.cutoff} samples={args.samples}"]
    results = {}
    for d in (args.cutoff, 2 * args.cutoff):
        try:
            ws = build_workspace(params, d)
            state = squeezed_state_vector(params, ws, leakage_tol=args.tolerance)
        except (TruncationError, CutoffError) as exc:
            lines.append(f"cutoff {d}: {exc}")
            return Outcome("\n".join(lines) + "\n", EXIT_ORACLE)
        lines.append(f"cutoff {d}: leakage {state.leakage:.3e}")
        results[d] = np.array([displaced_parity_expectation(state, a, ws) for a in alphas])
    drift = float(np.max(np.abs(results[args.cutoff] - results[2 * args.cutoff])))
    lines.append(f"cutoff doubling drift {drift:.3e}")
    if drift > args.tolerance:
        return Outcome("\n".join(lines) + "\n", EXIT_ORACLE)
    kernel = np.array([squeezed_correlation(params, a) for a in alphas])
    dev = float(np.max(np.abs(kernel - results[args.cutoff])))
    ok = dev <= args.tolerance
    lines.append(f"max |kernel - oracle| {dev:.3e} tolerance {args.tolerance:.3e} {'PASS' if ok else 'FAIL'}")
    return Outcome("\n".join(lines) + "\n", EXIT_OK if ok else EXIT_CHECK)


def _config(args) -> OptimizerConfig:
    return OptimizerConfig(
        restarts=args.restarts,
        max_iterations=args.max_iterations,
        seed=args.seed,
        real_only=not getattr(args, "complex", False),
    )


def cmd_optimize(args, parser) -> Outcome:
    if args.form in FORMS and FORMS[args.form]().n_modes != args.n:
        parser.error(f"--form {args.form} is defined for N={FORMS[args.form]().n_modes}, not --n {args.n}")
    if args.n < 1 or args.n > MAX_MODES:
        parser.error(f"--n must lie in [1, {MAX_MODES}]")
    r_free = args.r == "free"
    params = SqueezedParams(args.n, 0.0 if r_free else args.r)
    result = optimize_bell(params, args.form, _config(args), r_free=r_free)
    return Outcome(json.dumps(result.to_json(), indent=2) + "\n")


CSV_COLUMNS = ["n", "v_me", "v_osc", "b_opt", "form", "argmax_r"]


def cmd_visibility_table(args, parser) -> Outcome:
    if args.n_min < 2 or args.n_max < args.n_min:
        parser.error(f"need 2 <= --n-min <= --n-max, got {args.n_min}, {args.n_max}")
    if args.n_max > MAX_MODES:
        parser.error(f"--n-max must be <= {MAX_MODES}")
    rows = visibility_table(range(args.n_min, args.n_max + 1), _config(args))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([row.n, f"{row.v_me:.15g}", f"{row.v_osc:.15g}", f"{row.b_opt:.15g}", row.form_used, f"{row.argmax_r:.15g}"])
    table_json = json.dumps(
        [
            {
                "n": row.n,
                "v_me": float(f"{row.v_me:.15g}"),
                "v_osc": float(f"{row.v_osc:.15g}"),
                "b_opt": float(f"{row.b_opt:.15g}"),
                "form": row.form_used,
                "argmax_r": float(f"{row.argmax_r:.15g}"),
                "r_at_bound": row.r_at_bound,
                "converged_fraction": float(f"{row.converged_fraction:.15g}"),
                "candidates": {k: float(f"{v:.15g}") for k, v in row.candidates.items()},
            }
            for row in rows
        ],
        indent=2,
    )
    csv_text = buf.getvalue()
    code = EXIT_OK if all(row.robust for row in rows) else EXIT_ROBUST
    for row in rows:
        if not row.robust:
            log.error("N=%d: only %.0f%% of restarts reached the best value", row.n, 100 * row.converged_fraction)
    return Outcome(
        csv_text,
        code,
        files={f"{args.out}.csv": csv_text, f"{args.out}.json": table_json + "\n"},
    )


def cmd_replay(args, parser) -> Outcome:
    manifest = json.loads(Path(args.manifest_file).read_text())
    sub_args = build_parser().parse_args(manifest["argv"])
    outcome = sub_args.func(sub_args, parser)
    same = sha256(outcome.payload) == manifest["output_sha256"]
    return Outcome(f"replay {'matches' if same else 'DIFFERS'}: {manifest['command']}\n", EXIT_OK if same else EXIT_CHECK)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvbell", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("correlate", help="closed-form displaced-parity correlation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--alpha", type=_alpha, action="append", required=True, help="'re,im', once per mode")
    p.add_argument("--manifest", help="write a run manifest to this path")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("oracle-check", help="compare the kernel with the Fock-space oracle")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--cutoff", type=int, required=True)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_oracle_check)

    for name, func, help_ in (
        ("optimize", cmd_optimize, "maximise a Bell quantity"),
        ("visibility-table", cmd_visibility_table, "threshold visibilities per N"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--restarts", type=int, default=64)
        p.add_argument("--max-iterations", type=int, default=2000)
        p.add_argument("--seed", type=int, default=0)
        if name == "optimize":
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--form", choices=["mermin3", "mermin4", "zb"], required=True)
            p.add_argument("--r", type=_r_value, default="free", help="fixed value or 'free'")
            p.add_argument("--complex", action="store_true", help="search complex displacements")
            p.add_argument("--manifest")
        else:
            p.add_argument("--n-min", type=int, default=2)
            p.add_argument("--n-max", type=int, default=7)
            p.add_argument("--out", default="visibility")
        p.set_defaults(func=func)

    p = sub.add_parser("replay", help="re-run a manifest and compare output checksums")
    p.add_argument("manifest_file")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=args.log_level.upper(), stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        outcome = args.func(args, parser)
    except SystemExit as exc:
        return int(exc.code or 0)

    manifest = make_manifest(args.command, argv, args, outcome.payload)
    if args.command == "optimize":
        body = json.loads(outcome.payload)
        body["manifest"] = manifest
        sys.stdout.write(json.dumps(body, indent=2, default=_json_default) + "\n")
    else:
        sys.stdout.write(outcome.payload)
    for path, text in outcome.files.items():
        Path(path).write_text(text)
    if args.command == "visibility-table":
        Path(f"{args.out}.manifest.json").write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n")
    elif getattr(args, "manifest", None):
        Path(args.manifest).write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n")
    return outcome.code


if __name__ == "__main__":
    sys.exit(main())
