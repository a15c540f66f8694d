"""Command-line front end: state files, reports and CSV sweeps.

Exit codes: 0 success, 2 input error (including usage), 3 not a state,
4 support error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .boundopt import BoundOptions, SWEEPABLE, closest_ppt_oracle, sweep, upper_bound_ree
from .errors import InputError, NotAStateError, ParseError, ReeError, SupportError
from .extremal import category_classify, filter_residual, weak_constraint_residual
from .measures import octahedron_check, ppt_check, relative_entropy
from .states import DensityMatrix, canonical_form, make_family, qubit

EXIT_OK, EXIT_INPUT, EXIT_NOT_STATE, EXIT_SUPPORT = 0, 2, 3, 4


# --- state files --------------------------------------------------------------------

def _row(values) -> str:
    return "[" + ", ".join(json.dumps(float(v)) for v in values) + "]"


def format_state(rho: DensityMatrix, label: str | None = None) -> str:
    """Serialise a state; one matrix row per line, floats in shortest round-trip form."""
    m = rho.matrix
    lines = ["{", f'  "dims": [{rho.dims[0]}, {rho.dims[1]}],']
    if label is not None:
        lines.append(f'  "label": {json.dumps(label)},')
    for key, part in (("matrix_re", m.real), ("matrix_im", m.imag)):
        lines.append(f'  "{key}": [')
        rows = [f"    {_row(r)}" for r in part]
        lines.append(",\n".join(rows))
        lines.append("  ]," if key == "matrix_re" else "  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_state_file(path, rho: DensityMatrix, label: str | None = None) -> None:
    Path(path).write_text(format_state(rho, label), encoding="utf-8")


def _field_line(text: str, key: str):
    for k, line in enumerate(text.splitlines(), start=1):
        if f'"{key}"' in line:
            return k
    return None


def parse_state(text: str):
    """Parse state-file text; returns ``(DensityMatrix, label)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed state file: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("state file must hold a JSON object", line=1)
    for key in ("dims", "matrix_re", "matrix_im"):
        if key not in doc:
            raise ParseError("missing field", field=key)
    dims = doc["dims"]
    if (not isinstance(dims, list) or len(dims) != 2
            or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims)):
        raise ParseError("dims must be two positive integers", line=_field_line(text, "dims"), field="dims")
    n = dims[0] * dims[1]
    parts = []
    for key in ("matrix_re", "matrix_im"):
        try:
            arr = np.array(doc[key], dtype=float)
        except (TypeError, ValueError):
            raise ParseError("matrix entries must be numbers", line=_field_line(text, key), field=key) from None
        if arr.shape != (n, n):
            raise ParseError(f"expected a {n}x{n} array, got shape {arr.shape}",
                             line=_field_line(text, key), field=key)
        parts.append(arr)
    m = np.empty((n, n), dtype=complex)
    m.real = parts[0]
    m.imag = parts[1]
    label = doc.get("label")
    if label is not None and not isinstance(label, str):
        raise ParseError("label must be text", line=_field_line(text, "label"), field="label")
    return DensityMatrix(m, tuple(dims)), label


def parse_state_file(path) -> DensityMatrix:
    """Read and validate a state file.

    Raises
    ------
    ParseError
        Malformed structure, with line and field where known.
    NotAStateError
        The matrix fails a density-matrix invariant; the message names it
        and the size of the violation.
    """
    return read_state_file(path)[0]


def read_state_file(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_state(text)


# --- reports ----------------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def _matrix_dict(m) -> dict:
    m = np.asarray(m)
    return {"re": m.real, "im": m.imag}


def _digest(rho: DensityMatrix, label) -> dict:
    return {"dims": list(rho.dims), "label": label, "eigenvalues": rho.eigenvalues()}


def render_report(command: str, rho: DensityMatrix, label, seed, result: dict) -> str:
    doc = {
        "tool": "reebound",
        "version": __version__,
        "command": command,
        "seed": seed,
        "input": _digest(rho, label),
        "result": result,
    }
    return json.dumps(_clean(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def bound_result_dict(res) -> dict:
    inside, margin = octahedron_check(res.tau_star)
    return {
        "value_nats": res.value.nats,
        "value_bits": res.value.bits,
        "infinite": res.value.infinite,
        "tau_star": res.tau_star,
        "octahedron": {"inside": inside, "margin": margin},
        "sigma_star": _matrix_dict(res.sigma_star.matrix),
        "rotations": {"O_A": res.rotations[0], "O_B": res.rotations[1]},
        "diagnostics": res.diagnostics,
        "conditions": None if res.conditions is None else [c.to_dict() for c in res.conditions],
    }


def oracle_result_dict(res) -> dict:
    return {
        "value_nats": res.value.nats,
        "value_bits": res.value.bits,
        "infinite": res.value.infinite,
        "sigma_star": _matrix_dict(res.sigma_star.matrix),
        "starts": res.starts,
        "per_start_values": res.per_start_values,
        "seed": res.seed,
        "diagnostics": res.diagnostics,
    }


def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --- commands ---------------------------------------------------------------------------

def _floats(text: str):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def _cmd_gen(args) -> int:
    fam = args.family
    params: dict = {}
    if fam in ("pure", "pure_closest"):
        params["p"] = args.p
    elif fam == "werner":
        params["F"] = args.F
    elif fam == "isotropic":
        params.update(d=args.d, F=args.F)
    elif fam == "bell_diagonal":
        params["lambdas"] = _floats(args.lambdas or "")
    elif fam == "maximally_correlated":
        params["amplitudes"] = _floats(args.amplitudes or "")
    elif fam == "product":
        params.update(rho_a=qubit(_floats(args.bloch_a or "0,0,0")),
                      rho_b=qubit(_floats(args.bloch_b or "0,0,0")))
    if any(v is None for v in params.values()):
        raise InputError(f"missing parameter for family {fam}")
    rho = make_family(fam, **params)
    shown = {k: v for k, v in params.items() if k not in ("rho_a", "rho_b")}
    label = fam + "(" + ", ".join(f"{k}={v}" for k, v in shown.items()) + ")"
    write_state_file(args.output, rho, label)
    return EXIT_OK


def _cmd_bound(args) -> int:
    rho, label = read_state_file(args.input)
    res = upper_bound_ree(rho, BoundOptions(threads=args.threads))
    text = render_report("bound", rho, label, args.seed, bound_result_dict(res))
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
        unit, val = ("bits", res.value.bits) if args.bits else ("nats", res.value.nats)
        print(f"bound: {val:.10f} {unit}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    rho, label = read_state_file(args.input)
    res = closest_ppt_oracle(rho, args.starts, args.seed, threads=args.threads)
    _emit(render_report("oracle", rho, label, args.seed, oracle_result_dict(res)), args.report)
    return EXIT_OK


def _cmd_check(args) -> int:
    rho, label = read_state_file(args.input)
    sigma, sigma_label = read_state_file(args.sigma)
    reports = [filter_residual(rho, sigma, x) for x in "AB"]
    weak = weak_constraint_residual(rho, sigma, check_tau_t=False)
    is_ppt, min_pt = ppt_check(sigma)
    result = {
        "sigma_label": sigma_label,
        "relative_entropy_nats": relative_entropy(rho, sigma).nats,
        "sigma_ppt": {"is_ppt": is_ppt, "min_eigenvalue": min_pt},
        "conditions": [r.to_dict() for r in reports],
        "category": category_classify(rho, sigma),
        "weak_constraints": weak.to_dict(),
    }
    _emit(render_report("check", rho, label, None, result), args.report)
    return EXIT_OK


def _cmd_canonical(args) -> int:
    rho, label = read_state_file(args.input)
    canon, (o_a, o_b) = canonical_form(rho)
    write_state_file(args.output, canon, f"canonical({label})" if label else "canonical")
    sys.stdout.write(json.dumps(_clean({"O_A": o_a, "O_B": o_b}), sort_keys=True) + "\n")
    return EXIT_OK


CSV_COLUMNS = ["param", "bound_nats", "bound_bits", "oracle_nats", "filter_residual_A",
               "filter_residual_B", "unitary_residual_A", "unitary_residual_B"]


def format_csv(rows, with_oracle: bool) -> str:
    cols = [c for c in CSV_COLUMNS if with_oracle or c != "oracle_nats"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow(["%.17g" % row[c] for c in cols])
    return buf.getvalue()


def _cmd_sweep(args) -> int:
    if args.param is None:
        args.param = SWEEPABLE.get(args.family)
    rows = sweep(args.family, args.param, args.start, args.stop, args.steps,
                 with_oracle=args.with_oracle, oracle_starts=args.starts, seed=args.seed,
                 options=BoundOptions(threads=args.threads))
    Path(args.output).write_text(format_csv(rows, args.with_oracle), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reebound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"reebound {__version__}")
    parser.add_argument("--threads", type=int, default=1, help="cap on internal parallelism")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a state file for a named family")
    p.add_argument("--family", required=True, choices=["pure", "pure_closest", "bell_diagonal", "werner",
                                                       "maximally_correlated", "isotropic", "product"])
    p.add_argument("--p", type=float)
    p.add_argument("--F", type=float)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--lambdas", help="four comma-separated Bell weights")
    p.add_argument("--amplitudes", help="comma-separated real amplitudes")
    p.add_argument("--bloch-a")
    p.add_argument("--bloch-b")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("bound", help="upper bound on the relative entropy of entanglement")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--bits", action="store_true")
    p.add_argument("--report")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("oracle", help="brute-force closest PPT state")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--starts", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("check", help="stationarity conditions of a candidate closest state")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--report")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("canonical", help="rotate a two-qubit state to canonical form")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_canonical)

    p = sub.add_parser("sweep", help="bound along a one-parameter family, as CSV")
    p.add_argument("--family", required=True, choices=sorted(SWEEPABLE))
    p.add_argument("--param")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--with-oracle", action="store_true")
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_sweep)
    return parser


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NotAStateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_STATE
    except SupportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SUPPORT
    except (ReeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run_command())
