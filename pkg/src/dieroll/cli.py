"""Command-line front end.

Exit codes: 0 success, 1 numerical failure or failed check, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from math import comb
from pathlib import Path

import numpy as np

from . import bounds, cheating, sdp, serialize
from .balancing import ZETA, balance_subset
from .protocol import DIM_CAP, build_subset_protocol

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2

# Truncated percentages for D = 2..10, rows: reference three-message
# protocol, classical subset protocol, balanced quantum protocol, 1/sqrt(D).
REFERENCE_PERCENTAGES = {
    "as10": [75, 66, 62, 60, 58, 57, 56, 55, 55],
    "classical": [100, 66, 50, 50, 50, 42, 37, 33, 33],
    "quantum": [75, 60, 50, 46, 44, 40, 36, 33, 32],
    "kitaev": [70, 57, 50, 44, 40, 37, 35, 33, 31],
}
ROW_NAMES = {
    "as10": "Explicit three-message protocol",
    "classical": "Classical subset protocol",
    "quantum": "Balanced quantum protocol",
    "kitaev": "Kitaev lower bound",
}


def default_seed() -> int:
    return int(os.environ.get("DIEROLL_SEED", "0"))


def _emit(obj, fmt: str, out):
    if fmt == "json":
        out.write(json.dumps(obj, indent=1, default=float) + "\n")
    else:
        for k, v in obj.items():
            if isinstance(v, dict):
                out.write(f"{k}:\n")
                for k2, v2 in v.items():
                    out.write(f"  {k2}: {v2}\n")
            else:
                out.write(f"{k}: {v}\n")


# --------------------------------------------------------------------------
# table


def check_reference(rows) -> list[str]:
    """Mismatches against the reference D = 2..10 percentages."""
    bad = []
    for r in rows:
        if not 2 <= r.D <= 10:
            continue
        pc = r.percentages
        for key, vals in REFERENCE_PERCENTAGES.items():
            if pc[key] != vals[r.D - 2]:
                bad.append(f"D={r.D} {key}: computed {pc[key]}%, reference {vals[r.D - 2]}%")
    return bad


def cmd_table(args, out) -> int:
    rows = bounds.bounds_table(args.d_min, args.d_max)
    if args.format == "csv":
        out.write(bounds.table_csv(rows))
    elif args.format == "json":
        obj = {
            "schema": serialize.SCHEMA,
            "rows": [
                {
                    "D": r.D,
                    "classical_exact": str(r.classical),
                    "quantum_exact": str(r.quantum),
                    "kitaev": r.kitaev,
                    "as10_exact": str(r.as10),
                    **{f"{k}_pct": v for k, v in r.percentages.items()},
                }
                for r in rows
            ],
        }
        out.write(json.dumps(obj, indent=1) + "\n")
    else:
        header = f"{'D':<34}" + "".join(f"{r.D:>5}" for r in rows)
        out.write(header + "\n")
        for key in ("as10", "classical", "quantum", "kitaev"):
            cells = "".join(f"{r.percentages[key]:>4}%" for r in rows)
            out.write(f"{ROW_NAMES[key]:<34}{cells}\n")
    if args.check:
        bad = check_reference(rows)
        for line in bad:
            sys.stderr.write(f"MISMATCH {line}\n")
        if bad:
            return EXIT_NUMERICAL
        sys.stderr.write("all reference percentages reproduced\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# analyze


def _export(dirpath, protocol, certs, prefix=""):
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    serialize.dump(serialize.protocol_to_json(protocol), d / f"{prefix}protocol.json")
    bob, alice = certs
    if bob is not None:
        serialize.dump(serialize.certificate_to_json(bob), d / f"{prefix}bob_cert.json")
    if alice is not None:
        serialize.dump(serialize.certificate_to_json(alice), d / f"{prefix}alice_cert.json")


def cmd_analyze(args, out) -> int:
    D, m = args.d, args.m
    mode = {"certify": "closed_form_if_known"}.get(args.mode, args.mode)
    p = build_subset_protocol(D, m)
    rep = cheating.analyze(p, mode=mode, eps=args.eps, gap_target=args.gap_target)
    obj = {"schema": serialize.SCHEMA, "command": "analyze", "D": D, "m": m, "mode": args.mode,
           "report": rep.summary()}
    if args.export_dir:
        _export(args.export_dir, p, (rep.bob_certificate, rep.alice_certificate))
    status = EXIT_OK
    if args.balance:
        res = balance_subset(D, m, args.eps, args.zeta)
        q = res.transformed
        bc, ac = res.transported_certs
        vb = cheating.verify_bob_certificate(q, bc)
        va = cheating.verify_alice_certificate(q, ac)
        bal = res.summary()
        bal["verified"] = {"bob": vb.ok, "alice": va.ok}
        bal["certified_max"] = max(vb.value, va.value)
        if mode in ("solve", "both"):
            trep = cheating.analyze(q, mode="solve", certificates=(bc, ac), gap_target=args.gap_target)
            bal["transformed_report"] = trep.summary()
        obj["balance"] = bal
        if args.export_dir:
            _export(args.export_dir, q, (bc, ac), prefix="balanced_")
        if not (vb.ok and va.ok):
            status = EXIT_NUMERICAL
    _emit(obj, args.format, out)
    return status


# --------------------------------------------------------------------------
# verify


def cmd_verify(args, out) -> int:
    p = serialize.protocol_from_json(serialize.load(args.protocol))
    cert = serialize.certificate_from_json(serialize.load(args.cert))
    if isinstance(cert, cheating.BobCertificate):
        chk = cheating.verify_bob_certificate(p, cert, args.tol)
        party = "bob"
    else:
        chk = cheating.verify_alice_certificate(p, cert, args.tol)
        party = "alice"
    obj = {
        "schema": serialize.SCHEMA,
        "command": "verify",
        "party": party,
        "feasible": chk.ok,
        "upper_bound": chk.value,
        "worst_margin": chk.worst_margin,
        "detail": chk.detail,
    }
    if party == "alice" and cert.form == "inverse" and p.dims.total <= cheating.OPERATOR_CHECK_CAP:
        op = cheating.verify_alice_certificate(p, cheating.to_operator_form(cert), args.tol)
        obj["operator_form"] = {"feasible": op.ok, "upper_bound": op.value, "worst_margin": op.worst_margin}
    _emit(obj, args.format, out)
    return EXIT_OK if chk.ok else EXIT_NUMERICAL


# --------------------------------------------------------------------------
# qsd


def cmd_qsd(args, out) -> int:
    W = None
    source = None
    if args.from_protocol:
        D, m = args.from_protocol
        _validate_dm(args._parser, D, m)
        p = build_subset_protocol(D, m)
        e = bounds.QsdEnsemble(tuple(cheating.reduced_states(p)), tuple([1 / D] * D))
        cert = cheating.subset_alice_certificate(D, m, args.eps)
        W = bounds.certificate_to_qsd_witness(cert, D)
        source = f"subset protocol D={D} m={m}"
    elif args.random:
        n, dim = args.random
        rng = np.random.default_rng(args.seed)
        e = bounds.random_ensemble(rng, n, dim)
        source = f"random ensemble n={n} dim={dim} seed={args.seed}"
    else:
        e, W = serialize.ensemble_from_json(serialize.load(args.ensemble))
        source = str(args.ensemble)
    witness_kind = "supplied"
    if W is None:
        if e.dim * e.dim <= cheating.ALICE_SOLVE_CAP:
            W = bounds.purification_witnesses(e)
            witness_kind = "purification"
        else:
            W = [np.eye(e.dim)] * e.n
            witness_kind = "identity"
    optimum = bounds.qsd_optimum(e, gap_target=args.gap_target)
    bound = bounds.qsd_lower_bound(W, e)
    obj = {
        "schema": serialize.SCHEMA,
        "command": "qsd",
        "source": source,
        "n": e.n,
        "dim": e.dim,
        "witnesses": witness_kind,
        "optimum": optimum,
        "bound": bound,
        "slack": optimum - bound,
    }
    _emit(obj, args.format, out)
    return EXIT_OK if bound <= optimum + 1e-7 else EXIT_NUMERICAL


# --------------------------------------------------------------------------
# parser


def _validate_dm(parser, D, m):
    if D < 2:
        parser.error(f"--d must be at least 2 (got {D})")
    if not 1 <= m <= D:
        parser.error(f"--m must satisfy 1 <= m <= D (got D={D}, m={m})")
    if comb(D, m) > DIM_CAP:
        parser.error(f"C({D},{m}) = {comb(D, m)} exceeds the dimension cap {DIM_CAP}")


def _positive(kind):
    def conv(s):
        v = kind(s)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dieroll", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log solver iterations")
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", help="closed-form bounds for D = 2..d-max")
    t.add_argument("--d-min", type=int, default=2)
    t.add_argument("--d-max", type=int, default=10)
    t.add_argument("--check", action="store_true", help="compare D = 2..10 with the reference percentages")
    t.add_argument("--format", choices=["text", "csv", "json"], default="text")

    a = sub.add_parser("analyze", help="cheating probabilities of the (D, m) subset protocol")
    a.add_argument("--d", type=int, required=True)
    a.add_argument("--m", type=int, required=True)
    a.add_argument("--balance", action="store_true", help="also apply one balancing round")
    a.add_argument("--mode", choices=["solve", "certify", "both"], default="both")
    a.add_argument("--eps", type=_positive(float), default=None,
                   help="Alice certificate slack parameter (default 1e-8 / D)")
    a.add_argument("--zeta", type=_positive(float), default=ZETA, help=f"balancing constant (default {ZETA})")
    a.add_argument("--gap-target", type=_positive(float), default=sdp.GAP_TARGET,
                   help=f"relative duality gap for SDP solves (default {sdp.GAP_TARGET})")
    a.add_argument("--export-dir", help="write protocol and certificate JSON files here")
    a.add_argument("--format", choices=["json", "text"], default="json")

    v = sub.add_parser("verify", help="check a certificate against a protocol")
    v.add_argument("--protocol", required=True)
    v.add_argument("--cert", required=True)
    v.add_argument("--tol", type=_positive(float), default=None,
                   help="PSD tolerance (default 1e-9 * n * max(1, ||A||_F))")
    v.add_argument("--format", choices=["json", "text"], default="json")

    q = sub.add_parser("qsd", help="state discrimination optimum versus the witness bound")
    src = q.add_mutually_exclusive_group(required=True)
    src.add_argument("--ensemble", help="ensemble JSON file")
    src.add_argument("--from-protocol", nargs=2, type=int, metavar=("D", "M"))
    src.add_argument("--random", nargs=2, type=int, metavar=("N", "DIM"))
    q.add_argument("--seed", type=int, default=None, help="random seed (default $DIEROLL_SEED or 0)")
    q.add_argument("--eps", type=_positive(float), default=None)
    q.add_argument("--gap-target", type=_positive(float), default=sdp.GAP_TARGET)
    q.add_argument("--format", choices=["json", "text"], default="json")
    return ap


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    args._parser = parser
    if args.command == "analyze":
        _validate_dm(parser, args.d, args.m)
    if args.command == "table" and not 2 <= args.d_min <= args.d_max:
        parser.error("need 2 <= --d-min <= --d-max")
    if args.command == "qsd" and args.seed is None:
        args.seed = default_seed()
    handler = {"table": cmd_table, "analyze": cmd_analyze, "verify": cmd_verify, "qsd": cmd_qsd}[args.command]
    try:
        return handler(args, out)
    except (RuntimeError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
