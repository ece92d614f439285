"""Command-line entry point.

Exit codes: 0 on success, 1 on a usage error, 2 when an experiment cannot
produce its result (for example too few uncensored samples).
"""
from __future__ import annotations

import argparse
import sys
import time


from . import codes
from .codes import CUBIC, TORIC, build_code, classify, syndrome
from .errors import DoesNotFit, InvalidSize, OutOfValidatedRange, QMemError, QTooSmall
from .neutrality import SPECIALIZED, STANDARD

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _ints(text):
    return [int(t) for t in str(text).split(",") if t.strip()]


def _floats(text):
    return [float(t) for t in str(text).split(",") if t.strip()]


def read_config(path) -> list:
    """Turn ``key = value`` lines into long-flag tokens.

    Blank lines and ``#`` comments are skipped; ``true`` / ``false`` toggle
    switches.
    """
    tokens = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config line without '=': {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            flag = "--" + key.replace("_", "-")
            if value.lower() == "true":
                tokens.append(flag)
            elif value.lower() != "false":
                tokens += [flag, value]
    return tokens


def _common(p, *, code=CUBIC, size="5", mode=STANDARD, out=True):
    p.add_argument("--config", help="flat key = value file; command-line flags win")
    p.add_argument("--code", choices=[CUBIC, TORIC], default=code)
    p.add_argument("--size", type=_ints, default=_ints(size), help="lattice size(s), comma separated")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=[STANDARD, SPECIALIZED], default=mode)
    if out:
        p.add_argument("--out", help="write records to this path")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmemsim", description="Cubic-code memory simulator and decoder tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", help="decode an error or syndrome file")
    _common(p, out=False)
    p.add_argument("input", help="file of 'X|Y|Z qubit' or 'defect x y [z] sector' lines")
    p.add_argument("--trace", action="store_true", help="print the per-cluster log")

    p = sub.add_parser("threshold", help="failure fraction against error rate")
    _common(p, code=TORIC, size="8,16,24,32")
    p.add_argument("--rate", type=_floats, default=_floats("0.05,0.06,0.065,0.07,0.08,0.09"))
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--model", choices=["site", "qubit"], default="qubit")

    p = sub.add_parser("memory-time", help="thermal failure-time samples")
    _common(p, size="5", mode=SPECIALIZED)
    p.add_argument("--beta", type=_floats, default=_floats("4.0"))
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--tec", type=float, default=None, help="trial decode interval")
    p.add_argument("--tmax", type=float, default=None, help="censoring time")

    p = sub.add_parser("chunk", help="chunk levels of random site errors")
    _common(p, size="13")
    p.add_argument("--rate", type=_floats, default=_floats("0.005"))
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--q", type=int, default=10, help="box growth parameter (at least 6)")
    p.add_argument("--model", choices=["site", "qubit"], default="site")

    p = sub.add_parser("hook", help="cost of the recursive hook path")
    p.add_argument("--config")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--size", type=_ints, default=None)
    p.add_argument("--counts", action="store_true", help="print the defect count after every step")

    p = sub.add_parser("selftest", help="quick internal consistency checks")
    p.add_argument("--config")
    return parser


def _save(records, args):
    if not getattr(args, "out", None):
        return
    from .records import write_csv, write_json
    (write_json if args.format == "json" else write_csv)(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")


def parse_error_file(code, path):
    """Read Pauli flips or defects; returns ``(PauliOperator | None, DefectSet)``."""
    from .codes import DefectSet
    from .pauli import PauliOperator
    P = PauliOperator.identity(code.n)
    defects = []
    with open(path) as fh:
        for raw in fh:
            parts = raw.split("#", 1)[0].split()
            if not parts:
                continue
            head = parts[0].upper()
            if head in ("X", "Y", "Z") and len(parts) == 2:
                P *= PauliOperator.single(code.n, int(parts[1]), head)
            elif head == "DEFECT" and len(parts) == code.lattice.D + 2:
                *xyz, sector = map(int, parts[1:])
                defects.append((tuple(xyz), sector))
            else:
                raise UsageError(f"cannot parse line {raw.strip()!r}")
    if defects and not P.is_identity():
        raise UsageError("a file holds either an error or a syndrome, not both")
    if defects:
        return None, DefectSet.from_cells(code.lattice, defects)
    return P, syndrome(code, P)


def cmd_decode(args):
    from .decoder import rg_decode
    code = build_code(args.code, args.size[0])
    P, S = parse_error_file(code, args.input)
    out = rg_decode(code, S, args.mode, log=args.trace)
    if args.trace:
        print("\n".join(out.trace_lines()))
    print(f"verdict: {out.verdict}")
    print(f"defects: {len(S)}  residual: {len(out.residual)}  correction weight: {out.correction.weight}")
    if out.correction.weight:
        print(f"correction: {out.correction.to_string()}")
    if P is not None and out.success:
        print(f"error times correction: {classify(code, P * out.correction)}")
    return EXIT_OK


def cmd_threshold(args):
    from .harness import crossings, threshold_sweep, wilson_interval
    recs = threshold_sweep(args.code, args.size, args.rate, args.samples, args.seed,
                           model=args.model, mode=args.mode, workers=args.workers)
    print("L      p         failures/trials   fraction   95% interval")
    for r in recs:
        lo, hi = wilson_interval(r.failures, r.trials)
        print(f"{r.L:<6d} {r.p:<9.5g} {r.failures:>7d}/{r.trials:<9d} {r.fraction:<10.4f} [{lo:.4f}, {hi:.4f}]")
    for La, Lb, pc in crossings(recs):
        print(f"crossing L={La}/{Lb}: p = {pc:.5f}")
    _save(recs, args)
    return EXIT_OK


def cmd_memory_time(args):
    from .harness import memory_time_campaign
    res = memory_time_campaign(args.beta, args.size, args.samples, args.seed, kind=args.code,
                               mode=args.mode, T_ec=args.tec, t_max=args.tmax, workers=args.workers)
    _save(res.records, args)
    if not res.summaries:
        print("no (beta, L) point has two uncensored samples", file=sys.stderr)
        return EXIT_FAILED
    print("beta   L     tau            stderr         n     censored")
    for s in res.summaries:
        print(f"{s.beta:<6g} {s.L:<5d} {s.tau:<14.6g} {s.ci:<14.6g} {s.n:<5d} {s.censored}")
    for beta, fit in res.exponents.items():
        print(f"beta={beta:g}: tau ~ L^{fit.slope:.3f} over {fit.points} sizes")
    if res.beta_fit is not None:
        print(f"log tau_max ~ {res.beta_fit.slope:.3f} beta^2 + {res.beta_fit.intercept:.3f}")
    return EXIT_OK


def cmd_chunk(args):
    from .chunks import chunk_decompose
    from .harness import point_rng, sample_iid_error
    from .records import CHUNK, ExperimentRecord
    code = build_code(args.code, args.size[0])
    recs = []
    for p in args.rate:
        rng = point_rng(args.seed, code.L, p)
        for i in range(args.samples):
            t0 = time.perf_counter()
            sites, _ = sample_iid_error(p, code.lattice, rng, args.model)
            dec = chunk_decompose(sites, args.q, code.lattice)
            sizes = " ".join(f"F{n}={len(F)}" for n, F in enumerate(dec.levels))
            note = "" if dec.exact else " (greedy above budget)"
            print(f"p={p:g} sample={i} |E|={len(sites)} m={dec.m} {sizes}{note}")
            recs.append(ExperimentRecord(CHUNK, code.kind, code.L, args.seed, p=p, sample=i,
                                         level=dec.m, duration=time.perf_counter() - t0))
    _save(recs, args)
    return EXIT_OK


def cmd_hook(args):
    from .hooks import defect_counts, hook_path
    path = hook_path(args.level, args.size[0] if args.size else None)
    counts = defect_counts(build_code(CUBIC, path.L), path)
    print(f"level {args.level}: L={path.L} flips={len(path)} cost={max(counts)} final defects={counts[-1]}")
    if args.counts:
        print(" ".join(map(str, counts)))
    return EXIT_OK


def selftest() -> list:
    """Quick checks; returns a list of failure messages."""
    from .decoder import rg_decode
    from .hooks import hook_cost
    from .pauli import PauliOperator
    bad = []
    code = build_code(CUBIC, 5)
    if codes.logical_basis(code).k != 2:
        bad.append("cubic L=5 does not encode two qubits")
    for q in range(0, code.n, 37):
        for letter in "XYZ":
            P = PauliOperator.single(code.n, q, letter)
            out = rg_decode(code, syndrome(code, P))
            if not out.success or classify(code, P * out.correction) != codes.STABILIZER:
                bad.append(f"single {letter} on qubit {q} not corrected")
    for p in range(4):
        if hook_cost(p) != 2 * p + 4:
            bad.append(f"hook level {p} cost differs from {2 * p + 4}")
    toric = build_code(TORIC, 8)
    P = PauliOperator.single(toric.n, 5, "X")
    out = rg_decode(toric, syndrome(toric, P))
    if not out.success or classify(toric, P * out.correction) != codes.STABILIZER:
        bad.append("toric single X not corrected")
    return bad


def cmd_selftest(args):
    bad = selftest()
    for msg in bad:
        print("FAIL", msg)
    print("selftest passed" if not bad else f"selftest: {len(bad)} failure(s)")
    return EXIT_OK if not bad else EXIT_FAILED


COMMANDS = {"decode": cmd_decode, "threshold": cmd_threshold, "memory-time": cmd_memory_time,
            "chunk": cmd_chunk, "hook": cmd_hook, "selftest": cmd_selftest}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if "--config" in argv:
            i = argv.index("--config")
            if i + 1 >= len(argv):
                raise UsageError("--config needs a path")
            path = argv[i + 1]
            argv = argv[:1] + read_config(path) + argv[1:]
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, OSError, ValueError, InvalidSize, OutOfValidatedRange, DoesNotFit, QTooSmall) as exc:
        print(f"qmemsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QMemError as exc:
        print(f"qmemsim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
