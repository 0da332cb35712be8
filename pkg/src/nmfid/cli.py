"""``nmfid`` command line: analyze, verify, enumerate, decompose, generate.

Exit codes: 0 success, 1 parse or dimension error (including bad usage),
2 inexact factorization where exactness is required, 3 guard limit hit.
"""

import argparse
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, blocks, certify, classify, corpus, sfa
from . import linalg as la
from . import report as rp
from .errors import (
    GuardLimitError,
    InexactFactorizationError,
    NmfidError,
)
from .solve import Factorization, SolveConfig, best_of_restarts, nonneg_rank_bounds, verify_exact

EXIT_OK, EXIT_INPUT, EXIT_INEXACT, EXIT_GUARD = 0, 1, 2, 3

_DECIMAL = re.compile(r"[.eE]")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _load(paths, force_exact):
    """Read CSV files in one shared arithmetic mode.

    Rational mode is used when ``force_exact`` is set or no file contains a
    decimal point or exponent; otherwise every matrix is read as float64.
    """
    texts = {}
    for p in paths:
        try:
            texts[p] = Path(p).read_text(encoding="utf-8")
        except OSError as exc:
            raise _InputError(str(exc)) from exc
    exact = force_exact or not any(
        _DECIMAL.search(ln) for t in texts.values() for ln in t.splitlines()
        if not ln.strip().startswith("#"))
    return [la.parse_csv(texts[p], exact=True if exact else False) for p in paths], exact


class _InputError(NmfidError):
    pass


def _exact_limit(S, tol):
    return 0.0 if la.is_exact(S) else tol * max(1.0, la.frobenius(la.to_float(S)))


def _require_exact(S, fs, tol):
    limit = _exact_limit(S, tol)
    for k, f in enumerate(fs):
        res = verify_exact(S, f)
        if res > limit:
            raise InexactFactorizationError(
                f"factorization {k + 1}: residual {res:.6g} exceeds {limit:.3g}")


def _pairs(args):
    ws, hs = args.w or [], args.h or []
    if len(ws) != len(hs):
        raise _InputError("--w and --h must be given the same number of times")
    return list(zip(ws, hs))


def _emit(args, obj, text):
    if getattr(args, "out", None):
        out = Path(args.out)
        if out.parent and not out.parent.exists():
            out.parent.mkdir(parents=True)
        out.write_text(rp.dumps(obj), encoding="utf-8")
    if getattr(args, "json", False):
        sys.stdout.write(rp.dumps(obj))
    else:
        print(text)


def _header(mode_exact, tol):
    return {"schema": rp.SCHEMA, "version": __version__,
            "mode": "exact" if mode_exact else "float", "tolerance": tol}


# ---------------------------------------------------------------------------
# analyze


def cmd_analyze(args):
    pairs = _pairs(args)
    files = [args.input] + [p for pair in pairs for p in pair]
    mats, exact = _load(files, args.exact)
    S = la.nonneg(mats[0])
    fs = [Factorization(mats[1 + 2 * k], mats[2 + 2 * k]) for k in range(len(pairs))]
    _require_exact(S, fs, args.tol)
    obj = _header(exact, args.tol)
    obj["input"] = {"S": args.input, "shape": list(S.shape),
                    "factorizations": [{"W": w, "H": h, "inner_rank": f.inner_rank,
                                        "residual": verify_exact(S, f)}
                                       for (w, h), f in zip(pairs, fs)]}
    lines = [f"nmfid {__version__}  mode={obj['mode']}  S: {S.shape[0]}x{S.shape[1]}"]

    notes = []
    if not fs and args.rank:
        # accept only what the exactness check below will accept
        cfg = SolveConfig(target_rank=args.rank, seed=args.seed,
                          stop_tol=_exact_limit(la.to_float(S), args.tol))
        best = best_of_restarts(la.to_float(S), cfg, args.restarts)
        obj["solver"] = {"rank": args.rank, "seed": best.seed, "residual": best.residual}
        if best.residual <= cfg.stop_tol:
            fs = [best.factorization]
            notes.append("factorization found numerically; certificates use float arithmetic")
        else:
            notes.append(f"solver did not reach an exact rank-{args.rank} factorization")

    bounds = nonneg_rank_bounds(S, SolveConfig(target_rank=1, seed=args.seed),
                                restarts=args.restarts,
                                known=fs, tol=args.tol)
    obj["rank_bounds"] = {"rank": bounds.lower, "lower": bounds.lower, "upper": bounds.upper,
                          "upper_residual": bounds.witness_residual}
    lines.append(f"rank(S) = {bounds.lower}   rank_+(S) in [{bounds.lower}, {bounds.upper}]")

    cert = records = None
    if fs and args.parts and args.arts:
        cert = sfa.detect_sfa(fs[0], args.parts, args.arts, args.tol)
    idx = cert.indexing if cert is not None else (
        certify.PartArticulationIndexing(args.parts, args.arts)
        if args.parts and args.arts else None)

    obj["certificates"] = []
    for k, f in enumerate(fs):
        reps = [rp.certificate_json(r) for r in certify.certify_all(S, f, idx, args.tol)]
        obj["certificates"].append(reps)
        lines += ["", f"factorization {k + 1} (inner rank {f.inner_rank})",
                  rp.condition_table(reps)]

    if fs:
        f = fs[0]
        d = blocks.find_block_structure(f.W, f.H, args.tol)
        m = blocks.BlockModel.plain(f.W, f.H)
        verdicts, agg = blocks.blockwise_identifiability(m, d, args.tol, args.parts, args.arts)
        obj["blocks"] = {"decomposition": rp.decomposition_json(d),
                         "identifiability": rp.block_verdicts_json(verdicts, agg)}
        lines += ["", f"blocks: K = {d.K}, factorization 1 is {agg}"]
        for v in verdicts:
            lines.append(f"  block {v.block + 1}: {v.verdict} ({v.reason})")
    else:
        obj["blocks"] = None

    obj["sfa"] = obj["family"] = None
    if cert is not None:
        flag, records = sfa.is_type2_nonidentifiable(fs[0], cert, args.tol)
        deficit = sfa.rank_deficit_check(fs[0], cert, args.tol)
        obj["sfa"] = rp.sfa_json(cert, records, deficit)
        obj["sfa"]["type2_nonidentifiable"] = flag
        lines += ["", f"SFA: P={args.parts}, A={args.arts}, invariant rows: {len(records)}, "
                      f"Type II non-identifiable: {flag}"]
        if records:
            obj["family"] = rp.family_json(sfa.build_family(fs[0], cert, args.tol))
    elif args.parts and args.arts and fs:
        lines += ["", f"SFA: not recognised with P={args.parts}, A={args.arts}"]

    if len(fs) >= 2 and len({f.inner_rank for f in fs}) == 1:
        v = classify.classify_solution_set(classify.SolutionSet(S, fs), args.tol)
        obj["classification"] = rp.verdict_json(v)
        obj["type"] = v.kind
    else:
        obj["classification"] = None
        obj["type"] = classify.NO_EVIDENCE
        if len(fs) < 2:
            notes.append("fewer than two factorizations: no comparison possible")
        else:
            notes.append("factorizations differ in inner rank: not classified")
    obj["notes"] = notes
    lines += ["", f"type: {obj['type']}"] + [f"note: {n}" for n in notes]
    _emit(args, obj, "\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify / decompose / enumerate


def cmd_verify(args):
    files = [args.input, args.w, args.h] + ([args.g] if args.g else [])
    mats, exact = _load(files, args.exact)
    S = la.nonneg(mats[0])
    W = mats[1]
    if args.g:
        W = la.matmul(*la.common(la.nonneg(mats[3]), la.nonneg(W)))
    f = Factorization(W, mats[2])
    res = verify_exact(S, f)
    ok = res <= _exact_limit(S, args.tol)
    print(f"residual {res!r}: {'exact' if ok else 'not exact'} ({'exact' if exact else 'float'} mode)")
    return EXIT_OK if ok else EXIT_INEXACT


def cmd_decompose(args):
    files = ([args.g] if args.g else []) + [args.w, args.h]
    mats, exact = _load(files, args.exact)
    if args.g:
        m = blocks.BlockModel(*mats)
    else:
        m = blocks.BlockModel.plain(*mats)
    d = blocks.find_block_structure(m.W, m.H, args.tol)
    obj = _header(exact, args.tol)
    obj["decomposition"] = rp.decomposition_json(d)
    subs = blocks.direct_sum_decompose(m, d)
    obj["sub_models"] = [None if s is None else
                         {"G": rp.matrix_json(s.G), "W": rp.matrix_json(s.W),
                          "H": rp.matrix_json(s.H), "S": rp.matrix_json(s.product())}
                         for s in subs]
    S = m.product()
    obj["S"] = rp.matrix_json(S)
    obj["reassembly_exact"] = bool(la.equal(blocks.reassemble(m, d, subs), S, args.tol))
    lines = [f"K = {d.K} blocks"]
    for k, b in enumerate(d.blocks):
        lines.append(f"  block {k + 1}: rows {rp.one_based(b.rows)} inner {rp.one_based(b.inner)}"
                     f" cols {rp.one_based(b.cols)}")
    if m.full_rank_G(args.tol):
        verdicts, agg = blocks.blockwise_identifiability(m, d, args.tol)
        obj["identifiability"] = rp.block_verdicts_json(verdicts, agg)
        lines.append(f"aggregate: {agg}")
    else:
        obj["identifiability"] = None
        lines.append("G is not of full column rank: identifiability not reduced to blocks")
    _emit(args, obj, "\n".join(lines))
    return EXIT_OK


def _simplex_samples(parts, count, seed):
    # vertices first, then seeded random rational interior points
    pts = [sfa.vertex(parts, p) for p in range(min(parts, count))]
    rng = np.random.default_rng(seed)
    while len(pts) < count:
        w = rng.integers(1, 100, size=parts)
        total = int(w.sum())
        pt = [Fraction(int(x), total) for x in w]
        if pt not in pts:
            pts.append(pt)
    return pts


def cmd_enumerate(args):
    mats, exact = _load([args.input, args.w, args.h], args.exact)
    S = la.nonneg(mats[0])
    f = Factorization(mats[1], mats[2])
    _require_exact(S, [f], args.tol)
    cert = sfa.detect_sfa(f, args.parts, args.arts, args.tol)
    if cert is None:
        print(f"not a separable factorial articulation family with P={args.parts}, "
              f"A={args.arts}", file=sys.stderr)
        return EXIT_INPUT
    fam = sfa.build_family(f, cert, args.tol)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    la.write_csv(out / "H.csv", f.H)
    members = []
    if fam.records:
        pts = _simplex_samples(args.parts, args.samples, args.seed)
        for k, pt in enumerate(pts):
            thetas = [pt if exact else [float(x) for x in pt]] * len(fam.records)
            g = fam.member(thetas)
            name = f"W_{k + 1:03d}.csv"
            la.write_csv(out / name, g.W)
            members.append({"W": name, "theta": [rp.number(x) for x in pt],
                            "residual": verify_exact(S, g)})
    obj = _header(exact, args.tol)
    obj["family"] = rp.family_json(fam)
    obj["members"] = members
    obj["H"] = "H.csv"
    (out / "family.json").write_text(rp.dumps(obj), encoding="utf-8")
    print(f"{len(fam.records)} invariant row record(s); wrote {len(members)} member(s) to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = {}

    def put(name, a):
        la.write_csv(out / name, a)
        written[name.rsplit(".", 1)[0]] = name

    if args.name == "swimmer":
        S, f, idx = corpus.swimmer(with_body=not args.no_body)
        put("S.csv", S)
        put("W.csv", f.W)
        put("H.csv", f.H)
        corpus.write_pgm(out / "images", S)
        expected = {"parts": 4, "arts": 4, "body": not args.no_body}
    else:
        inst = corpus.paper_example(args.name)
        put("S.csv", inst.S)
        if args.name == "block-g":
            for key in ("G", "W", "H"):
                put(f"{key}.csv", inst.extras[key])
        else:
            for k, f in enumerate(inst.known_factorizations, 1):
                put(f"W{k}.csv", f.W)
                put(f"H{k}.csv", f.H)
            for key, val in sorted(inst.extras.items()):
                if isinstance(val, np.ndarray):
                    put(f"{key}.csv", val)
        expected = {k: list(v) if isinstance(v, tuple) else v
                    for k, v in inst.expected.items()}
    manifest = {"schema": rp.SCHEMA, "version": __version__, "name": args.name,
                "files": written, "expected": expected}
    (out / "manifest.json").write_text(rp.dumps(manifest), encoding="utf-8")
    print(f"wrote {len(written)} matrices for {args.name} to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="nmfid", description="Identifiability analysis for exact NMF.")
    p.add_argument("--version", action="version", version=f"nmfid {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out=True):
        sp.add_argument("--tol", type=float, default=la.DEFAULT_TOL,
                        help="zero tolerance for float mode (default 1e-10)")
        sp.add_argument("--exact", action="store_true",
                        help="read every matrix in rational arithmetic")
        if out:
            sp.add_argument("--out", help="write the JSON report here")
            sp.add_argument("--json", action="store_true", help="print JSON to stdout")

    a = sub.add_parser("analyze", help="full identifiability pipeline")
    a.add_argument("--input", required=True, help="data matrix S (CSV)")
    a.add_argument("--w", action="append", help="basis factor W (repeatable)")
    a.add_argument("--h", action="append", help="coefficient factor H (repeatable)")
    a.add_argument("--rank", type=int, help="solve for a rank-R factorization if none given")
    a.add_argument("--parts", type=int, help="number of parts P")
    a.add_argument("--arts", type=int, help="number of articulations A")
    a.add_argument("--restarts", type=int, default=5,
                   help="solver restarts per rank when tightening the upper bound")
    a.add_argument("--seed", type=int, default=0)
    common(a)
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="exit 0 iff S = W H (or G W H) exactly")
    v.add_argument("--input", required=True)
    v.add_argument("--w", required=True)
    v.add_argument("--h", required=True)
    v.add_argument("--g", help="generator matrix G: check S = G W H")
    common(v, out=False)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("enumerate", help="write members of the SFA solution family")
    e.add_argument("--input", required=True)
    e.add_argument("--w", required=True)
    e.add_argument("--h", required=True)
    e.add_argument("--parts", type=int, required=True)
    e.add_argument("--arts", type=int, required=True)
    e.add_argument("--samples", type=int, default=4)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", required=True, help="output directory")
    e.add_argument("--tol", type=float, default=la.DEFAULT_TOL)
    e.add_argument("--exact", action="store_true")
    e.set_defaults(func=cmd_enumerate)

    d = sub.add_parser("decompose", help="block structure of S = G W H")
    d.add_argument("--g", help="generator matrix G (default: identity)")
    d.add_argument("--w", required=True)
    d.add_argument("--h", required=True)
    common(d)
    d.set_defaults(func=cmd_decompose)

    g = sub.add_parser("generate", help="write a worked example or the Swimmer corpus")
    g.add_argument("name", choices=list(corpus.EXAMPLES) + ["swimmer"])
    g.add_argument("--no-body", action="store_true", help="swimmer without the torso")
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InexactFactorizationError as exc:
        print(f"nmfid: {exc}", file=sys.stderr)
        return EXIT_INEXACT
    except GuardLimitError as exc:
        print(f"nmfid: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (NmfidError, OSError, KeyError, ValueError) as exc:
        print(f"nmfid: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
