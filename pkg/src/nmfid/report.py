"""JSON-ready records and a plain-text condition table.

All index data in reports is 1-based. Exact numbers are written as
``"p/q"`` strings so no precision is lost; float numbers stay numbers.
"""

import json
from fractions import Fraction

import numpy as np

from . import linalg as la

SCHEMA = 1

# originating result for each condition, shown in the condition table
TAGS = {
    "separability": "Donoho-Stodden R3",
    "complete_factorial_sampling": "Donoho-Stodden R2",
    "donoho_stodden": "Donoho-Stodden R1-R3",
    "sufficiently_spread": "Laurberg (sufficient, with SBC)",
    "boundary_close": "Laurberg (necessary)",
    "strongly_boundary_close": "Laurberg (sufficient, with spread)",
    "laurberg": "Laurberg",
    "huang": "Huang (necessary)",
}


def number(x):
    if isinstance(x, Fraction):
        return la.format_entry(x)
    if isinstance(x, (np.integer, int)) and not isinstance(x, bool):
        return int(x)
    return float(x)


def matrix_json(a):
    return [[number(x) for x in row] for row in np.asarray(a, dtype=object)]


def one_based(x):
    """Shift every integer in nested index data by one."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x) + 1
    if isinstance(x, dict):
        return {k: one_based(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        seq = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [one_based(v) for v in seq]
    return x


def certificate_json(rep):
    return {"condition": rep.condition, "verdict": rep.verdict, "role": rep.role,
            "source": rep.source, "witnesses": one_based(rep.witnesses),
            "notes": list(rep.notes)}


def indexing_json(idx):
    return {"parts": idx.parts, "arts": idx.arts, "index": one_based(idx.to_list())}


def sfa_json(cert, records, deficit):
    return {
        "indexing": indexing_json(cert.indexing),
        "witness_rows": one_based(cert.witness_rows),
        "binary_H": cert.binary_H,
        "part_balanced": cert.part_balanced,
        "core_rows": one_based(cert.core_rows),
        "extra_rows": one_based(cert.extra_rows),
        "notes": list(cert.notes),
        "invariant_rows": [record_json(r) for r in records],
        "rank_deficit": {"rank": deficit[0], "R": deficit[1], "deficient": deficit[2]},
    }


def record_json(rec):
    return {"row": rec.row + 1, "part": rec.part + 1, "epsilon": number(rec.epsilon)}


def family_json(fam):
    idx = fam.certificate.indexing
    return {
        "parametrization": "one point of the standard simplex per record",
        "formula": "W[m, r(p,a)] -> W[m, r(p,a)] - [p == part] * epsilon + theta_p * epsilon",
        "columns": one_based(idx.to_list()),
        "records": [record_json(r) for r in fam.records],
        "members_are_exact": fam.certificate.part_balanced,
    }


def verdict_json(v):
    def witness(w):
        out = {}
        for k, val in w.items():
            if k == "Q":
                out[k] = matrix_json(val)
            elif k == "pair":
                out[k] = one_based(val)
            else:
                out[k] = val
        return out

    return {
        "kind": v.kind,
        "subspace_groups": one_based(v.subspace_groups),
        "monomial_witnesses": [witness(w) for w in v.monomial_witnesses],
        "basis_witnesses": [witness(w) for w in v.basis_witnesses],
        "cross_witnesses": [witness(w) for w in v.cross_witnesses],
        "notes": list(v.notes),
    }


def decomposition_json(d):
    return {
        "K": d.K,
        "inner_permutation": one_based(d.inner_permutation),
        "blocks": [{"rows": one_based(b.rows), "inner": one_based(b.inner),
                    "cols": one_based(b.cols)} for b in d.blocks],
        "zero_rows": one_based(d.zero_rows),
        "zero_cols": one_based(d.zero_cols),
        "clause_checks": [{**c, "inner": one_based(c["inner"])} for c in d.clause_checks],
    }


def block_verdicts_json(verdicts, aggregate):
    return {
        "aggregate": aggregate,
        "blocks": [{"block": v.block + 1, "verdict": v.verdict, "reason": v.reason,
                    "certificates": [certificate_json(r) for r in v.reports],
                    "alternative": None if v.alternative is None else
                    {"W": matrix_json(v.alternative.W), "H": matrix_json(v.alternative.H)}}
                   for v in verdicts],
    }


def dumps(obj):
    """Canonical JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def _brief(witnesses, limit=48):
    if not witnesses:
        return "-"
    text = "; ".join(f"{k}={json.dumps(v, sort_keys=True)}" for k, v in sorted(witnesses.items()))
    return text if len(text) <= limit else text[:limit - 3] + "..."


def condition_table(certs):
    """Plain-text table of certificate records (as produced by certificate_json)."""
    rows = [("condition", "verdict", "witness", "theorem")]
    for c in certs:
        rows.append((c["condition"], c["verdict"], _brief(c["witnesses"]),
                     TAGS.get(c["condition"], c["source"])))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = []
    for k, r in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
