"""Audit the printed expansion tables against the engine and the contraction oracle.

Writes ``audit_k{1,2,3}.json`` and prints per-row counts. Usage: ``python3 scripts/audit_tables.py [outdir]``.
"""

import json
import sys
from pathlib import Path

from timemachine import audit


def main(outdir="."):
    out = Path(outdir)
    for k in (1, 2, 3):
        rep = audit.full_audit(k)
        p = out / f"audit_k{k}.json"
        p.write_text(json.dumps(rep, indent=2, ensure_ascii=False, default=str) + "\n", encoding="utf-8")
        print(f"k={k}: engine-vs-oracle mismatches {rep['engine_vs_oracle']['mismatches']}, wrote {p}")
        if "printed_elements" in rep:
            for label, counts in rep["printed_elements"]["summary"].items():
                print(f"  {label:<22} {counts}")
        if "table" in rep:
            for r in rep["table"]["rows"]:
                e = r["engine_vs_printed"]
                print(f"  {r['monomial']:<12} mismatched {len(e['coefficient_mismatches']):2d} "
                      f"engine-only {len(e['engine_only']):2d} printed-only {len(e['printed_only']):2d}")


if __name__ == "__main__":
    main(*sys.argv[1:])
