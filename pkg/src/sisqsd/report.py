"""Rendering of ErrorReports as CSV, grid-layout text tables, or JSON lines."""

from __future__ import annotations

import io
import json
import sys
from decimal import ROUND_HALF_EVEN, Context

from .numerics import to_decimal

CSV_HEADER = "r0,n,approx,err1,err2,precision_bits"


def fmt_r0(r0):
    return format(float(r0), "g")


def sci(x, sig=6):
    """Scientific notation with ``sig`` significant digits, half-even."""
    d = Context(prec=sig, rounding=ROUND_HALF_EVEN).create_decimal(to_decimal(x, sig + 30))
    if d == 0:
        return f"{0:.{sig - 1}e}".replace("e+00", "e+0")
    return f"{d:.{sig - 1}e}"


def _csv(reports, verdicts, failures):
    lines = [CSV_HEADER]
    for r in reports:
        lines.append(f"{fmt_r0(r.R0)},{r.N},{r.approx_name},{sci(r.err1)},{sci(r.err2)},{r.precision_bits}")
    # verdicts and failures ride along as comment lines
    for v in verdicts:
        lines.append(f"# verdict r0={fmt_r0(v.R0)} approx={v.approx_name} n={'/'.join(map(str, v.sampled_N))} {v.verdict}")
    for f in failures:
        lines.append(f"# failed r0={fmt_r0(f.R0)} n={f.N} approx={f.approx_name or '*'}: {f.message}")
    return "\n".join(lines) + "\n"


def _text(reports, verdicts, failures):
    names = list(dict.fromkeys(r.approx_name for r in reports))
    names += [f.approx_name for f in failures if f.approx_name and f.approx_name not in names]
    cells = list(dict.fromkeys((r.R0, r.N) for r in reports))
    cells += [(f.R0, f.N) for f in failures if (f.R0, f.N) not in cells]
    index = {(r.R0, r.N, r.approx_name): r for r in reports}
    failed = {(f.R0, f.N, f.approx_name) for f in failures}

    header = ["R0", "N"] + [f"Err1({n})" for n in names]
    rows = []
    for r0, n in cells:
        row = [fmt_r0(r0), str(n)]
        for name in names:
            rep = index.get((r0, n, name))
            if rep is not None:
                row.append(sci(rep.err1, 2))
            elif (r0, n, name) in failed or (r0, n, None) in failed:
                row.append("FAILED")
            else:
                row.append("-")
        rows.append(row)
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    out = io.StringIO()
    line = lambda cols: "  ".join(c.rjust(w) for c, w in zip(cols, widths)).rstrip()
    out.write(line(header) + "\n")
    out.write("  ".join("-" * w for w in widths) + "\n")
    prev_r0 = None
    for row in rows:
        if prev_r0 is not None and row[0] != prev_r0:
            out.write("\n")
        prev_r0 = row[0]
        out.write(line(row) + "\n")
    if verdicts:
        out.write("\nscaling over N = " + ", ".join(map(str, verdicts[0].sampled_N)) + "\n")
        for v in verdicts:
            out.write(f"  R0={fmt_r0(v.R0):<6} {v.approx_name:<14} {v.verdict}\n")
    for f in failures:
        out.write(f"FAILED R0={fmt_r0(f.R0)} N={f.N} {f.approx_name or ''}: {f.message}\n")
    return out.getvalue()


def _jsonl(reports, verdicts, failures):
    lines = []
    for r in reports:
        lines.append({
            "record": "error", "r0": float(r.R0), "n": r.N, "approx": r.approx_name,
            "err1": sci(r.err1, 17), "err2": sci(r.err2, 17), "precision_bits": r.precision_bits,
        })
    for v in verdicts:
        lines.append({
            "record": "verdict", "r0": float(v.R0), "approx": v.approx_name,
            "n": list(v.sampled_N), "errors": [sci(e, 17) for e in v.errors], "verdict": v.verdict,
        })
    for f in failures:
        lines.append({"record": "failure", "r0": float(f.R0), "n": f.N, "approx": f.approx_name, "message": f.message})
    return "".join(json.dumps(rec) + "\n" for rec in lines)


RENDERERS = {"csv": _csv, "text-table": _text, "json-lines": _jsonl}


def render(reports, fmt, verdicts=(), failures=()):
    if fmt not in RENDERERS:
        raise ValueError(f"unknown format {fmt!r}")
    return RENDERERS[fmt](list(reports), list(verdicts), list(failures))


def emit_report(reports, fmt="csv", path=None, verdicts=(), failures=()):
    """Render and write to ``path`` (or stdout); returns the rendered text."""
    reports = list(reports)
    if not reports and not failures:
        raise ValueError("nothing to report")
    text = render(reports, fmt, verdicts, failures)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
