#!/usr/bin/env python3
"""LP/MILP adapter backed by scipy (HiGHS).

Usage: lp_adapter_scipy.py PROBLEM.lp SOLUTION.txt

Reads the LP-format subset emitted by the toolkit's exporter (Minimize /
Subject To / Bounds / Generals / Binaries / End; one bounds entry per line;
wrapped expression lines never contain a colon) and writes the documented
solution grammar:

    status optimal|infeasible|unbounded|limit
    objective <number>
    var <name> <value>
"""

import re
import sys

import numpy as np
from scipy import optimize, sparse

SECTIONS = {
    "minimize": "objective",
    "minimise": "objective",
    "min": "objective",
    "subject to": "rows",
    "st": "rows",
    "s.t.": "rows",
    "bounds": "bounds",
    "generals": "integers",
    "general": "integers",
    "integers": "integers",
    "binaries": "binaries",
    "binary": "binaries",
    "end": "end",
}

TERM = re.compile(r"([+-])?\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)?\s*([A-Za-z_][^\s+\-]*)?")


def split_sections(text):
    """Returns {section: [lines]} keyed by the canonical section names."""
    out = {}
    current = None
    for raw in text.splitlines():
        if raw.lstrip().startswith("\\"):
            continue
        stripped = raw.strip()
        if not stripped:
            continue
        key = stripped.lower()
        if key in SECTIONS:
            current = SECTIONS[key]
            out.setdefault(current, [])
            continue
        if current is None:
            raise ValueError(f"content before the first section: {stripped!r}")
        out.setdefault(current, []).append(stripped)
    if "end" not in out:
        raise ValueError("missing End marker")
    return out


def join_statements(lines):
    """Glues wrapped lines: a statement starts with 'name:' (or a relation
    continues one); wrapped lines never contain a colon."""
    statements = []
    for line in lines:
        if ":" in line or not statements:
            statements.append(line)
        else:
            statements[-1] += " " + line
    return statements


def parse_expression(text):
    """Parses '+ 2 x - 3.5 y + 4' into (coeffs dict, constant)."""
    coeffs = {}
    const = 0.0
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse expression at: {text[pos:]!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        num = m.group(2)
        name = m.group(3)
        if name is not None and name.lower() in ("infinity", "inf"):
            value = float("inf")
            if num is not None:
                raise ValueError(f"coefficient on infinity at: {text[pos:]!r}")
            const += sign * value
        elif name is not None:
            coef = float(num) if num is not None else 1.0
            coeffs[name] = coeffs.get(name, 0.0) + sign * coef
        elif num is not None:
            const += sign * float(num)
        else:
            raise ValueError(f"empty term at: {text[pos:]!r}")
        pos = m.end()
    return coeffs, const


def strip_label(statement):
    head, sep, tail = statement.partition(":")
    if sep and " " not in head.strip():
        return tail
    return statement


def parse_row(statement):
    body = strip_label(statement)
    m = re.search(r"(<=|>=|=)", body)
    if not m:
        raise ValueError(f"row without a relation: {statement!r}")
    lhs, rel, rhs = body[: m.start()], m.group(1), body[m.end():]
    coeffs, const = parse_expression(lhs)
    rhs_coeffs, rhs_const = parse_expression(rhs)
    if rhs_coeffs:
        raise ValueError("variables on the right-hand side are not supported")
    return coeffs, rel, rhs_const - const


def parse_bound_line(line, bounds):
    toks = line.replace("<=", " <= ").replace(">=", " >= ").split()
    # normalize '= value' vs '<='; forms emitted by the exporter:
    #   lo <= name <= hi | name free | name = v
    if len(toks) == 2 and toks[1].lower() == "free":
        bounds[toks[0]] = (-np.inf, np.inf)
        return
    if len(toks) == 3 and toks[1] == "=":
        v = float(toks[2])
        bounds[toks[0]] = (v, v)
        return
    if len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
        bounds[toks[2]] = (bound_value(toks[0]), bound_value(toks[4]))
        return
    if len(toks) == 3 and toks[1] == "<=":
        old = bounds.get(toks[0], (0.0, np.inf))
        bounds[toks[0]] = (old[0], bound_value(toks[2]))
        return
    if len(toks) == 3 and toks[1] == ">=":
        old = bounds.get(toks[0], (0.0, np.inf))
        bounds[toks[0]] = (bound_value(toks[2]), old[1])
        return
    raise ValueError(f"unsupported bounds line: {line!r}")


def bound_value(tok):
    low = tok.lower()
    if low in ("-infinity", "-inf"):
        return -np.inf
    if low in ("infinity", "inf", "+infinity", "+inf"):
        return np.inf
    return float(tok)


def main():
    if len(sys.argv) != 3:
        print("usage: lp_adapter_scipy.py PROBLEM.lp SOLUTION.txt", file=sys.stderr)
        return 2
    with open(sys.argv[1]) as f:
        sections = split_sections(f.read())

    obj_lines = join_statements(sections.get("objective", []))
    if len(obj_lines) != 1:
        raise ValueError("expected exactly one objective statement")
    obj, obj_const = parse_expression(strip_label(obj_lines[0]))

    rows = [parse_row(s) for s in join_statements(sections.get("rows", []))]

    bounds = {}
    for line in sections.get("bounds", []):
        parse_bound_line(line, bounds)

    integers = set(sections.get("integers", []))
    binaries = set(sections.get("binaries", []))

    names = []
    seen = set()
    for source in ([obj] + [r[0] for r in rows] + [bounds] +
                   [dict.fromkeys(sorted(integers))] + [dict.fromkeys(sorted(binaries))]):
        for name in source:
            if name not in seen:
                seen.add(name)
                names.append(name)
    idx = {name: j for j, name in enumerate(names)}
    n = len(names)

    c = np.zeros(n)
    for name, coef in obj.items():
        c[idx[name]] = coef

    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    for name in binaries:
        lb[idx[name]], ub[idx[name]] = 0.0, 1.0
    for name, (lo, hi) in bounds.items():
        lb[idx[name]], ub[idx[name]] = lo, hi

    data, ri, ci = [], [], []
    b_lo = np.full(len(rows), -np.inf)
    b_hi = np.full(len(rows), np.inf)
    for i, (coeffs, rel, rhs) in enumerate(rows):
        for name, coef in coeffs.items():
            ri.append(i)
            ci.append(idx[name])
            data.append(coef)
        if rel == "<=":
            b_hi[i] = rhs
        elif rel == ">=":
            b_lo[i] = rhs
        else:
            b_lo[i] = b_hi[i] = rhs

    integrality = np.zeros(n)
    for name in integers | binaries:
        integrality[idx[name]] = 1

    kwargs = {"bounds": optimize.Bounds(lb, ub), "integrality": integrality}
    if rows:
        a = sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), n))
        kwargs["constraints"] = optimize.LinearConstraint(a, b_lo, b_hi)
    res = optimize.milp(c, **kwargs)

    with open(sys.argv[2], "w") as out:
        if res.status == 0:
            out.write("status optimal\n")
            out.write("objective %.17g\n" % (res.fun + obj_const))
            for name in names:
                v = res.x[idx[name]]
                if v != 0.0:
                    out.write("var %s %.17g\n" % (name, v))
        elif res.status == 2:
            out.write("status infeasible\n")
        elif res.status == 3:
            out.write("status unbounded\n")
        else:
            out.write("status limit\n")
            if res.x is not None:
                out.write("objective %.17g\n" % (res.fun + obj_const))
                for name in names:
                    v = res.x[idx[name]]
                    if v != 0.0:
                        out.write("var %s %.17g\n" % (name, v))
    return 0


if __name__ == "__main__":
    sys.exit(main())
