#!/usr/bin/env python3
"""External-solver adapter backed by scipy (HiGHS).

Usage: reference_adapter.py <problem.lp> <solution.txt>

Reads the LP-format subset produced by this project's exporter (Minimize /
Subject To / Bounds / Generals / Binaries / End) and writes the documented
solution contract:

    status optimal|infeasible|unbounded|limit
    objective <number>
    var <name> <value>
"""

import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp


def is_number(tok):
    try:
        float(tok)
        return True
    except ValueError:
        return False


def parse_terms(tokens):
    """Parse '+ c name ...' token groups; returns (coefs dict, constant)."""
    coefs = {}
    const = 0.0
    i = 0
    while i < len(tokens):
        if tokens[i] in "+-":
            sign = -1.0 if tokens[i] == "-" else 1.0
            value = sign * float(tokens[i + 1])
            if i + 2 < len(tokens) and tokens[i + 2] not in "+-":
                name = tokens[i + 2]
                coefs[name] = coefs.get(name, 0.0) + value
                i += 3
            else:  # signed constant
                const += value
                i += 2
        elif is_number(tokens[i]):  # bare constant, e.g. the empty objective "0"
            const += float(tokens[i])
            i += 1
        else:
            raise ValueError("unexpected token %r in expression" % tokens[i])
    return coefs, const


def parse_lp(path):
    sections = ("minimize", "subject to", "bounds", "generals", "binaries", "end")
    obj_tokens = []
    row_records = []  # list of token lists, one logical row each
    bound_lines = []
    generals = []
    binaries = []
    section = None
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line or line.lstrip().startswith("\\"):
                continue
            stripped = line.strip()
            if stripped.lower() in sections:
                section = stripped.lower()
                continue
            toks = stripped.split()
            if section == "minimize":
                obj_tokens.extend(toks)
            elif section == "subject to":
                if toks[0].endswith(":"):
                    row_records.append(toks)
                else:  # wrapped continuation of the previous row
                    row_records[-1].extend(toks)
            elif section == "bounds":
                bound_lines.append(toks)
            elif section == "generals":
                generals.extend(toks)
            elif section == "binaries":
                binaries.extend(toks)
    if obj_tokens and obj_tokens[0].endswith(":"):
        obj_tokens = obj_tokens[1:]
    while row_records and obj_tokens and not row_records[0]:
        row_records.pop(0)

    obj, obj_const = parse_terms(obj_tokens)

    rows = []  # (coefs, rel, rhs)
    for toks in row_records:
        body = toks[1:] if toks[0].endswith(":") else toks
        rel_pos = max(i for i, t in enumerate(body) if t in ("<=", ">=", "="))
        coefs, const = parse_terms(body[:rel_pos])
        rhs = float(body[rel_pos + 1]) - const
        rows.append((coefs, body[rel_pos], rhs))

    bounds = {}  # name -> [lo, hi]
    for toks in bound_lines:
        if len(toks) == 2 and toks[1] == "free":
            bounds[toks[0]] = [-np.inf, np.inf]
        elif len(toks) == 3 and toks[1] == "=":
            v = float(toks[2])
            bounds[toks[0]] = [v, v]
        elif len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
            lo = -np.inf if toks[0] == "-infinity" else float(toks[0])
            hi = np.inf if toks[4] == "+infinity" else float(toks[4])
            bounds[toks[2]] = [lo, hi]
        else:
            raise ValueError("unrecognised bound line: %s" % " ".join(toks))

    names = []
    seen = set()

    def note(name):
        if name not in seen:
            seen.add(name)
            names.append(name)

    for name in obj:
        note(name)
    for coefs, _, _ in rows:
        for name in coefs:
            note(name)
    for name in bounds:
        note(name)
    for name in generals + binaries:
        note(name)

    return names, obj, obj_const, rows, bounds, set(generals), set(binaries)


def main():
    lp_path, sol_path = sys.argv[1], sys.argv[2]
    names, obj, obj_const, rows, bounds, generals, binaries = parse_lp(lp_path)

    index = {n: j for j, n in enumerate(names)}
    n = len(names)
    c = np.zeros(n)
    for name, coef in obj.items():
        c[index[name]] = coef

    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    integrality = np.zeros(n)
    for j, name in enumerate(names):
        if name in bounds:
            lo[j], hi[j] = bounds[name]
        elif name in binaries:
            lo[j], hi[j] = 0.0, 1.0
        if name in generals or name in binaries:
            integrality[j] = 1

    constraints = []
    if rows:
        a = np.zeros((len(rows), n))
        clo = np.empty(len(rows))
        chi = np.empty(len(rows))
        for i, (coefs, rel, rhs) in enumerate(rows):
            for name, coef in coefs.items():
                a[i, index[name]] = coef
            clo[i] = rhs if rel in (">=", "=") else -np.inf
            chi[i] = rhs if rel in ("<=", "=") else np.inf
        constraints.append(LinearConstraint(a, clo, chi))

    res = milp(c, constraints=constraints, integrality=integrality, bounds=Bounds(lo, hi))

    with open(sol_path, "w") as out:
        if res.status == 0:
            out.write("status optimal\n")
        elif res.status == 2:
            out.write("status infeasible\n")
        elif res.status == 3:
            out.write("status unbounded\n")
        else:
            out.write("status limit\n")
        if res.fun is not None:
            out.write("objective %r\n" % float(res.fun + obj_const))
        if res.x is not None:
            for j, name in enumerate(names):
                out.write("var %s %r\n" % (name, float(res.x[j])))


if __name__ == "__main__":
    main()
