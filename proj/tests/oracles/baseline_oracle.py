#!/usr/bin/env python3
"""Brute-force reference for the baseline matchers.

Written independently of the C++ sources. Used once to produce the golden
values frozen into tests/test_baseline.cpp; rerun to audit them:

    python3 tests/oracles/baseline_oracle.py data/toy_bank1.schema.json data/toy_bank2.schema.json
"""
import json
import math
import sys
from collections import Counter

TIE = 1e-12


def normalize(text):
    tokens = []
    cur = []

    def flush():
        if cur:
            tokens.append("".join(cur).lower())
            cur.clear()

    b = text.encode("utf-8")
    n = len(b)
    for i in range(n):
        c = chr(b[i])
        if b[i] >= 0x80 or c.isalnum():
            if cur and b[i] < 0x80 and c.isupper():
                prev = cur[-1] if ord(cur[-1]) < 0x80 else ""
                nxt = chr(b[i + 1]) if i + 1 < n and b[i + 1] < 0x80 else ""
                if prev.islower() or prev.isdigit():
                    flush()
                elif prev.isupper() and nxt.islower():
                    flush()
            cur.append(c)
        else:
            flush()
    flush()
    return " ".join(tokens)


def grams(s):
    if len(s) < 3:
        return [s + "#" * (3 - len(s))]
    return [s[i:i + 3] for i in range(len(s) - 2)]


def name_similarity(a, b):
    na, nb = normalize(a), normalize(b)
    if na == nb:
        return 1.0
    ca, cb = Counter(grams(na)), Counter(grams(nb))
    inter = sum(min(ca[g], cb[g]) for g in ca.keys() | cb.keys())
    union = sum(max(ca[g], cb[g]) for g in ca.keys() | cb.keys())
    j = inter / union if union else 0.0
    return math.nextafter(1.0, 0.0) if j >= 1.0 else j


def columns(schema):
    out = []
    for t in schema["tables"]:
        fks = {fk["column"].lower() for fk in t.get("foreign_keys", [])}
        for c in t["columns"]:
            out.append({
                "table": t["name"],
                "column": c["name"],
                "desc": c.get("description", ""),
                "pk": bool(c.get("primary_key", False)),
                "fk": c["name"].lower() in fks,
            })
    return out


def select(scores, src, tgt, threshold):
    chosen = []
    for i, s in enumerate(src):
        best = None
        for j, t in enumerate(tgt):
            key = (t["table"] + "." + t["column"]).lower()
            if best is None:
                best = (scores[i][j], key, j)
                continue
            if scores[i][j] > best[0] + TIE:
                best = (scores[i][j], key, j)
            elif abs(scores[i][j] - best[0]) <= TIE and key < best[1]:
                best = (scores[i][j], key, j)
        if best is not None and best[0] >= threshold:
            t = tgt[best[2]]
            chosen.append([s["table"], s["column"], t["table"], t["column"]])
    return chosen


def lexical_scores(src, tgt):
    return [[name_similarity(s["table"] + "." + s["column"], t["table"] + "." + t["column"])
             for t in tgt] for s in src]


def cupid_scores(src, tgt, w_struct=0.5):
    out = []
    for s in src:
        row = []
        for t in tgt:
            lsim = name_similarity(s["column"] + " " + s["desc"], t["column"] + " " + t["desc"])
            ssim = name_similarity(s["table"], t["table"])
            if (s["pk"] and t["pk"]) or (s["fk"] and t["fk"]):
                ssim = min(1.0, ssim + 0.2)
            row.append(w_struct * ssim + (1.0 - w_struct) * lsim)
        out.append(row)
    return out


def flood(source, target, eps=1e-4, max_iters=100, scale=1.0):
    """Dense fixed-point iteration over the pairwise connectivity graph."""
    nodes = []
    index = {}
    for ts in source["tables"]:
        for tt in target["tables"]:
            index[("T", ts["name"], tt["name"])] = len(nodes)
            nodes.append(("T", ts["name"], tt["name"]))
    for ts in source["tables"]:
        for cs in ts["columns"]:
            for tt in target["tables"]:
                for ct in tt["columns"]:
                    key = ("C", ts["name"], cs["name"], tt["name"], ct["name"])
                    index[key] = len(nodes)
                    nodes.append(key)
    n = len(nodes)
    sigma0 = [0.0] * n
    for k, i in index.items():
        if k[0] == "T":
            sigma0[i] = scale * name_similarity(k[1], k[2])
        else:
            sigma0[i] = scale * name_similarity(k[2], k[4])
    edges = []  # (from, to, label)
    for ts in source["tables"]:
        for tt in target["tables"]:
            tp = index[("T", ts["name"], tt["name"])]
            for cs in ts["columns"]:
                for ct in tt["columns"]:
                    cp = index[("C", ts["name"], cs["name"], tt["name"], ct["name"])]
                    edges.append((tp, cp, "col"))
                    edges.append((cp, tp, "col"))
    for ts in source["tables"]:
        for fs in ts.get("foreign_keys", []):
            for tt in target["tables"]:
                for ft in tt.get("foreign_keys", []):
                    a = index[("C", ts["name"], fs["column"], tt["name"], ft["column"])]
                    b = index[("C", fs["ref_table"], fs["ref_column"], ft["ref_table"], ft["ref_column"])]
                    edges.append((a, b, "fk"))
                    edges.append((b, a, "fk"))
    out_count = Counter((f, lbl) for f, _, lbl in edges)
    A = [[0.0] * n for _ in range(n)]
    for f, t, lbl in edges:
        A[t][f] += 1.0 / out_count[(f, lbl)]
    m0 = max(sigma0) if sigma0 else 0.0
    base = [x / m0 for x in sigma0] if m0 > 0 else [0.0] * n
    sigma = base[:]
    iters = 0
    converged = False
    while iters < max_iters:
        nxt = [base[p] + sigma[p] + sum(A[p][q] * sigma[q] for q in range(n)) for p in range(n)]
        m = max(nxt) if nxt else 0.0
        if m > 0:
            nxt = [x / m for x in nxt]
        delta = max(abs(a - b) for a, b in zip(nxt, sigma)) if n else 0.0
        sigma = nxt
        iters += 1
        if delta < eps:
            converged = True
            break
    return nodes, sigma, iters, converged


def flood_scores(source, target, **kw):
    nodes, sigma, iters, conv = flood(source, target, **kw)
    lookup = {k: sigma[i] for i, k in enumerate(nodes)}
    src, tgt = columns(source), columns(target)
    return [[lookup[("C", s["table"], s["column"], t["table"], t["column"])] for t in tgt]
            for s in src], iters, conv


def main():
    source = json.load(open(sys.argv[1]))
    target = json.load(open(sys.argv[2]))
    src, tgt = columns(source), columns(target)
    out = {}
    out["name_similarity"] = {
        "currency_code|currency": name_similarity("currency_code", "currency"),
        "customer_id|CustomerId": name_similarity("customer_id", "CustomerId"),
        "abc|xyz": name_similarity("abc", "xyz"),
        "ab|abc": name_similarity("ab", "abc"),
    }
    lex = lexical_scores(src, tgt)
    out["lexical@0.4"] = select(lex, src, tgt, 0.4)
    cup = cupid_scores(src, tgt)
    out["cupid@default"] = select(cup, src, tgt, 0.5)
    out["cupid@0.3"] = select(cup, src, tgt, 0.3)
    fl, iters, conv = flood_scores(source, target)
    out["flood@default"] = select(fl, src, tgt, 0.3)
    out["flood_iterations"] = iters
    out["flood_converged"] = conv
    comp = [[(lex[i][j] + fl[i][j] + cup[i][j]) / 3.0 for j in range(len(tgt))] for i in range(len(src))]
    out["composite@0.4"] = select(comp, src, tgt, 0.4)
    json.dump(out, sys.stdout, indent=1)
    print()


if __name__ == "__main__":
    main()
