#!/usr/bin/env python3
"""Generates src/case_table.inc: bijective simple upper/lower case pairs.

A pair (U, L) is emitted only when U.lower() == L and L.upper() == U, both
single code points. Everything else is treated as caseless by the library.
"""
import sys
import unicodedata

pairs = []
for cp in range(0x110000):
    ch = chr(cp)
    lo = ch.lower()
    if lo == ch or len(lo) != 1:
        continue
    if lo.upper() != ch:
        continue
    pairs.append((cp, ord(lo)))

out = sys.argv[1] if len(sys.argv) > 1 else "src/case_table.inc"
with open(out, "w", encoding="ascii") as f:
    f.write("// Generated by tools/gen_case_table.py (Unicode %s). Do not edit.\n"
            % unicodedata.unidata_version)
    f.write("// {upper, lower}, sorted by upper.\n")
    for u, l in pairs:
        f.write("{0x%04X, 0x%04X},\n" % (u, l))
print(len(pairs), "pairs written to", out)
