#!/usr/bin/env python3
"""Generate the quasi-cyclic LDPC parity-check matrices shipped under codes/.

Each code is H = [Hu | Hp]: Hu holds circulant permutation blocks of size Z
with deterministic pseudo-random shifts (girth > 4 enforced), Hp is the
dual-diagonal accumulator of identity blocks that gives linear-time
systematic encoding. Info columns have uniform weight; the block placement
is balanced so every check row carries the same number of info edges.

Running this script rewrites src/fhcomp/codes/*.alist deterministically.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

# name, Z, info block-cols, parity block-rows, info column weight
CODES = [
    ("rate_1_8", 64, 16, 112, 14),
    ("rate_1_2", 64, 64, 64, 3),
    ("rate_5_8", 64, 80, 48, 3),
    ("rate_2_3", 64, 84, 42, 3),
]
SEED = 0xC0DE


def balanced_row_assignment(rng, bci, br, wt):
    """Assign wt distinct row blocks to each info column, same load per row."""
    per_row = bci * wt // br
    assert per_row * br == bci * wt, "edge count must divide evenly"
    for _ in range(10_000):
        bag = np.repeat(np.arange(br), per_row)
        rng.shuffle(bag)
        cols = bag.reshape(bci, wt)
        if all(len(set(col)) == wt for col in cols):
            return [sorted(col) for col in cols]
    raise RuntimeError("could not deal distinct rows; adjust parameters")


def pick_shifts(rng, cols, z, br):
    """Choose circulant shifts per placed block, rejecting 4-cycles.

    A 4-cycle appears when two columns share two row blocks with equal shift
    differences mod Z. The accumulator contributes shift-0 identity pairs on
    consecutive rows, pre-seeded into the forbidden set.
    """
    pair_diffs: dict[tuple[int, int], set[int]] = {}
    for i in range(br - 1):
        pair_diffs.setdefault((i, i + 1), set()).add(0)
    shifts = []
    for rows in cols:
        for _ in range(10_000):
            cand = rng.integers(0, z, size=len(rows))
            bad = False
            for a in range(len(rows)):
                for b in range(a + 1, len(rows)):
                    d = int(cand[a] - cand[b]) % z
                    if d in pair_diffs.get((rows[a], rows[b]), set()):
                        bad = True
                        break
                if bad:
                    break
            if not bad:
                break
        else:
            raise RuntimeError("shift rejection stuck; increase Z or lower weight")
        for a in range(len(rows)):
            for b in range(a + 1, len(rows)):
                pair_diffs.setdefault((rows[a], rows[b]), set()).add(int(cand[a] - cand[b]) % z)
        shifts.append([int(s) for s in cand])
    return shifts


def expand(cols, shifts, z, bci, br):
    """Expand block placements into per-row column lists (0-based)."""
    k, m = bci * z, br * z
    rows = [[] for _ in range(m)]
    for j, (rblocks, sblocks) in enumerate(zip(cols, shifts)):
        for rb, s in zip(rblocks, sblocks):
            for lane in range(z):
                rows[rb * z + lane].append(j * z + (lane + s) % z)
    for i in range(br):          # dual-diagonal accumulator
        for lane in range(z):
            r = i * z + lane
            rows[r].append(k + i * z + lane)
            if i > 0:
                rows[r].append(k + (i - 1) * z + lane)
    return [sorted(r) for r in rows]


def write_alist(path, n, m, rows):
    cols = [[] for _ in range(n)]
    for i, rr in enumerate(rows):
        for c in rr:
            cols[c].append(i)
    lines = [
        f"{n} {m}",
        f"{max(len(c) for c in cols)} {max(len(r) for r in rows)}",
        " ".join(str(len(c)) for c in cols),
        " ".join(str(len(r)) for r in rows),
    ]
    lines += [" ".join(str(i + 1) for i in c) for c in cols]
    lines += [" ".join(str(j + 1) for j in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")


def main():
    out_dir = Path(__file__).resolve().parents[1] / "src" / "fhcomp" / "codes"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, z, bci, br, wt in CODES:
        rng = np.random.default_rng([SEED, z, bci, br, wt])
        cols = balanced_row_assignment(rng, bci, br, wt)
        shifts = pick_shifts(rng, cols, z, br)
        rows = expand(cols, shifts, z, bci, br)
        n, m = (bci + br) * z, br * z
        write_alist(out_dir / f"{name}.alist", n, m, rows)
        print(f"{name}: n={n} k={n - m} rate={1 - m / n:.4f} edges={sum(len(r) for r in rows)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
