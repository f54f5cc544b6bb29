"""LDPC codes: alist parsing, systematic encoding, normalized min-sum decoding.

The shipped parity-check matrices are quasi-cyclic with a dual-diagonal
(accumulator) parity part, H = [Hu | Hp], which gives linear-time systematic
encoding by forward substitution. The alist loader accepts any standard
alist file; encoding requires the dual-diagonal parity structure and raises
otherwise. Decoding is flooding normalized min-sum (scale 0.75 by default)
with early exit once the syndrome clears.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np
from numba import njit

MINSUM_SCALE = 0.75
MAX_ITERS = 25


def parse_alist(text: str) -> tuple[int, int, list[np.ndarray]]:
    """Parse an alist file into (n, m, per-row column index lists), 0-based.

    Zero padding entries (used by some writers to rectangularize the lists)
    are ignored.
    """
    tokens = text.split()
    if len(tokens) < 4:
        raise ValueError("truncated alist header")
    pos = 0

    def take(count: int) -> list[int]:
        nonlocal pos
        chunk = tokens[pos:pos + count]
        if len(chunk) < count:
            raise ValueError("truncated alist body")
        pos += count
        return [int(t) for t in chunk]

    n, m = take(2)
    take(2)  # max column / row weights, redundant with the degree lists
    col_deg = take(n)
    row_deg = take(m)
    cols = [np.array([v - 1 for v in take(col_deg[j]) if v > 0], dtype=np.int32) for j in range(n)]
    rows = [np.array([v - 1 for v in take(row_deg[i]) if v > 0], dtype=np.int32) for i in range(m)]
    # cross-check the two adjacency lists describe the same matrix
    edges_c = sorted((int(r), j) for j, rr in enumerate(cols) for r in rr)
    edges_r = sorted((i, int(c)) for i, cc in enumerate(rows) for c in cc)
    if edges_c != edges_r:
        raise ValueError("alist column and row lists disagree")
    return n, m, rows


@dataclass
class LdpcCode:
    """One (n, k) code with CSR check adjacency and accumulator encoding data."""

    n: int
    m: int
    chk_ptr: np.ndarray    # (m+1,) int32
    chk_vars: np.ndarray   # (E,) int32, column indices grouped by check
    z: int                 # circulant lane count of the parity accumulator

    @property
    def k(self) -> int:
        return self.n - self.m

    @property
    def rate(self) -> float:
        return self.k / self.n

    @classmethod
    def from_alist(cls, text: str) -> "LdpcCode":
        n, m, rows = parse_alist(text)
        if m >= n:
            raise ValueError("alist has no information columns")
        chk_ptr = np.zeros(m + 1, dtype=np.int32)
        chk_ptr[1:] = np.cumsum([r.size for r in rows])
        chk_vars = np.concatenate(rows).astype(np.int32)
        code = cls(n=n, m=m, chk_ptr=chk_ptr, chk_vars=chk_vars, z=0)
        code.z = code._infer_accumulator()
        return code

    def _infer_accumulator(self) -> int:
        """Verify H = [Hu | Hp] with Hp dual-diagonal over z lanes; return z."""
        k = self.k
        first_parity = np.full(self.m, -1, dtype=np.int64)
        second_parity = np.full(self.m, -1, dtype=np.int64)
        for r in range(self.m):
            pcols = [c - k for c in self.chk_vars[self.chk_ptr[r]:self.chk_ptr[r + 1]] if c >= k]
            if len(pcols) == 1:
                first_parity[r] = pcols[0]
            elif len(pcols) == 2:
                first_parity[r], second_parity[r] = sorted(pcols)
            else:
                raise ValueError("parity part is not dual-diagonal")
        # rows 0..z-1 touch one parity column each; others touch their lane predecessor
        z = int(np.sum(second_parity < 0))
        if z == 0 or self.m % z != 0:
            raise ValueError("parity part is not a lane accumulator")
        rr = np.arange(self.m)
        head = rr < z
        if not np.array_equal(first_parity[head], rr[head]):
            raise ValueError("accumulator head rows malformed")
        body = ~head
        if not (np.array_equal(second_parity[body], rr[body])
                and np.array_equal(first_parity[body], rr[body] - z)):
            raise ValueError("accumulator body rows malformed")
        return z

    def encode(self, info_bits: np.ndarray) -> np.ndarray:
        """Systematic codeword [info | parity] via lane-wise forward substitution."""
        u = np.asarray(info_bits, dtype=np.uint8).reshape(-1)
        if u.size != self.k:
            raise ValueError(f"expected {self.k} info bits, got {u.size}")
        syndrome = _info_syndrome(self.chk_ptr, self.chk_vars, u, self.k)
        parity = np.bitwise_xor.accumulate(syndrome.reshape(-1, self.z), axis=0).reshape(-1)
        return np.concatenate([u, parity])

    def syndrome_ok(self, codeword: np.ndarray) -> bool:
        cw = np.asarray(codeword, dtype=np.uint8).reshape(-1)
        sums = np.add.reduceat(cw[self.chk_vars], self.chk_ptr[:-1])
        return bool(np.all(sums % 2 == 0))

    def decode(self, llrs: np.ndarray, max_iters: int = MAX_ITERS,
               scale: float = MINSUM_SCALE) -> tuple[np.ndarray, bool, int]:
        """Normalized min-sum decode; returns (hard bits, parity_ok, iterations)."""
        llrs = np.asarray(llrs, dtype=np.float32).reshape(-1)
        if llrs.size != self.n:
            raise ValueError(f"expected {self.n} LLRs, got {llrs.size}")
        hard, ok, iters = _minsum_decode(self.chk_ptr, self.chk_vars, llrs,
                                         np.float32(scale), max_iters)
        return hard, bool(ok), int(iters)


def _info_syndrome(chk_ptr, chk_vars, u, k) -> np.ndarray:
    """XOR of each check's information-bit neighbors."""
    vals = np.zeros(chk_vars.size, dtype=np.uint8)
    info = chk_vars < k
    vals[info] = u[chk_vars[info]]
    sums = np.add.reduceat(vals, chk_ptr[:-1])
    return (sums % 2).astype(np.uint8)


@njit(cache=True, nogil=True)
def _minsum_decode(chk_ptr, chk_vars, llr_ch, scale, max_iters):
    m = chk_ptr.size - 1
    n = llr_ch.size
    n_edges = chk_vars.size
    c2v = np.zeros(n_edges, dtype=np.float32)
    v2c = np.zeros(n_edges, dtype=np.float32)
    post = llr_ch.copy()
    hard = np.zeros(n, dtype=np.uint8)

    iters = 0
    ok = False
    for _ in range(max_iters):
        iters += 1
        for c in range(m):
            start, end = chk_ptr[c], chk_ptr[c + 1]
            neg = False
            min1 = np.float32(3.4e38)
            min2 = np.float32(3.4e38)
            arg1 = -1
            for e in range(start, end):
                t = post[chk_vars[e]] - c2v[e]
                v2c[e] = t
                if t < 0.0:
                    neg = not neg
                a = abs(t)
                if a < min1:
                    min2 = min1
                    min1 = a
                    arg1 = e
                elif a < min2:
                    min2 = a
            for e in range(start, end):
                mag = min2 if e == arg1 else min1
                t = v2c[e]
                sign_others = (t < 0.0) != neg  # True -> negative product of the others
                c2v[e] = -scale * mag if sign_others else scale * mag
        for v in range(n):
            post[v] = llr_ch[v]
        for e in range(n_edges):
            post[chk_vars[e]] += c2v[e]
        for v in range(n):
            hard[v] = 1 if post[v] < 0.0 else 0
        ok = True
        for c in range(m):
            s = 0
            for e in range(chk_ptr[c], chk_ptr[c + 1]):
                s ^= hard[chk_vars[e]]
            if s:
                ok = False
                break
        if ok:
            break
    return hard, ok, iters


@lru_cache(maxsize=None)
def load_code(name: str) -> LdpcCode:
    """Load a shipped code by file stem, e.g. 'rate_2_3'."""
    text = resources.files("fhcomp").joinpath(f"codes/{name}.alist").read_text()
    return LdpcCode.from_alist(text)
