"""Exhaustive enumeration of small annular triangular nets.

A net with ``n`` triangles is encoded by its dual structure: node colours and,
for every node, the neighbour across each side type.  White sides carry the
label pairs ``AB, BC, CA`` (types 0, 1, 2); a white side of type ``c`` can
only be glued to the black side with the same pair, so a link is just a
coloured edge between a white and a black node.

Growth proceeds one link at a time (attach a new triangle, or glue two free
sides) from a single white triangle, deduplicating by a canonical breadth
first code.  Every state is kept planar with at most two boundary cycles:
any annulus can be cut back to a single triangle through such states (slit
interior edges from the boundary inwards, cut one edge joining the two
boundary cycles, then peel off ears), so this pruning loses nothing.  With
``flat_only`` every interior vertex must have valence 6, a property that the
same cutting sequence preserves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .trinet import TriangularNet, glue_triangles

NMAX = 16
_WIDTH = 4 * NMAX
_WHITE_LABELS = ("A", "B", "C")
_BLACK_LABELS = ("A", "C", "B")


@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def _topology(col, nb, n):
    """Return (euler characteristic, boundary cycles, 2 * genus, flat)."""
    parent = np.arange(3 * n)
    links = 0
    for u in range(n):
        if col[u] != 0:
            continue
        for c in range(3):
            v = nb[u, c]
            if v >= 0:
                links += 1
                for lab in (c, (c + 1) % 3):
                    a = _find(parent, 3 * u + lab)
                    b = _find(parent, 3 * v + lab)
                    if a != b:
                        parent[a] = b
    roots = np.zeros(3 * n, dtype=np.int64)
    n_vert = 0
    count = np.zeros(3 * n, dtype=np.int64)
    for x in range(3 * n):
        r = _find(parent, x)
        roots[x] = r
        if count[r] == 0:
            n_vert += 1
        count[r] += 1
    chi = n_vert - (3 * n - links) + n
    # boundary sides, united through shared boundary vertices
    on_boundary = np.zeros(3 * n, dtype=np.bool_)
    first_side = -np.ones(3 * n, dtype=np.int64)
    sp = np.arange(3 * n)
    n_free = 0
    for u in range(n):
        for c in range(3):
            if nb[u, c] < 0:
                n_free += 1
                s = 3 * u + c
                for lab in (c, (c + 1) % 3):
                    r = roots[3 * u + lab]
                    on_boundary[r] = True
                    if first_side[r] < 0:
                        first_side[r] = s
                    else:
                        a = _find(sp, s)
                        b = _find(sp, first_side[r])
                        if a != b:
                            sp[a] = b
    nb_cycles = 0
    for u in range(n):
        for c in range(3):
            if nb[u, c] < 0:
                s = 3 * u + c
                if _find(sp, s) == s:
                    nb_cycles += 1
    flat = True
    for x in range(3 * n):
        if roots[x] == x and not on_boundary[x] and count[x] != 6:
            flat = False
    return chi, nb_cycles, 2 - nb_cycles - chi, flat


@njit(cache=True)
def _bfs_code(col, nb, n, root, out):
    idx = -np.ones(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    order[0] = root
    idx[root] = 0
    m = 1
    i = 0
    while i < m:
        u = order[i]
        i += 1
        for c in range(3):
            v = nb[u, c]
            if v >= 0 and idx[v] < 0:
                idx[v] = m
                order[m] = v
                m += 1
    for k in range(_WIDTH):
        out[k] = -2
    for k in range(n):
        u = order[k]
        out[4 * k] = col[u]
        for c in range(3):
            v = nb[u, c]
            out[4 * k + 1 + c] = idx[v] if v >= 0 else -1


@njit(cache=True)
def _less(a, b):
    for k in range(a.shape[0]):
        if a[k] != b[k]:
            return a[k] < b[k]
    return False


@njit(cache=True)
def _canonical(col, nb, n, out):
    """Lexicographically least breadth-first code over white roots."""
    tmp = np.empty(_WIDTH, dtype=np.int8)
    have = False
    for r in range(n):
        if col[r] != 0:
            continue
        _bfs_code(col, nb, n, r, tmp)
        if not have or _less(tmp, out):
            out[:] = tmp
            have = True


@njit(cache=True)
def _decode(code):
    n = 0
    while n < NMAX and code[4 * n] != -2:
        n += 1
    col = np.empty(n, dtype=np.int8)
    nb = np.empty((n, 3), dtype=np.int8)
    for u in range(n):
        col[u] = code[4 * u]
        for c in range(3):
            nb[u, c] = code[4 * u + 1 + c]
    return col, nb, n


@njit(cache=True)
def _children(code, nmax, flat_only, out, info):
    col, nb, n = _decode(code)
    k = 0
    col2 = np.empty(n + 1, dtype=np.int8)
    nb2 = np.empty((n + 1, 3), dtype=np.int8)
    for u in range(n):
        for c in range(3):
            if nb[u, c] >= 0:
                continue
            for move in range(n + 1):
                # move < n: glue to node `move`; move == n: attach a new triangle
                if move < n:
                    v = move
                    if col[u] != 0 or col[v] != 1 or nb[v, c] >= 0:
                        continue
                    m = n
                else:
                    if n >= nmax:
                        continue
                    v = n
                    m = n + 1
                col2[:n] = col
                nb2[:n] = nb
                if move == n:
                    col2[n] = 1 - col[u]
                    nb2[n, 0] = -1
                    nb2[n, 1] = -1
                    nb2[n, 2] = -1
                nb2[u, c] = v
                nb2[v, c] = u
                chi, cycles, genus2, flat = _topology(col2[:m], nb2[:m], m)
                if genus2 != 0 or cycles > 2 or (flat_only and not flat):
                    continue
                _canonical(col2[:m], nb2[:m], m, out[k])
                info[k, 0] = m
                info[k, 1] = chi
                info[k, 2] = cycles
                k += 1
    return k


@njit(cache=True)
def _relabel(col, nb, n, shift, swap):
    """Apply a permutation of the labels A, B, C to the net."""
    col2 = np.empty(n, dtype=np.int8)
    nb2 = -np.ones((n, 3), dtype=np.int8)
    for u in range(n):
        col2[u] = 1 - col[u] if swap else col[u]
        for c in range(3):
            v = nb[u, c]
            c2 = (c + shift) % 3
            if swap:
                c2 = (2 - c2) % 3
            nb2[u, c2] = v
    return col2, nb2


@njit(cache=True)
def _canonical_up_to_labels(code, out):
    col, nb, n = _decode(code)
    tmp = np.empty(_WIDTH, dtype=np.int8)
    have = False
    for shift in range(3):
        for swap in (False, True):
            c2, n2 = _relabel(col, nb, n, shift, swap)
            _canonical(c2, n2, n, tmp)
            if not have or _less(tmp, out):
                out[:] = tmp
                have = True


def code_to_net(code: np.ndarray, surface: str = "cylinder") -> TriangularNet:
    """Turn an encoded structure into a labelled net."""
    col, nb, n = _decode(np.asarray(code, dtype=np.int8))
    labels = [_WHITE_LABELS if col[u] == 0 else _BLACK_LABELS for u in range(n)]
    gluings = [((u, c), (int(nb[u, c]), 2 - c)) for u in range(n) if col[u] == 0 for c in range(3) if nb[u, c] >= 0]
    return glue_triangles(labels, gluings, surface)


def net_to_code(net: TriangularNet) -> bytes:
    """Canonical code of a net up to isomorphism and relabelling (inverse of ``code_to_net``)."""
    n = net.n_triangles
    if n > NMAX:
        raise ValueError(f"nets of more than {NMAX} triangles have no code")
    col = np.array([0 if t.color == "white" else 1 for t in net.triangles], dtype=np.int8)
    nb = -np.ones((n, 3), dtype=np.int8)
    idx = {"A": 0, "B": 1, "C": 2}
    for t, tri in enumerate(net.triangles):
        labs = [idx[net.labels[v]] for v in tri.vertices]
        for s in range(3):
            x, y = labs[s], labs[(s + 1) % 3]
            c = x if (x + 1) % 3 == y else y  # white side c runs from label c to c + 1
            other = net.neighbor(t, s)
            if other is not None:
                nb[t, c] = other[0]
    code = np.empty(_WIDTH, dtype=np.int8)
    _canonical(col, nb, n, code)
    out = np.empty(_WIDTH, dtype=np.int8)
    _canonical_up_to_labels(code, out)
    return out.tobytes()


@dataclass(frozen=True)
class EnumerationResult:
    max_triangles: int
    flat_only: bool
    states_visited: int
    annuli: tuple[bytes, ...]  # canonical codes, one per class up to relabelling

    def nets(self):
        for code in self.annuli:
            yield code_to_net(np.frombuffer(code, dtype=np.int8))

    def counts_by_size(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for code in self.annuli:
            n = int(np.sum(np.frombuffer(code, dtype=np.int8)[0::4] != -2))
            out[n] = out.get(n, 0) + 1
        return dict(sorted(out.items()))


def enumerate_annuli(max_triangles: int, flat_only: bool = False) -> EnumerationResult:
    """All annular nets with at most ``max_triangles`` triangles.

    Classes are taken up to combinatorial isomorphism and relabelling of
    A, B, C (an odd relabelling mirrors the surface, which changes no length).
    Output order is the sorted order of the canonical codes.
    """
    if not 1 <= max_triangles <= NMAX:
        raise ValueError(f"max_triangles must lie in 1..{NMAX}")
    start = np.full(_WIDTH, -2, dtype=np.int8)
    start[:4] = (0, -1, -1, -1)
    seen = {start.tobytes()}
    frontier = [start]
    cap = 3 * NMAX * (NMAX + 1)
    out = np.empty((cap, _WIDTH), dtype=np.int8)
    info = np.empty((cap, 3), dtype=np.int64)
    annuli = set()
    tmp = np.empty(_WIDTH, dtype=np.int8)
    while frontier:
        nxt = []
        for code in frontier:
            k = _children(code, max_triangles, flat_only, out, info)
            for i in range(k):
                key = out[i].tobytes()
                if key in seen:
                    continue
                seen.add(key)
                row = out[i].copy()
                nxt.append(row)
                if info[i, 2] == 2 and info[i, 1] == 0:
                    _canonical_up_to_labels(row, tmp)
                    annuli.add(tmp.tobytes())
        frontier = nxt
    return EnumerationResult(max_triangles, flat_only, len(seen), tuple(sorted(annuli)))
