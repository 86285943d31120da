"""2D wavelet packets and Coifman-Wickerhauser best-basis selection."""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from .filters import as_filter
from .transform import _check_field, analysis_matrix

# child order inside a split: (q-filter, p-filter)
CHILDREN = ("LL", "LH", "HL", "HH")
TIE_TOLERANCE = 1e-12


def shannon_entropy(coefficients):
    """Shannon entropy (natural log) of the normalized energy distribution."""
    c = np.asarray(coefficients, dtype=float).ravel()
    e = c * c
    total = e.sum()
    if total == 0.0:
        raise InvalidArgumentError("entropy of an all-zero coefficient set is undefined")
    p = e / total
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def _cost(block, total):
    # additive form of shannon_entropy: sums over disjoint blocks
    e = (block * block).ravel() / total
    e = e[e > 0]
    return float(-np.sum(e * np.log(e)))


def split_block(block, filt):
    s = analysis_matrix(filt, block.shape[0])
    full = (s @ (s @ block).T).T
    m = block.shape[0] // 2
    return {
        "LL": full[:m, :m], "LH": full[:m, m:],
        "HL": full[m:, :m], "HH": full[m:, m:],
    }


def merge_blocks(children, filt):
    m = children["LL"].shape[0]
    full = np.empty((2 * m, 2 * m))
    full[:m, :m] = children["LL"]
    full[:m, m:] = children["LH"]
    full[m:, :m] = children["HL"]
    full[m:, m:] = children["HH"]
    s = analysis_matrix(filt, 2 * m)
    return (s.T @ (s.T @ full).T).T


@dataclass
class BasisTree:
    """Quadtree over packet bands; ``leaves`` are paths of child labels from the root."""

    max_depth: int
    leaves: tuple
    entropy_total: float

    def depth_of(self, path):
        return len(path)

    def covers_exactly_once(self, top_level):
        """True when the leaves tile the frequency plane with no overlap or gap."""
        n = 2 ** top_level
        hits = np.zeros((n, n), dtype=int)
        for path in self.leaves:
            r0, c0, size = 0, 0, n
            for label in path:
                size //= 2
                r0 += size * (label[0] == "H")
                c0 += size * (label[1] == "H")
            hits[r0:r0 + size, c0:c0 + size] += 1
        return bool(np.all(hits == 1))


def packet_tree(field_values, filt, max_depth):
    """Every packet node down to ``max_depth``: ``{path: block}``."""
    filt = as_filter(filt)
    f, top = _check_field(field_values)
    if not 0 <= max_depth <= top:
        raise InvalidArgumentError(f"max_depth must lie in [0, {top}], got {max_depth}")
    nodes = {(): f}
    frontier = [()]
    for _ in range(max_depth):
        nxt = []
        for path in frontier:
            for label, block in split_block(nodes[path], filt).items():
                nodes[path + (label,)] = block
                nxt.append(path + (label,))
        frontier = nxt
    return nodes


def best_basis(field_values, filt, max_depth):
    """Minimum-entropy pruning of the full packet quadtree.

    Returns ``(tree, coefficients)`` where ``coefficients`` maps leaf paths to
    blocks. On ties within 1e-12 the parent is kept.
    """
    filt = as_filter(filt)
    nodes = packet_tree(field_values, filt, max_depth)
    total = float(np.sum(nodes[()] ** 2))
    if total == 0.0:
        raise InvalidArgumentError("best basis of an all-zero field is undefined")

    def select(path):
        own = _cost(nodes[path], total)
        if len(path) == max_depth:
            return own, [path]
        kids = [select(path + (c,)) for c in CHILDREN]
        split = sum(k[0] for k in kids)
        if split < own - TIE_TOLERANCE:
            return split, [leaf for k in kids for leaf in k[1]]
        return own, [path]

    cost, leaves = select(())
    tree = BasisTree(max_depth, tuple(leaves), cost)
    return tree, {leaf: nodes[leaf] for leaf in leaves}


def standard_basis_leaves(max_depth):
    """Leaves of the ordinary Mallat wavelet basis inside the packet tree."""
    leaves = []
    prefix = ()
    for _ in range(max_depth):
        leaves += [prefix + (c,) for c in CHILDREN[1:]]
        prefix = prefix + ("LL",)
    leaves.append(prefix)
    return tuple(leaves)


def basis_entropy(field_values, filt, leaves, max_depth=None):
    filt = as_filter(filt)
    depth = max(len(p) for p in leaves) if max_depth is None else max_depth
    nodes = packet_tree(field_values, filt, depth)
    total = float(np.sum(nodes[()] ** 2))
    return sum(_cost(nodes[p], total) for p in leaves)


def reconstruct(coefficients, filt):
    """Invert a packet basis given as ``{path: block}``."""
    filt = as_filter(filt)
    blocks = dict(coefficients)
    while () not in blocks:
        deepest = max(len(p) for p in blocks)
        parents = {p[:-1] for p in blocks if len(p) == deepest}
        for parent in sorted(parents):
            kids = {c: blocks.pop(parent + (c,)) for c in CHILDREN}
            blocks[parent] = merge_blocks(kids, filt)
    return blocks[()]
