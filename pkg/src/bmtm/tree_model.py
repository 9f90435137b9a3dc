"""Rooted trees, Brownian motion tree covariances, and sparsity structures.

Node conventions used throughout the package:

* node ``0`` is the root and has exactly one child;
* the ``d`` leaves are nodes ``1..d``, so data vectors ``x`` line up with
  leaves by position (``x[k - 1]`` is the value at leaf ``k``);
* latent nodes are ``d + 1 .. n - 1`` and have degree at least 3.

Edge variances are stored per node: ``theta[i]`` is the variance of the edge
``parent(i) -> i``. ``theta`` arrays have length ``n``; ``theta[0]`` belongs to
no edge and is always 0.

A sparsity structure is a ``frozenset`` of non-root nodes whose edge variance
is zero.
"""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CycleDetected,
    DegreeViolation,
    Disconnected,
    InvalidSparsity,
    InvalidTree,
    NotFullyObserved,
    ParseError,
    TooLarge,
    UnknownLeaf,
    UnknownNode,
)

ROOT = 0


def validate(parent: Sequence[int]) -> None:
    """Check that ``parent`` encodes a tree in the sense of the model.

    ``parent[0]`` must be ``-1`` (or None). Raises DegreeViolation,
    CycleDetected or Disconnected.
    """
    n = len(parent)
    if n < 2:
        raise DegreeViolation("root must have exactly one child")
    if parent[0] not in (-1, None):
        raise InvalidTree("node 0 is the root and cannot have a parent")
    for i in range(1, n):
        p = parent[i]
        if p is None or p < 0 or p >= n:
            raise Disconnected(f"node {i} has no parent inside the tree")
        if p == i:
            raise CycleDetected(f"node {i} is its own parent")

    # every parent chain must reach the root
    state = [0] * n  # 0 unvisited, 1 on stack, 2 reaches root
    state[0] = 2
    for start in range(1, n):
        chain = []
        i = start
        while state[i] == 0:
            state[i] = 1
            chain.append(i)
            i = parent[i]
        if state[i] == 1:
            raise CycleDetected(f"parent chain from node {start} loops at node {i}")
        for j in chain:
            state[j] = 2

    n_children = [0] * n
    for i in range(1, n):
        n_children[parent[i]] += 1
    if n_children[0] != 1:
        raise DegreeViolation(f"root has degree {n_children[0]}, expected 1")
    for i in range(1, n):
        if n_children[i] == 1:
            raise DegreeViolation(f"node {i} has degree 2")


@dataclass(frozen=True, eq=False)
class RootedTree:
    """Immutable rooted tree given by its parent array.

    Construction validates the tree and requires leaves to be labeled
    ``1..d``; use :func:`canonical_relabel` for arbitrary labelings.
    """

    parent: tuple[int, ...]
    leaf_names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        parent = tuple(-1 if p is None else int(p) for p in self.parent)
        object.__setattr__(self, "parent", parent)
        validate(parent)
        n = len(parent)
        children: list[list[int]] = [[] for _ in range(n)]
        for i in range(1, n):
            children[parent[i]].append(i)
        leaves = [i for i in range(1, n) if not children[i]]
        d = len(leaves)
        if leaves != list(range(1, d + 1)):
            raise InvalidTree(
                f"leaves must be nodes 1..{d}, got {leaves}; use canonical_relabel"
            )
        if self.leaf_names is not None and len(self.leaf_names) != d:
            raise InvalidTree("leaf_names must have one entry per leaf")
        object.__setattr__(self, "children", tuple(tuple(c) for c in children))
        object.__setattr__(self, "d", d)

        # preorder from the root; reversed, it is a valid postorder
        order = []
        stack = [ROOT]
        while stack:
            i = stack.pop()
            order.append(i)
            stack.extend(reversed(children[i]))
        object.__setattr__(self, "preorder", tuple(order))

        below = np.zeros((n, d), dtype=bool)
        for i in reversed(order):
            if 1 <= i <= d:
                below[i, i - 1] = True
            else:
                for c in children[i]:
                    below[i] |= below[c]
        below.setflags(write=False)
        object.__setattr__(self, "below", below)

    @property
    def n(self) -> int:
        return len(self.parent)

    @property
    def root_child(self) -> int:
        return self.children[ROOT][0]

    def is_leaf(self, node: int) -> bool:
        return 1 <= node <= self.d

    def nodes(self) -> range:
        return range(self.n)

    def edges(self) -> list[tuple[int, int]]:
        """Directed edges ``(parent, child)`` indexed by child."""
        return [(self.parent[i], i) for i in range(1, self.n)]

    def degree(self, node: int) -> int:
        return len(self.children[node]) + (node != ROOT)

    def __eq__(self, other):
        if not isinstance(other, RootedTree):
            return NotImplemented
        return self.parent == other.parent

    def __hash__(self):
        return hash(self.parent)

    def __repr__(self):
        return f"RootedTree(parent={self.parent!r})"


def canonical_relabel(parent: Sequence[int], leaves: Sequence[int] | None = None):
    """Relabel an arbitrary rooted tree so that leaves become ``1..d``.

    ``leaves`` fixes the order of the leaves (data order); by default leaves
    keep their relative node order. Latent nodes keep their relative order.
    Returns ``(tree, perm)`` with ``perm[old] = new``.
    """
    parent = [-1 if p is None else int(p) for p in parent]
    n = len(parent)
    if n == 0 or parent[0] != -1:
        raise InvalidTree("node 0 must be the root with parent -1")
    has_child = [False] * n
    for i in range(1, n):
        if not 0 <= parent[i] < n:
            raise Disconnected(f"node {i} has no parent inside the tree")
        has_child[parent[i]] = True
    natural = [i for i in range(1, n) if not has_child[i]]
    if leaves is None:
        leaves = natural
    leaves = [int(v) for v in leaves]
    if sorted(leaves) != natural:
        raise InvalidTree(f"leaf list {leaves} does not match tree leaves {natural}")
    latent = [i for i in range(1, n) if has_child[i]]
    perm = [0] * n
    for new, old in enumerate(leaves, start=1):
        perm[old] = new
    for new, old in enumerate(latent, start=len(leaves) + 1):
        perm[old] = new
    new_parent = [-1] * n
    for old in range(1, n):
        new_parent[perm[old]] = perm[parent[old]]
    return RootedTree(tuple(new_parent)), perm


def _check_node(tree: RootedTree, node: int) -> None:
    if not (isinstance(node, (int, np.integer)) and 0 <= node < tree.n):
        raise UnknownNode(f"node {node!r} is not in the tree")


def descendant_leaves(tree: RootedTree, node: int) -> frozenset[int]:
    """Leaves below ``node`` (a leaf is its own descendant)."""
    _check_node(tree, node)
    return frozenset((np.flatnonzero(tree.below[node]) + 1).tolist())


def as_theta(tree: RootedTree, theta) -> np.ndarray:
    """Coerce edge variances to a length-``n`` float array with ``theta[0] = 0``.

    Accepts length ``n`` (entry 0 ignored) or ``n - 1`` (nodes ``1..n-1``).
    """
    t = np.asarray(theta, dtype=float).ravel()
    if t.size == tree.n - 1:
        t = np.concatenate([[0.0], t])
    elif t.size != tree.n:
        raise ValueError(f"theta has {t.size} entries, expected {tree.n - 1} or {tree.n}")
    else:
        t = t.copy()
        t[0] = 0.0
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("edge variances must be finite and nonnegative")
    return t


def build_covariance(tree: RootedTree, theta) -> np.ndarray:
    """Leaf covariance ``sum_i theta_i e_de(i) e_de(i)^T``."""
    t = as_theta(tree, theta)
    E = tree.below.astype(float)
    return (E.T * t) @ E


def is_ultrametric(tree: RootedTree, theta, tol: float = 1e-10) -> bool:
    depths = np.diag(build_covariance(tree, theta))
    return bool(np.ptp(depths) <= tol * max(1.0, float(np.max(np.abs(depths)))))


# --- sparsity structures and contraction -----------------------------------


def _check_sparsity(tree: RootedTree, zeroed: Iterable[int]) -> frozenset[int]:
    zeroed = frozenset(int(i) for i in zeroed)
    bad = [i for i in zeroed if not 1 <= i < tree.n]
    if bad:
        raise InvalidSparsity(f"zeroed nodes {sorted(bad)} are not non-root tree nodes")
    return zeroed


def _zero_components(tree: RootedTree, zeroed: frozenset[int]) -> list[int]:
    """Component label of each node under the zero-variance edges."""
    comp = list(range(tree.n))
    for i in tree.preorder[1:]:
        if i in zeroed:
            comp[i] = comp[tree.parent[i]]
    return comp


def is_fully_observed(tree: RootedTree, zeroed: Iterable[int], x=None) -> bool:
    """Every zero-edge component holds exactly one determined node.

    ``x`` is accepted for signature symmetry with :func:`contract_set`; the
    property does not depend on the data.
    """
    zeroed = _check_sparsity(tree, zeroed)
    comp = _zero_components(tree, zeroed)
    counts = {}
    for i in range(tree.d + 1):  # root and leaves
        counts[comp[i]] = counts.get(comp[i], 0) + 1
    return all(counts.get(comp[i], 0) == 1 for i in range(tree.n))


@dataclass(frozen=True)
class ContractedTree:
    """Graph obtained by contracting zero-variance edges.

    ``edges`` holds ``(u, v, original)`` with ``u`` the contracted parent,
    ``v`` the contracted child and ``original`` the node whose edge survived.
    ``node_map`` sends each original node to the node that absorbed it.
    """

    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int, int], ...]
    node_map: tuple[int, ...]
    values: tuple[float, ...] | None = None

    def cuts(self, tree: RootedTree) -> frozenset[frozenset[int]]:
        """Leaf sets below each surviving edge."""
        return frozenset(descendant_leaves(tree, e[2]) for e in self.edges)


def _contract_key(tree: RootedTree, i: int) -> tuple[int, int]:
    # determined nodes (root, leaves) sort before latent ones
    return (0, i) if i <= tree.d else (1, i)


def contract_set(
    tree: RootedTree,
    zeroed: Iterable[int],
    x=None,
    order: Sequence[int] | None = None,
    require_fully_observed: bool = False,
) -> ContractedTree:
    """Contract the edges above ``zeroed`` one at a time.

    The merged vertex is named after the smaller node under the ordering
    "determined before latent, then by id", so the result does not depend on
    ``order``. With ``x`` given, ``values`` holds the data value of each node
    of the contracted graph (root value 0; latent survivors get NaN).
    """
    zeroed = _check_sparsity(tree, zeroed)
    seq = sorted(zeroed) if order is None else [int(i) for i in order]
    if set(seq) != zeroed or len(seq) != len(zeroed):
        raise InvalidSparsity("order must be a permutation of the zeroed set")
    if require_fully_observed and not is_fully_observed(tree, zeroed):
        raise NotFullyObserved(f"zeroing {sorted(zeroed)} does not give a fully-observed tree")

    uf = list(range(tree.n))

    def find(i):
        while uf[i] != i:
            uf[i] = uf[uf[i]]
            i = uf[i]
        return i

    name = list(range(tree.n))  # representative -> vertex name
    for i in seq:
        a, b = find(tree.parent[i]), find(i)
        keep = min(name[a], name[b], key=lambda v: _contract_key(tree, v))
        uf[b] = a
        name[a] = keep

    node_map = tuple(name[find(i)] for i in range(tree.n))
    edges = tuple(
        (node_map[tree.parent[i]], node_map[i], i) for i in range(1, tree.n) if i not in zeroed
    )
    nodes = tuple(sorted(set(node_map), key=lambda v: _contract_key(tree, v)))
    values = None
    if x is not None:
        xa = augmented(x, tree.d)
        values = tuple(float(xa[v]) if v <= tree.d else float("nan") for v in nodes)
    return ContractedTree(nodes, edges, node_map, values)


def augmented(x, d: int | None = None) -> np.ndarray:
    """Data vector with the root value ``x_0 = 0`` prepended."""
    x = np.asarray(x, dtype=float).ravel()
    if d is not None and x.size != d:
        raise ValueError(f"data has {x.size} entries, tree has {d} leaves")
    return np.concatenate([[0.0], x])


def enumerate_fully_observed(
    tree: RootedTree, cap: int = 10, method: str = "recursive"
) -> list[frozenset[int]]:
    """All sparsity structures that make the tree fully observed.

    ``method="recursive"`` assigns an observed value (a determined node) to
    every latent node top-down; ``method="filter"`` checks all ``2^(n-1)``
    edge subsets and is only meant as a cross-check on small trees.
    """
    if tree.d > cap:
        raise TooLarge(f"{tree.d} leaves exceeds the enumeration cap {cap}")
    if method == "filter":
        nonroot = range(1, tree.n)
        found = []
        for r in range(tree.n):
            for combo in itertools.combinations(nonroot, r):
                s = frozenset(combo)
                if is_fully_observed(tree, s):
                    found.append(s)
        return sorted(found, key=sorted)
    if method != "recursive":
        raise ValueError(f"unknown method {method!r}")

    def below(i):
        return (np.flatnonzero(tree.below[i]) + 1).tolist()

    def assign(i, value):
        """Zeroed sets for the subtree at ``i`` when its parent shows ``value``."""
        if tree.is_leaf(i):
            yield frozenset([i]) if value == i else frozenset()
            return
        inside = tree.below[i, value - 1] if value > 0 else False
        options = [(value, True)]
        if not inside:
            options += [(m, False) for m in below(i)]
        for v, zero_edge in options:
            parts = [list(assign(c, v)) for c in tree.children[i]]
            head = frozenset([i]) if zero_edge else frozenset()
            for combo in itertools.product(*parts):
                yield head.union(*combo)

    found = set(assign(tree.root_child, ROOT))
    return sorted(found, key=sorted)


# --- rerooting ----------------------------------------------------------------


@dataclass(frozen=True)
class Rerooted:
    """A tree rerooted at a leaf, with the bookkeeping to move parameters.

    ``edge_map[v]`` lists the original nodes whose edges merged into the edge
    above new node ``v``. ``node_origin[v]`` is the original node behind ``v``
    and ``leaf_origin[k - 1]`` the original leaf behind new leaf ``k``.
    """

    tree: RootedTree
    edge_map: tuple[tuple[int, ...], ...]
    node_origin: tuple[int, ...]
    leaf_origin: tuple[int, ...]
    reference: int

    def map_theta(self, theta) -> np.ndarray:
        t = np.asarray(theta, dtype=float)
        out = np.zeros(self.tree.n)
        for v in range(1, self.tree.n):
            out[v] = sum(t[i] for i in self.edge_map[v])
        return out


def reroot_at_leaf(tree: RootedTree, leaf: int = 1) -> Rerooted:
    """Reroot at ``leaf``, drop the old root edge, suppress degree-2 nodes."""
    if not (isinstance(leaf, (int, np.integer)) and tree.is_leaf(int(leaf))):
        raise UnknownLeaf(f"{leaf!r} is not a leaf")
    leaf = int(leaf)
    # undirected adjacency without the root and its edge; edges keyed by child
    adj: dict[int, list[tuple[int, int]]] = {i: [] for i in range(1, tree.n)}
    for i in range(1, tree.n):
        p = tree.parent[i]
        if p != ROOT:
            adj[p].append((i, i))
            adj[i].append((p, i))

    # walk from the new root, carrying merged edge lists through degree-2 nodes
    new_parent_orig: dict[int, int] = {leaf: -1}
    merged: dict[int, tuple[int, ...]] = {}
    kept_children: dict[int, list[int]] = {leaf: []}
    stack = [(leaf, nb, (e,)) for nb, e in adj[leaf]]
    stack.reverse()
    while stack:
        anchor, node, path = stack.pop()
        nxt = [(nb, e) for nb, e in adj[node] if e not in path]
        if len(nxt) == 1:  # degree 2 after removing the root edge
            nb, e = nxt[0]
            stack.append((anchor, nb, path + (e,)))
            continue
        new_parent_orig[node] = anchor
        merged[node] = path
        kept_children[anchor].append(node)
        kept_children[node] = []
        for nb, e in reversed(nxt):
            stack.append((node, nb, (e,)))

    others = [i for i in range(1, tree.d + 1) if i != leaf]
    latent = sorted(v for v in new_parent_orig if v != leaf and not tree.is_leaf(v))
    new_id = {leaf: 0}
    for k, old in enumerate(others, start=1):
        new_id[old] = k
    for k, old in enumerate(latent, start=len(others) + 1):
        new_id[old] = k
    n_new = len(new_id)
    parent = [-1] * n_new
    edge_map: list[tuple[int, ...]] = [()] * n_new
    origin = [0] * n_new
    for old, v in new_id.items():
        origin[v] = old
        if old != leaf:
            parent[v] = new_id[new_parent_orig[old]]
            edge_map[v] = tuple(sorted(merged[old]))
    names = None
    if tree.leaf_names is not None:
        names = tuple(tree.leaf_names[i - 1] for i in others)
    new_tree = RootedTree(tuple(parent), leaf_names=names)
    return Rerooted(new_tree, tuple(edge_map), tuple(origin), tuple(others), leaf)


def canonical_form(tree: RootedTree, theta) -> dict[frozenset[int], float]:
    """Map from leaf cluster below each edge to its variance.

    Two (tree, theta) pairs describe the same labeled topology and parameters
    iff their canonical forms are equal.
    """
    t = as_theta(tree, theta)
    return {descendant_leaves(tree, i): float(t[i]) for i in range(1, tree.n)}


# --- Newick -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:([(),:;])|([^\s(),:;]+))")


def _tokens(text: str):
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                return
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(1) if m.group(1) else m.start(2)
        yield (m.group(1) or m.group(2)), start
        pos = m.end()


class _Node:
    __slots__ = ("label", "length", "children")

    def __init__(self):
        self.label = None
        self.length = None
        self.children = []


def parse_newick(text: str) -> tuple[RootedTree, np.ndarray]:
    """Parse Newick text into a tree and edge variances.

    The outermost node stands for the child of the (implicit) root; its branch
    length, if any, is the variance of the root edge. Nodes with a single
    child are suppressed and their branch lengths summed, so
    ``"(1:1.0)0:0.0;"`` is the one-leaf tree with ``theta_1 = 1``. Leaves
    labeled ``1..d`` keep those ids; other labels are numbered in order of
    appearance and kept as ``leaf_names``.
    """
    toks = list(_tokens(text))
    toks.append(("", len(text)))
    pos = 0

    def peek():
        return toks[pos]

    def take(expected=None):
        nonlocal pos
        tok, off = toks[pos]
        if expected is not None and tok != expected:
            shown = tok if tok else "end of input"
            raise ParseError(f"expected {expected!r}, found {shown!r}", off)
        pos += 1
        return tok, off

    def subtree():
        node = _Node()
        if peek()[0] == "(":
            take("(")
            node.children.append(subtree())
            while peek()[0] == ",":
                take(",")
                node.children.append(subtree())
            take(")")
        tok, off = peek()
        if tok and tok not in "(),:;":
            node.label = tok
            take()
        elif not node.children:
            raise ParseError("leaf without a label", off)
        if peek()[0] == ":":
            take(":")
            tok, off = take()
            try:
                node.length = float(tok)
            except ValueError:
                raise ParseError(f"bad branch length {tok!r}", off) from None
            if not (node.length >= 0 and np.isfinite(node.length)):
                raise ParseError(f"branch length {tok!r} must be finite and nonnegative", off)
        return node

    top = subtree()
    take(";")
    tok, off = peek()
    if tok:
        raise ParseError("trailing text after ';'", off)

    # suppress single-child nodes, summing lengths onto the child
    def collapse(node, extra):
        length = (node.length or 0.0) + extra
        while len(node.children) == 1:
            node = node.children[0]
            if node.length is None:
                raise ParseError("missing branch length")
            length += node.length
        return node, length

    leaves_seen: list[str] = []
    latent_count = 0
    records = []  # (kind, label, parent_slot, length), preorder

    def walk(node, parent_slot, extra, top_level):
        nonlocal latent_count
        node, length = collapse(node, extra)
        if not top_level and node.length is None and not node.children:
            raise ParseError(f"missing branch length for leaf {node.label!r}")
        slot = len(records)
        if node.children:
            records.append(("latent", None, parent_slot, length))
            for c in node.children:
                if c.length is None:
                    raise ParseError("missing branch length on internal edge")
                walk(c, slot, 0.0, False)
        else:
            leaves_seen.append(node.label)
            records.append(("leaf", node.label, parent_slot, length))

    walk(top, -1, 0.0, True)

    labels = [lab for lab in leaves_seen]
    d = len(labels)
    numeric = all(lab is not None and lab.isdigit() for lab in labels) and sorted(
        int(lab) for lab in labels
    ) == list(range(1, d + 1))
    leaf_ids = [int(lab) for lab in labels] if numeric else list(range(1, d + 1))
    if not numeric and len(set(labels)) != d:
        raise ParseError("leaf labels must be distinct")

    ids = []
    leaf_iter = iter(leaf_ids)
    next_latent = d + 1
    for kind, _, _, _ in records:
        if kind == "leaf":
            ids.append(next(leaf_iter))
        else:
            ids.append(next_latent)
            next_latent += 1
    n = d + 1 + sum(1 for r in records if r[0] == "latent")
    parent = [-1] * n
    theta = np.zeros(n)
    for slot, (kind, _, parent_slot, length) in enumerate(records):
        node = ids[slot]
        parent[node] = ROOT if parent_slot < 0 else ids[parent_slot]
        theta[node] = length
    names = None if numeric else tuple(str(lab) for lab in labels)
    try:
        tree = RootedTree(tuple(parent), leaf_names=names)
    except InvalidTree as exc:
        raise ParseError(f"not a valid tree: {exc}") from exc
    return tree, theta


def to_newick(tree: RootedTree, theta) -> str:
    """Newick text that :func:`parse_newick` reads back exactly."""
    t = as_theta(tree, theta)

    def label(i):
        if tree.leaf_names is not None:
            return tree.leaf_names[i - 1]
        return str(i)

    def fmt(v):
        return repr(float(v))

    def write(i):
        if tree.is_leaf(i):
            return f"{label(i)}:{fmt(t[i])}"
        inner = ",".join(write(c) for c in tree.children[i])
        return f"({inner}):{fmt(t[i])}"

    c = tree.root_child
    if tree.is_leaf(c):
        return f"({label(c)}:{fmt(t[c])})0:0.0;"
    inner = ",".join(write(k) for k in tree.children[c])
    return f"({inner})0:{fmt(t[c])};"


# --- JSON ---------------------------------------------------------------------


def tree_to_json(tree: RootedTree, theta=None) -> dict:
    out = {
        "parent": list(tree.parent),
        "leaves": list(range(1, tree.d + 1)),
    }
    if theta is not None:
        out["theta"] = [float(v) for v in as_theta(tree, theta)]
    if tree.leaf_names is not None:
        out["leaf_names"] = list(tree.leaf_names)
    return out


def tree_from_json(obj) -> tuple[RootedTree, np.ndarray | None]:
    """Read ``{"parent": [...], "theta": [...], "leaves": [...]}``.

    Trees whose leaves are not ``1..d`` are relabeled; ``leaves`` gives the
    data order. ``theta`` may have ``n`` or ``n - 1`` entries.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    parent = obj["parent"]
    tree, perm = canonical_relabel(parent, obj.get("leaves"))
    names = obj.get("leaf_names")
    if names is not None:
        tree = RootedTree(tree.parent, leaf_names=tuple(names))
    theta = None
    if obj.get("theta") is not None:
        raw = np.asarray(obj["theta"], dtype=float)
        if raw.size == tree.n - 1:
            raw = np.concatenate([[0.0], raw])
        if raw.size != tree.n:
            raise InvalidTree(f"theta has {raw.size} entries for {tree.n} nodes")
        theta = np.zeros(tree.n)
        for old in range(1, tree.n):
            theta[perm[old]] = raw[old]
        theta = as_theta(tree, theta)
    return tree, theta


def load_tree(text: str) -> tuple[RootedTree, np.ndarray | None]:
    """Read a tree from Newick or JSON text (detected by the first character)."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return tree_from_json(json.loads(stripped))
    return parse_newick(stripped)


def star_tree(d: int) -> RootedTree:
    """Root -> hub -> leaves ``1..d`` (the hub is node ``d + 1``)."""
    if d == 1:
        return RootedTree((-1, 0))
    return RootedTree((-1,) + (d + 1,) * d + (0,))
