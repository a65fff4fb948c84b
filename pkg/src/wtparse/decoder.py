"""Decoding a head-score matrix into a valid single-rooted arborescence.

``argmax_heads`` is the unconstrained per-row maximum (may produce cycles);
``mst_decode`` runs Chu-Liu/Edmonds with a single-root constraint;
``brute_force_mst`` is the exhaustive testing oracle for small sentences.

Score matrices are (n+1) x (n+1) with entry (i, j) scoring node j as the
head of node i; column 0 is the artificial root. All decoders break ties
deterministically (lowest column index first, then lowest dependent index).
"""

from __future__ import annotations

import numpy as np

BRUTE_FORCE_LIMIT = 8


def _check_scores(scores: np.ndarray) -> int:
    if scores.ndim != 2 or scores.shape[0] != scores.shape[1] or scores.shape[0] < 2:
        raise ValueError(f"score matrix must be (n+1, n+1), got {scores.shape}")
    return scores.shape[0] - 1


def tree_score(scores: np.ndarray, heads: list[int]) -> float:
    """Total score of a head assignment."""
    n = _check_scores(scores)
    return float(scores[np.arange(1, n + 1), np.asarray(heads)].sum())


def argmax_heads(scores: np.ndarray) -> list[int]:
    """Per-row best head; no repair, so the result may be cyclic."""
    n = _check_scores(scores)
    return [int(np.argmax(scores[i])) for i in range(1, n + 1)]


def _find_cycles(best_heads: np.ndarray) -> list[np.ndarray]:
    """All cycles in the functional graph of chosen heads (node 0 excluded).

    Each non-root node has exactly one out-edge, so cycles are vertex
    disjoint and can all be contracted in one round.
    """
    m = best_heads.shape[0]
    state = np.zeros(m, dtype=np.int8)  # 0 unseen, 1 in progress, 2 done
    state[0] = 2
    cycles: list[np.ndarray] = []
    for start in range(1, m):
        if state[start] == 2:
            continue
        path: list[int] = []
        node = start
        while state[node] == 0:
            state[node] = 1
            path.append(node)
            node = int(best_heads[node])
        if state[node] == 1:
            cycles.append(np.asarray(path[path.index(node):]))
        for visited in path:
            state[visited] = 2
    return cycles


def _chu_liu_edmonds(scores: np.ndarray) -> np.ndarray:
    """Unconstrained maximum spanning arborescence rooted at node 0.

    Contraction round: pick each node's best in-edge; collapse every cycle
    into a supernode whose entering edges are reduced by the cycle edge
    they displace; solve the smaller problem and unroll. All disjoint
    cycles are contracted per round, keeping the recursion shallow.
    """
    m = scores.shape[0]
    best = np.empty(m, dtype=np.int64)
    best[0] = 0
    best[1:] = np.argmax(scores[1:], axis=1)
    cycles = _find_cycles(best)
    if not cycles:
        return best

    in_cycle = np.zeros(m, dtype=bool)
    for cycle in cycles:
        in_cycle[cycle] = True
    rest = np.flatnonzero(~in_cycle)  # rest[0] == 0
    n_rest, n_cycles = rest.shape[0], len(cycles)
    size = n_rest + n_cycles

    reduced = np.full((size, size), -np.inf)
    reduced[:n_rest, :n_rest] = scores[np.ix_(rest, rest)]
    rest_range = np.arange(n_rest)
    # per cycle: best edge out of it into each rest node, and the best
    # displaced-cost edge into it from every other component
    out_pick = []  # cycle index -> head inside the cycle, per rest node
    in_dst_rest = []  # cycle index -> dependent inside the cycle, per rest node
    in_dst_cc: dict[tuple[int, int], tuple[int, int]] = {}
    gains_list = []
    for ci, cycle in enumerate(cycles):
        from_cycle = scores[np.ix_(rest, cycle)]
        pick = np.argmax(from_cycle, axis=1)
        reduced[:n_rest, n_rest + ci] = from_cycle[rest_range, pick]
        out_pick.append(cycle[pick])
        gains = scores[np.ix_(cycle, rest)] - scores[
            cycle, best[cycle]][:, None]
        entry = np.argmax(gains, axis=0)
        reduced[n_rest + ci, :n_rest] = gains[entry, rest_range]
        in_dst_rest.append(cycle[entry])
        gains_list.append(scores[cycle, best[cycle]])
    for ci, cycle_i in enumerate(cycles):
        for cj, cycle_j in enumerate(cycles):
            if ci == cj:
                continue
            block = scores[np.ix_(cycle_i, cycle_j)] - gains_list[ci][:, None]
            flat = int(np.argmax(block))
            vi, uj = divmod(flat, cycle_j.shape[0])
            reduced[n_rest + ci, n_rest + cj] = block[vi, uj]
            in_dst_cc[(ci, cj)] = (int(cycle_i[vi]), int(cycle_j[uj]))
    reduced[0, :] = -np.inf  # the root is never a dependent

    sub = _chu_liu_edmonds(reduced)

    heads = best.copy()
    for k in range(1, n_rest):
        h = int(sub[k])
        heads[rest[k]] = rest[h] if h < n_rest else int(out_pick[h - n_rest][k])
    for ci, cycle in enumerate(cycles):
        h = int(sub[n_rest + ci])
        if h < n_rest:
            dependent = int(in_dst_rest[ci][h])
            head = int(rest[h])
        else:
            dependent, head = in_dst_cc[(ci, h - n_rest)]
        heads[dependent] = head
    return heads


def mst_decode(scores: np.ndarray) -> list[int]:
    """Maximum spanning arborescence with exactly one child of the root.

    Decodes unconstrained first (that result is exact); if several nodes
    attach to the root, the root column is penalized by a constant larger
    than any achievable score spread and decoded again, which makes one
    root edge part of every optimum while preserving the ranking among
    single-rooted trees.
    """
    n = _check_scores(scores)
    if n == 1:
        return [0]
    off_diagonal = scores[1:, :].copy()
    off_diagonal[np.arange(n), np.arange(1, n + 1)] = 0.0
    if not np.isfinite(off_diagonal).all():
        raise ValueError("score matrix has non-finite off-diagonal entries")
    heads = _chu_liu_edmonds(scores)
    if int((heads[1:] == 0).sum()) == 1:
        return [int(h) for h in heads[1:]]

    spread = float(off_diagonal.max() - off_diagonal.min())
    penalty = n * spread + 1.0
    penalized = scores.copy()
    penalized[1:, 0] -= penalty
    heads = _chu_liu_edmonds(penalized)
    assert int((heads[1:] == 0).sum()) == 1
    return [int(h) for h in heads[1:]]


def brute_force_mst(scores: np.ndarray) -> list[int]:
    """Exhaustive single-rooted maximum arborescence (testing oracle).

    Enumerates every head assignment in lexicographic order, keeps the
    acyclic single-rooted ones, and returns the best (ties go to the
    lexicographically smallest head vector). Refuses n > 8.
    """
    n = _check_scores(scores)
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_LIMIT}, got {n}")
    m = n + 1
    deps = np.arange(1, m)
    best_heads: np.ndarray | None = None
    best_total = -np.inf
    total_vectors = m ** n
    chunk = 1 << 14
    for start in range(0, total_vectors, chunk):
        indices = np.arange(start, min(start + chunk, total_vectors))
        vectors = np.stack(np.unravel_index(indices, (m,) * n), axis=1)
        valid = (vectors != deps).all(axis=1)
        valid &= (vectors == 0).sum(axis=1) == 1
        if not valid.any():
            continue
        vectors = vectors[valid]
        # follow head pointers n times; anything acyclic drains to the root
        cursor = vectors.copy()
        rows = np.arange(vectors.shape[0])[:, None]
        for _ in range(n):
            nonroot = cursor != 0
            cursor = np.where(nonroot, vectors[rows, np.maximum(cursor - 1, 0)], 0)
        acyclic = (cursor == 0).all(axis=1)
        if not acyclic.any():
            continue
        vectors = vectors[acyclic]
        totals = scores[deps, vectors].sum(axis=1)
        k = int(np.argmax(totals))
        if totals[k] > best_total:
            best_total = float(totals[k])
            best_heads = vectors[k]
    assert best_heads is not None, "a single-rooted tree always exists"
    return [int(h) for h in best_heads]


def count_single_rooted_trees(n: int) -> int:
    """Number of single-rooted labeled arborescences on n nodes (oracle aid)."""
    if n == 1:
        return 1
    return sum(1 for _ in _enumerate_trees(n))


def _enumerate_trees(n: int):
    m = n + 1
    deps = np.arange(1, m)
    for flat in range(m ** n):
        vector = np.array(np.unravel_index(flat, (m,) * n))
        if (vector == deps).any() or (vector == 0).sum() != 1:
            continue
        cursor = vector.copy()
        for _ in range(n):
            cursor = np.where(cursor == 0, 0, vector[np.maximum(cursor - 1, 0)])
        if (cursor == 0).all():
            yield vector
