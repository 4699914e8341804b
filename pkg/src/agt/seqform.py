"""Exact game value of a finite :class:`GameTree` via the sequence-form LP.

Red (maximizer) chooses a realization plan ``x``; Blue's best response is
replaced by its LP dual, giving

    max  q_0   s.t.  F^T q - A^T x <= 0,   E x = e,   x >= 0,

where ``A[i, j]`` sums chance-weighted terminal costs over leaves reached by
Red sequence ``i`` and Blue sequence ``j``.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix, hstack

from .errors import NonConvergence
from .extensive import BLUE_NODE, RED_NODE, TERMINAL, GameTree


def _sequences(tree: GameTree, player: int):
    """Sequence ids (0 = empty) for each node and constraint matrix rows for ``player``."""
    own_slots = np.flatnonzero(tree.slot_player == player)
    seq_of_slot = np.full(tree.n_slots, -1, dtype=np.int64)
    seq_of_slot[own_slots] = np.arange(1, len(own_slots) + 1)
    node_seq = np.zeros(tree.n_nodes, dtype=np.int64)
    from_player = tree.parent_kind == player
    for lo, hi in tree.levels[1:]:
        par = tree.parent[lo:hi]
        node_seq[lo:hi] = np.where(from_player[lo:hi], seq_of_slot[np.maximum(tree.slot[lo:hi], 0)],
                                   node_seq[par])
    sets = [i for i in range(len(tree.keys)) if tree.infoset_player[i] == player]
    set_parent = np.zeros(len(tree.keys), dtype=np.int64)
    dec = np.flatnonzero(tree.kind == player)
    set_parent[tree.infoset[dec]] = node_seq[dec]
    rows, cols, vals = [0], [0], [1.0]
    for r, i in enumerate(sets, start=1):
        rows.append(r)
        cols.append(set_parent[i])
        vals.append(-1.0)
        for s in range(tree.slot_start[i], tree.slot_start[i + 1]):
            rows.append(r)
            cols.append(seq_of_slot[s])
            vals.append(1.0)
    n_seq = len(own_slots) + 1
    mat = coo_matrix((vals, (rows, cols)), shape=(len(sets) + 1, n_seq)).tocsr()
    return node_seq, mat, n_seq


def sequence_form_value(tree: GameTree) -> float:
    """Value (expected accumulated cost) of the tree under optimal play by both players."""
    red_seq, e_mat, n_r = _sequences(tree, RED_NODE)
    blue_seq, f_mat, n_b = _sequences(tree, BLUE_NODE)

    reach_c = np.ones(tree.n_nodes)
    for lo, hi in tree.levels[1:]:
        reach_c[lo:hi] = reach_c[tree.parent[lo:hi]] * tree.chance_prob[lo:hi]
    leaves = np.flatnonzero(tree.kind == TERMINAL)
    payoff = coo_matrix((reach_c[leaves] * tree.accumulated[leaves], (red_seq[leaves], blue_seq[leaves])),
                        shape=(n_r, n_b)).tocsr()

    m_b = f_mat.shape[0]
    a_ub = hstack([-payoff.T, f_mat.T]).tocsr()
    b_ub = np.zeros(n_b)
    a_eq = hstack([e_mat, coo_matrix((e_mat.shape[0], m_b))]).tocsr()
    b_eq = np.zeros(e_mat.shape[0])
    b_eq[0] = 1.0
    c = np.zeros(n_r + m_b)
    c[n_r] = -1.0
    bounds = [(0, None)] * n_r + [(None, None)] * m_b
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        raise NonConvergence(f"sequence-form LP failed: {res.message}")
    return float(-res.fun)
