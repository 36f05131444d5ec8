"""Lagged random walk transition law and its exact stationary analysis.

The walk moves on a simple undirected graph.  From current state h with
previous state i, it jumps to a uniformly random node with probability
r/(d_h + r); otherwise it moves to an adjacent node, backtracking to i with
weight w when i is adjacent.  Writing a_xy for the adjacency indicator and
d = d_h, the one-step law is

    p(j | h, i) = r/((d+r) N) + a_hj/(d+r)                          if d = 1
    p(j | h, i) = r/((d+r) N) + [j = i] w a_hj/(d+r)
                  + [j != i] (d - w a_ih)/(d+r) * a_hj/(d - a_ih)   if d > 1

With w = 1 the node process is Markov with stationary law proportional to
d_h + r.  For w < 1 the node process is non-Markovian, but the ordered pair
(X_{t-1}, X_t) is a Markov chain on N^2 states; its stationary vector puts
probability proportional to 1 + r/N on adjacent pairs and r/N on the rest,
which marginalises to (d_h + r)/(2R + rN) for every w.  This module builds
that pair chain explicitly and solves it both directly and by power
iteration so the closed forms can be verified numerically.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConfigError,
    ConvergenceError,
    NonErgodicError,
    SequenceUnreachableError,
    StateSpaceError,
)
from .graph import Graph

ITERATION_TOL = 1e-12
DEFAULT_MAX_ITER = 200_000
DEFAULT_STATE_CAP = 40_000
DIRECT_SOLVE_MAX_STATES = 10_000

INIT_MODES = ("stationary", "uniform", "fixed")


@dataclass(frozen=True)
class WalkConfig:
    """Walk parameters: jump rate r, backtracking weight w, length and start mode.

    r = 0 is accepted for kernel evaluation but is non-ergodic in general;
    operations that need irreducibility reject it.
    """

    r: float
    w: float = 1.0
    walk_length: int = 1
    init: str = "stationary"
    init_node: int | None = None

    def __post_init__(self) -> None:
        if self.r < 0:
            raise ConfigError(f"jump rate r={self.r} must be >= 0")
        if not 0.0 <= self.w <= 1.0:
            raise ConfigError(f"backtracking weight w={self.w} must be in [0, 1]")
        if self.walk_length < 0:
            raise ConfigError(f"walk length {self.walk_length} must be >= 0")
        if self.init not in INIT_MODES:
            raise ConfigError(f"init mode {self.init!r} not one of {INIT_MODES}")
        if self.init == "fixed" and self.init_node is None:
            raise ConfigError("init='fixed' needs init_node")


def transition_prob(g, cfg: WalkConfig, prev: int, cur: int, nxt: int) -> float:
    """One-step probability p(nxt | cur, prev).

    ``g`` can be any graph-like object exposing ``n``, ``degree`` and
    ``has_edge`` (the full graph or an observed sample view).  ``prev`` need
    not be adjacent to ``cur``; a non-adjacent prev simply contributes no
    backtracking term.  Passing prev == cur gives the lag-free kernel.
    """
    n = g.n
    d = g.degree(cur)
    r, w = cfg.r, cfg.w
    if d == 0:
        if r == 0:
            raise NonErgodicError(f"node {cur} is a sink: degree 0 and r = 0")
        return 1.0 / n
    denom = d + r
    jump = (r / denom) / n
    if d == 1:
        return jump + (1.0 if g.has_edge(cur, nxt) else 0.0) / denom
    a_prev = 1 if g.has_edge(prev, cur) else 0
    if nxt == prev:
        return jump + w * a_prev / denom
    a_next = 1 if g.has_edge(cur, nxt) else 0
    return jump + a_next * (d - w * a_prev) / (denom * (d - a_prev))


def transition_row(g: Graph, cfg: WalkConfig, prev: int, cur: int) -> np.ndarray:
    """Full row of the one-step law from (prev, cur) as a length-N vector."""
    n = g.n
    d = g.degree(cur)
    r, w = cfg.r, cfg.w
    if d == 0:
        if r == 0:
            raise NonErgodicError(f"node {cur} is a sink: degree 0 and r = 0")
        return np.full(n, 1.0 / n)
    denom = d + r
    a = g.adjacency_matrix()[cur].astype(float)
    row = np.full(n, (r / denom) / n)
    if d == 1 or not g.has_edge(prev, cur):
        row += a / denom
    else:
        row += a * ((d - w) / (denom * (d - 1)))
        row[prev] = (r / denom) / n + w / denom
    return row


def make_stepper(g: Graph, cfg: WalkConfig):
    """Sampler closure drawing the next state exactly from the one-step law.

    Two-stage scheme: a jump-vs-move coin, then the within-move choice
    (backtrack coin plus uniform pick among the remaining neighbours).  The
    composition reproduces the transition row exactly.
    """
    n = g.n
    r, w = cfg.r, cfg.w
    nbrs = g.neighbor_lists
    adj = g._adj
    degs = g.degrees

    def next_state(prev: int, cur: int, rng: random.Random) -> int:
        d = degs[cur]
        if d == 0:
            if r == 0:
                raise NonErgodicError(f"node {cur} is a sink: degree 0 and r = 0")
            return rng.randrange(n)
        if rng.random() * (d + r) < r:
            return rng.randrange(n)
        cur_nbrs = nbrs[cur]
        if d == 1:
            return cur_nbrs[0]
        if prev in adj[cur]:
            if rng.random() * d < w:
                return prev
            while True:
                j = cur_nbrs[rng.randrange(d)]
                if j != prev:
                    return j
        return cur_nbrs[rng.randrange(d)]

    return next_state


def step(g: Graph, cfg: WalkConfig, prev: int, cur: int, rng: random.Random) -> int:
    """Draw one transition from (prev, cur).  See :func:`make_stepper`."""
    return make_stepper(g, cfg)(prev, cur, rng)


class PairStateChain:
    """Markov chain on ordered pairs (X_{t-1}, X_t), states indexed i*N + h."""

    def __init__(self, graph: Graph, cfg: WalkConfig, matrix: sp.csr_matrix):
        self.graph = graph
        self.cfg = cfg
        self.matrix = matrix
        self.n_nodes = graph.n
        self.n_states = graph.n * graph.n
        self._transposed: sp.csr_matrix | None = None

    def pair_index(self, prev: int, cur: int) -> int:
        return prev * self.n_nodes + cur

    def transposed(self) -> sp.csr_matrix:
        if self._transposed is None:
            self._transposed = self.matrix.transpose().tocsr()
        return self._transposed

    def node_marginal(self, pair_dist: np.ndarray) -> np.ndarray:
        """Marginal of the current (second) coordinate."""
        return pair_dist.reshape(self.n_nodes, self.n_nodes).sum(axis=0)


def build_pair_chain(g: Graph, cfg: WalkConfig, max_states: int = DEFAULT_STATE_CAP) -> PairStateChain:
    """Assemble the N^2 x N^2 row-stochastic pair-transition operator.

    Entry ((i, h), (h', j)) is p(j | h, i) when h' == h and 0 otherwise; only
    the N reachable successors per state are stored.
    """
    if cfg.r <= 0:
        raise NonErgodicError("pair chain needs r > 0 for irreducibility")
    n = g.n
    n_states = n * n
    if n_states > max_states:
        raise StateSpaceError(
            f"pair state space {n_states} exceeds cap {max_states}; raise max_states to override"
        )
    adj = g.adjacency_matrix().astype(float)
    degs = np.asarray(g.degrees, dtype=float)
    r, w = cfg.r, cfg.w
    # rows[i, h, :] is the successor distribution over j for pair state (i, h)
    rows = np.empty((n, n, n))
    for h in range(n):
        d = degs[h]
        a = adj[h]
        base = (r / (d + r)) / n
        rows[:, h, :] = base + a / (d + r)
        if d > 1:
            prevs = np.nonzero(a)[0]
            rows[prevs, h, :] = base + a * ((d - w) / ((d + r) * (d - 1)))
            rows[prevs, h, prevs] = base + w / (d + r)
    data = rows.reshape(n_states, n)
    h_of_row = np.arange(n_states, dtype=np.int64) % n
    indices = (h_of_row[:, None] * n + np.arange(n, dtype=np.int64)).ravel()
    indptr = np.arange(n_states + 1, dtype=np.int64) * n
    matrix = sp.csr_matrix((data.ravel(), indices, indptr), shape=(n_states, n_states))
    return PairStateChain(g, cfg, matrix)


def _stationary_direct(chain: PairStateChain) -> np.ndarray:
    # Balance equations transposed, with the state-0 equation replaced by the
    # normalisation constraint.
    n = chain.n_states
    a = (chain.matrix.transpose() - sp.identity(n, format="csr")).tocsr()
    ones = sp.csr_matrix(np.ones((1, n)))
    system = sp.vstack([ones, a[1:, :]]).tocsc()
    rhs = np.zeros(n)
    rhs[0] = 1.0
    pi = spla.spsolve(system, rhs)
    pi = np.maximum(pi, 0.0)
    return pi / pi.sum()


def _stationary_power(chain: PairStateChain, tol: float, max_iter: int) -> np.ndarray:
    pt = chain.transposed()
    pi = np.full(chain.n_states, 1.0 / chain.n_states)
    delta = np.inf
    for _ in range(max_iter):
        nxt = pt.dot(pi)
        delta = float(np.max(np.abs(nxt - pi)))
        pi = nxt
        if delta < tol:
            return pi / pi.sum()
    raise ConvergenceError(
        f"power iteration stalled: residual {delta:.3e} after {max_iter} iterations",
        residual=delta,
        iterations=max_iter,
    )


def stationary_pair(
    chain: PairStateChain,
    method: str = "auto",
    tol: float = ITERATION_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> np.ndarray:
    """Unique stationary vector of the pair chain (length N^2, sums to 1).

    ``method`` is "direct" (sparse linear solve), "power" (iteration to a
    max-norm tolerance between iterates) or "auto" (direct up to
    ``DIRECT_SOLVE_MAX_STATES`` states, power above).
    """
    if method == "auto":
        method = "direct" if chain.n_states <= DIRECT_SOLVE_MAX_STATES else "power"
    if method == "direct":
        return _stationary_direct(chain)
    if method == "power":
        return _stationary_power(chain, tol, max_iter)
    raise ConfigError(f"unknown stationary method {method!r}")


def stationary_node(g: Graph, cfg: WalkConfig) -> np.ndarray:
    """Closed-form node stationary law (d_h + r) / (2R + rN)."""
    if cfg.r <= 0:
        raise NonErgodicError("closed-form stationary law needs r > 0")
    degs = np.asarray(g.degrees, dtype=float)
    return (degs + cfg.r) / (2 * g.edge_count + cfg.r * g.n)


def marginal_at_t(
    g: Graph,
    cfg: WalkConfig,
    init: np.ndarray,
    t: int,
    chain: PairStateChain | None = None,
) -> np.ndarray:
    """Exact law of X_t from an initial node distribution, via the pair chain.

    The time-0 pair state is (X_0, X_0), so the first step uses the lag-free
    kernel; marginalising the second coordinate after t steps gives the law
    of X_t.
    """
    init = np.asarray(init, dtype=float)
    if init.shape != (g.n,):
        raise ConfigError(f"init distribution must have length {g.n}")
    if abs(init.sum() - 1.0) > 1e-9 or np.any(init < 0):
        raise ConfigError("init must be a probability distribution")
    if t < 0:
        raise ConfigError("t must be >= 0")
    if t == 0:
        return init.copy()
    if chain is None:
        chain = build_pair_chain(g, cfg)
    pt = chain.transposed()
    pair = np.zeros(chain.n_states)
    pair[np.arange(g.n) * g.n + np.arange(g.n)] = init
    for _ in range(t):
        pair = pt.dot(pair)
    return chain.node_marginal(pair)


@dataclass(frozen=True)
class SequenceProbability:
    """Stationary probability of observing a given run of successive states.

    ``normalization`` records whether the leading stationary factor used the
    true edge count ("exact"), an estimate ("estimated"), or was left as the
    unnormalised weight d + r ("unnormalized", i.e. the value times
    2R + rN).
    """

    sequence: tuple[int, ...]
    value: float
    normalization: str


def sequence_prob(
    provider,
    cfg: WalkConfig,
    sequence,
    size: float | None = None,
    size_is_estimate: bool = False,
) -> SequenceProbability:
    """Probability of a successive-state sequence at equilibrium.

    The first factor is the stationary probability of the first state; the
    first transition uses the lag-free kernel (no predecessor is defined for
    it) and later transitions use the in-sequence predecessor.  ``provider``
    only needs degrees and adjacency for the sequence's nodes, so an observed
    sample view suffices whenever the sequence lies inside the seed sample.

    With ``size=None`` the result is unnormalised (the constant 2R + rN is
    dropped), which is enough for ratio estimation.
    """
    seq = tuple(sequence)
    if not seq:
        raise ConfigError("sequence must contain at least one state")
    r = cfg.r
    d0 = provider.degree(seq[0])
    if size is None:
        value = d0 + r
        norm = "unnormalized"
    else:
        value = (d0 + r) / (2.0 * size + r * provider.n)
        norm = "estimated" if size_is_estimate else "exact"
    prev = seq[0]
    for k in range(1, len(seq)):
        p = transition_prob(provider, cfg, prev, seq[k - 1], seq[k])
        if p == 0.0:
            raise SequenceUnreachableError(
                f"transition {seq[k - 1]} -> {seq[k]} has probability 0 (r = 0 and not adjacent)"
            )
        value *= p
        prev = seq[k - 1]
    return SequenceProbability(seq, value, norm)


def exact_sequence_prob(
    g: Graph,
    cfg: WalkConfig,
    sequence,
    chain: PairStateChain | None = None,
    pair_stationary: np.ndarray | None = None,
) -> float:
    """Exact equilibrium probability of a mid-walk sequence.

    Unlike :func:`sequence_prob`, the (unknown) predecessor of the first
    state is integrated out against the pair-chain stationary law.  For
    sequences of length <= 2 the two definitions coincide; for longer
    sequences and w < 1 they can differ, and this function measures by how
    much.
    """
    seq = tuple(sequence)
    if not seq:
        raise ConfigError("sequence must contain at least one state")
    if pair_stationary is None:
        if chain is None:
            chain = build_pair_chain(g, cfg)
        pair_stationary = stationary_pair(chain)
    n = g.n
    first = seq[0]
    if len(seq) == 1:
        return float(pair_stationary.reshape(n, n)[:, first].sum())
    pair = pair_stationary.reshape(n, n)
    total = 0.0
    for i in range(n):
        total += pair[i, first] * transition_prob(g, cfg, i, first, seq[1])
    prev = first
    for k in range(2, len(seq)):
        total *= transition_prob(g, cfg, prev, seq[k - 1], seq[k])
        prev = seq[k - 1]
    return float(total)


def sample_initial_state(g: Graph, cfg: WalkConfig, rng: random.Random) -> int:
    """Draw X_0 according to the configured start mode."""
    if cfg.init == "stationary":
        weights = stationary_node(g, cfg)
        cum = np.cumsum(weights).tolist()
        # min() guards the (rounding-only) case u == cum[-1]
        return min(bisect.bisect_right(cum, rng.random() * cum[-1]), g.n - 1)
    if cfg.init == "uniform":
        return rng.randrange(g.n)
    node = cfg.init_node
    assert node is not None
    if not 0 <= node < g.n:
        raise ConfigError(f"init_node {node} outside graph of order {g.n}")
    return node
