"""Directed communication graphs and the spectral quantities the gain theory needs.

Convention: ``A[i, j] > 0`` means agent ``i`` receives information from agent
``j`` (information flows ``j -> i``). ``b[i] > 0`` means agent ``i`` is pinned
to the leader.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

ZERO_TOL = 1e-12
NULLSPACE_TOL = 1e-8
CERT_TOL = 1e-9


class GraphError(ValueError):
    """Malformed graph input."""


class AssumptionViolation(GraphError):
    """The graph is well formed but the follower topology is unusable for the theory."""


class DegenerateSpectrum(GraphError):
    """A numerical null space or eigenvalue is not where the theory puts it."""


@dataclass(frozen=True)
class DirectedGraph:
    A: np.ndarray
    b: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def to_dict(self) -> dict:
        return {"n": self.n, "A": self.A.tolist(), "b": self.b.tolist()}


@dataclass(frozen=True)
class GraphCertificate:
    L: np.ndarray
    B: np.ndarray
    w: np.ndarray
    G: np.ndarray
    lambda1: float


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=float)
    arr.setflags(write=False)
    return arr


def build_graph(A, b) -> DirectedGraph:
    """Validate weights and pinning gains and return an immutable graph.

    Strong connectivity is not checked here; see :func:`is_strongly_connected`.
    Indices in error messages are 1-based to match agent numbering.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise GraphError(f"adjacency must be square, got shape {A.shape}")
    n = A.shape[0]
    if n == 0:
        raise GraphError("graph needs at least one agent")
    if b.shape != (n,):
        raise GraphError(f"leader-link vector must have length {n}, got shape {b.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise GraphError("weights must be finite")
    diag = np.flatnonzero(np.diag(A) != 0.0)
    if diag.size:
        i = diag[0] + 1
        raise GraphError(f"nonzero diagonal at ({i},{i})")
    neg = np.argwhere(A < 0)
    if neg.size:
        i, j = neg[0] + 1
        raise GraphError(f"negative weight at ({i},{j})")
    negb = np.flatnonzero(b < 0)
    if negb.size:
        raise GraphError(f"negative leader link at ({negb[0] + 1})")
    return DirectedGraph(_frozen(A), _frozen(b))


def graph_from_dict(d: dict) -> DirectedGraph:
    """Parse the ``{"n", "A", "b"}`` JSON layout."""
    try:
        n = int(d["n"])
        A, b = d["A"], d["b"]
    except (KeyError, TypeError) as exc:
        raise GraphError(f"graph object needs fields n, A, b: {exc}") from None
    g = build_graph(A, b)
    if g.n != n:
        raise GraphError(f"declared n={n} but A is {g.n}x{g.n}")
    return g


def load_graph(path) -> DirectedGraph:
    return graph_from_dict(json.loads(Path(path).read_text()))


def laplacian(g: DirectedGraph) -> np.ndarray:
    L = -g.A.copy()
    # diagonal is zero, so the row sum of A is exactly the out-degree
    np.fill_diagonal(L, g.A.sum(axis=1))
    return L


def _in_neighbours(g: DirectedGraph) -> list[list[int]]:
    # successor lists for edges j -> i (agent i listens to j)
    succ: list[list[int]] = [[] for _ in range(g.n)]
    for i, j in np.argwhere(g.A > ZERO_TOL):
        succ[j].append(int(i))
    return succ


def strongly_connected_components(g: DirectedGraph) -> list[list[int]]:
    """Tarjan's algorithm, iterative so deep graphs do not hit the recursion limit."""
    succ = _in_neighbours(g)
    index = [-1] * g.n
    low = [0] * g.n
    on_stack = [False] * g.n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(g.n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        while work:
            v, k = work.pop()
            if k == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            while k < len(succ[v]):
                u = succ[v][k]
                k += 1
                if index[u] < 0:
                    work.append((v, k))
                    work.append((u, 0))
                    recurse = True
                    break
                if on_stack[u]:
                    low[v] = min(low[v], index[u])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    u = stack.pop()
                    on_stack[u] = False
                    comp.append(u)
                    if u == v:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comps


def is_strongly_connected(g: DirectedGraph) -> bool:
    return len(strongly_connected_components(g)) == 1


def assumption_violations(g: DirectedGraph) -> list[str]:
    """Human-readable list of failed clauses of the leader/topology assumption."""
    out = []
    if not is_strongly_connected(g):
        out.append("not strongly connected")
    if not np.any(g.b > ZERO_TOL):
        out.append("no follower is linked to the leader")
    return out


def left_null_vector(g: DirectedGraph) -> np.ndarray:
    """Positive ``w`` with ``w^T L = 0`` and ``max(w) = 1``."""
    if not is_strongly_connected(g):
        raise AssumptionViolation("not strongly connected: no positive left null vector")
    if g.n == 1:
        return np.ones(1)
    L = laplacian(g)
    _, s, vt = np.linalg.svd(L.T)
    scale = max(s[0], 1.0)
    if s[-2] <= NULLSPACE_TOL * scale:
        raise DegenerateSpectrum(
            f"null space of L^T looks {int(np.sum(s <= NULLSPACE_TOL * scale))}-dimensional"
        )
    w = vt[-1]
    w = w * np.sign(w.sum())
    if np.any(w <= 0):
        raise DegenerateSpectrum("left null vector is not strictly positive")
    return w / w.max()


def graph_certificate(g: DirectedGraph) -> GraphCertificate:
    """Assemble L, B, w, G and the smallest eigenvalue of G."""
    problems = assumption_violations(g)
    if problems:
        raise AssumptionViolation("topology assumption violated: " + "; ".join(problems))
    L = laplacian(g)
    B = np.diag(g.b)
    w = left_null_vector(g)
    WL = w[:, None] * L
    G = 0.5 * (WL + WL.T) + np.diag(w * g.b)
    lam = float(np.linalg.eigvalsh(G)[0])
    if lam <= CERT_TOL * g.n * max(1.0, np.linalg.norm(L, 2)):
        raise DegenerateSpectrum(f"smallest eigenvalue of G is {lam:.3e}, not positive")
    return GraphCertificate(L=_frozen(L), B=_frozen(B), w=_frozen(w), G=_frozen(G), lambda1=lam)


def random_graph(n: int, rng: np.random.Generator, p: float = 0.4,
                 strongly_connected: bool = True, pinned: bool = True) -> DirectedGraph:
    """Random weighted digraph for tests and sweeps.

    With ``strongly_connected`` a random Hamiltonian cycle is laid down first,
    so the result always satisfies the connectivity clause.
    """
    A = np.where(rng.random((n, n)) < p, rng.uniform(0.2, 2.0, (n, n)), 0.0)
    if strongly_connected and n > 1:
        perm = rng.permutation(n)
        for a, c in zip(perm, np.roll(perm, -1)):
            A[c, a] = rng.uniform(0.2, 2.0)
    np.fill_diagonal(A, 0.0)
    b = np.where(rng.random(n) < 0.3, rng.uniform(0.2, 2.0, n), 0.0)
    if pinned and not np.any(b > 0):
        b[rng.integers(n)] = rng.uniform(0.2, 2.0)
    return build_graph(A, b)
