"""Feasibility of GDoF targets via shortest-path potentials on an induced graph.

A target tuple ``d`` is achievable by the relaxed (un-clamped) TIN scheme
exactly when a certain complete directed graph on the K users plus one
ground node admits a potential function, which in turn holds exactly when
the graph has no negative-length directed circuit.  The graph's arc
lengths encode the difference constraints

    r_i <= 0,
    r_i >= d_i - a_ii,
    r_i - r_j >= a_ij + d_i - a_ii   (i != j),

so shortest-path distances from the ground node double as a concrete power
allocation whenever the system is feasible, and a negative circuit maps
back to one violated inequality of the region's H-representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel_model import ChannelMatrix, PowerExponents

#: A directed circuit whose length is within this band below zero is treated
#: as nonnegative: boundary points of the region are legitimate members and
#: round-off must not eject them.
EPS_LENGTH = 1e-9


@dataclass(frozen=True, eq=False)
class PotentialGraph:
    """Complete directed graph on K user nodes plus a ground node.

    Node ``i`` in ``0..K-1`` stands for user ``i``; node ``K`` is ground.
    ``lengths[a][b]`` is the arc length from node ``a`` to node ``b``
    (+inf where there is no arc):

    - user -> user: ``a_ii - d_i - a_ij``
    - user -> ground: ``a_ii - d_i``
    - ground -> user: ``0``
    """

    alpha: ChannelMatrix
    d: np.ndarray
    lengths: np.ndarray

    @property
    def K(self) -> int:
        return self.alpha.K

    @property
    def ground(self) -> int:
        return self.alpha.K

    @property
    def arc_count(self) -> int:
        return self.K * self.K + self.K

    def arc_length(self, a: int, b: int) -> float:
        return float(self.lengths[a, b])


@dataclass(frozen=True)
class MembershipCertificate:
    """Outcome of the circuit test, with a checkable witness either way.

    Feasible: ``r`` is a valid power allocation whose relaxed TIN GDoF
    dominates the requested tuple.  Infeasible: ``cycle`` lists the users
    of a negative circuit in arc order (a single user means the direct
    power bound ``d_i <= a_ii`` failed) and ``violated_users``/
    ``violated_rhs`` give the corresponding region inequality
    ``sum d_i <= rhs``; ``margin`` is rhs minus the attained sum.
    """

    feasible: bool
    r: PowerExponents | None = None
    cycle: tuple | None = None
    violated_users: tuple | None = None
    violated_rhs: float | None = None
    margin: float | None = None

    def to_dict(self) -> dict:
        out = {"feasible": bool(self.feasible)}
        out["r"] = self.r.to_jsonable() if self.r is not None else None
        out["violated_cycle"] = list(self.cycle) if self.cycle is not None else None
        if self.violated_users is not None:
            out["violated_bound"] = {
                "users": list(self.violated_users),
                "rhs": float(self.violated_rhs),
            }
        else:
            out["violated_bound"] = None
        return out


def build_graph(alpha: ChannelMatrix, d) -> PotentialGraph:
    """Assemble the graph for a channel and a GDoF target (negative d allowed)."""
    dv = np.array(d, dtype=float)
    if dv.shape != (alpha.K,):
        raise ValueError(f"d has shape {dv.shape}, expected ({alpha.K},)")
    if not np.all(np.isfinite(dv)):
        raise ValueError("d entries must be finite")
    K = alpha.K
    a = alpha.alpha
    n = K + 1
    L = np.full((n, n), np.inf)
    for i in range(K):
        for j in range(K):
            if i != j:
                L[i, j] = a[i, i] - dv[i] - a[i, j]
        L[i, K] = a[i, i] - dv[i]
        L[K, i] = 0.0
    L.setflags(write=False)
    dv.setflags(write=False)
    return PotentialGraph(alpha=alpha, d=dv, lengths=L)


def _rotate_min_first(seq: tuple) -> tuple:
    k = seq.index(min(seq))
    return seq[k:] + seq[:k]


def _cycle_inequality(alpha: ChannelMatrix, users: tuple) -> float:
    """Right-hand side of the circuit inequality for a cyclic user sequence."""
    a = alpha.alpha
    m = len(users)
    if m == 1:
        return float(a[users[0], users[0]])
    return float(
        sum(a[users[j], users[j]] - a[users[j - 1], users[j]] for j in range(m))
    )


def _certificate_from_cycle(graph: PotentialGraph, cycle: list) -> MembershipCertificate:
    """Normalize a negative circuit to a pure region inequality.

    Circuits through the ground node with more than one user are dominated
    by the circuit that skips ground (dropping ground removes a
    nonnegative exponent from the length), so ground is stripped and the
    reported inequality is always either a direct power bound or a
    user-circuit bound.
    """
    users = tuple(v for v in cycle if v != graph.ground)
    users = _rotate_min_first(users)
    rhs = _cycle_inequality(graph.alpha, users)
    attained = float(sum(graph.d[u] for u in users))
    return MembershipCertificate(
        feasible=False,
        r=None,
        cycle=users,
        violated_users=users,
        violated_rhs=rhs,
        margin=rhs - attained,
    )


def _extract_cycle(pred: np.ndarray, start: int, n: int) -> list | None:
    """Walk predecessor links from ``start``; return a circuit in arc order."""
    seen: dict = {}
    path = []
    x = start
    while x != -1 and x not in seen:
        seen[x] = len(path)
        path.append(x)
        x = int(pred[x])
    if x == -1:
        return None
    loop = path[seen[x]:]
    loop.reverse()  # predecessor order is against the arcs
    return loop


def decide_membership(graph: PotentialGraph) -> MembershipCertificate:
    """Run Bellman-Ford from ground with negative-circuit detection.

    Feasible outcomes return ``r_i`` = shortest-path distance from ground
    to user ``i`` (the pointwise-largest valid potential normalized to
    ground 0, hence always <= 0).  Infeasible outcomes return a negative
    circuit and the violated inequality, whose margin equals the circuit
    length for pure circuits.
    """
    n = graph.K + 1
    L = graph.lengths
    ground = graph.ground
    dist = np.full(n, np.inf)
    dist[ground] = 0.0
    pred = np.full(n, -1, dtype=int)

    def relax_round() -> bool:
        nonlocal dist, pred
        cand = dist[:, None] + L
        best_src = np.argmin(cand, axis=0)
        best = cand[best_src, np.arange(n)]
        improved = best < dist
        if not improved.any():
            return False
        dist = np.where(improved, best, dist)
        pred = np.where(improved, best_src, pred)
        return True

    for _ in range(n - 1):
        if not relax_round():
            break

    # Convergence within half the boundary band counts as feasible: any
    # remaining slack of that size is round-off, not a real circuit.
    slack_tol = 0.5 * EPS_LENGTH
    best_cert = None
    for _ in range(n + 5):
        cand = dist[:, None] + L
        slack = dist - cand.min(axis=0)
        worst = int(np.argmax(slack))
        if slack[worst] <= slack_tol:
            # normalize to ground potential 0; round-off in the boundary
            # band may leave a +tol residue, which is clamped away
            shift = dist[ground]
            r = PowerExponents(
                [min(0.0, float(dist[i] - shift)) for i in range(graph.K)]
            )
            return MembershipCertificate(feasible=True, r=r)
        relax_round()
        cand = dist[:, None] + L
        slack = dist - cand.min(axis=0)
        worst = int(np.argmax(slack))
        cycle = _extract_cycle(pred, worst, n)
        if cycle is not None:
            total = float(sum(L[cycle[k], cycle[(k + 1) % len(cycle)]] for k in range(len(cycle))))
            if total < -EPS_LENGTH:
                return _certificate_from_cycle(graph, cycle)
            cert = _certificate_from_cycle(graph, cycle)
            if best_cert is None or cert.margin < best_cert.margin:
                best_cert = cert
    if best_cert is not None and best_cert.margin < -EPS_LENGTH:
        return best_cert
    raise RuntimeError("negative-circuit extraction did not converge")


def recover_power_allocation(alpha: ChannelMatrix, d) -> MembershipCertificate:
    """Decide achievability of a nonnegative GDoF target and recover powers.

    On success the returned exponents satisfy componentwise
    ``polyhedral_tin_gdof(alpha, r) >= d`` up to :data:`EPS_LENGTH`.
    """
    dv = np.asarray(d, dtype=float)
    if np.any(dv < 0):
        raise ValueError("GDoF targets must be nonnegative")
    return decide_membership(build_graph(alpha, dv))
