"""Finite rooted-tree windows, sphere statistics, and spine extraction.

An infinite tree is represented by the ball of radius ``horizon`` around the
root plus ``alive`` flags on horizon vertices known to continue beyond the
window.  Generators in this package mark alive vertices truthfully, which
makes edge weakness (one side of the tree minus the edge is finite) exactly
decidable inside the window: a side with no alive vertex lies entirely in the
window and is therefore finite.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .errors import PreconditionError, ValidationError


class RootedTreeWindow:
    """Radius-``horizon`` window of a rooted tree with degree bound ``degree_bound``.

    Invariants checked at construction:

    * the stored graph is connected and acyclic (edges = vertices - 1),
    * every vertex degree is at most ``degree_bound``,
    * every alive vertex sits at distance exactly ``horizon`` from the root,
    * all vertices sit at distance at most ``horizon``.

    Instances are immutable after construction and safe to share across
    threads.
    """

    __slots__ = ("root", "adjacency", "degree_bound", "horizon", "alive", "depths")

    def __init__(self, root, adjacency, degree_bound, horizon, alive=()):
        if int(degree_bound) < 2:
            raise ValidationError(f"degree bound must be >= 2, got {degree_bound}")
        if int(horizon) < 0:
            raise ValidationError(f"horizon must be >= 0, got {horizon}")
        self.root = root
        self.adjacency = {v: tuple(ns) for v, ns in adjacency.items()}
        self.degree_bound = int(degree_bound)
        self.horizon = int(horizon)
        self.alive = frozenset(alive)
        self.depths = self._validate()

    def _validate(self):
        adj = self.adjacency
        if self.root not in adj:
            raise ValidationError("root is not a stored vertex")
        half_edges = 0
        for v, ns in adj.items():
            if len(set(ns)) != len(ns):
                raise ValidationError(f"duplicate neighbor at vertex {v}")
            if v in ns:
                raise ValidationError(f"self-loop at vertex {v}")
            if len(ns) > self.degree_bound:
                raise ValidationError(
                    f"vertex {v} has degree {len(ns)} > bound {self.degree_bound}"
                )
            for u in ns:
                if u not in adj or v not in adj[u]:
                    raise ValidationError(f"asymmetric edge ({v}, {u})")
            half_edges += len(ns)
        depths = self.distances_from(self.root)
        if len(depths) != len(adj):
            raise ValidationError("stored graph is not connected")
        if half_edges != 2 * (len(adj) - 1):
            raise ValidationError("edge count != vertex count - 1 (cycle present)")
        max_depth = max(depths.values())
        if max_depth > self.horizon:
            raise ValidationError(
                f"vertex at distance {max_depth} exceeds horizon {self.horizon}"
            )
        for v in self.alive:
            if depths.get(v) != self.horizon:
                raise ValidationError(
                    f"alive vertex {v} is not at distance exactly {self.horizon}"
                )
        return depths

    def distances_from(self, v, limit=None):
        """BFS distances from ``v`` inside the window, optionally truncated."""
        if v not in self.adjacency:
            raise ValidationError(f"unknown vertex {v}")
        dist = {v: 0}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            du = dist[u]
            if limit is not None and du >= limit:
                continue
            for w in self.adjacency[u]:
                if w not in dist:
                    dist[w] = du + 1
                    queue.append(w)
        return dist

    def neighbors(self, v):
        return self.adjacency[v]

    @property
    def vertex_count(self):
        return len(self.adjacency)

    def __eq__(self, other):
        if not isinstance(other, RootedTreeWindow):
            return NotImplemented
        return (
            self.root == other.root
            and self.degree_bound == other.degree_bound
            and self.horizon == other.horizon
            and self.alive == other.alive
            and {v: tuple(sorted(ns)) for v, ns in self.adjacency.items()}
            == {v: tuple(sorted(ns)) for v, ns in other.adjacency.items()}
        )

    def __repr__(self):
        return (
            f"RootedTreeWindow(root={self.root}, vertices={self.vertex_count}, "
            f"d={self.degree_bound}, horizon={self.horizon}, alive={len(self.alive)})"
        )


@dataclass(frozen=True)
class SphereProfile:
    """Sphere counts ``spheres[r] = |S(o, r)|`` of a rooted tree.

    ``leafless`` asserts the underlying tree has minimum degree 2, which
    forces the sphere sequence to be nondecreasing.  Counts are exact Python
    integers so deep profiles never overflow.
    """

    d: int
    spheres: tuple
    leafless: bool = False

    def __post_init__(self):
        if self.d < 2:
            raise ValidationError(f"ambient degree must be >= 2, got {self.d}")
        s = self.spheres
        if len(s) == 0:
            raise ValidationError("empty sphere profile")
        if s[0] != 1:
            raise ValidationError(f"s_0 must be 1, got {s[0]}")
        if any(x < 0 for x in s):
            raise ValidationError("negative sphere count")
        if len(s) > 1 and s[1] > self.d:
            raise ValidationError(f"s_1 = {s[1]} exceeds degree {self.d}")
        for r in range(1, len(s) - 1):
            if s[r + 1] > (self.d - 1) * s[r]:
                raise ValidationError(
                    f"s_{r + 1} = {s[r + 1]} exceeds (d-1)*s_{r} = {(self.d - 1) * s[r]}"
                )
        if self.leafless:
            for r in range(len(s) - 1):
                if s[r + 1] < s[r]:
                    raise ValidationError(
                        f"leafless profile must be nondecreasing, s_{r + 1} < s_{r}"
                    )

    @property
    def horizon(self):
        return len(self.spheres) - 1

    def ball_sizes(self):
        """Cumulative ball sizes |B(o, n)| for n = 0..horizon."""
        out = []
        total = 0
        for s in self.spheres:
            total += s
            out.append(total)
        return out


@dataclass(frozen=True)
class NormalizedProfile:
    """Log-domain normalized sphere sequence a_r = s_r / (d (d-1)^(r-1)).

    ``log_a[r]`` is -inf where the sphere is empty.  a_0 = 1 by convention.
    """

    d: int
    log_a: tuple

    def __post_init__(self):
        if len(self.log_a) == 0:
            raise ValidationError("empty normalized profile")
        if self.log_a[0] != 0.0:
            raise ValidationError("a_0 must equal 1")
        if any(x > 1e-12 for x in self.log_a):
            raise ValidationError("normalized spheres must lie in [0, 1]")

    @property
    def horizon(self):
        return len(self.log_a) - 1


@dataclass(frozen=True)
class GrowthEstimate:
    """Finite-horizon growth statistics of a sphere profile.

    ``per_n`` is the raw sequence |B(o, n)|^(1/n).  The reported lower/upper
    estimates are tail min/max of windowed ball ratios
    (|B(o, n)| / |B(o, n-k)|)^(1/k) with k = ceil(n_max / 4), which cancel the
    constant prefactor of |B(o, n)| that biases the raw power sequence at any
    reachable horizon.  Both estimates are clamped to the feasible range
    [1, d-1]; they are estimates of a limit a finite window cannot certify.
    """

    d: int
    per_n: tuple
    lower: float
    upper: float
    n_max: int

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise ValidationError("lower growth estimate exceeds upper")
        if not (1.0 <= self.lower and self.upper <= self.d - 1 + 1e-12):
            raise ValidationError("growth estimates outside [1, d-1]")


def sphere_sizes(window, pad_to=None):
    """Sphere profile of a window; zero-padded to the horizon.

    ``pad_to`` may extend the profile past the horizon only when the window
    has no alive vertices (the tree provably ended, so deeper spheres are
    empty).  Leaflessness is detected from vertices strictly inside the
    horizon, whose neighbor sets are complete; the horizon layer has truncated
    degrees and is ignored.
    """
    counts = [0] * (window.horizon + 1)
    for v, dep in window.depths.items():
        counts[dep] += 1
    if pad_to is not None:
        if pad_to > window.horizon and window.alive:
            raise PreconditionError(
                "cannot extend the profile of a window with alive vertices "
                f"past its horizon {window.horizon}"
            )
        counts.extend([0] * (pad_to - len(counts) + 1))
    leafless = all(
        len(window.adjacency[v]) >= 2
        for v, dep in window.depths.items()
        if dep < window.horizon
    )
    return SphereProfile(window.degree_bound, tuple(counts), leafless=leafless)


def normalize(profile):
    """Normalized profile a_r = s_r / (d (d-1)^(r-1)), computed in log domain."""
    s = profile.spheres
    if s[0] != 1:
        raise ValidationError(f"s_0 must be 1, got {s[0]}")
    d = profile.d
    log_d = math.log(d)
    log_dm1 = math.log(d - 1)
    log_a = [0.0]
    for r in range(1, len(s)):
        if s[r] == 0:
            log_a.append(float("-inf"))
        else:
            log_a.append(math.log(s[r]) - log_d - (r - 1) * log_dm1)
    return NormalizedProfile(d, tuple(log_a))


def growth_estimates(profile):
    """Tail growth estimates from ball sizes.

    The per-n diagnostic sequence is |B(o, n)|^(1/n).  The (lower, upper)
    estimates are the min/max over the last ceil(N/4) positions of the
    windowed ratio estimate (|B(o, n)| / |B(o, n-k)|)^(1/k), k = ceil(N/4),
    clamped into [1, d-1].
    """
    n_max = profile.horizon
    if n_max < 2:
        raise ValidationError(f"growth estimates need horizon >= 2, got {n_max}")
    balls = profile.ball_sizes()
    log_balls = [math.log(b) for b in balls]
    per_n = tuple(math.exp(log_balls[n] / n) for n in range(1, n_max + 1))
    k = -(-n_max // 4)
    d = profile.d
    tail = []
    for n in range(n_max - k + 1, n_max + 1):
        est = math.exp((log_balls[n] - log_balls[n - k]) / k)
        tail.append(min(max(est, 1.0), float(d - 1)))
    return GrowthEstimate(d, per_n, min(tail), max(tail), n_max)


def _nonweak_edges(window):
    """Edges whose both sides contain an alive vertex (hence both provably infinite).

    Returned as a set of frozensets {u, v}.  With truthful alive flags this is
    exact: a side without alive vertices lies entirely inside the window.
    """
    total_alive = len(window.alive)
    if total_alive == 0:
        return set()
    order = sorted(window.depths, key=window.depths.get)
    parent = {window.root: None}
    for v in order:
        for u in window.adjacency[v]:
            if u not in parent:
                parent[u] = v
    alive_below = {v: (1 if v in window.alive else 0) for v in order}
    for v in reversed(order):
        p = parent[v]
        if p is not None:
            alive_below[p] += alive_below[v]
    nonweak = set()
    for v in order:
        p = parent[v]
        if p is None:
            continue
        below = alive_below[v]
        if below >= 1 and (total_alive - below) >= 1:
            nonweak.add(frozenset((p, v)))
    return nonweak


def spine_vertices(window):
    """Vertices incident to at least one non-weak edge.

    This is exactly the set of window vertices lying on a geodesic between two
    alive rays, i.e. the visible part of the spine.
    """
    verts = set()
    for e in _nonweak_edges(window):
        verts.update(e)
    return verts


def spine(window):
    """Extract the spine of a window.

    Removes all weak edges (one side finite) and returns the component that
    carries at least two alive rays, trimmed to a valid window around the
    spine vertex nearest the root, together with the distance from the root
    to that vertex.  Returns ``(None, None)`` when the window shows no spine
    (fewer than two alive rays).
    """
    nonweak = _nonweak_edges(window)
    if not nonweak:
        return None, None
    verts = set()
    spine_adj = {}
    for e in nonweak:
        u, v = tuple(e)
        verts.update((u, v))
        spine_adj.setdefault(u, []).append(v)
        spine_adj.setdefault(v, []).append(u)

    # Nearest spine vertex to the root, by BFS over the full window.
    dist_root = window.distances_from(window.root)
    v0 = min(verts, key=lambda v: (dist_root[v], str(v)))
    root_distance = dist_root[v0]

    depth = {v0: 0}
    queue = deque([v0])
    while queue:
        u = queue.popleft()
        for w in spine_adj[u]:
            if w not in depth:
                depth[w] = depth[u] + 1
                queue.append(w)
    if len(depth) != len(verts):
        raise ValidationError("spine is not connected; alive flags inconsistent")

    alive_depths = [depth[v] for v in window.alive if v in depth]
    if not alive_depths:
        raise ValidationError("spine contains no alive vertex; flags inconsistent")
    new_horizon = min(alive_depths)

    kept = {v for v, dep in depth.items() if dep <= new_horizon}
    trimmed = {
        v: tuple(w for w in spine_adj[v] if w in kept and depth[w] <= new_horizon)
        for v in kept
    }
    # Every boundary spine vertex continues in the spine: it has >= 2 spine
    # directions, at most one of which points back toward v0.
    new_alive = {v for v in kept if depth[v] == new_horizon}
    sub = RootedTreeWindow(v0, trimmed, window.degree_bound, new_horizon, new_alive)
    return sub, root_distance


def decorations(window):
    """Partition non-spine vertices into the finite trees hanging off the spine.

    Returns ``(pieces, weights)`` where ``pieces`` is a list of
    ``(anchor_spine_vertex, component_size)`` and ``weights[v]`` is
    1 + total decoration size anchored at spine vertex ``v``.
    """
    sverts = spine_vertices(window)
    if not sverts:
        raise ValidationError("window has an empty spine; nothing to anchor on")
    weights = {v: 1 for v in sverts}
    pieces = []
    seen = set()
    for start in sorted(window.depths, key=lambda v: (window.depths[v], str(v))):
        if start in sverts or start in seen:
            continue
        comp = [start]
        seen.add(start)
        anchors = set()
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in window.adjacency[u]:
                if w in sverts:
                    anchors.add(w)
                elif w not in seen:
                    seen.add(w)
                    comp.append(w)
                    queue.append(w)
        if len(anchors) != 1:
            raise ValidationError(
                f"decoration component has {len(anchors)} spine anchors, expected 1"
            )
        anchor = anchors.pop()
        pieces.append((anchor, len(comp)))
        weights[anchor] += len(comp)
    return pieces, weights


def format_window(window):
    """Serialize a window in the tree interchange format."""
    lines = [
        f"tree d={window.degree_bound} root={window.root} horizon={window.horizon}"
    ]
    order = sorted(window.depths, key=lambda v: (window.depths[v], v))
    seen = {window.root}
    for v in order:
        for u in sorted(window.adjacency[v]):
            if u not in seen:
                lines.append(f"{v} {u}")
                seen.add(u)
    lines.append("alive " + " ".join(str(v) for v in sorted(window.alive)))
    return "\n".join(lines) + "\n"


def parse_window(text):
    """Parse the tree interchange format; rejects duplicate edges and cycles."""
    lines = [
        ln.strip()
        for ln in text.splitlines()
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not lines or not lines[0].startswith("tree "):
        raise ValidationError("missing 'tree' header line")
    header = {}
    for tok in lines[0].split()[1:]:
        key, _, val = tok.partition("=")
        header[key] = val
    try:
        d = int(header["d"])
        root = int(header["root"])
        horizon = int(header["horizon"])
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"bad tree header: {lines[0]!r}") from exc
    adjacency = {root: []}
    alive = []
    seen_edges = set()
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "alive":
            alive = [int(x) for x in parts[1:]]
            continue
        if len(parts) != 2:
            raise ValidationError(f"bad edge line: {ln!r}")
        u, v = int(parts[0]), int(parts[1])
        e = frozenset((u, v))
        if len(e) == 1:
            raise ValidationError(f"self-loop edge: {ln!r}")
        if e in seen_edges:
            raise ValidationError(f"duplicate edge: {ln!r}")
        seen_edges.add(e)
        adjacency.setdefault(u, []).append(v)
        adjacency.setdefault(v, []).append(u)
    return RootedTreeWindow(root, adjacency, d, horizon, alive)
