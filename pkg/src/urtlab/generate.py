"""Generators for the tree families and percolation clusters under study.

All randomized generators draw from counter-based streams keyed by
(master seed, stream index); see :mod:`urtlab.rng`.  Deterministic families
produce exact integer sphere counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError, ValidationError
from .rng import stream
from .trees import RootedTreeWindow, SphereProfile, sphere_sizes


# ---------------------------------------------------------------------------
# Deterministic sphere profiles
# ---------------------------------------------------------------------------

def regular_profile(d, n):
    """Spheres of the d-regular tree: 1, d, d(d-1), ..."""
    if d < 2 or n < 1:
        raise ValidationError(f"need d >= 2 and n >= 1, got d={d}, n={n}")
    s = [1]
    for r in range(1, n + 1):
        s.append(d * (d - 1) ** (r - 1))
    return SphereProfile(d, tuple(s), leafless=True)


def subtree_profile(d_prime, ambient_d, n):
    """Spheres of a d'-regular subtree embedded in the d-regular tree.

    Normalization uses the ambient degree, so the profile's ``d`` field is
    ``ambient_d``.
    """
    if not (2 <= d_prime <= ambient_d):
        raise ValidationError(f"need 2 <= d' <= d, got d'={d_prime}, d={ambient_d}")
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    s = [1]
    for r in range(1, n + 1):
        s.append(d_prime * (d_prime - 1) ** (r - 1))
    return SphereProfile(ambient_d, tuple(s), leafless=True)


def line_profile(d, n):
    """Spheres of the bi-infinite line seen inside the d-regular tree."""
    if d < 2 or n < 1:
        raise ValidationError(f"need d >= 2 and n >= 1, got d={d}, n={n}")
    return SphereProfile(d, (1,) + (2,) * n, leafless=True)


def singleton_profile(d, n):
    """Spheres of the one-vertex cluster: 1 followed by zeros."""
    if d < 2 or n < 0:
        raise ValidationError(f"need d >= 2 and n >= 0, got d={d}, n={n}")
    return SphereProfile(d, (1,) + (0,) * n, leafless=False)


def canopy_profile(d, root_level, n):
    """Exact sphere counts of the canopy tree from a root at ``root_level``.

    Canopy structure: vertices live on levels k >= 0; each level-k vertex has
    one parent at level k+1 and, for k >= 1, d-1 children at level k-1.
    Level-0 vertices are leaves.  The vertex at distance r through the j-th
    ancestor contributes via that ancestor's d-2 non-path children, whose
    descendant trees have depth level-1.
    """
    if d <= 2:
        raise ValidationError(f"canopy tree needs d >= 3, got {d}")
    if root_level < 0 or n < 0:
        raise ValidationError("root_level and n must be >= 0")

    def descendants(level, depth):
        return (d - 1) ** depth if 0 <= depth <= level else 0

    s = [1]
    for r in range(1, n + 1):
        count = descendants(root_level, r)
        count += 1  # the ancestor at distance r always exists
        for j in range(1, r):
            count += (d - 2) * descendants(root_level + j - 1, r - j - 1)
        s.append(count)
    return SphereProfile(d, tuple(s), leafless=False)


def canopy_root_level_sampler(d, seed, index=0):
    """Draw a canopy root level k with probability (d-2)/(d-1)^(k+1)."""
    if d <= 2:
        raise ValidationError(f"canopy tree needs d >= 3, got {d}")
    rng = stream(seed, index)
    return int(rng.geometric((d - 2) / (d - 1))) - 1


# ---------------------------------------------------------------------------
# Bernoulli percolation clusters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PercolationParams:
    """Parameters of Bernoulli(p) edge percolation on the d-regular tree."""

    d: int
    p: float
    window_radius: int
    seed: int

    def __post_init__(self):
        if self.d < 3:
            raise ValidationError(f"need d >= 3, got {self.d}")
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"need 0 <= p <= 1, got {self.p}")
        if self.window_radius < 0:
            raise ValidationError("window_radius must be >= 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must fit in 64 bits")


def bernoulli_cluster(params, stream_index=0, max_vertices=1_000_000):
    """Sample the root's open cluster intersected with the window ball.

    The cluster is generated directly as a branching process (root:
    Binomial(d, p) children, deeper vertices: Binomial(d-1, p) children),
    which has the same law as the root cluster of Bernoulli(p) edge
    percolation.  A vertex at the window boundary is marked alive iff at
    least one of its would-be offspring edges is open, so alive flags are
    truthful.  Deterministic given (seed, stream_index).
    """
    d, p, radius = params.d, params.p, params.window_radius
    rng = stream(params.seed, stream_index)
    adjacency = {0: []}
    if radius == 0:
        alive = {0} if rng.binomial(d, p) >= 1 else set()
        return RootedTreeWindow(0, adjacency, d, 0, alive)

    next_id = 1
    level = [0]
    counts = rng.binomial(d, p, size=1)
    alive = set()
    depth = 0
    while level:
        new_level = []
        for v, k in zip(level, counts):
            children = list(range(next_id, next_id + int(k)))
            next_id += int(k)
            adjacency[v].extend(children)
            for c in children:
                adjacency[c] = [v]
            new_level.extend(children)
        if next_id > max_vertices:
            raise CapExceededError(
                f"cluster exceeded the vertex cap {max_vertices} at depth {depth + 1}"
            )
        depth += 1
        level = new_level
        if not level:
            break
        if depth == radius:
            boundary = rng.binomial(d - 1, p, size=len(level))
            alive = {v for v, k in zip(level, boundary) if k >= 1}
            break
        counts = rng.binomial(d - 1, p, size=len(level))
    return RootedTreeWindow(0, adjacency, d, radius, alive)


def cluster_mean_size_oracle(d, p):
    """Expected total progeny of the root cluster, from branching-process theory.

    Valid for subcritical p (p < 1/(d-1)): 1 + d p / (1 - (d-1) p).
    """
    m = (d - 1) * p
    if m >= 1.0:
        raise ValidationError("mean cluster size is infinite at or above criticality")
    return 1.0 + d * p / (1.0 - m)


# ---------------------------------------------------------------------------
# Decorated lines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PendantPathLaw:
    """Distribution of pendant-path decorations, enumerated as (length, prob).

    Length 0 means no decoration.  Restricting decorations to enumerated
    pendant paths keeps the degree bound checkable: a positive-length path
    adds exactly one edge at its anchor.
    """

    probs: tuple

    def __post_init__(self):
        if not self.probs:
            raise ValidationError("empty decoration law")
        total = 0.0
        for length, prob in self.probs:
            if length < 0 or int(length) != length:
                raise ValidationError(f"bad decoration length {length}")
            if prob < 0:
                raise ValidationError("negative probability")
            total += prob
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"decoration probabilities sum to {total}, not 1")

    @classmethod
    def none(cls):
        return cls(((0, 1.0),))

    @classmethod
    def pendant(cls, p):
        return cls(((0, 1.0 - p), (1, p)))

    @property
    def max_length(self):
        return max(length for length, _ in self.probs)

    @property
    def mean_weight(self):
        return 1.0 + sum(length * prob for length, prob in self.probs)

    def sample(self, rng):
        u = rng.random()
        acc = 0.0
        for length, prob in self.probs:
            acc += prob
            if u < acc:
                return length
        return self.probs[-1][0]

    def sample_size_biased(self, rng):
        """Draw the cell that contains a uniformly chosen vertex: P(j) ~ p_j (1+len_j)."""
        weights = [(1 + length) * prob for length, prob in self.probs]
        total = sum(weights)
        u = rng.random() * total
        acc = 0.0
        for (length, _), w in zip(self.probs, weights):
            acc += w
            if u < acc:
                return length
        return self.probs[-1][0]


def _build_decorated_line(d, lengths, span, pad, root_pos=0, root_depth=0):
    """Assemble a decorated-line window.

    Line positions run over [-(span+pad), span+pad]; decorations of the given
    ``lengths`` hang at positions |i| <= span.  The two line ends are alive at
    distance exactly span + pad + root_depth from the root, which sits at
    ``root_depth`` inside the decoration of ``root_pos`` (0 = on the line).
    """
    reach = span + pad
    pos_id = {i: idx for idx, i in enumerate(range(-reach, reach + 1))}
    adjacency = {v: [] for v in pos_id.values()}
    for i in range(-reach, reach):
        adjacency[pos_id[i]].append(pos_id[i + 1])
        adjacency[pos_id[i + 1]].append(pos_id[i])
    next_id = len(pos_id)
    decoration_ids = {}
    for i in range(-span, span + 1):
        length = lengths.get(i, 0)
        chain = []
        prev = pos_id[i]
        for _ in range(length):
            adjacency[prev].append(next_id)
            adjacency[next_id] = [prev]
            chain.append(next_id)
            prev = next_id
            next_id += 1
        decoration_ids[i] = chain
    root = pos_id[root_pos] if root_depth == 0 else decoration_ids[root_pos][root_depth - 1]
    horizon = reach + root_depth
    alive = {pos_id[-reach], pos_id[reach]}
    window = RootedTreeWindow(root, adjacency, d, horizon, alive)
    line_ids = frozenset(pos_id.values())
    return window, line_ids, pos_id[root_pos]


def line_with_decorations(d, law, window_length, seed, stream_index=0):
    """Bi-infinite line window with iid pendant decorations, rooted at the center.

    Decorations are attached at line distances <= ``window_length``; the two
    bare end segments of length ``max_length`` keep the alive flags at the
    exact horizon.  Sphere counts up to ``window_length`` are exact for the
    decorated-line law.
    """
    if law.max_length > 0 and d < 3:
        raise ValidationError("decorated line needs d >= 3 for the degree bound")
    rng = stream(seed, stream_index)
    lengths = {i: law.sample(rng) for i in range(-window_length, window_length + 1)}
    window, _, _ = _build_decorated_line(d, lengths, window_length, law.max_length)
    return window


@dataclass(frozen=True)
class SpineMtpAudit:
    """Monte Carlo audit of the spine mass-transport identity.

    The statistic per sample is Y = w(root cell) * 1{root on the line}, whose
    expectation under the unimodular (size-biased cell) root law equals
    P(o in spine) * E[w(o') | o' in spine].  The audit passes when the mean of
    Y does not exceed 1 by more than 3 standard errors.
    """

    n_samples: int
    p_spine: float
    mean_w_on_spine: float
    product: float
    se: float
    passed: bool
    windows_checked: int


def spine_mtp_audit(d, law, n_samples, seed, window_length=8, windows_checked=64):
    """Sample the unimodular decorated line and audit P(o in spine) E[w(o')] <= 1.

    The root cell is drawn size-biased and the root placed uniformly inside
    it.  For the first ``windows_checked`` samples the full window is built
    and the cell-level statistic is cross-checked against the actual
    ``spine``/``decorations`` machinery.
    """
    from .trees import decorations as window_decorations
    from .trees import spine as window_spine

    ys = np.empty(n_samples)
    n_spine = 0
    w_sum = 0
    checked = 0
    for i in range(n_samples):
        rng = stream(seed, i)
        center_len = law.sample_size_biased(rng)
        cell_w = 1 + center_len
        root_depth = int(rng.integers(cell_w))
        on_line = root_depth == 0
        ys[i] = cell_w if on_line else 0.0
        if on_line:
            n_spine += 1
            w_sum += cell_w
        if i < windows_checked:
            lengths = {
                j: law.sample(rng)
                for j in range(-window_length, window_length + 1)
                if j != 0
            }
            lengths[0] = center_len
            window, line_ids, center_id = _build_decorated_line(
                d, lengths, window_length, law.max_length, root_depth=root_depth
            )
            sub, dist = window_spine(window)
            if set(sub.adjacency) != set(line_ids):
                raise ValidationError("spine of a decorated line is not the line")
            if dist != root_depth:
                raise ValidationError("root distance to spine disagrees with the cell")
            _, weights = window_decorations(window)
            if weights[center_id] != cell_w:
                raise ValidationError("decoration weight disagrees with the sampled cell")
            checked += 1
    mean = float(np.mean(ys))
    se = float(np.std(ys, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    p_spine = n_spine / n_samples
    mean_w = (w_sum / n_spine) if n_spine else float("nan")
    return SpineMtpAudit(
        n_samples=n_samples,
        p_spine=p_spine,
        mean_w_on_spine=mean_w,
        product=mean,
        se=se,
        passed=mean <= 1.0 + 3.0 * se,
        windows_checked=checked,
    )


# ---------------------------------------------------------------------------
# Transfer automata
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransferAutomaton:
    """Deterministic leafless tree profiles via non-backtracking state counts.

    ``transitions[i][j]`` counts continuations from state i to state j; the
    ``start`` vector counts root edges per state.  Row sums at most
    ambient_d - 1 and start sum at most ambient_d keep the encoded tree inside
    the d-regular tree.
    """

    transitions: tuple
    start: tuple
    ambient_d: int

    def __post_init__(self):
        n = len(self.transitions)
        if n == 0 or len(self.start) != n:
            raise ValidationError("transition matrix and start vector sizes disagree")
        for row in self.transitions:
            if len(row) != n:
                raise ValidationError("transition matrix is not square")
            if any(x < 0 or int(x) != x for x in row):
                raise ValidationError("transition counts must be nonnegative integers")
            if sum(row) > self.ambient_d - 1:
                raise ValidationError(
                    f"row sum {sum(row)} exceeds ambient_d - 1 = {self.ambient_d - 1}"
                )
        if any(x < 0 or int(x) != x for x in self.start):
            raise ValidationError("start counts must be nonnegative integers")
        if sum(self.start) > self.ambient_d:
            raise ValidationError("start sum exceeds ambient_d")

    @property
    def state_count(self):
        return len(self.transitions)

    def reachable_states(self):
        frontier = [i for i, x in enumerate(self.start) if x > 0]
        seen = set(frontier)
        while frontier:
            i = frontier.pop()
            for j, x in enumerate(self.transitions[i]):
                if x > 0 and j not in seen:
                    seen.add(j)
                    frontier.append(j)
        return seen


def automaton_profile(aut, n):
    """Sphere counts s_r = sum(start . M^(r-1)) with exact integer arithmetic."""
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    vec = list(aut.start)
    s = [1, sum(vec)]
    for _ in range(2, n + 1):
        vec = [
            sum(vec[i] * aut.transitions[i][j] for i in range(aut.state_count))
            for j in range(aut.state_count)
        ]
        s.append(sum(vec))
    reach = aut.reachable_states()
    leafless = (
        sum(aut.start) >= 2
        and all(sum(aut.transitions[i]) >= 1 for i in reach)
    )
    return SphereProfile(aut.ambient_d, tuple(s), leafless=leafless)


def perron_growth(aut, rel_tol=1e-12, max_iter=200_000):
    """Log of the Perron eigenvalue of the reachable transition block.

    Power iteration runs on M + I, which is primitive whenever the reachable
    block is irreducible, so the iteration converges even for periodic
    matrices; the shift is subtracted at the end.
    """
    reach = sorted(aut.reachable_states())
    if not reach:
        raise ValidationError("no state is reachable from the start vector")
    index = {s: k for k, s in enumerate(reach)}
    n = len(reach)
    m = np.zeros((n, n))
    for i in reach:
        for j, x in enumerate(aut.transitions[i]):
            if x > 0:
                if j not in index:
                    raise ValidationError("reachability closure failed")
                m[index[i], index[j]] = x
    # Irreducibility = strong connectivity of the reachable block.
    def _reaches(src):
        seen = {src}
        frontier = [src]
        while frontier:
            a = frontier.pop()
            for b in range(n):
                if m[a, b] > 0 and b not in seen:
                    seen.add(b)
                    frontier.append(b)
        return seen

    for k in range(n):
        if _reaches(k) != set(range(n)):
            raise ValidationError(
                "transition matrix restricted to reachable states is reducible"
            )

    shifted = m + np.eye(n)
    vec = np.full(n, 1.0 / n)
    lam = 0.0
    for _ in range(max_iter):
        new = shifted @ vec
        new_lam = float(new.sum())
        vec = new / new_lam
        if abs(new_lam - lam) <= rel_tol * new_lam:
            return math.log(new_lam - 1.0)
        lam = new_lam
    raise ValidationError("power iteration failed to converge")


def format_automaton(aut):
    lines = [f"automaton states={aut.state_count} d={aut.ambient_d}"]
    lines.append("start " + " ".join(str(x) for x in aut.start))
    for row in aut.transitions:
        lines.append(" ".join(str(x) for x in row))
    return "\n".join(lines) + "\n"


def parse_automaton(text):
    lines = [
        ln.strip()
        for ln in text.splitlines()
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not lines or not lines[0].startswith("automaton "):
        raise ValidationError("missing 'automaton' header line")
    header = {}
    for tok in lines[0].split()[1:]:
        key, _, val = tok.partition("=")
        header[key] = val
    try:
        n_states = int(header["states"])
        d = int(header["d"])
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"bad automaton header: {lines[0]!r}") from exc
    if len(lines) != 2 + n_states or not lines[1].startswith("start"):
        raise ValidationError("automaton file must have a start line and one row per state")
    start = tuple(int(x) for x in lines[1].split()[1:])
    rows = tuple(tuple(int(x) for x in ln.split()) for ln in lines[2 : 2 + n_states])
    return TransferAutomaton(rows, start, d)


# ---------------------------------------------------------------------------
# Profile spec mini-language
# ---------------------------------------------------------------------------

def _parse_kv(body):
    out = {}
    if body:
        for item in body.split(","):
            key, sep, val = item.partition("=")
            if not sep:
                raise ValidationError(f"bad profile spec item {item!r}")
            out[key.strip()] = val.strip()
    return out


def profile_from_spec(spec, n):
    """Build a sphere profile of length ``n`` from a spec string.

    Families: ``regular:d=4``, ``subtree:d=4,dp=3``, ``line:d=4``,
    ``canopy:d=4,level=0``, ``automaton:file=PATH``,
    ``bernoulli:d=4,p=0.3,r=8,seed=1``.
    """
    family, _, body = spec.partition(":")
    kv = _parse_kv(body)
    try:
        if family == "regular":
            return regular_profile(int(kv["d"]), n)
        if family == "subtree":
            return subtree_profile(int(kv["dp"]), int(kv["d"]), n)
        if family == "line":
            return line_profile(int(kv["d"]), n)
        if family == "canopy":
            return canopy_profile(int(kv["d"]), int(kv.get("level", 0)), n)
        if family == "automaton":
            with open(kv["file"], encoding="utf-8") as fh:
                aut = parse_automaton(fh.read())
            return automaton_profile(aut, n)
        if family == "bernoulli":
            params = PercolationParams(
                d=int(kv["d"]),
                p=float(kv["p"]),
                window_radius=int(kv["r"]),
                seed=int(kv.get("seed", 0)),
            )
            window = bernoulli_cluster(params)
            pad = n if n > window.horizon else None
            return sphere_sizes(window, pad_to=pad)
    except KeyError as exc:
        raise ValidationError(f"profile spec {spec!r} is missing key {exc}") from exc
    raise ValidationError(f"unknown profile family {family!r}")
