"""Synthetic benchmark generators with known Markov boundaries.

Three families: polynomial toys (five relevant variables plus irrelevant
extras), linear Gaussian structural models with feedback allowed, and
discrete Bayesian networks sampled ancestrally. Each generator also exposes
the ground-truth Markov boundary of its response.
"""
from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from .covmat import SampleMatrix
from .errors import DataError, NumericalError, UsageError

POLY_FAMILIES = ("gaussian", "beta22", "beta_random")
MB_SIZE = 5
_MIN_SD = 1e-3
SPECTRAL_RADIUS_CAP = 0.9


@dataclass(frozen=True)
class GroundTruth:
    """Target name plus its true Markov boundary, tagged with the generator."""

    target: str
    mb: frozenset[str]
    source: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "mb", frozenset(str(m) for m in self.mb))
        if self.target in self.mb:
            raise UsageError("target cannot be inside its own Markov boundary")
        if self.source not in ("poly", "sem", "bn"):
            raise UsageError(f"unknown ground-truth source {self.source!r}")


@dataclass(frozen=True)
class PolyToySpec:
    family: str = "gaussian"
    extras: int = 95
    n: int = 1000
    seed: int = 0
    noise_sd: float = 1e-4
    theta: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.family not in POLY_FAMILIES:
            raise UsageError(f"unknown family {self.family!r}, expected one of {POLY_FAMILIES}")
        if self.extras < 0:
            raise UsageError("extras must be >= 0")
        if self.n < 2:
            raise UsageError("need at least 2 samples")
        if self.seed < 0:
            raise UsageError("seed must be >= 0")
        if not np.isfinite(self.noise_sd) or self.noise_sd < 0:
            raise UsageError("noise sd must be finite and >= 0")
        if self.theta is not None:
            theta = tuple(float(t) for t in self.theta)
            if len(theta) != MB_SIZE + 1:
                raise UsageError(f"theta needs {MB_SIZE + 1} coefficients, got {len(theta)}")
            object.__setattr__(self, "theta", theta)


def gen_poly_toy(spec: PolyToySpec) -> tuple[SampleMatrix, GroundTruth]:
    """Polynomial toy data: Y = noise + theta_0 + sum_i theta_i * X_i^i, i = 1..5.

    The response is always computed from the raw draws. Beta-family columns
    are mean-centered afterwards for output, which changes nothing about the
    dependence structure (the pipeline is translation invariant) but keeps
    column scales comparable across families.
    """
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed]))
    p = MB_SIZE + spec.extras
    if spec.theta is not None:
        theta = np.asarray(spec.theta, dtype=float)
    else:
        theta = rng.standard_normal(MB_SIZE + 1)

    if spec.family == "gaussian":
        sds = np.abs(rng.standard_normal(p))
        while np.any(sds < _MIN_SD):
            low = sds < _MIN_SD
            sds[low] = np.abs(rng.standard_normal(int(low.sum())))
        raw = rng.standard_normal((spec.n, p)) * sds
        columns = raw
    elif spec.family == "beta22":
        raw = rng.beta(2.0, 2.0, size=(spec.n, p))
        columns = raw - raw.mean(axis=0)
    else:
        a = rng.uniform(0.0, 5.0, size=p)
        b = rng.uniform(0.0, 5.0, size=p)
        while np.any(a == 0.0):
            a[a == 0.0] = rng.uniform(0.0, 5.0, size=int((a == 0.0).sum()))
        while np.any(b == 0.0):
            b[b == 0.0] = rng.uniform(0.0, 5.0, size=int((b == 0.0).sum()))
        raw = rng.beta(a, b, size=(spec.n, p))
        columns = raw - raw.mean(axis=0)

    powers = raw[:, :MB_SIZE] ** np.arange(1, MB_SIZE + 1)
    y = rng.normal(0.0, spec.noise_sd, size=spec.n) + theta[0] + powers @ theta[1:]

    names = [f"X{i + 1}" for i in range(p)] + ["Y"]
    data = SampleMatrix(np.column_stack([columns, y]), names)
    truth = GroundTruth("Y", frozenset(names[:MB_SIZE]), "poly")
    return data, truth


def spectral_radius(matrix: np.ndarray) -> float:
    """Largest absolute eigenvalue of a (generally non-symmetric) matrix."""
    return float(np.abs(np.linalg.eigvals(matrix)).max())


@dataclass
class SemModel:
    """Linear structural model x = b x + eps, eps ~ N(0, diag(d)).

    b[i, j] is the weight of the edge j -> i. The diagonal is zero and the
    spectral radius of b stays below 1 so the model has a stationary law.
    """

    b: np.ndarray
    d: np.ndarray
    names: list[str]
    response_index: int

    def __post_init__(self) -> None:
        self.b = np.asarray(self.b, dtype=float)
        self.d = np.asarray(self.d, dtype=float)
        p = self.b.shape[0]
        if self.b.ndim != 2 or self.b.shape != (p, p):
            raise DataError("edge weight matrix must be square")
        if not np.all(np.isfinite(self.b)):
            raise DataError("edge weights contain non-finite values")
        if np.any(np.diag(self.b) != 0.0):
            raise DataError("self loops are not allowed (diagonal must be zero)")
        if self.d.shape != (p,) or not np.all(np.isfinite(self.d)) or np.any(self.d <= 0):
            raise DataError("noise variances must be positive, finite, length p")
        if len(self.names) != p or len(set(self.names)) != p:
            raise DataError("need p unique variable names")
        if not 0 <= self.response_index < p:
            raise UsageError(f"response index {self.response_index} out of range")
        if spectral_radius(self.b) >= 1.0:
            raise DataError("spectral radius of b must stay below 1")

    @property
    def p(self) -> int:
        return self.b.shape[0]

    @property
    def response(self) -> str:
        return self.names[self.response_index]

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.names)
        rows, cols = np.nonzero(self.b)
        g.add_edges_from((self.names[j], self.names[i]) for i, j in zip(rows, cols))
        return g


def gen_sem_model(
    p: int, expected_degree: float, allow_cycles: bool = True, seed: int = 0
) -> SemModel:
    """Random structural model over p variables.

    Every ordered pair j -> i (i != j) receives an edge independently with
    probability expected_degree / (p - 1); without cycles only pairs running
    forward along a random topological order are eligible. Weights are
    uniform on [0.2, 0.8] with a random sign. If the spectral radius reaches
    0.9 the whole matrix is rescaled so it sits exactly at 0.9.
    """
    if p < 2:
        raise UsageError("need at least 2 variables")
    if expected_degree < 0:
        raise UsageError("expected degree must be >= 0")
    if seed < 0:
        raise UsageError("seed must be >= 0")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    prob = min(1.0, expected_degree / (p - 1))

    order = rng.permutation(p)
    edge_draw = rng.random((p, p))
    magnitudes = rng.uniform(0.2, 0.8, size=(p, p))
    signs = 2.0 * rng.integers(0, 2, size=(p, p)) - 1.0

    mask = edge_draw < prob
    np.fill_diagonal(mask, False)
    if not allow_cycles:
        position = np.empty(p, dtype=int)
        position[order] = np.arange(p)
        # keep j -> i only when j comes before i in the topological order
        mask &= position[None, :] < position[:, None]

    b = np.where(mask, signs * magnitudes, 0.0)
    radius = spectral_radius(b)
    if radius >= SPECTRAL_RADIUS_CAP:
        b *= SPECTRAL_RADIUS_CAP / radius

    d = rng.uniform(0.5, 1.5, size=p)
    response_index = int(rng.integers(p))
    names = [f"X{i + 1}" for i in range(p)]
    return SemModel(b=b, d=d, names=names, response_index=response_index)


def sem_stationary_covariance(model: SemModel) -> np.ndarray:
    """Stationary covariance (I - b)^-1 diag(d) (I - b)^-T of the model."""
    eye = np.eye(model.p)
    try:
        inv = np.linalg.inv(eye - model.b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"I - b is singular: {exc}") from exc
    cov = inv @ np.diag(model.d) @ inv.T
    return (cov + cov.T) / 2.0


def sample_sem(model: SemModel, n: int, seed: int) -> SampleMatrix:
    """Exact stationary draws: x = (I - b)^-1 eps with eps ~ N(0, diag(d))."""
    if n < 2:
        raise UsageError("need at least 2 samples")
    if seed < 0:
        raise UsageError("seed must be >= 0")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    eps = rng.standard_normal((n, model.p)) * np.sqrt(model.d)
    x = np.linalg.solve(np.eye(model.p) - model.b, eps.T).T
    return SampleMatrix(x, list(model.names))


@dataclass
class BnModel:
    """Discrete Bayesian network: a DAG with one CPT per variable.

    cpts[v] has one row per configuration of the parents of v (row-major,
    first listed parent most significant) and one column per state of v.
    """

    names: list[str]
    arities: list[int]
    parents: list[list[int]]
    cpts: list[np.ndarray]

    def __post_init__(self) -> None:
        p = len(self.names)
        if len(set(self.names)) != p:
            raise DataError("variable names must be unique")
        if len(self.arities) != p or len(self.parents) != p or len(self.cpts) != p:
            raise DataError("names, arities, parents and cpts must all have length p")
        self.arities = [int(a) for a in self.arities]
        if any(a < 1 for a in self.arities):
            raise DataError("arities must be >= 1")
        for v, pa in enumerate(self.parents):
            pa = [int(q) for q in pa]
            if any(not 0 <= q < p or q == v for q in pa):
                raise DataError(f"invalid parent list for variable {self.names[v]}")
            if len(set(pa)) != len(pa):
                raise DataError(f"duplicate parents for variable {self.names[v]}")
            self.parents[v] = pa
        self.topological_order()  # raises on cycles
        cpts = []
        for v, table in enumerate(self.cpts):
            table = np.asarray(table, dtype=float)
            rows = int(np.prod([self.arities[q] for q in self.parents[v]], dtype=np.int64))
            if table.shape != (rows, self.arities[v]):
                raise DataError(
                    f"CPT for {self.names[v]} must have shape ({rows}, {self.arities[v]}), "
                    f"got {table.shape}"
                )
            if not np.all(np.isfinite(table)) or np.any(table < 0):
                raise DataError(f"CPT for {self.names[v]} has negative or non-finite entries")
            if np.any(np.abs(table.sum(axis=1) - 1.0) > 1e-9):
                raise DataError(f"CPT rows for {self.names[v]} must sum to 1 within 1e-9")
            cpts.append(table)
        self.cpts = cpts

    @property
    def p(self) -> int:
        return len(self.names)

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.names)
        for v, pa in enumerate(self.parents):
            g.add_edges_from((self.names[q], self.names[v]) for q in pa)
        return g

    def topological_order(self) -> list[int]:
        """Parent-before-child variable order; DataError if the graph has a cycle."""
        children: list[list[int]] = [[] for _ in self.names]
        indegree = [0] * self.p
        for v, pa in enumerate(self.parents):
            indegree[v] = len(pa)
            for q in pa:
                children[q].append(v)
        ready = sorted(v for v in range(self.p) if indegree[v] == 0)
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for c in children[v]:
                indegree[c] -= 1
                if indegree[c] == 0:
                    ready.append(c)
        if len(order) != self.p:
            raise DataError("parent structure contains a cycle")
        return order


def sample_bn(model: BnModel, n: int, seed: int) -> SampleMatrix:
    """Ancestral sampling: each variable draws from its CPT row given its
    already-sampled parents. Values are integer category codes."""
    if n < 2:
        raise UsageError("need at least 2 samples")
    if seed < 0:
        raise UsageError("seed must be >= 0")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    out = np.zeros((n, model.p), dtype=np.int64)
    for v in model.topological_order():
        pa = model.parents[v]
        rows = np.zeros(n, dtype=np.int64)
        for q in pa:
            rows = rows * model.arities[q] + out[:, q]
        cdf = np.cumsum(model.cpts[v], axis=1)
        u = rng.random(n)
        out[:, v] = np.minimum(
            (u[:, None] > cdf[rows]).sum(axis=1), model.arities[v] - 1
        )
    return SampleMatrix(out.astype(float), list(model.names))


def markov_boundary_of(graph: nx.DiGraph, target: str, *, source: str) -> GroundTruth:
    """Parents, children and co-parents of the target's children, minus the
    target itself. `source` tags which generator the graph came from."""
    if target not in graph:
        raise UsageError(f"target {target!r} is not a node of the graph")
    parents = set(graph.predecessors(target))
    children = set(graph.successors(target))
    spouses: set[str] = set()
    for child in children:
        spouses.update(graph.predecessors(child))
    mb = (parents | children | spouses) - {target}
    return GroundTruth(target, frozenset(mb), source)
