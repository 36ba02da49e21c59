"""Leaf-freezing process on the finite directed binary tree T(n).

A site i with U_i <= t is red at time t when some downward path
i = i_1, ..., i_k to level n has every U <= t and a leaf value U_{i_k} at
least the maximum of the values before it. A leaf with U_i <= t is red on
its own (the prefix before it is empty).
"""

from functools import partial
from typing import List, Optional

import numpy as np

from app.core.exceptions import ValidationError
from app.core.logging import get_logger
from app.models.directed_sample import DirectedSample
from app.schemas.common import Colour
from app.schemas.estimate import EstimateParameters, EstimateReport, ReportKind
from app.services.replica_runner import ReplicaRunner
from app.utils.validators import SiteId

logger = get_logger(__name__)


def _root_red_lazy(n: int, t: float, rng: np.random.Generator) -> bool:
    """Whether the root of a fresh T(n) is red at t, drawing U only where the search looks.

    Unvisited sites never influence the outcome, so drawing them lazily
    leaves the law of the indicator unchanged.
    """
    root = rng.random()
    if root > t:
        return False

    # (level, value, max of the values above it on the path)
    stack = []
    a, b = rng.random(2)
    stack.append((1, max(a, b), root))
    stack.append((1, min(a, b), root))
    while stack:
        level, value, prefix_max = stack.pop()
        if value > t:
            continue
        if level == n:
            if value >= prefix_max:
                return True
            continue
        running = max(prefix_max, value)
        a, b = rng.random(2)
        stack.append((level + 1, max(a, b), running))
        stack.append((level + 1, min(a, b), running))
    return False


def _fn_chunk(n: int, t: float, count: int, rng: np.random.Generator) -> np.ndarray:
    hits = sum(_root_red_lazy(n, t, rng) for _ in range(count))
    return np.array([hits, hits], dtype=float)


class DirectedSampler:
    """Service for the directed leaf-freezing process."""

    @staticmethod
    def sample_directed(n: int, rng: np.random.Generator) -> DirectedSample:
        """I.i.d. uniforms on all 2^(n+1) - 1 sites of T(n).

        Raises:
            ValidationError: If n < 1
        """
        if n < 1:
            raise ValidationError("Directed tree depth must be at least 1", details={"n": n})
        return DirectedSample(depth=n, u=rng.random(2 ** (n + 1) - 1))

    @staticmethod
    def classify(sample: DirectedSample, site: SiteId, t: float) -> Colour:
        """Colour of ``site`` at time t by depth-first search over downward paths.

        The search carries the running maximum of the path and prunes every
        branch at a value above t.
        """
        start = sample.index(site)
        u = sample.u
        if u[start] > t:
            return Colour.WHITE
        if sample.is_leaf(start):
            return Colour.RED

        stack = [(2 * start + 1, u[start]), (2 * start + 2, u[start])]
        while stack:
            k, prefix_max = stack.pop()
            value = u[k]
            if value > t:
                continue
            if sample.is_leaf(k):
                if value >= prefix_max:
                    return Colour.RED
                continue
            running = max(prefix_max, value)
            stack.append((2 * k + 1, running))
            stack.append((2 * k + 2, running))
        return Colour.GREEN

    @staticmethod
    def classify_all(sample: DirectedSample, t: float) -> List[Colour]:
        """Colours of every site in heap order, from one bottom-up pass.

        g(k) is the largest path maximum a search arriving at k can carry
        and still succeed: g(leaf) = U_leaf if U_leaf <= t, and for an
        inner site g(k) = max(g(children)) if U_k <= min(t, that maximum).
        """
        u = sample.u
        size = sample.size
        g = np.full(size, -np.inf)
        for k in range(size - 1, -1, -1):
            if u[k] > t:
                continue
            if sample.is_leaf(k):
                g[k] = u[k]
                continue
            best = max(g[2 * k + 1], g[2 * k + 2])
            if u[k] <= best:
                g[k] = best
        return [
            Colour.WHITE if u[k] > t else (Colour.RED if g[k] > -np.inf else Colour.GREEN)
            for k in range(size)
        ]

    @staticmethod
    def estimate_Fn(
        n: int,
        t: float,
        replicas: int,
        seed: int,
        runner: Optional[ReplicaRunner] = None,
    ) -> EstimateReport:
        """Monte Carlo estimate of F_n(t) = P(root of T(n) is red at t).

        Deterministic given seed and chunk size.
        """
        if n < 1:
            raise ValidationError("Directed tree depth must be at least 1", details={"n": n})
        runner = runner or ReplicaRunner()
        total, total_sq = runner.run(partial(_fn_chunk, n, t), replicas, seed)

        report = EstimateReport.from_sums(
            "directed_fn",
            total,
            total_sq,
            replicas,
            parameters=EstimateParameters(t=t, depth=n),
            kind=ReportKind.REPORT,
            seed=seed,
        )
        logger.info("F_n estimated", depth=n, t=t, mean=report.mean, stderr=report.stderr)
        return report
