"""Growth schedules: per-step out-degree targets, epochs, and attribute mixes.

A schedule answers three questions for every growth step ``t``: which epoch
the arriving node belongs to, how many edges it should aim to form (a
mean-field value, realized by stochastic rounding), and how its attribute is
distributed. Schedules are either synthetic (constant or densifying) or
derived from an observed graph so that fitted models grow under the same
exogenous conditions.
"""

from __future__ import annotations

import json
from bisect import bisect_right

from .graph import TemporalAttributedDigraph

__all__ = [
    "GrowthSchedule",
    "mean_outdegree_by_epoch",
    "attribute_distribution_by_epoch",
    "fill_epoch_gaps",
    "realize_out_degree",
]


def realize_out_degree(m: float, rng) -> int:
    """Stochastic rounding: floor(m) + Bernoulli(frac(m)); unbiased for m."""
    if m < 0:
        raise ValueError(f"out-degree target must be >= 0, got {m}")
    base = int(m)
    frac = m - base
    if frac > 0.0 and rng.random() < frac:
        base += 1
    return base


def mean_outdegree_by_epoch(graph: TemporalAttributedDigraph) -> dict[int, float]:
    """Mean out-degree of the nodes arriving in each epoch."""
    totals: dict[int, list[float]] = {}
    for node in range(graph.node_count):
        acc = totals.setdefault(graph.epoch(node), [0.0, 0])
        acc[0] += graph.out_degree(node)
        acc[1] += 1
    return {epoch: s / c for epoch, (s, c) in sorted(totals.items())}


def attribute_distribution_by_epoch(
    graph: TemporalAttributedDigraph,
) -> dict[int, dict[str, float]]:
    """Empirical attribute distribution per epoch; missing labels excluded."""
    counts: dict[int, dict[str, int]] = {}
    for node in range(graph.node_count):
        attr = graph.attribute(node)
        if attr is None:
            continue
        by_label = counts.setdefault(graph.epoch(node), {})
        by_label[attr] = by_label.get(attr, 0) + 1
    dists = {}
    for epoch in sorted(counts):
        by_label = counts[epoch]
        total = sum(by_label.values())
        dists[epoch] = {label: c / total for label, c in sorted(by_label.items())}
    return dists


def fill_epoch_gaps(values_by_epoch: dict[int, float], epochs) -> list[float]:
    """Look up per-epoch values, carrying the previous epoch's value forward
    across gaps (an epoch with no arrivals has no mean of its own)."""
    if not values_by_epoch:
        raise ValueError("no epochs with data")
    known = sorted(values_by_epoch)
    out = []
    for epoch in epochs:
        if epoch in values_by_epoch:
            out.append(values_by_epoch[epoch])
            continue
        idx = bisect_right(known, epoch) - 1
        if idx < 0:
            # nothing earlier to carry forward; use the first known value
            idx = 0
        out.append(values_by_epoch[known[idx]])
    return out


class GrowthSchedule:
    """Immutable per-step growth plan.

    ``m_per_step[t]`` is the mean-field out-degree target of the node arriving
    at step ``t`` (0-based) and ``epoch_per_step[t]`` its epoch.
    ``attr_dist_by_epoch`` maps an epoch to a label distribution; epochs
    without an entry fall back to the nearest earlier epoch that has one.
    """

    def __init__(
        self,
        m_per_step,
        epoch_per_step,
        attr_dist_by_epoch: dict[int, dict[str, float]] | None = None,
    ):
        self._m = [float(m) for m in m_per_step]
        self._epochs = [int(e) for e in epoch_per_step]
        if len(self._m) != len(self._epochs):
            raise ValueError("m_per_step and epoch_per_step lengths differ")
        for m in self._m:
            if m < 0:
                raise ValueError(f"out-degree target must be >= 0, got {m}")
        self._attr_dists: dict[int, list[tuple[str, float]]] | None = None
        if attr_dist_by_epoch is not None:
            self._attr_dists = {}
            for epoch, dist in attr_dist_by_epoch.items():
                total = sum(dist.values())
                if abs(total - 1.0) > 1e-9:
                    raise ValueError(
                        f"attribute distribution for epoch {epoch} sums to {total}"
                    )
                # cumulative form for O(#labels) sampling
                items = sorted(dist.items())
                cum = []
                acc = 0.0
                for label, p in items:
                    if p < 0:
                        raise ValueError(f"negative probability for {label!r}")
                    acc += p
                    cum.append((label, acc))
                self._attr_dists[int(epoch)] = cum
            self._dist_epochs = sorted(self._attr_dists)

    # -- step queries --------------------------------------------------------

    @property
    def steps(self) -> int:
        return len(self._m)

    def m(self, t: int) -> float:
        return self._m[t]

    def epoch(self, t: int) -> int:
        return self._epochs[t]

    @property
    def mean_out_degree(self) -> float:
        return sum(self._m) / len(self._m) if self._m else 0.0

    @property
    def attributed(self) -> bool:
        return self._attr_dists is not None

    def attribute_distribution(self, epoch: int) -> dict[str, float] | None:
        cum = self._cum_for_epoch(epoch)
        if cum is None:
            return None
        dist = {}
        prev = 0.0
        for label, acc in cum:
            dist[label] = acc - prev
            prev = acc
        return dist

    def _cum_for_epoch(self, epoch: int):
        if self._attr_dists is None:
            return None
        cum = self._attr_dists.get(epoch)
        if cum is not None:
            return cum
        idx = bisect_right(self._dist_epochs, epoch) - 1
        if idx < 0:
            idx = 0
        return self._attr_dists[self._dist_epochs[idx]]

    def sample_attribute(self, epoch: int, rng) -> str | None:
        cum = self._cum_for_epoch(epoch)
        if cum is None:
            return None
        r = rng.random() * cum[-1][1]
        for label, acc in cum:
            if r < acc:
                return label
        return cum[-1][0]

    # -- constructors ----------------------------------------------------------

    @classmethod
    def constant(
        cls,
        steps: int,
        m: float,
        epoch: int = 0,
        attr_dist: dict[str, float] | None = None,
    ) -> "GrowthSchedule":
        dists = {epoch: attr_dist} if attr_dist is not None else None
        return cls([m] * steps, [epoch] * steps, dists)

    @classmethod
    def from_observed(
        cls, observed: TemporalAttributedDigraph, initial_size: int
    ) -> "GrowthSchedule":
        """Schedule that replays an observed graph's growth from node
        ``initial_size`` onward: epoch sequence from the node table, per-epoch
        mean out-degree, and per-epoch attribute distribution."""
        if not 0 < initial_size <= observed.node_count:
            raise ValueError(
                f"initial_size must be in 1..{observed.node_count}, "
                f"got {initial_size}"
            )
        by_epoch = mean_outdegree_by_epoch(observed)
        epochs = [observed.epoch(v) for v in range(initial_size, observed.node_count)]
        m_per_step = fill_epoch_gaps(by_epoch, epochs)
        dists = attribute_distribution_by_epoch(observed) or None
        return cls(m_per_step, epochs, dists)

    @classmethod
    def densifying(
        cls,
        steps: int,
        alpha: float,
        base_m: float,
        initial_size: int,
        epoch: int = 0,
        attr_dist: dict[str, float] | None = None,
    ) -> "GrowthSchedule":
        """Out-degree growing as ``m(t) = c * n(t)**(alpha - 1)`` where n(t)
        is the node count just before the t-th arrival; c is set so the first
        step's target equals ``base_m``. alpha == 1 gives a constant target;
        alpha is the edges-vs-nodes power-law slope the run will induce."""
        if alpha < 1.0:
            raise ValueError(f"alpha must be >= 1, got {alpha}")
        if initial_size < 1:
            raise ValueError("initial_size must be >= 1")
        c = base_m / initial_size ** (alpha - 1.0)
        m_per_step = [
            c * (initial_size + t) ** (alpha - 1.0) for t in range(steps)
        ]
        dists = {epoch: attr_dist} if attr_dist is not None else None
        return cls(m_per_step, [epoch] * steps, dists)

    # -- serialization -----------------------------------------------------------

    def to_json(self) -> str:
        payload = {
            "m_per_step": self._m,
            "epoch_per_step": self._epochs,
            "attr_dist_by_epoch": None,
        }
        if self._attr_dists is not None:
            payload["attr_dist_by_epoch"] = {
                str(epoch): self.attribute_distribution(epoch)
                for epoch in self._dist_epochs
            }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GrowthSchedule":
        payload = json.loads(text)
        dists = payload.get("attr_dist_by_epoch")
        if dists is not None:
            dists = {int(epoch): dist for epoch, dist in dists.items()}
        return cls(payload["m_per_step"], payload["epoch_per_step"], dists)
