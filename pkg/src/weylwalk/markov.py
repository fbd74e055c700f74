"""Probability layer: crystal step distributions, restricted and conditioned
transition kernels, Doob transforms and the path transform to the highest
node.  Everything is exact rational; nothing here samples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple, Union

from .cartan import CartanDatum, Weight, WeylElement, act, act_vector
from .charalg import CharacterAlgebra, TauPoint
from .crystal import (
    CrystalGraph,
    ModuleSpec,
    TensorNode,
    module_multiplicity,
    tensor_apply_e,
    tensor_eps_phi,
)
from .errors import ClosureError, DomainError, HarmonicityError, ResourceBudgetError
from .exact import Vector, add, smul, vec, zero
from . import paths as P

Source = Union[Weight, ModuleSpec]


@dataclass(frozen=True)
class DistEntry:
    crystal: CrystalGraph
    node: int
    summand_mult: int
    probability: Fraction


class CrystalDistribution:
    """Step distribution on the paths of one crystal or a direct sum of them."""

    def __init__(self, algebra: CharacterAlgebra, source: Source, tau: TauPoint):
        tau.require_in_region()
        self.algebra = algebra
        self.datum = algebra.datum
        self.source = source
        self.tau = tau
        self.is_module = isinstance(source, ModuleSpec)
        self.crystals = algebra.module_crystals(source)
        self.normalizer = algebra.normalizer(source, tau)
        entries: List[DistEntry] = []
        for crystal, mult in self.crystals:
            for idx in range(len(crystal)):
                wt = crystal.weights[idx]
                if self.is_module:
                    p = mult * tau.power(tuple(-c for c in wt.root)) / self.normalizer
                else:
                    p = tau.power((crystal.kappa - wt).root) / self.normalizer
                entries.append(DistEntry(crystal, idx, mult, p))
        self.entries: Tuple[DistEntry, ...] = tuple(entries)
        total = sum((e.probability for e in entries), Fraction(0))
        if total != 1:
            raise DomainError(f"probabilities sum to {total}, not 1")
        self._weight_mass: Dict[Tuple[int, ...], Fraction] = {}
        for e in entries:
            fw = e.crystal.weights[e.node].fw
            self._weight_mass[fw] = self._weight_mass.get(fw, Fraction(0)) + e.probability

    def probability_of(self, crystal: CrystalGraph, node: int) -> Fraction:
        for e in self.entries:
            if e.crystal is crystal and e.node == node:
                return e.probability
        raise KeyError("node not in distribution")

    def weight_mass(self, delta: Weight) -> Fraction:
        return self._weight_mass.get(delta.fw, Fraction(0))

    def multiplicity_row(self, mu: Weight) -> Dict[Weight, int]:
        return module_multiplicity(self.datum, mu, self.crystals)

    # -- step kernels ----------------------------------------------------------

    def walk_transition(self, eta: Weight, beta: Weight) -> Fraction:
        """Unrestricted one-step kernel; depends on beta - eta only."""
        return self.weight_mass(beta - eta)

    def restricted_transition(self, mu: Weight, lam: Weight) -> Fraction:
        """Step mu -> lam with the interpolated path held in the cone."""
        row = self.multiplicity_row(mu)
        m = row.get(lam, 0)
        if m == 0:
            return Fraction(0)
        return m * self.tau.power(self._restricted_exponent(mu, lam)) / self.normalizer

    def _restricted_exponent(self, mu: Weight, lam: Weight):
        if self.is_module:
            return (mu - lam).root
        kappa = self.crystals[0][0].kappa
        return (kappa + mu - lam).root

    def brute_force_restricted(self, mu: Weight, lam: Weight) -> Fraction:
        """Oracle for the restricted kernel: direct sum of node probabilities."""
        start = tuple(Fraction(c) for c in mu.fw)
        out = Fraction(0)
        for e in self.entries:
            node = e.crystal.nodes[e.node]
            if (mu + e.crystal.weights[e.node]) == lam and node.stays_in_cone(start):
                out += e.probability
        return out

    # -- drift -------------------------------------------------------------------

    def drift_endpoint(self) -> Vector:
        out = zero(self.datum.rank)
        for e in self.entries:
            out = add(out, smul(e.probability, vec(e.crystal.weights[e.node].fw)))
        return out

    def drift_profile(self) -> List[Tuple[Fraction, Vector]]:
        """Expected path at the union of all node breakpoints."""
        mesh = sorted({t for e in self.entries for t in e.crystal.nodes[e.node].times})
        profile = []
        for t in mesh:
            val = zero(self.datum.rank)
            for e in self.entries:
                val = add(val, smul(e.probability, e.crystal.nodes[e.node].value_at(t)))
            profile.append((t, val))
        return profile

    def twisted_drift_endpoint(self, w_inverse: WeylElement) -> Vector:
        return act_vector(w_inverse, self.drift_endpoint())


def build_distribution(algebra: CharacterAlgebra, source: Source, tau: TauPoint) -> CrystalDistribution:
    return CrystalDistribution(algebra, source, tau)


# -- twisting -------------------------------------------------------------------


def twisted_tau(datum: CartanDatum, w: WeylElement, tau: TauPoint) -> Tuple[Fraction, ...]:
    """Coordinates tau^w with tau_i^w = tau^{w(alpha_i)} (integer exponents)."""
    out = []
    for i in range(datum.rank):
        img_fw = w.apply_fw(datum.matrix[i])
        root = datum.root_coords(img_fw)
        if any(c.denominator != 1 for c in root):
            raise DomainError("twisted exponent left the root lattice")
        val = Fraction(1)
        for taui, c in zip(tau.values, root):
            val *= taui ** int(c)
        out.append(val)
    return tuple(out)


def in_unit_cube(values: Sequence[Fraction]) -> bool:
    return all(0 < v < 1 for v in values)


def twisted_node_probability(dist: CrystalDistribution, w: WeylElement,
                             crystal: CrystalGraph, node: int) -> Fraction:
    """p^w by the twisted normalization (tau^w)^{kappa - wt} / S_kappa(tau^w)."""
    tw = twisted_tau(dist.datum, w, dist.tau)
    wt = crystal.weights[node]
    diff = (crystal.kappa - wt).root
    num = Fraction(1)
    for v, c in zip(tw, diff):
        if c.denominator != 1:
            raise DomainError("twisted exponents must be integral")
        num *= v ** int(c)
    denom = Fraction(0)
    for idx in range(len(crystal)):
        d = (crystal.kappa - crystal.weights[idx]).root
        term = Fraction(1)
        for v, c in zip(tw, d):
            term *= v ** int(c)
        denom += term
    return num / denom


def twisted_distribution_probabilities(dist: CrystalDistribution, w: WeylElement
                                       ) -> List[Tuple[CrystalGraph, int, Fraction]]:
    """Twisted step law via the permutation p^w_b = p_{w(b)} (exact)."""
    out = []
    for e in dist.entries:
        img = e.crystal.weyl_action_on_node(w, e.node)
        out.append((e.crystal, e.node, dist.probability_of(e.crystal, img)))
    return out


def twisted_walk_transition(dist: CrystalDistribution, w: WeylElement,
                            eta: Weight, beta: Weight) -> Fraction:
    """One step of the twisted walk: K_{kappa,beta-eta} tau^{kappa+w(eta)-w(beta)} / S."""
    if dist.is_module:
        raise DomainError("twisted kernel is defined for irreducible sources")
    crystal = dist.crystals[0][0]
    delta = beta - eta
    count = sum(1 for wt in crystal.weights if wt == delta)
    if count == 0:
        return Fraction(0)
    kappa = crystal.kappa
    w_eta = act(dist.datum, w, eta)
    w_beta = act(dist.datum, w, beta)
    exponent = (kappa + w_eta - w_beta).root
    return count * dist.tau.power(exponent) / dist.normalizer


# -- transition tables ------------------------------------------------------------


@dataclass(frozen=True)
class TransitionTable:
    """Exact kernel on a finite list of dominant states.

    The dominant lattice is infinite, so a finite state set is in general not
    closed under one step; ``row_complete[i]`` records whether the full
    support of row i lies inside the state set.  Stochasticity is only
    asserted on complete rows.
    """

    states: Tuple[Weight, ...]
    rows: Tuple[Tuple[Fraction, ...], ...]
    kind: str  # "stochastic" | "substochastic"
    row_complete: Tuple[bool, ...] = ()

    def __post_init__(self):
        if not self.row_complete:
            object.__setattr__(self, "row_complete", (True,) * len(self.states))
        for row, complete in zip(self.rows, self.row_complete):
            total = sum(row, Fraction(0))
            if any(x < 0 for x in row):
                raise DomainError("negative transition probability")
            if self.kind == "stochastic" and complete and total != 1:
                raise DomainError(f"complete row sums to {total}, expected 1")
            if total > 1:
                raise DomainError(f"row sums to {total} > 1")

    def entry(self, mu: Weight, lam: Weight) -> Fraction:
        i = self.states.index(mu)
        j = self.states.index(lam)
        return self.rows[i][j]

    def complete_states(self) -> List[Weight]:
        return [s for s, ok in zip(self.states, self.row_complete) if ok]

    def to_csv(self) -> str:
        head = ["state", "complete"] + ["/".join(map(str, s.fw)) for s in self.states]
        lines = [",".join(head)]
        for s, ok, row in zip(self.states, self.row_complete, self.rows):
            lines.append(
                ",".join(
                    ["/".join(map(str, s.fw)), "1" if ok else "0"]
                    + [str(x) for x in row]
                )
            )
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "states": [list(s.fw) for s in self.states],
                "row_complete": list(self.row_complete),
                "rows": [[str(x) for x in row] for row in self.rows],
                "rows_float": [[float(x) for x in row] for row in self.rows],
            },
            indent=2,
        )


def state_closure(dist: CrystalDistribution, seeds: Sequence[Weight],
                  inside=None, cap: int = 4096) -> List[Weight]:
    """States reachable from the seeds under the restricted kernel.

    ``inside`` bounds the expansion (the reachable set is infinite without
    it); discovered states outside the predicate are dropped, which leaves
    the corresponding boundary rows incomplete in the resulting tables.
    """
    keep = inside if inside is not None else (lambda s: True)
    seeds = [s for s in seeds if keep(s)]
    seen = set(seeds)
    frontier = list(seeds)
    while frontier:
        mu = frontier.pop()
        for lam in dist.multiplicity_row(mu):
            if lam not in seen and keep(lam):
                if len(seen) >= cap:
                    raise ResourceBudgetError(
                        f"state closure exceeds cap {cap}", partial_count=len(seen)
                    )
                seen.add(lam)
                frontier.append(lam)
    return sorted(seen, key=lambda s: s.fw)


def coordinate_box(limit: int):
    """Predicate: every fw coordinate at most ``limit``."""
    return lambda s: all(c <= limit for c in s.fw)


def restricted_table(dist: CrystalDistribution, states: Sequence[Weight],
                     strict: bool = True) -> TransitionTable:
    """Substochastic table of the cone-restricted kernel on the given states."""
    state_set = set(states)
    missing = []
    rows = []
    complete = []
    for mu in states:
        row_counts = dist.multiplicity_row(mu)
        exits = [lam for lam in row_counts if lam not in state_set]
        missing.extend((mu, lam) for lam in exits)
        complete.append(not exits)
        rows.append(tuple(dist.restricted_transition(mu, lam) for lam in states))
    if missing and strict:
        raise ClosureError(
            f"state set not closed under one step ({len(missing)} exits)", missing
        )
    return TransitionTable(tuple(states), tuple(rows), "substochastic", tuple(complete))


@dataclass(frozen=True)
class HarmonicWitness:
    values: Dict[Weight, Fraction]
    table: TransitionTable

    def value(self, s: Weight) -> Fraction:
        return self.values[s]


def check_harmonic(table: TransitionTable, h: Dict[Weight, Fraction]) -> None:
    """Exact balance check of h against every complete row.

    Raises with the worst defect; incomplete boundary rows are skipped since
    part of their mass lies outside the state set.
    """
    worst = None
    worst_defect = Fraction(0)
    for mu, row, complete in zip(table.states, table.rows, table.row_complete):
        if not complete:
            continue
        lhs = sum((p * h[lam] for p, lam in zip(row, table.states)), Fraction(0))
        defect = lhs - h[mu]
        if defect != 0 and abs(defect) >= abs(worst_defect):
            worst, worst_defect = mu, defect
    if worst is not None:
        raise HarmonicityError(
            f"h is not harmonic: worst row {worst.fw} has defect {worst_defect}",
            worst_state=worst,
            defect=worst_defect,
        )


def doob_transform(table: TransitionTable, h: Dict[Weight, Fraction]) -> TransitionTable:
    """h-transform of a substochastic kernel by a positive harmonic function."""
    if any(h[s] <= 0 for s in table.states):
        raise HarmonicityError("h must be positive on all states")
    check_harmonic(table, h)
    rows = []
    for mu, row in zip(table.states, table.rows):
        rows.append(tuple(p * h[lam] / h[mu] for p, lam in zip(row, table.states)))
    return TransitionTable(table.states, tuple(rows), "stochastic", table.row_complete)


def psi_harmonic_witness(dist: CrystalDistribution, table: TransitionTable) -> HarmonicWitness:
    algebra = dist.algebra
    values = {s: algebra.psi(s, dist.tau) for s in table.states}
    return HarmonicWitness(values, table)


def hchain_entry(dist: CrystalDistribution, mu: Weight, lam: Weight) -> Fraction:
    """Transition of the transformed walk, in closed character form."""
    algebra = dist.algebra
    row = dist.multiplicity_row(mu)
    m = row.get(lam, 0)
    if m == 0:
        return Fraction(0)
    s_lam = algebra.character_value(lam, dist.tau)
    s_mu = algebra.character_value(mu, dist.tau)
    shift = dist.tau.power(dist._restricted_exponent(mu, lam))
    return Fraction(m) * s_lam * shift / (s_mu * dist.normalizer)


def hchain_matrix(dist: CrystalDistribution, states: Sequence[Weight],
                  strict: bool = True) -> TransitionTable:
    state_set = set(states)
    missing = []
    rows = []
    complete = []
    for mu in states:
        exits = [lam for lam in dist.multiplicity_row(mu) if lam not in state_set]
        missing.extend((mu, lam) for lam in exits)
        complete.append(not exits)
        rows.append(tuple(hchain_entry(dist, mu, lam) for lam in states))
    if missing and strict:
        raise ClosureError(
            f"state set not closed under one step ({len(missing)} exits)", missing
        )
    return TransitionTable(tuple(states), tuple(rows), "stochastic", tuple(complete))


def conditioned_transition(dist: CrystalDistribution, mu: Weight, lam: Weight) -> Fraction:
    """Kernel of the walk conditioned on never exiting the cone.

    Restricted kernel times the ratio of exit-free probabilities, which is
    exactly the psi-Doob transform entry.
    """
    algebra = dist.algebra
    base = dist.restricted_transition(mu, lam)
    if base == 0:
        return Fraction(0)
    return base * algebra.psi(lam, dist.tau) / algebra.psi(mu, dist.tau)


# -- path transform ----------------------------------------------------------------


def pitman(datum: CartanDatum, obj: Union[TensorNode, P.PiecewisePath]
           ) -> Union[TensorNode, P.PiecewisePath]:
    """Raise to the unique all-raising-null element of the connected component.

    Applies raising operators lowest color first; the result is independent
    of the order because the component has a unique highest node.
    """
    if isinstance(obj, TensorNode):
        cur = obj
        while True:
            for i in range(datum.rank):
                if tensor_eps_phi(cur, i)[0] > 0:
                    nxt = tensor_apply_e(cur, i)
                    assert nxt is not None
                    cur = nxt
                    break
            else:
                return cur
    cur_path = obj
    while True:
        for i in range(datum.rank):
            nxt = P.apply_e(datum, cur_path, i)
            if nxt is not None:
                cur_path = nxt
                break
        else:
            return cur_path


def pitman_prefix_weights(datum: CartanDatum, node: TensorNode) -> List[Weight]:
    """Transformed-walk positions: endpoint of the raised k-prefix, k = 1..len."""
    out = []
    for k in range(1, len(node.factors) + 1):
        raised = pitman(datum, node.prefix(k))
        out.append(raised.weight())
    return out
