"""Exact character algebra in the variables tau_i = e^{-alpha_i}.

Exponent vectors are rational coordinates on the simple roots, closed over
(1/D)Z with D = det of the Cartan matrix.  Evaluation of fractional
exponents is exact when the tau point carries rational D-th roots.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .cartan import CartanDatum, Weight, WeylGroup, act, positive_roots
from .crystal import CrystalCache, CrystalGraph, ModuleSpec, count_f_multiplicity
from .errors import DomainError, ExactEvaluationError


@dataclass(frozen=True)
class TauPoint:
    """Positive rational tau with optional exact D-th roots u_i (u_i^D = tau_i).

    Roots may be supplied per coordinate (None where no rational root exists
    or none is needed); fractional exponents touching a root-less coordinate
    fail loudly at evaluation time.
    """

    values: Tuple[Fraction, ...]
    d: int
    roots: Optional[Tuple[Optional[Fraction], ...]] = None

    def __post_init__(self):
        if any(v <= 0 for v in self.values):
            raise DomainError("tau coordinates must be positive")
        if self.roots is not None:
            if len(self.roots) != len(self.values):
                raise DomainError("need one root slot per tau coordinate")
            for u, v in zip(self.roots, self.values):
                if u is not None and (u <= 0 or u**self.d != v):
                    raise DomainError(f"root {u} is not an exact {self.d}-th root of {v}")

    @property
    def rank(self) -> int:
        return len(self.values)

    def in_convergence_region(self) -> bool:
        """Finite type: the open unit cube."""
        return all(0 < v < 1 for v in self.values)

    def require_in_region(self) -> None:
        if not self.in_convergence_region():
            raise DomainError(f"tau {tuple(map(str, self.values))} is outside ]0,1[^n")

    def power(self, exponent: Sequence[Fraction]) -> Fraction:
        """Exact tau^e for a rational exponent vector in root coordinates."""
        out = Fraction(1)
        for taui, ui, e in zip(self.values, self.roots or (None,) * self.rank, exponent):
            e = Fraction(e)
            if e.denominator == 1:
                out *= taui ** int(e)
            else:
                scaled = e * self.d
                if scaled.denominator != 1:
                    raise ExactEvaluationError(
                        f"exponent {e} is not a multiple of 1/{self.d}"
                    )
                if ui is None:
                    raise ExactEvaluationError(
                        f"fractional exponent {e} needs {self.d}-th roots of tau"
                    )
                out *= ui ** int(scaled)
        return out


def tau_point(datum: CartanDatum, values: Sequence, roots: Optional[Sequence] = None) -> TauPoint:
    vals = tuple(Fraction(v) for v in values)
    rts = None
    if roots is not None:
        rts = tuple(None if r is None else Fraction(r) for r in roots)
    return TauPoint(vals, datum.det, rts)


def tau_point_from_roots(datum: CartanDatum, roots: Sequence) -> TauPoint:
    rts = tuple(Fraction(r) for r in roots)
    vals = tuple(r**datum.det for r in rts)
    return TauPoint(vals, datum.det, rts)


class ExponentPolynomial:
    """Sparse Laurent polynomial with rational exponents and coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Tuple[Fraction, ...], Fraction]] = None):
        self.terms: Dict[Tuple[Fraction, ...], Fraction] = {}
        if terms:
            for e, c in terms.items():
                c = Fraction(c)
                if c != 0:
                    self.terms[tuple(Fraction(x) for x in e)] = c

    @staticmethod
    def zero() -> "ExponentPolynomial":
        return ExponentPolynomial()

    @staticmethod
    def one(rank: int) -> "ExponentPolynomial":
        return ExponentPolynomial({(Fraction(0),) * rank: Fraction(1)})

    @staticmethod
    def monomial(exponent: Sequence, coeff=1) -> "ExponentPolynomial":
        return ExponentPolynomial({tuple(Fraction(x) for x in exponent): Fraction(coeff)})

    def copy(self) -> "ExponentPolynomial":
        return ExponentPolynomial(dict(self.terms))

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, ExponentPolynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "ExponentPolynomial") -> "ExponentPolynomial":
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, Fraction(0)) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        return ExponentPolynomial(out)

    def __neg__(self) -> "ExponentPolynomial":
        return ExponentPolynomial({e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "ExponentPolynomial") -> "ExponentPolynomial":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return ExponentPolynomial()
            return ExponentPolynomial({e: c * other for e, c in self.terms.items()})
        out: Dict[Tuple[Fraction, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, Fraction(0)) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return ExponentPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "ExponentPolynomial":
        if k < 0:
            raise ValueError("negative powers are not defined for polynomials")
        rank = len(next(iter(self.terms))) if self.terms else 0
        out = ExponentPolynomial.one(rank)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def evaluate(self, tau: TauPoint) -> Fraction:
        return sum((c * tau.power(e) for e, c in self.terms.items()), Fraction(0))

    def sorted_terms(self) -> List[Tuple[Tuple[Fraction, ...], Fraction]]:
        return sorted(self.terms.items())

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                f"t{k + 1}^{x}" for k, x in enumerate(e) if x != 0
            )
            bits.append(f"{c}" if not mono else f"{c}*{mono}")
        return " + ".join(bits)


class CharacterAlgebra:
    """Characters, the stay-in-cone harmonic function and its relatives.

    Caches one crystal per dominant weight (straight highest path), the
    positive roots and the Weyl group of a fixed finite-type datum.
    """

    def __init__(self, datum: CartanDatum, group: Optional[WeylGroup] = None,
                 cache: Optional[CrystalCache] = None):
        self.datum = datum
        self.cache = cache if cache is not None else CrystalCache(datum)
        self._group = group
        self._posroots = None

    @property
    def group(self) -> WeylGroup:
        if self._group is None:
            from .cartan import weyl_group

            self._group = weyl_group(self.datum)
        return self._group

    @property
    def posroots(self) -> List[Weight]:
        if self._posroots is None:
            self._posroots = positive_roots(self.datum)
        return self._posroots

    # -- characters -------------------------------------------------------------

    def character_poly(self, source) -> ExponentPolynomial:
        """S_kappa as a polynomial: sum over nodes of tau^{kappa - wt}."""
        crystal = source if isinstance(source, CrystalGraph) else self.cache.get(source)
        out: Dict[Tuple[Fraction, ...], Fraction] = {}
        for w in crystal.weights:
            diff = crystal.kappa - w
            e = diff.root
            out[e] = out.get(e, Fraction(0)) + 1
        return ExponentPolynomial(out)

    def character_value(self, kappa: Weight, tau: TauPoint) -> Fraction:
        return self.character_poly(kappa).evaluate(tau)

    def weyl_numerator(self, mu: Weight) -> ExponentPolynomial:
        """Alternating orbit sum rebased at mu: sum_w sign(w) tau^{mu+rho-w(mu+rho)}."""
        rho = self.datum.rho
        shifted = mu + rho
        out: Dict[Tuple[Fraction, ...], Fraction] = {}
        for w in self.group:
            img = act(self.datum, w, shifted)
            e = (shifted - img).root
            out[e] = out.get(e, Fraction(0)) + w.sign
        return ExponentPolynomial(out)

    def denominator_poly(self) -> ExponentPolynomial:
        """prod over positive roots of (1 - tau^alpha); finite type, all m_alpha = 1."""
        rank = self.datum.rank
        out = ExponentPolynomial.one(rank)
        for alpha in self.posroots:
            out = out * (ExponentPolynomial.one(rank) - ExponentPolynomial.monomial(alpha.root))
        return out

    # -- psi ---------------------------------------------------------------------

    def psi_poly(self, mu: Weight) -> ExponentPolynomial:
        return self.denominator_poly() * self.character_poly(mu)

    def psi(self, mu: Weight, tau: TauPoint) -> Fraction:
        """Probability of never leaving the cone, as the closed product form."""
        tau.require_in_region()
        out = self.character_value(mu, tau)
        for alpha in self.posroots:
            out *= 1 - tau.power(alpha.root)
        return out

    def sigma_m(self, modspec: ModuleSpec, tau: TauPoint) -> Fraction:
        """Normalizer of a direct sum: sum of a_kappa tau^{-kappa} S_kappa(tau)."""
        tau.require_in_region()
        out = Fraction(0)
        for kappa, mult in modspec.summands:
            neg = tuple(-c for c in kappa.root)
            out += mult * tau.power(neg) * self.character_value(kappa, tau)
        return out

    def sigma_m_poly(self, modspec: ModuleSpec) -> ExponentPolynomial:
        out = ExponentPolynomial.zero()
        for kappa, mult in modspec.summands:
            neg = tuple(-c for c in kappa.root)
            out = out + ExponentPolynomial.monomial(neg, mult) * self.character_poly(kappa)
        return out

    # -- finite-horizon quantities -------------------------------------------------

    def module_crystals(self, source) -> List[Tuple[CrystalGraph, int]]:
        if isinstance(source, ModuleSpec):
            return [(self.cache.get(kappa), mult) for kappa, mult in source.summands]
        kappa = source if isinstance(source, Weight) else source.kappa
        return [(self.cache.get(kappa), 1)]

    def normalizer(self, source, tau: TauPoint) -> Fraction:
        """S_kappa(tau) for an irreducible source, Sigma_M(tau) for a sum."""
        if isinstance(source, ModuleSpec):
            return self.sigma_m(source, tau)
        kappa = source if isinstance(source, Weight) else source.kappa
        return self.character_value(kappa, tau)

    def psi_ell(self, mu: Weight, source, tau: TauPoint, ell: int) -> Fraction:
        """Finite-horizon stay probability via the branching counts."""
        tau.require_in_region()
        if ell == 0:
            return Fraction(1)
        crystals = self.module_crystals(source)
        counts = count_f_multiplicity(self.datum, mu, crystals, ell)
        norm = self.normalizer(source, tau) ** ell
        out = Fraction(0)
        for lam, f in counts.items():
            exponent = self._mu_lam_exponent(source, mu, lam, ell)
            out += f * tau.power(exponent)
        return out / norm

    def _mu_lam_exponent(self, source, mu: Weight, lam: Weight, ell: int) -> Tuple[Fraction, ...]:
        if isinstance(source, ModuleSpec):
            return (mu - lam).root
        kappa = source if isinstance(source, Weight) else source.kappa
        scaled = tuple(ell * c for c in kappa.root)
        diff = (mu - lam).root
        return tuple(a + b for a, b in zip(scaled, diff))

    def psi_ell_twisted(self, mu: Weight, source, tau: TauPoint, ell: int,
                        w) -> Fraction:
        """Finite-horizon stay probability of the w-twisted walk.

        Uses tau^{ell*kappa + w(mu) - w(lambda)} over the untwisted normalizer;
        only finite horizons are exposed since the limit vanishes off the
        identity.
        """
        tau.require_in_region()
        if ell == 0:
            return Fraction(1)
        crystals = self.module_crystals(source)
        counts = count_f_multiplicity(self.datum, mu, crystals, ell)
        norm = self.normalizer(source, tau) ** ell
        w_mu = act(self.datum, w, mu)
        out = Fraction(0)
        for lam, f in counts.items():
            w_lam = act(self.datum, w, lam)
            if isinstance(source, ModuleSpec):
                exponent = (w_mu - w_lam).root
            else:
                kappa = source if isinstance(source, Weight) else source.kappa
                scaled = tuple(ell * c for c in kappa.root)
                diff = (w_mu - w_lam).root
                exponent = tuple(a + b for a, b in zip(scaled, diff))
            out += f * tau.power(exponent)
        return out / norm

    def pi_ell_w(self, mu: Weight, source, tau: TauPoint, ell: int, w) -> Fraction:
        """One twisted term of the finite-horizon expansion of psi's product form."""
        rho = self.datum.rho
        shift = (mu + rho) - act(self.datum, w, mu + rho)
        return tau.power(shift.root) * self.psi_ell_twisted(mu, source, tau, ell, w)

    def master_identity_sides(self, mu: Weight, source, tau: TauPoint, ell: int):
        """Exact two sides of the finite-horizon alternating identity.

        Left: the closed product form of psi(mu).  Right: the signed sum of
        the twisted finite-horizon terms.
        """
        left = self.psi(mu, tau)
        right = Fraction(0)
        for w in self.group:
            right += w.sign * self.pi_ell_w(mu, source, tau, ell, w)
        return left, right

    def character_product_identity(self, mu: Weight, source, ell: int) -> bool:
        """s_mu * s_kappa^ell = sum_lam f^ell_lam s_lam, checked on S-polynomials.

        Rebasing by tau^{ell*kappa + mu - lam} keeps every exponent in the
        +root cone, matching the S-normalization of each character.
        """
        crystals = self.module_crystals(source)
        counts = count_f_multiplicity(self.datum, mu, crystals, ell)
        left = self.character_poly(mu)
        if isinstance(source, ModuleSpec):
            base = self.sigma_m_poly(source)
            left = left * (base ** ell)
            left = left * ExponentPolynomial.monomial(tuple(-c for c in mu.root))
            right = ExponentPolynomial.zero()
            for lam, f in counts.items():
                right = right + f * ExponentPolynomial.monomial(
                    tuple(-c for c in lam.root)
                ) * self.character_poly(lam)
            return left == right
        kappa = source if isinstance(source, Weight) else source.kappa
        skappa = self.character_poly(kappa)
        left = left * (skappa ** ell)
        right = ExponentPolynomial.zero()
        for lam, f in counts.items():
            shift = self._mu_lam_exponent(source, mu, lam, ell)
            right = right + f * ExponentPolynomial.monomial(shift) * self.character_poly(lam)
        return left == right
