# one selector per site: 0 identity, 1 or 2 observable index
import itertools
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, replace
from fractions import Fraction
from math import gcd, lcm
from tokenize import TokenError
from typing import Dict, Iterable, Mapping, NamedTuple, Optional, Tuple, Union

import sympy
from sympy import PolynomialError, SympifyError
from sympy.parsing.sympy_parser import (
    implicit_multiplication,
    parse_expr,
    rationalize,
    standard_transformations,
)

from bellineq.enums import SITES, Sign, Site
from bellineq.exceptions import InvalidArgument

logger = logging.getLogger(__name__)

Number = Union[int, Fraction, str]


class SitedMonomial(NamedTuple):
    A: int = 0
    B: int = 0
    C: int = 0

    def selector(self, site: Site) -> int:
        return self[SITES.index(site)]

    def sites(self) -> Tuple[Site, ...]:
        return tuple(site for site, sel in zip(SITES, self) if sel)

    def degree(self) -> int:
        return sum(1 for sel in self if sel)

    def label(self) -> str:
        if not self.degree():
            return "1"
        return "".join(f"{site.value.lower()}{sel}" for site, sel in zip(SITES, self) if sel)

    def event_label(self) -> str:
        return "P(" + ",".join(f"{site.value}{sel}" for site, sel in zip(SITES, self) if sel) + ")"


CONSTANT = SitedMonomial()


def as_fraction(value: Number) -> Fraction:
    if isinstance(value, bool):
        raise InvalidArgument("booleans are not coefficients")
    if isinstance(value, float):
        return Fraction(repr(float(value)))
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidArgument(f"not a rational number: {value!r}") from exc


def format_fraction(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _canonical_terms(
    coefficients: Mapping[Tuple[int, int, int], Number],
    arity: int,
    allow_constant: bool = True,
) -> Tuple[Tuple[SitedMonomial, Fraction], ...]:
    if arity not in (2, 3):
        raise InvalidArgument(f"arity must be 2 or 3, got {arity}")
    cleaned: Dict[SitedMonomial, Fraction] = {}
    for key, coeff in coefficients.items():
        mono = SitedMonomial(*key)
        if any(sel not in (0, 1, 2) for sel in mono):
            raise InvalidArgument(f"selectors must be 0, 1 or 2: {tuple(mono)}")
        if arity == 2 and mono.C:
            raise InvalidArgument("two-site polynomial references site C")
        if not allow_constant and mono == CONSTANT:
            raise InvalidArgument("probability terms need at least one site")
        value = as_fraction(coeff)
        if value:
            cleaned[mono] = value
    return tuple(sorted(cleaned.items()))


def _primitive_factor(coefficients: Iterable[Fraction]) -> Fraction:
    values = [c for c in coefficients if c]
    if not values:
        return Fraction(1)
    den = lcm(*(c.denominator for c in values))
    num = gcd(*(c.numerator * (den // c.denominator) for c in values))
    return Fraction(den, num)


def _multiply_monomials(left: SitedMonomial, right: SitedMonomial) -> SitedMonomial:
    merged = []
    for site, a, b in zip(SITES, left, right):
        if a and b:
            raise InvalidArgument(f"product repeats site {site.value}, result is not multilinear")
        merged.append(a or b)
    return SitedMonomial(*merged)


@dataclass(frozen=True)
class BellPolynomial:
    terms: Tuple[Tuple[SitedMonomial, Fraction], ...] = ()
    arity: int = 2
    bound: Optional[Fraction] = None

    @classmethod
    def build(
        cls,
        coefficients: Mapping[Tuple[int, int, int], Number],
        arity: int = 2,
        bound: Optional[Number] = None,
    ) -> "BellPolynomial":
        return cls(
            terms=_canonical_terms(coefficients, arity),
            arity=arity,
            bound=None if bound is None else as_fraction(bound),
        )

    # ---------------------------------------------------------------- views
    def as_dict(self) -> Dict[SitedMonomial, Fraction]:
        return dict(self.terms)

    def coefficient(self, mono: Tuple[int, int, int]) -> Fraction:
        return self.as_dict().get(SitedMonomial(*mono), Fraction(0))

    @property
    def constant(self) -> Fraction:
        return self.coefficient(CONSTANT)

    def is_zero(self) -> bool:
        return not self.terms

    def references(self, site: Site) -> bool:
        return any(mono.selector(site) for mono, _ in self.terms)

    def variables(self) -> Tuple[Tuple[Site, int], ...]:
        found = {(site, mono.selector(site)) for mono, _ in self.terms for site in mono.sites()}
        return tuple(sorted(found, key=lambda item: (SITES.index(item[0]), item[1])))

    def variable_labels(self) -> Tuple[str, ...]:
        return tuple(f"{site.value.lower()}{obs}" for site, obs in self.variables())

    def with_bound(self, bound: Optional[Number]) -> "BellPolynomial":
        return replace(self, bound=None if bound is None else as_fraction(bound))

    def evaluate(self, assignment: Mapping[str, Union[Number, float]]):
        # exact for Fraction/int assignments, float otherwise
        total = 0
        for mono, coeff in self.terms:
            value = coeff
            for site in mono.sites():
                label = f"{site.value.lower()}{mono.selector(site)}"
                if label not in assignment:
                    raise InvalidArgument(f"assignment misses variable {label}")
                value = value * assignment[label]
            total = total + value
        return total

    # ----------------------------------------------------------- arithmetic
    def __add__(self, other):
        if isinstance(other, BellPolynomial):
            merged = defaultdict(Fraction, self.as_dict())
            for mono, coeff in other.terms:
                merged[mono] += coeff
            bound = None
            if self.bound is not None and other.bound is not None:
                bound = self.bound + other.bound
            return BellPolynomial.build(merged, max(self.arity, other.arity), bound)
        shift = as_fraction(other)
        merged = defaultdict(Fraction, self.as_dict())
        merged[CONSTANT] += shift
        bound = None if self.bound is None else self.bound + shift
        return BellPolynomial.build(merged, self.arity, bound)

    __radd__ = __add__

    def __neg__(self) -> "BellPolynomial":
        return self.scale(-1)

    def __sub__(self, other):
        if isinstance(other, BellPolynomial):
            return self + (-other)
        return self + (-as_fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, factor: Number) -> "BellPolynomial":
        k = as_fraction(factor)
        bound = None
        if self.bound is not None and k >= 0:
            bound = self.bound * k
        return BellPolynomial.build({m: c * k for m, c in self.terms}, self.arity, bound)

    def __mul__(self, other):
        if not isinstance(other, BellPolynomial):
            return self.scale(other)
        product: Dict[SitedMonomial, Fraction] = defaultdict(Fraction)
        for (left, a), (right, b) in itertools.product(self.terms, other.terms):
            product[_multiply_monomials(left, right)] += a * b
        return BellPolynomial.build(product, max(self.arity, other.arity))

    def __rmul__(self, other):
        return self.scale(other)

    # -------------------------------------------------------- normal forms
    def normalize(self) -> "BellPolynomial":
        if self.bound is None:
            raise InvalidArgument("normalize needs a declared bound")
        terms = {m: c for m, c in self.terms if m != CONSTANT}
        return BellPolynomial.build(terms, self.arity, self.bound - self.constant)

    def primitive(self) -> "BellPolynomial":
        return self.scale(_primitive_factor(c for _, c in self.terms))

    def __str__(self) -> str:
        text = _format_terms(self.terms) or "0"
        if self.bound is not None:
            text += f" <= {self.bound}"
        return text


@dataclass(frozen=True)
class ProbabilityForm:
    # sum_S c_S P(S) <= K; a non-zero selector puts the site in the event
    terms: Tuple[Tuple[SitedMonomial, Fraction], ...]
    arity: int
    bound: Fraction

    @classmethod
    def build(
        cls,
        coefficients: Mapping[Tuple[int, int, int], Number],
        arity: int,
        bound: Number,
    ) -> "ProbabilityForm":
        return cls(
            terms=_canonical_terms(coefficients, arity, allow_constant=False),
            arity=arity,
            bound=as_fraction(bound),
        )

    def as_dict(self) -> Dict[SitedMonomial, Fraction]:
        return dict(self.terms)

    def coefficient(self, event: Tuple[int, int, int]) -> Fraction:
        return self.as_dict().get(SitedMonomial(*event), Fraction(0))

    def scale(self, factor: Number) -> "ProbabilityForm":
        k = as_fraction(factor)
        if k <= 0:
            raise InvalidArgument("probability forms scale by positive factors only")
        return ProbabilityForm.build({m: c * k for m, c in self.terms}, self.arity, self.bound * k)

    def primitive(self) -> "ProbabilityForm":
        return self.scale(_primitive_factor([c for _, c in self.terms] + [self.bound]))

    def __str__(self) -> str:
        parts = []
        for event, coeff in self.terms:
            sign = "-" if coeff < 0 else "+"
            size = abs(coeff)
            parts.append(f"{sign}{'' if size == 1 else size}{event.event_label()}")
        return "".join(parts).lstrip("+") + f" <= {self.bound}"


def _format_terms(terms) -> str:
    parts = []
    for mono, coeff in terms:
        sign = "-" if coeff < 0 else "+"
        size = abs(coeff)
        if mono == CONSTANT:
            parts.append(f"{sign}{size}")
        else:
            parts.append(f"{sign}{'' if size == 1 else size}{mono.label()}")
    return "".join(parts).lstrip("+")


# ------------------------------------------------------------ constructors
_CHSH_SIGNS = {
    1: (1, -1, -1, -1),
    2: (-1, 1, -1, -1),
    3: (-1, -1, 1, -1),
    4: (-1, -1, -1, 1),
}
_CHSH_MONOMIALS = ((1, 1, 0), (1, 2, 0), (2, 1, 0), (2, 2, 0))

CHSH_BOUND = Fraction(2)


def _check_obs(obs: int) -> int:
    if obs not in (1, 2):
        raise InvalidArgument(f"observable index must be 1 or 2, got {obs}")
    return obs


def variable(site: Site, obs: int) -> BellPolynomial:
    site = Site(site)
    key = [0, 0, 0]
    key[SITES.index(site)] = _check_obs(obs)
    return BellPolynomial.build({tuple(key): 1}, 3 if site == Site.C else 2)


def chsh(k: int) -> BellPolynomial:
    if k not in _CHSH_SIGNS:
        raise InvalidArgument(f"CHSH index must be 1..4, got {k}")
    return BellPolynomial.build(dict(zip(_CHSH_MONOMIALS, _CHSH_SIGNS[k])), 2, CHSH_BOUND)


def projector(site: Site, obs: int, sign: Sign) -> BellPolynomial:
    # (1 + x)/2 or (1 - x)/2 for the observable x = ``site``/``obs``
    half = Fraction(1, 2)
    linear = variable(site, obs).scale(half if Sign(sign) == Sign.plus else -half)
    return linear + half


@dataclass(frozen=True)
class FamilyParams:
    u: Fraction = Fraction(0)
    r: Fraction = Fraction(0)
    s: Fraction = Fraction(0)
    t: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("u", "r", "s", "t"):
            value = as_fraction(getattr(self, name))
            if value < 0:
                raise InvalidArgument(f"family parameter {name} must be >= 0, got {value}")
            object.__setattr__(self, name, value)


def _non_negative(name: str, value: Number) -> Fraction:
    value = as_fraction(value)
    if value < 0:
        raise InvalidArgument(f"{name} must be >= 0, got {value}")
    return value


def e_prime(r: Number) -> BellPolynomial:
    r = _non_negative("r", r)
    subtracted = projector(Site.A, 2, Sign.plus) * projector(Site.B, 2, Sign.plus)
    return (chsh(1) - subtracted.scale(r)).with_bound(CHSH_BOUND)


def e_double_prime(s: Number, t: Number) -> BellPolynomial:
    s = _non_negative("s", s)
    t = _non_negative("t", t)
    first = projector(Site.A, 1, Sign.plus) * projector(Site.B, 2, Sign.plus)
    second = projector(Site.A, 2, Sign.plus) * projector(Site.B, 1, Sign.plus)
    return (chsh(4) - first.scale(s) - second.scale(t)).with_bound(CHSH_BOUND)


def _assemble_over_c(f: BellPolynomial, g: BellPolynomial, h: BellPolynomial) -> BellPolynomial:
    return f * variable(Site.C, 1) + g * variable(Site.C, 2) + h


def three_qubit_family(p: FamilyParams) -> BellPolynomial:
    # bound 2+u; primitive() gives the integer form
    half = Fraction(1, 2)
    quarter_weight = (2 + p.u) / 4
    ep = e_prime(p.r)
    edp = e_double_prime(p.s, p.t)
    e4 = chsh(4)
    f = e4.scale(quarter_weight) + ep.scale(half) + p.u * half
    g = (edp - ep).scale(half)
    h = e4.scale(-quarter_weight) + edp.scale(half) + p.u * half
    return _assemble_over_c(f, g, h).with_bound(2 + p.u)


def alternative_components() -> Tuple[BellPolynomial, BellPolynomial, BellPolynomial]:
    # F, G, H solving F+G+H = R1, -F+G+H = E4, -F-G+H = R3
    r1 = 2 - (projector(Site.A, 1, Sign.plus) * projector(Site.B, 2, Sign.plus)) \
           - (projector(Site.A, 2, Sign.plus) * projector(Site.B, 1, Sign.plus))
    r3 = 2 - (projector(Site.A, 1, Sign.minus) * projector(Site.B, 1, Sign.minus)) \
           - (projector(Site.A, 2, Sign.minus) * projector(Site.B, 2, Sign.minus))
    e4 = chsh(4)
    half = Fraction(1, 2)
    f = (r1 - e4).scale(half)
    h = (r1 + r3).scale(half)
    g = r1 - f - h
    return f.with_bound(None), g.with_bound(None), h.with_bound(None)


def alternative_construction() -> BellPolynomial:
    return _assemble_over_c(*alternative_components()).with_bound(CHSH_BOUND)


def chen_alternative() -> BellPolynomial:
    # the F-G+H face is unconstrained; lhv.verify_declared_bound reports its true maximum
    return alternative_construction().normalize().primitive()


# ------------------------------------------------------------ transforms
def _check_value(value: Number) -> Fraction:
    value = as_fraction(value)
    if value not in (1, -1):
        raise InvalidArgument(f"only +1/-1 substitutions are allowed, got {value}")
    return value


def reduce_each(p: BellPolynomial, site: Site, values: Tuple[Number, Number]) -> BellPolynomial:
    # substitute the two observables of ``site`` by independent +/-1 values
    site = Site(site)
    first, second = (_check_value(v) for v in values)
    if (site == Site.C and p.arity == 2) or not p.references(site):
        raise InvalidArgument(f"polynomial does not reference site {site.value}")
    index = SITES.index(site)
    reduced: Dict[SitedMonomial, Fraction] = defaultdict(Fraction)
    for mono, coeff in p.terms:
        sel = mono[index]
        if sel:
            coeff = coeff * (first if sel == 1 else second)
            mono = SitedMonomial(*(0 if i == index else s for i, s in enumerate(mono)))
        reduced[mono] += coeff
    arity = 2 if site == Site.C else p.arity
    return BellPolynomial.build(reduced, arity, p.bound)


def reduce(p: BellPolynomial, site: Site, value: Number) -> BellPolynomial:
    return reduce_each(p, site, (value, value))


def _check_permutation(perm: Mapping) -> Dict[Site, Site]:
    mapping = {Site(k): Site(v) for k, v in perm.items()}
    if set(mapping) != set(SITES) or set(mapping.values()) != set(SITES):
        raise InvalidArgument("site permutation must be a bijection of A, B, C")
    return mapping


def compose(outer: Mapping, inner: Mapping) -> Dict[Site, Site]:
    # outer after inner
    inner, outer = _check_permutation(inner), _check_permutation(outer)
    return {site: outer[inner[site]] for site in SITES}


def _permute_terms(terms, mapping: Dict[Site, Site]) -> Dict[SitedMonomial, Fraction]:
    moved = {}
    for mono, coeff in terms:
        key = [0, 0, 0]
        for site, sel in zip(SITES, mono):
            key[SITES.index(mapping[site])] = sel
        moved[SitedMonomial(*key)] = coeff
    return moved


def permute_sites(p, perm: Mapping):
    mapping = _check_permutation(perm)
    moved = _permute_terms(p.terms, mapping)
    arity = 3 if p.arity == 3 or any(mono.C for mono in moved) else 2
    return type(p).build(moved, arity, p.bound)


def _subsets(mono: SitedMonomial):
    present = [i for i, sel in enumerate(mono) if sel]
    for size in range(len(present) + 1):
        for chosen in itertools.combinations(present, size):
            yield size, len(present), SitedMonomial(*(mono[i] if i in chosen else 0 for i in range(3)))


def to_probability_form(p: BellPolynomial) -> ProbabilityForm:
    # substitute x = 2P - 1 per site and move the constant into the bound
    if p.bound is None:
        raise InvalidArgument("probability form needs a declared bound")
    collected: Dict[SitedMonomial, Fraction] = defaultdict(Fraction)
    for mono, coeff in p.terms:
        for size, degree, event in _subsets(mono):
            collected[event] += coeff * 2 ** size * (-1) ** (degree - size)
    constant = collected.pop(CONSTANT, Fraction(0))
    return ProbabilityForm.build(collected, p.arity, p.bound - constant)


def from_probability_form(q: ProbabilityForm) -> BellPolynomial:
    # substitute P = (1 + x)/2 per site; the result is constant-free
    collected: Dict[SitedMonomial, Fraction] = defaultdict(Fraction)
    for event, coeff in q.terms:
        weight = coeff / 2 ** event.degree()
        for _, _, mono in _subsets(event):
            collected[mono] += weight
    constant = collected.pop(CONSTANT, Fraction(0))
    return BellPolynomial.build(collected, q.arity, q.bound - constant)


# ------------------------------------------------------------ text form
_GENERATORS = sympy.symbols("a1 a2 b1 b2 c1 c2")
_EVENT_GENERATORS = sympy.symbols("A1 A2 B1 B2 C1 C2")
_TRANSFORMS = standard_transformations + (implicit_multiplication, rationalize)
_VAR_RE = re.compile(r"([abc][12])")
_EVENT_RE = re.compile(r"P\(([^)]*)\)")
_EVENT_NAMES = {str(g) for g in _EVENT_GENERATORS}


def _split_bound(text: str) -> Tuple[str, str]:
    body, _, written = text.replace("≤", "<=").partition("<=")
    return body.strip(), written.strip()


def _expand_terms(body: str, generators, what: str) -> Dict[SitedMonomial, Fraction]:
    # generators come in site order: x1, x2 for A, then B, then C
    if not body:
        raise InvalidArgument(f"empty {what}")
    names = {str(g): g for g in generators}
    try:
        expr = sympy.expand(parse_expr(body, local_dict=names, transformations=_TRANSFORMS))
        unknown = expr.free_symbols - set(generators)
        if unknown:
            raise InvalidArgument(f"unknown variables {sorted(map(str, unknown))} in {what}")
        terms = sympy.Poly(expr, *generators).terms()
    except (SympifyError, PolynomialError, SyntaxError, TokenError, TypeError) as exc:
        raise InvalidArgument(f"cannot parse {what} {body!r}") from exc
    collected: Dict[SitedMonomial, Fraction] = defaultdict(Fraction)
    for exponents, coeff in terms:
        if not coeff.is_Rational:
            raise InvalidArgument(f"coefficient {coeff} in {what} is not rational")
        key = [0, 0, 0]
        for index, power in enumerate(exponents):
            if not power:
                continue
            site = index // 2
            if power > 1 or key[site]:
                raise InvalidArgument(f"{what} {body!r} is not multilinear in site {SITES[site].value}")
            key[site] = index % 2 + 1
        collected[SitedMonomial(*key)] += Fraction(int(coeff.p), int(coeff.q))
    return collected


def parse_polynomial(
    text: str,
    arity: Optional[int] = None,
    bound: Optional[Number] = None,
) -> BellPolynomial:
    # "-a1b1+2a2b2c2-1/2c1 <= 4"; juxtaposition multiplies, so (1+a1)(1-b2)/4 expands
    body, written = _split_bound(text)
    if written and bound is None:
        bound = written
    collected = _expand_terms(_VAR_RE.sub(r" \1 ", body), _GENERATORS, "polynomial")
    if arity is None:
        arity = 3 if any(mono.C for mono in collected) else 2
    return BellPolynomial.build(collected, arity, bound)


def compare_terms(p: BellPolynomial, q: BellPolynomial) -> Dict[str, Tuple[Fraction, Fraction]]:
    left, right = p.as_dict(), q.as_dict()
    return {
        mono.label(): (left.get(mono, Fraction(0)), right.get(mono, Fraction(0)))
        for mono in sorted(set(left) | set(right))
        if left.get(mono, Fraction(0)) != right.get(mono, Fraction(0))
    }


def _event_product(match) -> str:
    names = [name.strip() for name in match.group(1).split(",")]
    sites = [name[:1] for name in names]
    if any(name not in _EVENT_NAMES for name in names) or len(set(sites)) != len(sites):
        raise InvalidArgument(f"bad event {match.group(0)!r}")
    return "(" + "*".join(names) + ")"


def parse_probability_form(text: str, arity: int = 3) -> ProbabilityForm:
    # read ``-P(A1)+2P(A1,B1) <= 0``; the bound defaults to 0
    body, written = _split_bound(text)
    collected = _expand_terms(_EVENT_RE.sub(_event_product, body), _EVENT_GENERATORS, "probability form")
    return ProbabilityForm.build(collected, arity, written or 0)
