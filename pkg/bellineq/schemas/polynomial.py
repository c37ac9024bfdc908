from fractions import Fraction
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

from bellineq.enums import Site
from bellineq.repository.polynomial import (
    BellPolynomial,
    ProbabilityForm,
    as_fraction,
    format_fraction,
)


def _rational(value) -> str:
    # accepts "3/2", "-4" or 2; always emits "n/d"
    return format_fraction(as_fraction(value))


class Term(BaseModel):
    A: int = Field(0, ge=0, le=2)
    B: int = Field(0, ge=0, le=2)
    C: int = Field(0, ge=0, le=2)
    coeff: str

    @field_validator("coeff", mode="before")
    @classmethod
    def _coeff(cls, value):
        return _rational(value)


class PolynomialIO(BaseModel):
    arity: Literal[2, 3]
    terms: List[Term] = []
    bound: Optional[str] = None
    name: Optional[str] = None
    run_id: Optional[str] = None

    @field_validator("bound", mode="before")
    @classmethod
    def _bound(cls, value):
        return None if value is None else _rational(value)

    def to_polynomial(self) -> BellPolynomial:
        coefficients: Dict = {}
        for term in self.terms:
            key = (term.A, term.B, term.C)
            coefficients[key] = coefficients.get(key, Fraction(0)) + Fraction(term.coeff)
        return BellPolynomial.build(coefficients, self.arity, self.bound)

    @classmethod
    def from_polynomial(cls, p: BellPolynomial, name: Optional[str] = None, run_id: Optional[str] = None) -> "PolynomialIO":
        return cls(
            arity=p.arity,
            terms=[Term(A=m.A, B=m.B, C=m.C, coeff=c) for m, c in p.terms],
            bound=None if p.bound is None else p.bound,
            name=name,
            run_id=run_id,
        )


class ProbabilityFormIO(BaseModel):
    arity: Literal[2, 3] = 3
    terms: List[Term] = []
    K: str = "0/1"
    name: Optional[str] = None
    run_id: Optional[str] = None

    @field_validator("K", mode="before")
    @classmethod
    def _k(cls, value):
        return _rational(value)

    def to_form(self) -> ProbabilityForm:
        coefficients: Dict = {}
        for term in self.terms:
            key = (term.A, term.B, term.C)
            coefficients[key] = coefficients.get(key, Fraction(0)) + Fraction(term.coeff)
        return ProbabilityForm.build(coefficients, self.arity, self.K)

    @classmethod
    def from_form(cls, q: ProbabilityForm, name: Optional[str] = None, run_id: Optional[str] = None) -> "ProbabilityFormIO":
        return cls(
            arity=q.arity,
            terms=[Term(A=m.A, B=m.B, C=m.C, coeff=c) for m, c in q.terms],
            K=q.bound,
            name=name,
            run_id=run_id,
        )


class FamilyRequest(BaseModel):
    u: str = "0"
    r: str = "0"
    s: str = "0"
    t: str = "0"
    force: bool = False

    @field_validator("u", "r", "s", "t", mode="before")
    @classmethod
    def _param(cls, value):
        return _rational(value)


class PermuteRequest(BaseModel):
    polynomial: PolynomialIO
    mapping: Dict[Site, Site]


class CatalogEntry(ProbabilityFormIO):
    name: str
