from fastapi import APIRouter, Path

from bellineq.enums import Preset
from bellineq.exceptions import InvalidArgument
from bellineq.repository import catalog
from bellineq.repository import polynomial as poly_repo
from bellineq.repository.lhv import check_constraints
from bellineq.schemas.polynomial import FamilyRequest, PermuteRequest, PolynomialIO, ProbabilityFormIO

router = APIRouter(prefix="/polynomials", tags=["Polynomials"])


@router.get("/chsh/{k}", response_model=PolynomialIO)
def get_chsh(k: int = Path(..., ge=1, le=4)):
    return PolynomialIO.from_polynomial(poly_repo.chsh(k), name=f"chsh{k}")


@router.get("/presets/{preset}", response_model=PolynomialIO)
def get_preset(preset: Preset):
    return PolynomialIO.from_polynomial(catalog.preset_polynomial(preset), name=preset.value)


@router.get("/presets/{preset}/probability-form", response_model=ProbabilityFormIO)
def get_preset_probability_form(preset: Preset):
    return ProbabilityFormIO.from_form(catalog.preset_probability_form(preset), name=preset.value)


# unscaled construction, declared bound 2+u; refused when the LHV conditions fail unless forced
@router.post("/construct", response_model=PolynomialIO)
def construct(payload: FamilyRequest):
    params = poly_repo.FamilyParams(u=payload.u, r=payload.r, s=payload.s, t=payload.t)
    report = check_constraints(params)
    if not report.passed and not payload.force:
        raise InvalidArgument("constraints violated: " + ", ".join(report.violated))
    return PolynomialIO.from_polynomial(poly_repo.three_qubit_family(params))


@router.post("/probability-form", response_model=ProbabilityFormIO)
def probability_form(payload: PolynomialIO):
    return ProbabilityFormIO.from_form(poly_repo.to_probability_form(payload.to_polynomial()), name=payload.name)


@router.post("/from-probability-form", response_model=PolynomialIO)
def from_probability_form(payload: ProbabilityFormIO):
    return PolynomialIO.from_polynomial(poly_repo.from_probability_form(payload.to_form()), name=payload.name)


@router.post("/permute", response_model=PolynomialIO)
def permute(payload: PermuteRequest):
    moved = poly_repo.permute_sites(payload.polynomial.to_polynomial(), payload.mapping)
    return PolynomialIO.from_polynomial(moved, name=payload.polynomial.name)
