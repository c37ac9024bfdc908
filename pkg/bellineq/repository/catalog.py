import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Tuple

from pydantic import ValidationError

from bellineq.enums import Preset, Site
from bellineq.exceptions import InvalidArgument
from bellineq.repository.lhv import certify
from bellineq.repository.polynomial import (
    BellPolynomial,
    FamilyParams,
    ProbabilityForm,
    chen_alternative,
    compare_terms,
    parse_polynomial,
    permute_sites,
    three_qubit_family,
    to_probability_form,
)
from bellineq.schemas.polynomial import CatalogEntry

logger = logging.getLogger(__name__)

# generated site labels -> labels of the published probability form
PI5_RELABEL = {Site.A: Site.B, Site.B: Site.C, Site.C: Site.A}

PI5_PARAMS = FamilyParams(u=2, r=8, s=4, t=4)

PUBLISHED_PI5_CORRELATOR = (
    "-a1-a2-b1-b2+a1b1-a2b2-a1c2-2a2c1+a2c2-b1c2-2b2c1+b2c2"
    "-a1b1c1-2a1b1c2-3a1b2c1-a1b2c2-3a2b1c1-a2b1c2-a2b2c1+4a2b2c2 <= 8"
)

PUBLISHED_PI5_PROBABILITY = (
    "-P(A1)-2P(B1)-2P(C1)+2P(A1,B1)+2P(A1,C1)+P(A1,B2)+P(A1,C2)+P(A2,B1)"
    "+P(A2,C1)-P(A2,B2)-P(A2,C2)+2P(B1,C1)+2P(B2,C1)+2P(B1,C2)-2P(B2,C2)"
    "-P(A1,B1,C1)-2P(A2,B1,C1)-3P(A1,B2,C1)-3P(A1,B1,C2)-P(A2,B2,C1)"
    "-P(A2,B1,C2)-P(A1,B2,C2)+4P(A2,B2,C2) <= 0"
)

PUBLISHED_CI6 = (
    "-a1b1-a1b2-a2b1-a2b2-a1c1-a1c2-a2c1-a2c2-b1c1-b1c2-b2c1-b2c2"
    "+a1b1c1-a1b2c2-a2b1c2-a2b2c2+2a2b2c2 <= 4"
)


@lru_cache(maxsize=None)
def preset_polynomial(preset: Preset) -> BellPolynomial:
    preset = Preset(preset)
    if preset == Preset.mabk:
        return three_qubit_family(FamilyParams())
    if preset == Preset.pi5:
        return three_qubit_family(PI5_PARAMS).primitive()
    # the construction's declared bound is not the LHV maximum of this form
    return certify(chen_alternative())


@lru_cache(maxsize=None)
def preset_probability_form(preset: Preset) -> ProbabilityForm:
    preset = Preset(preset)
    poly = preset_polynomial(preset)
    if preset == Preset.pi5:
        poly = permute_sites(poly, PI5_RELABEL)
    return to_probability_form(poly).primitive()


def printed_alternative_mismatch() -> Dict[str, Tuple]:
    return compare_terms(chen_alternative(), parse_polynomial(PUBLISHED_CI6))


def load_catalog(path) -> Dict[str, ProbabilityForm]:
    # a JSON object or list of objects in the probability-form schema, each with a name
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArgument(f"cannot read catalog {path}: {exc}") from exc
    entries: List = raw if isinstance(raw, list) else [raw]
    forms: Dict[str, ProbabilityForm] = {}
    for item in entries:
        try:
            entry = CatalogEntry.model_validate(item)
        except ValidationError as exc:
            raise InvalidArgument(f"bad catalog entry in {path}: {exc}") from exc
        if entry.name in forms:
            raise InvalidArgument(f"duplicate catalog entry {entry.name!r}")
        forms[entry.name] = entry.to_form()
    logger.info("loaded %d inequalities from %s", len(forms), path)
    return forms


def resolve_inequality(source: str) -> Tuple[str, ProbabilityForm]:
    # ``pi5``, ``ci6``, ``mabk`` or ``catalog:<path>[#name]``
    if source.startswith("catalog:"):
        location, _, wanted = source[len("catalog:"):].partition("#")
        forms = load_catalog(location)
        if wanted:
            if wanted not in forms:
                raise InvalidArgument(f"catalog has no entry {wanted!r}")
            return wanted, forms[wanted]
        if len(forms) != 1:
            raise InvalidArgument("catalog holds several entries; select one with #name")
        return next(iter(forms.items()))
    try:
        preset = Preset(source)
    except ValueError as exc:
        raise InvalidArgument(f"unknown inequality {source!r}") from exc
    return preset.value, preset_probability_form(preset)
