from __future__ import annotations

import json
import logging
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple

from pydantic import ValidationError

from config import settings
from dto.equation_dto import EquationSpecDocument, QuadrupleDocument
from services.symbolic.parser import ExpressionSyntaxError, ParameterValue, parse
from services.symbolic.rational import to_polynomial
from services.system.equation import EquationFamily, EquationSpec, PolynomialQuadruple, SpecError

logger = logging.getLogger(__name__)

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_RESERVED = {"x", "exp"}


def resolve_spec_path(path: Path) -> Path:
    """A bare name that does not exist locally falls back to the shipped specs/ directory."""
    path = Path(path)
    if path.exists() or path.is_absolute() or path.parent != Path("."):
        return path
    shipped = settings.spec_dir / path.name
    if not shipped.exists() and not path.suffix:
        shipped = shipped.with_suffix(".toml")
    if shipped.exists():
        logger.debug("spec %s resolved to %s", path, shipped)
        return shipped
    return path


def read_document(path: Path) -> EquationSpecDocument:
    """TOML (default) or JSON spec document; any malformation becomes SpecError."""
    path = resolve_spec_path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise SpecError(f"cannot read spec file {path}: {e}") from e
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(raw.decode("utf-8"))
        else:
            data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise SpecError(f"malformed spec file {path}: {e}") from e
    try:
        return EquationSpecDocument.model_validate(data)
    except ValidationError as e:
        raise SpecError(f"invalid spec document {path}: {e}") from e


def parse_quadruple(doc: QuadrupleDocument, parameters: Optional[Mapping[str, ParameterValue]] = None) -> PolynomialQuadruple:
    polys = {}
    for label in ("p", "q1", "q2", "r"):
        text = getattr(doc, label)
        try:
            poly = to_polynomial(parse(text, parameters))
        except ExpressionSyntaxError as e:
            raise SpecError(f"theorem3.{label}: {e}") from e
        if poly is None:
            raise SpecError(f"theorem3.{label} = {text!r} is not a polynomial")
        polys[label] = poly
    return PolynomialQuadruple(**polys)


def parameter_names(doc: EquationSpecDocument) -> Tuple[str, ...]:
    names = set(doc.parameters)
    texts = list(doc.coefficients)
    if doc.theorem3 is not None:
        texts += [doc.theorem3.p, doc.theorem3.q1, doc.theorem3.q2, doc.theorem3.r]
    for text in texts:
        names.update(m.group() for m in _NAME_RE.finditer(text))
    return tuple(sorted(names - _RESERVED))


def family_from_document(doc: EquationSpecDocument) -> EquationFamily:
    if not doc.coefficients:
        raise SpecError("a parameter family needs explicit coefficients")
    return EquationFamily(
        texts=tuple(doc.coefficients),
        parameter_names=parameter_names(doc),
        defaults=dict(doc.parameters),
        name=doc.name,
    )


def spec_from_document(
    doc: EquationSpecDocument,
    overrides: Optional[Mapping[str, ParameterValue]] = None,
) -> EquationSpec:
    params: Dict[str, ParameterValue] = dict(doc.parameters)
    params.update(overrides or {})
    missing = [p for p in parameter_names(doc) if p not in params]
    if missing:
        raise SpecError(f"unbound parameter(s) {missing}; pass --parameter name=value")

    quad = parse_quadruple(doc.theorem3, params) if doc.theorem3 is not None else None
    if doc.coefficients:
        spec = EquationSpec.from_texts(doc.coefficients, parameters=params, name=doc.name, n=doc.n)
        if quad is not None:
            spec = EquationSpec(
                coefficients=spec.coefficients,
                texts=spec.texts,
                name=spec.name,
                parameters=spec.parameters,
                quadruple=quad,
            )
        return spec
    if quad is None:
        raise SpecError("spec document has neither coefficients nor a [theorem3] table")
    return EquationSpec.from_quadruple(quad, name=doc.name)


def load_spec(
    path: Path,
    overrides: Optional[Mapping[str, ParameterValue]] = None,
) -> Tuple[EquationSpec, EquationSpecDocument]:
    doc = read_document(path)
    spec = spec_from_document(doc, overrides)
    logger.info("Loaded %s from %s", spec.describe(), path)
    return spec, doc


def document_from_spec(spec: EquationSpec) -> EquationSpecDocument:
    texts = list(spec.texts) if spec.texts else [str(c) for c in spec.coefficients]
    return EquationSpecDocument(
        name=spec.name,
        n=spec.n,
        coefficients=texts,
        parameters={k: v for k, v in spec.parameters},
    )
