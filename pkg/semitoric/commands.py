"""
Command dispatch for the command line: every command takes loaded documents
and returns a RunResult whose bytes are the canonical report (or an SVG) and
whose status fixes the exit code.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

from semitoric.documents import Document, HomBody, dump, load_document
from semitoric.errors import CertificationFailure, ParseError, RevalidationFailure, SchemaError
from semitoric.fans import (
    FanWithGroups,
    FanWithMonoids,
    Report,
    affine_fan,
    check_hom_groups,
    check_hom_monoids,
    extract_groups,
    functor_F,
    gamma_oracle,
    induce_localizations,
    seminormalize_fan,
    validate_groups,
    validate_monoids,
)
from semitoric.figures import parse_window, plot_svg
from semitoric.monoids import (
    AffineMonoid,
    binomials,
    extract_generators,
    relation_lattice,
    saturation_witness,
    seminormalize,
    semisaturation_witness,
)
from semitoric.settings import EngineSettings

logger = logging.getLogger(__name__)


class Status(str, Enum):
    OK = "ok"
    PREDICATE_FALSE = "predicate_false"
    INVALID_INPUT = "invalid_input"
    PARSE_ERROR = "parse_error"
    CERTIFICATION_FAILURE = "internal_certification_failure"


EXIT_CODES = {
    Status.OK: 0,
    Status.PREDICATE_FALSE: 1,
    Status.INVALID_INPUT: 2,
    Status.PARSE_ERROR: 3,
    Status.CERTIFICATION_FAILURE: 4,
}


@dataclass
class RunResult:
    status: Status
    payload: dict | None = None
    output: bytes | None = None
    report: Report | None = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def render(self) -> bytes:
        if self.output is not None:
            return self.output
        return dump(self.payload).encode("utf-8")


@dataclass(frozen=True)
class CommandOptions:
    cone: str | None = None
    window: str | None = None
    settings: EngineSettings = field(default_factory=EngineSettings)


def _expect(document: Document, command: str, *kinds: str) -> Document:
    if document.kind not in kinds:
        raise SchemaError("/kind", f"'{command}' takes {' or '.join(kinds)} documents, not {document.kind}.")
    return document


def _single(documents: Sequence[Document], command: str) -> Document:
    if len(documents) != 1:
        raise ValueError(f"'{command}' takes exactly one document.")
    return documents[0]


def _report_result(report: Report) -> RunResult:
    status = Status.OK if report.passed else Status.INVALID_INPUT
    return RunResult(status, report.to_dict(), report=report)


def _validate(documents, options) -> RunResult:
    document = _expect(_single(documents, "validate"), "validate", "monoid", "fan_with_groups", "fan_with_monoids")
    body = document.body
    if isinstance(body, FanWithGroups):
        return _report_result(validate_groups(body))
    if isinstance(body, FanWithMonoids):
        return _report_result(validate_monoids(body))
    return _report_result(validate_monoids(affine_fan(body)))


def _functor(documents, options) -> RunResult:
    document = _expect(_single(documents, "functor"), "functor", "fan_with_groups")
    data: FanWithGroups = document.body
    report = validate_groups(data)
    if not report.passed:
        return _report_result(report)
    settings = options.settings
    if options.cone is not None:
        key = document.resolve(options.cone)
        sigma = data.fan.cone(key)
        monoid = extract_generators(gamma_oracle(data, sigma), settings.certification_factor)
        return RunResult(Status.OK, {"cone": key, "generators": monoid.to_list()})
    result = functor_F(data, workers=settings.workers, certification_factor=settings.certification_factor)
    return RunResult(Status.OK, {"monoids": {key: m.to_list() for key, m in result.monoids.items()}})


def _extract_groups(documents, options) -> RunResult:
    document = _expect(_single(documents, "extract-groups"), "extract-groups", "fan_with_monoids")
    report = validate_monoids(document.body)
    if not report.passed:
        return _report_result(report)
    groups = extract_groups(induce_localizations(document.body))
    return RunResult(
        Status.OK,
        {
            "groups": {key: g.to_list() for key, g in groups.groups.items()},
            "valid": validate_groups(groups).passed,
        },
    )


def _seminormalize(documents, options) -> RunResult:
    document = _expect(_single(documents, "seminormalize"), "seminormalize", "monoid", "fan_with_monoids")
    factor = options.settings.certification_factor
    if isinstance(document.body, AffineMonoid):
        _, generators = seminormalize(document.body, factor)
        return RunResult(Status.OK, {"generators": generators.to_list()})
    result, report = seminormalize_fan(document.body, factor)
    return RunResult(Status.OK, {"monoids": {key: m.to_list() for key, m in result.monoids.items()}}, report=report)


def _predicate(field_name: str, witness_of: Callable[[AffineMonoid, CommandOptions], tuple | None]):
    def handler(documents, options) -> RunResult:
        command = "is-normal" if field_name == "saturated" else "is-seminormal"
        document = _expect(_single(documents, command), command, "monoid", "fan_with_monoids")
        body = document.body
        if isinstance(body, AffineMonoid):
            witness = witness_of(body, options)
            payload = {field_name: witness is None}
            if witness is not None:
                payload["witness"] = list(witness)
        else:
            payload = {field_name: True}
            for sigma in body.fan.cones:
                monoid = body.monoid(sigma)
                if monoid is None:
                    continue
                witness = witness_of(monoid, options)
                if witness is not None:
                    payload = {field_name: False, "cone": body.fan.key(sigma), "witness": list(witness)}
                    break
        return RunResult(Status.OK if payload[field_name] else Status.PREDICATE_FALSE, payload)

    return handler


def _check_hom(documents, options) -> RunResult:
    if len(documents) not in (1, 3):
        raise ValueError("'check-hom' takes a hom document, optionally followed by source and target documents.")
    hom: HomBody = _expect(documents[0], "check-hom", "hom").body
    source = documents[1] if len(documents) == 3 else hom.source
    target = documents[2] if len(documents) == 3 else hom.target
    if source is None or target is None:
        raise SchemaError("/source", "the map needs a source and a target document.")
    if source.kind != target.kind or source.kind not in ("fan_with_groups", "fan_with_monoids"):
        raise SchemaError("/target", "source and target must both be fan_with_groups or both fan_with_monoids.")
    if source.kind == "fan_with_groups":
        check = check_hom_groups(hom.phi, source.body, target.body)
    else:
        check = check_hom_monoids(hom.phi, source.body, target.body)
    return RunResult(Status.OK if check.holds else Status.PREDICATE_FALSE, check.to_dict())


def _presentation(documents, options) -> RunResult:
    document = _expect(_single(documents, "presentation"), "presentation", "monoid")
    monoid: AffineMonoid = document.body
    return RunResult(
        Status.OK,
        {
            "generators": monoid.to_list(),
            "relations": relation_lattice(monoid).to_list(),
            "binomials": binomials(monoid),
        },
    )


def _plot_svg(documents, options) -> RunResult:
    document = _expect(
        _single(documents, "plot-svg"), "plot-svg", "monoid", "fan_with_groups", "fan_with_monoids"
    )
    settings = options.settings
    body = document.body
    if isinstance(body, AffineMonoid):
        monoid = body
    else:
        if options.cone is None:
            raise ValueError("Plotting a fan document needs --cone.")
        sigma = body.fan.cone(document.resolve(options.cone))
        if isinstance(body, FanWithGroups):
            monoid = extract_generators(gamma_oracle(body, sigma), settings.certification_factor)
        else:
            monoid = body.monoid(sigma)
            if monoid is None:
                raise ValueError(f"No monoid is attached to cone '{body.fan.key(sigma)}'.")
    window = parse_window(options.window, settings.default_window)
    return RunResult(Status.OK, output=plot_svg(monoid, window, settings.svg_pitch))


COMMANDS: dict[str, Callable[[Sequence[Document], CommandOptions], RunResult]] = {
    "validate": _validate,
    "functor": _functor,
    "extract-groups": _extract_groups,
    "seminormalize": _seminormalize,
    "is-normal": _predicate("saturated", lambda m, o: saturation_witness(m)),
    "is-seminormal": _predicate(
        "semisaturated", lambda m, o: semisaturation_witness(m, o.settings.certification_factor)
    ),
    "check-hom": _check_hom,
    "presentation": _presentation,
    "plot-svg": _plot_svg,
}


def _error(status: Status, kind: str, exc: Exception, **extra) -> RunResult:
    payload = {"error": kind, "message": str(exc)}
    payload.update(extra)
    return RunResult(status, payload)


def run_command(command: str, documents: Sequence[Document], options: CommandOptions | None = None) -> RunResult:
    options = options or CommandOptions()
    if command not in COMMANDS:
        raise ValueError(f"Unknown command '{command}'. Choose from: {', '.join(COMMANDS)}.")
    logger.info("Running %s on %d document(s).", command, len(documents))
    try:
        return COMMANDS[command](documents, options)
    except CertificationFailure as exc:
        witness = None if exc.witness is None else list(exc.witness)
        return _error(Status.CERTIFICATION_FAILURE, "certification_failure", exc, witness=witness)
    except RevalidationFailure as exc:
        result = _error(Status.INVALID_INPUT, "revalidation_failure", exc, report=exc.report.to_dict())
        result.report = exc.report
        return result
    except SchemaError as exc:
        return _error(Status.PARSE_ERROR, "schema_error", exc, path=exc.path)
    except ParseError as exc:
        return _error(Status.PARSE_ERROR, "parse_error", exc)
    except ValueError as exc:
        return _error(Status.INVALID_INPUT, "invalid_input", exc)


def execute(command: str, sources: Sequence[str | Path | bytes], options: CommandOptions | None = None) -> RunResult:
    """Load every source, then run the command; loading errors become results too."""
    try:
        documents = [load_document(source) for source in sources]
    except SchemaError as exc:
        return _error(Status.PARSE_ERROR, "schema_error", exc, path=exc.path)
    except ParseError as exc:
        return _error(Status.PARSE_ERROR, "parse_error", exc)
    except ValueError as exc:
        return _error(Status.INVALID_INPUT, "invalid_input", exc)
    return run_command(command, documents, options)
