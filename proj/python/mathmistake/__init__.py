"""Python access to the arithmetic checker, reading-order layout and grading."""

import json as _json

from . import _mmc

evaluate = _mmc.evaluate
order_lines_json = _mmc.order_lines
strategies = _mmc.strategies


def _as_text(doc):
    return doc if isinstance(doc, str) else _json.dumps(doc)


def check_chain(text):
    """Returns {"holds", "values", and on failure "equality_index", "lhs", "rhs"}."""
    return _json.loads(_mmc.check_chain(text))


def order_lines(ocr_document):
    """Reading order of an OCR document (dict or JSON text) as a list of line ids."""
    return _mmc.order_lines(_as_text(ocr_document))


def build_script(ocr_document):
    return _json.loads(_mmc.build_script(_as_text(ocr_document)))


def parse_script_text(text):
    return _json.loads(_mmc.parse_script_text(text))


def grade(problem, steps, strategy="oracle", stop_at_first_mistake=True, max_retries=2):
    """Grades a script and returns the report as a dict."""
    return _json.loads(_mmc.grade(problem, list(steps), strategy, stop_at_first_mistake, max_retries))


__all__ = [
    "build_script",
    "check_chain",
    "evaluate",
    "grade",
    "order_lines",
    "parse_script_text",
    "strategies",
]
