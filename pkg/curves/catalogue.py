"""Named curves and the text format for curve input."""
import logging
import re
from pathlib import Path
from typing import Dict, List, Tuple

from core.errors import CurveParseError, ValidationError
from curves.weierstrass import WeierstrassCurve

logger = logging.getLogger(__name__)

# alias -> (coefficients, conductor, rank); smallest known conductors for ranks 1..7
NAMED_CURVES: Dict[str, Tuple[Tuple[int, ...], object, int]] = {
    "E1": ((0, 0, 1, -1, 0), 37, 1),
    "E2": ((0, 1, 1, -2, 0), 389, 2),
    "E3": ((0, 0, 1, -7, 6), 5077, 3),
    "E4": ((1, -1, 0, -79, 289), 234446, 4),
    "E5": ((0, 0, 1, -79, 342), 19047851, 5),
    "E6": ((1, 1, 0, -2582, 48720), 5187563742, 6),
    "E7": ((0, 0, 0, -10012, 346900), 382623908456, 7),
    "E11": ((0, 0, 1, -16359067, 26274178986), 18031737725935636520843, 11),
    "E24": ((1, 0, 1, -120039822036992245303534619191166796374,
             504224992484910670010801799168082726759443756222911415116), None, 24),
    "C15": ((1, 1, 1, 0, 0), 15, 0),
}

_INT = re.compile(r"\s*([+-]?\d+)\s*")
_TRAILER = re.compile(r"\s*([Nrw])\s*=\s*([+-]?\d+)")


def named_curve(alias: str) -> WeierstrassCurve:
    key = alias.strip().upper()
    if key not in NAMED_CURVES:
        raise ValidationError(f"unknown curve alias {alias!r}; known: {', '.join(NAMED_CURVES)}")
    coeffs, conductor, rank = NAMED_CURVES[key]
    return WeierstrassCurve(*coeffs, conductor=conductor, rank=rank, label=key)


def parse_curve_input(text: str) -> WeierstrassCurve:
    """
    Parse "[a1,a2,a3,a4,a6] N=<int> r=<int> w=<+-1>" (trailer optional).

    Raises:
        CurveParseError: malformed text, with the character position
        ValidationError: a curve invariant fails (singular model, conductor
            incompatible with the discriminant, bad root number)
    """
    pos = len(text) - len(text.lstrip())
    if pos >= len(text) or text[pos] != '[':
        raise CurveParseError("expected '['", pos)
    pos += 1
    coeffs: List[int] = []
    while True:
        m = _INT.match(text, pos)
        if not m:
            raise CurveParseError("expected an integer coefficient", pos)
        coeffs.append(int(m.group(1)))
        pos = m.end()
        if pos < len(text) and text[pos] == ',':
            pos += 1
            continue
        if pos < len(text) and text[pos] == ']':
            pos += 1
            break
        raise CurveParseError("expected ',' or ']'", pos)
    if len(coeffs) != 5:
        raise CurveParseError(f"expected 5 coefficients, got {len(coeffs)}", pos)

    fields = {}
    while pos < len(text) and text[pos:].strip():
        m = _TRAILER.match(text, pos)
        if not m:
            rest = text[pos:]
            raise CurveParseError("expected N=, r= or w= field", pos + len(rest) - len(rest.lstrip()))
        key = m.group(1)
        if key in fields:
            raise CurveParseError(f"duplicate field {key}", m.start(1))
        fields[key] = int(m.group(2))
        pos = m.end()

    return WeierstrassCurve(*coeffs, conductor=fields.get('N'), rank=fields.get('r'),
                            root_number=fields.get('w'))


def resolve_curve(spec: str) -> WeierstrassCurve:
    """An alias such as 'E6' or a bracketed curve text."""
    if spec.strip().startswith('['):
        return parse_curve_input(spec)
    return named_curve(spec)


def read_curve_list(path: Path) -> List[WeierstrassCurve]:
    """One curve per line; blank lines and '#' comments skipped."""
    curves = []
    with open(path, 'r') as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            try:
                curves.append(resolve_curve(line))
            except ValidationError as e:
                raise ValidationError(f"{path}:{lineno}: {e.message}") from e
    logger.info(f"Read {len(curves)} curves from {path}")
    return curves
