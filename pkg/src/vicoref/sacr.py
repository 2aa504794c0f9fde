"""Reader and writer for the SACR export format.

A mention is written ``{M<tag_number> content}`` where the tag digits are
followed by exactly one whitespace character and ``content`` may contain
further annotations::

    {M1 Mẹ của {M2 tôi}} thường thức dậy vào lúc 5 giờ sáng.

In lenient mode (the default) stray braces, malformed tags, empty and
unterminated annotations, and an annotation wrapping nothing but another
annotation are kept as literal text and reported as
:class:`ParseWarning`.  Strict mode raises on the same conditions.
"""

from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass

from .core import AnnotatedDocument, CorefError, Finding, Mention

OPEN_TAG = re.compile(r"\{M([0-9]+)\s")
POSSESSIVE = re.compile(r"(?<!\w)của(?!\w)", re.IGNORECASE)


class SacrSyntaxError(CorefError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnbalancedBrace(SacrSyntaxError):
    pass


class MalformedTag(SacrSyntaxError):
    pass


class UnterminatedAnnotation(SacrSyntaxError):
    pass


class CoincidentAnnotation(SacrSyntaxError):
    """An annotation whose whole content is one other annotation (equal spans)."""


class ParseMode(enum.Enum):
    STRICT = "strict"
    LENIENT = "lenient"


@dataclass(frozen=True)
class SacrParseOptions:
    mode: ParseMode = ParseMode.LENIENT


@dataclass(frozen=True)
class ParseWarning:
    code: str
    offset: int
    message: str

    def __str__(self) -> str:
        return f"{self.code} at offset {self.offset}: {self.message}"


@dataclass
class _Open:
    pos: int  # raw offset of "{"
    end: int  # raw offset just past the tag's whitespace
    tag: int


def _match_markup(text: str, strict: bool, warnings: list[ParseWarning]) -> dict[int, tuple[int, int]]:
    """Pair opening tags with closing braces.

    Returns ``{open_pos: (close_pos, tag)}`` for every accepted annotation.
    Positions of markup that is not accepted are treated as literal text.
    """
    pairs: dict[int, tuple[int, int]] = {}
    stack: list[_Open] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "{":
            m = OPEN_TAG.match(text, i)
            if m and int(m.group(1)) >= 1:
                stack.append(_Open(i, m.end(), int(m.group(1))))
                i = m.end()
                continue
            snippet = text[i : i + 6]
            if text.startswith("{M", i):
                if strict:
                    raise MalformedTag(f"malformed tag {snippet!r}", i)
                warnings.append(ParseWarning("MALFORMED_TAG", i, f"{snippet!r} kept as text"))
            else:
                if strict:
                    raise UnbalancedBrace("'{' does not open an annotation", i)
                warnings.append(ParseWarning("STRAY_OPEN_BRACE", i, "'{' kept as text"))
        elif ch == "}":
            if not stack:
                if strict:
                    raise UnbalancedBrace("'}' without matching annotation", i)
                warnings.append(ParseWarning("STRAY_CLOSE_BRACE", i, "'}' kept as text"))
            else:
                op = stack.pop()
                if op.end == i:
                    if strict:
                        raise MalformedTag("empty annotation", op.pos)
                    warnings.append(ParseWarning("EMPTY_ANNOTATION", op.pos, "empty annotation kept as text"))
                elif pairs.get(op.end, (None,))[0] == i - 1:
                    if strict:
                        raise CoincidentAnnotation("annotation wraps exactly one other annotation", op.pos)
                    warnings.append(
                        ParseWarning("COINCIDENT_ANNOTATION", op.pos, f"outer M{op.tag} has the same span; kept as text")
                    )
                else:
                    pairs[op.pos] = (i, op.tag)
        i += 1
    for op in stack:
        if strict:
            raise UnterminatedAnnotation(f"annotation M{op.tag} is never closed", op.pos)
        warnings.append(ParseWarning("UNTERMINATED", op.pos, f"M{op.tag} never closed; kept as text"))
    return pairs


def parse_sacr(
    text: str,
    opts: SacrParseOptions | None = None,
    *,
    doc_id: str = "",
    warnings: list[ParseWarning] | None = None,
) -> AnnotatedDocument:
    """Parse SACR markup into an :class:`AnnotatedDocument`.

    Lenient-mode warnings are appended to ``warnings`` when a list is given.
    """
    opts = opts or SacrParseOptions()
    found: list[ParseWarning] = []
    pairs = _match_markup(text, opts.mode is ParseMode.STRICT, found)
    if warnings is not None:
        warnings.extend(found)

    closes = {close: open_pos for open_pos, (close, _) in pairs.items()}
    plain: list[str] = []
    plain_len = 0
    starts: dict[int, int] = {}
    spans: list[tuple[int, int, int]] = []
    i = 0
    while i < len(text):
        if i in pairs:
            starts[i] = plain_len
            i = OPEN_TAG.match(text, i).end()
            continue
        if i in closes:
            open_pos = closes[i]
            spans.append((starts[open_pos], plain_len, pairs[open_pos][1]))
            i += 1
            continue
        plain.append(text[i])
        plain_len += 1
        i += 1
    return AnnotatedDocument.from_spans(doc_id, "".join(plain), spans)


def serialize_sacr(doc: AnnotatedDocument) -> str:
    """Render a document back to SACR markup.

    ``parse_sacr(serialize_sacr(doc))`` reproduces ``doc``.
    """
    doc.validate()
    # (position, kind, order): closes sort before opens at the same offset,
    # inner closes before outer closes, outer opens before inner opens
    events: list[tuple[int, int, int, str]] = []
    for m in doc.mentions:
        events.append((m.start, 1, m.depth, f"{{M{m.tag_number} "))
        events.append((m.end, 0, -m.depth, "}"))
    events.sort(key=lambda e: e[:3])
    out: list[str] = []
    cursor = 0
    for pos, _, _, markup in events:
        out.append(doc.plain_text[cursor:pos])
        out.append(markup)
        cursor = pos
    out.append(doc.plain_text[cursor:])
    return "".join(out)


def _has_possessive(text: str) -> bool:
    return POSSESSIVE.search(unicodedata.normalize("NFC", text)) is not None


def lint_guidelines(doc: AnnotatedDocument) -> list[Finding]:
    """Check the machine-checkable annotation rules.

    Only structure is checked: nested mentions need a possessive "của"
    between the outer start and the inner start, nesting deeper than one
    level is flagged, and mentions must have visible text.  Whether a
    mention refers to a human, a group, or includes an adjective is left
    to the annotator.
    """
    by_index = {m.tag_index: m for m in doc.mentions}
    findings: list[Finding] = []
    for m in doc.mentions:
        if not m.surface.strip():
            findings.append(Finding("EMPTY_SURFACE", "mention contains only whitespace", m.tag_index))
            continue
        if m.surface != m.surface.strip():
            findings.append(
                Finding("EXTRA_WHITESPACE", f"surface {m.surface!r} has surrounding whitespace", m.tag_index)
            )
        if m.parent is not None:
            outer: Mention = by_index[m.parent]
            if not _has_possessive(doc.plain_text[outer.start : m.start]):
                findings.append(
                    Finding(
                        "NESTED_WITHOUT_POSSESSIVE",
                        f"{m.surface!r} nested in {outer.surface!r} without 'của'",
                        m.tag_index,
                    )
                )
        if m.depth > 1:
            findings.append(Finding("DEEP_NESTING", f"nesting depth {m.depth}", m.tag_index))
    return findings
