"""Paragraph and sentence segmentation shared by sentiment and summarization."""

from __future__ import annotations

import re

from .errors import EmptyText

ABBREVIATIONS = frozenset(
    """mr mrs ms mx dr prof sr jr st mt ft rev gen col lt sgt capt cmdr gov sen rep pres
    supt det insp hon messrs vs etc inc ltd co corp dept univ assn bros vol vols
    fig figs approx est al cf eds e.g i.e jan feb mar apr jun jul aug sep sept oct
    nov dec mon tue tues wed thu thur thurs fri""".split()
)

_PARAGRAPH_BREAK = re.compile(r"\n[ \t]*\n\s*")
# Terminal punctuation, optional closing quotes/brackets, then whitespace.
_BOUNDARY = re.compile(r"[.!?]+[\"'\)\]’”]*(?=\s)")
_NEXT_START = re.compile(r"\s+[\"'\(\[‘“]*[A-Z]")
_INITIALISM = re.compile(r"^(?:[A-Za-z]\.)+[A-Za-z]?$")


def count_tokens(text: str) -> int:
    """Whitespace-delimited token count, a stand-in for model tokens."""
    return len(text.split())


def split_paragraphs(text: str) -> list[str]:
    return [p.strip() for p in _PARAGRAPH_BREAK.split(text) if p.strip()]


def _is_abbreviation(paragraph: str, dot: int) -> bool:
    start = dot
    while start > 0 and not paragraph[start - 1].isspace():
        start -= 1
    word = paragraph[start:dot].lstrip("\"'([‘“")
    if not word:
        return False
    if len(word) == 1 and word.isalpha() and word.isupper():
        return True  # an initial, as in "J. Smith"
    if _INITIALISM.match(word):
        return True
    return word.lower() in ABBREVIATIONS


def _split_paragraph(paragraph: str) -> list[str]:
    sentences = []
    start = 0
    for m in _BOUNDARY.finditer(paragraph):
        end = m.end()
        if not _NEXT_START.match(paragraph, end):
            continue
        if m.group().startswith(".") and len(m.group().rstrip("\"')]’”")) == 1:
            if _is_abbreviation(paragraph, m.start()):
                continue
        piece = paragraph[start:end].strip()
        if piece:
            sentences.append(piece)
        start = end
    tail = paragraph[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def split_sentences(text: str) -> list[str]:
    """Deterministic rule-based sentence segmentation.

    A sentence ends at ``.``, ``!`` or ``?`` followed by whitespace and a
    capital letter, at a paragraph break, or at the end of the text. A single
    period after a known abbreviation or an initial does not end a sentence.
    """
    if not text or not text.strip():
        raise EmptyText("cannot split empty text")
    return [s for para in split_paragraphs(text) for s in _split_paragraph(para)]
