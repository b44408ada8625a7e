"""Word tokenization shared by alignment, linking and the toy generator.

Alignment spans index into the word list produced by :func:`tokenize`, so
every producer of alignment specs for hcdkit must tokenize the same way.
Words keep internal hyphens and apostrophes ("full-fat", "don't");
every other non-space character is a token of its own.
"""

from __future__ import annotations

import re

_WORD_RE = re.compile(r"\w+(?:[-'’]\w+)*|[^\w\s]")


def tokenize(text: str) -> list[str]:
    return _WORD_RE.findall(text)
