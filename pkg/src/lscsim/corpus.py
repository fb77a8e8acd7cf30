"""Sense-annotated corpora: data model, canonical file format and plain-token extraction.

The canonical format holds one sentence per line::

    sentence_id<TAB>token token token ...

with each token written as ``surface|lemma|pos|sense_key``. Fields after the
surface may be empty (``the|||``). Literal ``|``, TAB, space and backslash
inside a field are escaped as ``\\p``, ``\\t``, ``\\s`` and ``\\\\``.

SemCor maps onto this format as follows: each ``<wf>`` element becomes one
token, its text the surface, ``lemma`` the lemma, ``pos`` the POS tag and
``lemma%lexsn`` the sense key. Punctuation elements become tokens with empty
annotation fields. Tokens carrying several sense keys (``;``-joined in the
source) are rejected by the parser.
"""

from __future__ import annotations

import io
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

__all__ = [
    "POS_TAGS",
    "CorpusParseError",
    "Token",
    "Sentence",
    "LemmaKey",
    "LemmaEntry",
    "AnnotatedCorpus",
    "coarse_pos",
    "parse_corpus",
    "read_corpus",
    "format_corpus",
    "write_corpus",
    "extract_plain_tokens",
    "is_punctuation",
    "lemma_inventory",
]

POS_TAGS = ("NOUN", "VERB", "ADJ", "ADV", "OTHER")

_POS_PREFIXES = (
    # Penn tags, WordNet one-letter tags and universal tags.
    ("NN", "NOUN"),
    ("VB", "VERB"),
    ("JJ", "ADJ"),
    ("RB", "ADV"),
)
_POS_EXACT = {
    "NOUN": "NOUN", "N": "NOUN", "PROPN": "NOUN",
    "VERB": "VERB", "V": "VERB",
    "ADJ": "ADJ", "A": "ADJ", "S": "ADJ",
    "ADV": "ADV", "R": "ADV",
}

MULTI_SENSE_SEPARATOR = ";"


class CorpusParseError(ValueError):
    """Raised for malformed canonical corpus input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def coarse_pos(tag: str | None) -> str:
    """Map a raw part-of-speech tag onto the closed coarse tag set."""
    if not tag:
        return "OTHER"
    upper = tag.upper()
    if upper in _POS_EXACT:
        return _POS_EXACT[upper]
    for prefix, coarse in _POS_PREFIXES:
        if upper.startswith(prefix):
            return coarse
    return "OTHER"


@dataclass(frozen=True, slots=True)
class Token:
    surface: str
    lemma: str | None = None
    pos: str | None = None
    sense_key: str | None = None

    def __post_init__(self):
        if not self.surface:
            raise ValueError("token surface must be non-empty")
        if self.sense_key and not self.lemma:
            raise ValueError(f"token {self.surface!r} has a sense key but no lemma")


@dataclass(frozen=True, slots=True)
class Sentence:
    id: str
    tokens: tuple[Token, ...]

    def __post_init__(self):
        if not self.id:
            raise ValueError("sentence id must be non-empty")
        if not self.tokens:
            raise ValueError(f"sentence {self.id!r} has no tokens")


@dataclass(frozen=True, order=True, slots=True)
class LemmaKey:
    lemma: str
    pos: str

    def __post_init__(self):
        if self.lemma != self.lemma.lower():
            raise ValueError(f"lemma must be lowercase: {self.lemma!r}")
        if self.pos not in POS_TAGS:
            raise ValueError(f"unknown coarse POS {self.pos!r}")

    @classmethod
    def of(cls, token: Token) -> "LemmaKey":
        return cls(token.lemma.lower(), coarse_pos(token.pos))

    def __str__(self):
        return f"{self.lemma}/{self.pos}"


@dataclass(frozen=True, slots=True)
class LemmaEntry:
    senses: tuple[str, ...]
    annotated: int
    total: int


# (sentence id, token position, sense key)
Use = tuple[str, int, str]


def _build_index(sentences: Iterable[Sentence]) -> dict[LemmaKey, tuple[Use, ...]]:
    index: dict[LemmaKey, list[Use]] = defaultdict(list)
    for sentence in sentences:
        for position, token in enumerate(sentence.tokens):
            if token.sense_key:
                index[LemmaKey.of(token)].append((sentence.id, position, token.sense_key))
    return {key: tuple(uses) for key, uses in index.items()}


@dataclass(frozen=True)
class AnnotatedCorpus:
    """An ordered, immutable collection of sentences with a lemma index.

    ``lemma_index`` maps every annotated lemma to its uses in corpus order.
    """

    sentences: tuple[Sentence, ...] = ()
    lemma_index: dict[LemmaKey, tuple[Use, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        ids = set()
        for sentence in self.sentences:
            if sentence.id in ids:
                raise ValueError(f"duplicate sentence id {sentence.id!r}")
            ids.add(sentence.id)
        object.__setattr__(self, "lemma_index", _build_index(self.sentences))
        object.__setattr__(self, "_by_id", {s.id: s for s in self.sentences})

    def __len__(self):
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def sentence(self, sentence_id: str) -> Sentence:
        return self._by_id[sentence_id]

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.sentences]


# -- canonical format ------------------------------------------------------

_ESCAPES = {"\\": "\\\\", "|": "\\p", "\t": "\\t", " ": "\\s"}
_UNESCAPES = {"\\": "\\", "p": "|", "t": "\t", "s": " "}


def _escape(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def _unescape(text: str, line: int) -> str:
    if "\\" not in text:
        return text
    out = []
    chars = iter(text)
    for ch in chars:
        if ch != "\\":
            out.append(ch)
            continue
        nxt = next(chars, None)
        if nxt not in _UNESCAPES:
            raise CorpusParseError(f"bad escape sequence in {text!r}", line)
        out.append(_UNESCAPES[nxt])
    return "".join(out)


def _parse_token(raw: str, line: int) -> Token:
    fields = raw.split("|")
    if len(fields) != 4:
        raise CorpusParseError(f"token {raw!r} must have 4 '|'-separated fields", line)
    surface, lemma, pos, sense = (_unescape(f, line) for f in fields)
    if not surface:
        raise CorpusParseError(f"token {raw!r} has an empty surface", line)
    if sense and not lemma:
        raise CorpusParseError(f"token {raw!r} has a sense key but no lemma", line)
    if MULTI_SENSE_SEPARATOR in sense:
        raise CorpusParseError(f"token {raw!r} carries multiple sense annotations", line)
    return Token(surface, lemma or None, pos or None, sense or None)


def parse_corpus(stream: TextIO | str) -> AnnotatedCorpus:
    """Parse a corpus in canonical format from a text stream or string.

    Blank lines are ignored. Malformed lines raise :class:`CorpusParseError`
    naming the 1-based line number.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    sentences = []
    seen: dict[str, int] = {}
    for lineno, raw_line in enumerate(stream, start=1):
        line = raw_line.rstrip("\r\n")
        if not line.strip():
            continue
        sid, sep, body = line.partition("\t")
        if not sep:
            raise CorpusParseError("missing TAB between sentence id and tokens", lineno)
        if not sid:
            raise CorpusParseError("empty sentence id", lineno)
        if sid in seen:
            raise CorpusParseError(f"duplicate sentence id {sid!r} (first on line {seen[sid]})", lineno)
        seen[sid] = lineno
        raw_tokens = body.split(" ")
        if not body or any(not t for t in raw_tokens):
            raise CorpusParseError("empty token (sentence empty or doubled space)", lineno)
        tokens = tuple(_parse_token(t, lineno) for t in raw_tokens)
        sentences.append(Sentence(sid, tokens))
    return AnnotatedCorpus(tuple(sentences))


def read_corpus(path) -> AnnotatedCorpus:
    with open(path, encoding="utf-8") as f:
        return parse_corpus(f)


def _format_token(token: Token) -> str:
    return "|".join(_escape(f or "") for f in (token.surface, token.lemma, token.pos, token.sense_key))


def format_corpus(corpus: AnnotatedCorpus) -> str:
    return "".join(
        f"{s.id}\t{' '.join(_format_token(t) for t in s.tokens)}\n" for s in corpus.sentences
    )


def write_corpus(corpus: AnnotatedCorpus, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_corpus(corpus))


# -- plain-token extraction --------------------------------------------------

def is_punctuation(text: str) -> bool:
    """True if ``text`` contains no alphanumeric character."""
    return not any(ch.isalnum() for ch in text)


def _plain_parts(text: str) -> list[str]:
    # '@' is reserved for word-injection markers.
    text = text.replace("@", "")
    return [p for p in text.replace("_", " ").split() if not is_punctuation(p)]


def extract_plain_tokens(sentence: Sentence) -> list[str]:
    """Tokens as exported to the split corpora.

    Punctuation tokens are dropped, each remaining token is replaced by its
    lowercased lemma when annotated (else its lowercased surface), and
    multiword lemmas like ``on_the_other_hand`` are split into their words.
    """
    out: list[str] = []
    for token in sentence.tokens:
        if is_punctuation(token.surface):
            continue
        out.extend(_plain_parts((token.lemma or token.surface).lower()))
    return out


def _token_matches(token: Token, key: LemmaKey) -> bool:
    word = (token.lemma or token.surface).lower()
    if word != key.lemma:
        return False
    # Tokens without a POS tag count toward every POS of the word.
    return token.pos is None or coarse_pos(token.pos) == key.pos


def lemma_inventory(corpus: AnnotatedCorpus) -> dict[LemmaKey, LemmaEntry]:
    """Sense sequence, annotated count and total count for each annotated lemma.

    Sense sequences are sorted by sense key. The total counts every token whose
    lemma (or lowercased surface, when unlemmatized) equals the key's lemma and
    whose POS is compatible with the key.
    """
    index = corpus.lemma_index
    by_word: dict[str, list[LemmaKey]] = defaultdict(list)
    for key in index:
        by_word[key.lemma].append(key)
    totals: dict[LemmaKey, int] = dict.fromkeys(index, 0)
    for sentence in corpus.sentences:
        for token in sentence.tokens:
            for key in by_word.get((token.lemma or token.surface).lower(), ()):
                if _token_matches(token, key):
                    totals[key] += 1
    return {
        key: LemmaEntry(tuple(sorted({u[2] for u in uses})), len(uses), totals[key])
        for key, uses in sorted(index.items())
    }
