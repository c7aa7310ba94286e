"""Corpus loading and language-agnostic text preprocessing.

A corpus is a directory of ``<id>.txt`` files, optionally paired with
``<id>.key`` files carrying one gold keyphrase per line. Preprocessing is
purely orthographic so the same code path serves any language: sentences
split on terminal punctuation (``. ! ? …`` plus the devanagari danda),
tokens are maximal runs of letters/digits with internal hyphens, and a
caller-supplied stoplist is the only language-specific resource.

Known limitation: abbreviations ("e.g.", "Dr.") end sentences; there is no
abbreviation lexicon by design. Sentences left empty by stopword removal are
dropped, so every stored sentence contributes at least one token.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

logger = logging.getLogger(__name__)

# Maximal runs of Unicode letters/digits, optionally joined by single
# internal hyphens ("state-of-the-art" is one token, "--" splits).
_WORD_RE = re.compile(r"[^\W_]+(?:-[^\W_]+)*")

# Terminal punctuation closes a sentence only when followed by whitespace
# or end of text, so "3.14" stays inside one sentence.
_SENTENCE_END_RE = re.compile(r"[.!?…।]+(?=\s|$)")

# Any character that is not a word character, whitespace, or a hyphen acts
# as a phrase boundary when carving token runs out of raw text.
_PHRASE_BREAK_RE = re.compile(r"[^\w\s-]|_")


class CorpusError(Exception):
    """Raised when a corpus root cannot be read at all."""


@dataclass(frozen=True)
class Token:
    """One surviving token; position is 1-based over the stopword-removed stream."""

    surface: str
    position: int


@dataclass(frozen=True)
class Sentence:
    index: int
    tokens: tuple[Token, ...]


@dataclass
class Document:
    id: str
    raw_text: str
    sentences: list[Sentence]
    tokens: list[Token]
    gold_phrases: list[str] = field(default_factory=list)

    def unique_words(self) -> set[str]:
        return {t.surface for t in self.tokens}

    def word_positions(self) -> dict[str, tuple[int, ...]]:
        """Occurrence positions per word, sorted ascending."""
        out: dict[str, list[int]] = {}
        for tok in self.tokens:
            out.setdefault(tok.surface, []).append(tok.position)
        return {w: tuple(ps) for w, ps in out.items()}


@dataclass
class Corpus:
    name: str
    documents: list[Document]
    stoplist_id: str = ""


def split_sentences(text: str) -> list[str]:
    """Split raw text into sentence strings on terminal punctuation."""
    return [part.strip() for part in _SENTENCE_END_RE.split(text) if part.strip()]


def tokenize(text: str) -> list[str]:
    """Lowercased tokens: letter/digit runs with internal hyphens kept."""
    return [m.group(0).lower() for m in _WORD_RE.finditer(text)]


def phrase_segments(text: str) -> list[list[str]]:
    """Token runs bounded by punctuation.

    Whitespace and hyphens do not break a segment; every other non-word
    character does. Used when reassembling keyphrases from raw text.
    """
    segments = []
    for chunk in _PHRASE_BREAK_RE.split(text):
        toks = tokenize(chunk)
        if toks:
            segments.append(toks)
    return segments


def preprocess(raw_text: str, stoplist: set[str], doc_id: str = "") -> Document:
    """Sentence-split, tokenize, and stopword-filter one document.

    Token positions are assigned 1..M over the surviving stream, so position
    arithmetic downstream never sees gaps. A text consisting entirely of
    stopwords yields a document with no tokens.
    """
    sentences: list[Sentence] = []
    tokens: list[Token] = []
    position = 0
    for sentence_text in split_sentences(raw_text):
        kept = [w for w in tokenize(sentence_text) if w not in stoplist]
        if not kept:
            continue
        sent_tokens = []
        for word in kept:
            position += 1
            sent_tokens.append(Token(surface=word, position=position))
        sentences.append(Sentence(index=len(sentences), tokens=tuple(sent_tokens)))
        tokens.extend(sent_tokens)
    return Document(id=doc_id, raw_text=raw_text, sentences=sentences, tokens=tokens)


def load_stoplist(path: str | Path) -> set[str]:
    """Read a stoplist file: one word per line, ``#`` comments allowed."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return words


def default_stoplist() -> set[str]:
    """The bundled general-purpose English stoplist."""
    text = resources.files("graphkex.data").joinpath("stopwords_en.txt").read_text("utf-8")
    return {
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    }


def _read_gold(path: Path) -> list[str]:
    phrases = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip().lower()
        if line:
            phrases.append(line)
    # preserve order, drop duplicates
    return list(dict.fromkeys(phrases))


def load_corpus(
    root_path: str | Path,
    stoplist: set[str],
    name: str | None = None,
    stoplist_id: str = "",
) -> Corpus:
    """Load every ``<id>.txt`` under ``root_path`` into Documents.

    Gold phrases come from the sibling ``<id>.key`` when present. Files with
    empty text or undecodable bytes are skipped; documents are returned
    sorted by id so corpus assembly is deterministic.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise CorpusError(f"corpus root is not a readable directory: {root}")

    documents = []
    skipped_empty = 0
    skipped_bad = 0
    for txt_path in sorted(root.glob("*.txt")):
        try:
            raw = txt_path.read_text(encoding="utf-8")
        except UnicodeDecodeError:
            skipped_bad += 1
            logger.warning("skipping %s: not valid UTF-8", txt_path.name)
            continue
        if not raw.strip():
            skipped_empty += 1
            continue
        doc = preprocess(raw, stoplist, doc_id=txt_path.stem)
        key_path = txt_path.with_suffix(".key")
        if key_path.exists():
            doc.gold_phrases = _read_gold(key_path)
        documents.append(doc)

    if skipped_empty or skipped_bad:
        logger.warning(
            "corpus %s: skipped %d empty and %d undecodable files",
            root.name, skipped_empty, skipped_bad,
        )
    documents.sort(key=lambda d: d.id)
    return Corpus(name=name or root.name, documents=documents, stoplist_id=stoplist_id)
