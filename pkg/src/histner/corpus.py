"""Corpus model and I/O: BRAT standoff parsing, tokenization, span/token
alignment, IOB2 encoding, validation, splitting, statistics, and the JSONL /
CoNLL serialization formats.

The canonical on-disk form is JSONL with one sentence object per line
(keys: ``doc_id``, ``region``, ``tokens``, ``tags``, optional ``year``).
Tags are the source of truth; entity spans are derived by decoding.
"""

from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AlignmentError,
    BratParseError,
    ConfigError,
    DataError,
    TagError,
    UnsupportedSpanError,
)

logger = logging.getLogger(__name__)


class Region(enum.IntEnum):
    """The four historical regions; integer codes feed the domain head."""

    BESSARABIA = 0
    MOLDAVIA = 1
    TRANSYLVANIA = 2
    WALLACHIA = 3

    @property
    def display(self) -> str:
        return self.name.title()

    @classmethod
    def parse(cls, value) -> "Region":
        if isinstance(value, Region):
            return value
        if isinstance(value, int):
            try:
                return cls(value)
            except ValueError:
                raise DataError(f"unknown region code {value!r}")
        try:
            return cls[str(value).strip().upper()]
        except KeyError:
            raise DataError(f"unknown region {value!r}")


class EntityLabel(enum.Enum):
    PERSON = "PERSON"
    ORGANISATION = "ORGANISATION"
    LOCATION = "LOCATION"
    PRODUCT = "PRODUCT"
    DATE = "DATE"

    @classmethod
    def parse(cls, value) -> "EntityLabel":
        if isinstance(value, EntityLabel):
            return value
        try:
            return cls[str(value).strip().upper()]
        except KeyError:
            raise DataError(f"unknown entity label {value!r}")


#: Fixed 11-tag IOB2 alphabet; index order is part of the model contract.
TAG_ALPHABET: tuple[str, ...] = ("O",) + tuple(
    f"{prefix}-{label.name}" for label in EntityLabel for prefix in ("B", "I")
)
TAG_TO_ID: dict[str, int] = {tag: i for i, tag in enumerate(TAG_ALPHABET)}

TagSequence = list[str]

YEAR_MIN, YEAR_MAX = 1817, 1990


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise DataError(f"bad token offsets [{self.start}, {self.end})")


@dataclass
class EntitySpan:
    """Token-indexed entity mention; ``last_token`` is inclusive."""

    label: EntityLabel
    first_token: int
    last_token: int
    surface: str = field(default="", compare=False)

    def __post_init__(self):
        if self.first_token > self.last_token or self.first_token < 0:
            raise DataError(
                f"bad span token range [{self.first_token}, {self.last_token}]"
            )

    @property
    def key(self) -> tuple:
        return (self.label, self.first_token, self.last_token)

    @property
    def n_tokens(self) -> int:
        return self.last_token - self.first_token + 1


@dataclass(frozen=True)
class RawSpan:
    """Character-offset annotation straight out of a standoff file."""

    label: EntityLabel
    start: int
    end: int
    surface: str


@dataclass
class Sentence:
    tokens: list[Token]
    tags: TagSequence
    region: Region

    @cached_property
    def spans(self) -> list[EntitySpan]:
        spans = decode_iob(self.tags)
        for span in spans:
            span.surface = " ".join(
                t.text for t in self.tokens[span.first_token : span.last_token + 1]
            )
        return spans

    @property
    def token_texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class Document:
    id: str
    region: Region
    sentences: list[Sentence]
    year: int | None = None

    def __post_init__(self):
        if self.year is not None and not (YEAR_MIN <= self.year <= YEAR_MAX):
            raise DataError(
                f"document {self.id!r}: year {self.year} outside [{YEAR_MIN}, {YEAR_MAX}]"
            )


Corpus = list[Document]


def iter_sentences(corpus: Corpus) -> Iterable[Sentence]:
    for doc in corpus:
        yield from doc.sentences


# ---------------------------------------------------------------------------
# BRAT standoff parsing
# ---------------------------------------------------------------------------

def parse_brat(text_content: str, ann_content: str) -> list[RawSpan]:
    """Parse the T lines of a standoff annotation file.

    Non-entity lines (relations, notes, ...) are skipped with a warning.
    Each surface string must match the text slice it points at.
    """
    spans: list[RawSpan] = []
    for line_no, line in enumerate(ann_content.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if not parts[0]:
            raise BratParseError(line_no, "empty annotation id")
        if not parts[0].startswith("T"):
            logger.warning("ignoring non-entity annotation line %d (%s)", line_no, parts[0])
            continue
        if len(parts) != 3:
            raise BratParseError(
                line_no, f"expected 'ID<TAB>LABEL START END<TAB>SURFACE', got {len(parts)} fields"
            )
        if ";" in parts[1]:
            raise UnsupportedSpanError(
                f"line {line_no}: discontinuous spans are not supported"
            )
        fields = parts[1].split(" ")
        if len(fields) != 3:
            raise BratParseError(line_no, f"malformed span descriptor {parts[1]!r}")
        try:
            label = EntityLabel.parse(fields[0])
        except DataError as exc:
            raise BratParseError(line_no, str(exc))
        try:
            start, end = int(fields[1]), int(fields[2])
        except ValueError:
            raise BratParseError(line_no, f"non-integer offsets in {parts[1]!r}")
        if not (0 <= start < end <= len(text_content)):
            raise AlignmentError(
                f"line {line_no}: span [{start}, {end}) outside text of length {len(text_content)}"
            )
        surface = parts[2]
        actual = text_content[start:end]
        if surface != actual:
            raise AlignmentError(
                f"line {line_no}: surface {surface!r} does not match text slice {actual!r}"
            )
        spans.append(RawSpan(label, start, end, surface))
    return spans


# ---------------------------------------------------------------------------
# Tokenization and alignment
# ---------------------------------------------------------------------------

def tokenize(text: str) -> list[Token]:
    """Deterministic rule tokenizer: maximal alphanumeric runs, every other
    non-space character is its own token. Offsets index into ``text``."""
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isalnum():
            j = i + 1
            while j < n and text[j].isalnum():
                j += 1
            tokens.append(Token(text[i:j], i, j))
            i = j
        else:
            tokens.append(Token(ch, i, i + 1))
            i += 1
    return tokens


def span_conflicts(spans: Sequence[EntitySpan]) -> list[str]:
    """Describe every overlapping or nested pair of token-indexed spans."""
    ordered = sorted(spans, key=lambda s: (s.first_token, s.last_token))
    conflicts = []
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.first_token <= prev.last_token:
            kind = "nested" if cur.last_token <= prev.last_token else "overlapping"
            conflicts.append(f"{kind} spans {prev.key} / {cur.key}")
    return conflicts


def align_spans(tokens: Sequence[Token], raw_spans: Sequence[RawSpan]) -> list[EntitySpan]:
    """Map character spans onto the smallest covering token windows.

    A span that cuts into a token is expanded to include the whole token.
    Token windows of different spans must not overlap.
    """
    aligned: list[EntitySpan] = []
    for raw in raw_spans:
        covering = [
            i for i, tok in enumerate(tokens)
            if tok.start < raw.end and tok.end > raw.start
        ]
        if not covering:
            raise AlignmentError(
                f"span [{raw.start}, {raw.end}) {raw.surface!r} covers no token"
            )
        first, last = covering[0], covering[-1]
        surface = " ".join(t.text for t in tokens[first : last + 1])
        aligned.append(EntitySpan(raw.label, first, last, surface))
    conflicts = span_conflicts(aligned)
    if conflicts:
        raise AlignmentError(f"aligned spans violate the no-nesting rule: {conflicts[0]}")
    return aligned


# ---------------------------------------------------------------------------
# IOB2 encode / decode
# ---------------------------------------------------------------------------

def encode_iob(spans: Sequence[EntitySpan], n_tokens: int) -> TagSequence:
    """IOB2 encoding: B on the first token of every span, I on the rest."""
    tags = ["O"] * n_tokens
    for span in sorted(spans, key=lambda s: s.first_token):
        if span.last_token >= n_tokens:
            raise TagError(f"span {span.key} exceeds sentence length {n_tokens}")
        for i in range(span.first_token, span.last_token + 1):
            if tags[i] != "O":
                raise TagError(f"overlapping spans at token {i}")
            tags[i] = ("B-" if i == span.first_token else "I-") + span.label.name
    return tags


def decode_iob(tags: Sequence[str]) -> list[EntitySpan]:
    """Decode any tag sequence over the 11-tag alphabet into spans.

    A stray I-X (one with no open B-X/I-X run of the same label) starts a
    new span, i.e. it is repaired as if it were B-X.
    """
    spans: list[EntitySpan] = []
    open_label: EntityLabel | None = None
    start = 0
    for i, tag in enumerate(tags):
        if tag not in TAG_TO_ID:
            raise TagError(f"unknown tag {tag!r} at position {i}")
        if tag == "O":
            if open_label is not None:
                spans.append(EntitySpan(open_label, start, i - 1))
                open_label = None
            continue
        prefix, name = tag.split("-", 1)
        label = EntityLabel[name]
        if prefix == "B" or open_label != label:
            if open_label is not None:
                spans.append(EntitySpan(open_label, start, i - 1))
            open_label, start = label, i
    if open_label is not None:
        spans.append(EntitySpan(open_label, start, len(tags) - 1))
    return spans


def is_valid_iob(tags: Sequence[str]) -> bool:
    prev = "O"
    for tag in tags:
        if tag not in TAG_TO_ID:
            return False
        if tag.startswith("I-") and prev != "B-" + tag[2:] and prev != tag:
            return False
        prev = tag
    return True


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    doc_id: str
    sentence: int
    message: str

    def __str__(self) -> str:
        return f"{self.doc_id}[{self.sentence}]: {self.message}"


def validate_document(doc: Document) -> list[Violation]:
    """Report structural problems; violations are data, not exceptions."""
    violations: list[Violation] = []

    def flag(idx: int, msg: str):
        violations.append(Violation(doc.id, idx, msg))

    for idx, sent in enumerate(doc.sentences):
        if len(sent.tags) != len(sent.tokens):
            flag(idx, f"{len(sent.tags)} tags for {len(sent.tokens)} tokens")
        for a, b in zip(sent.tokens, sent.tokens[1:]):
            if b.start < a.end:
                flag(idx, f"tokens overlap or out of order at char {b.start}")
                break
        for tag in sent.tags:
            if tag not in TAG_TO_ID:
                flag(idx, f"unknown tag {tag!r}")
                break
        try:
            spans = decode_iob([t for t in sent.tags if t in TAG_TO_ID])
        except TagError:
            spans = []
        for conflict in span_conflicts(spans):
            flag(idx, conflict)
    return violations


def validate_corpus(corpus: Corpus) -> list[Violation]:
    violations: list[Violation] = []
    seen: dict[str, int] = {}
    for doc in corpus:
        if doc.id in seen:
            violations.append(Violation(doc.id, -1, "duplicate document id"))
        seen[doc.id] = 1
        violations.extend(validate_document(doc))
    return violations


# ---------------------------------------------------------------------------
# BRAT pair -> Document
# ---------------------------------------------------------------------------

def document_from_brat(
    doc_id: str,
    region: Region,
    text_content: str,
    ann_content: str,
    year: int | None = None,
) -> Document:
    """Build a Document from a .txt/.ann pair.

    Sentences are the non-empty lines of the text file; a span crossing a
    line boundary is an alignment error.
    """
    raw_spans = parse_brat(text_content, ann_content)
    sentences: list[Sentence] = []
    offset = 0
    for line in text_content.split("\n"):
        line_start, line_end = offset, offset + len(line)
        offset = line_end + 1
        if not line.strip():
            continue
        local = [
            s for s in raw_spans
            if s.start < line_end and s.end > line_start
        ]
        for s in local:
            if s.start < line_start or s.end > line_end:
                raise AlignmentError(
                    f"span [{s.start}, {s.end}) crosses a line boundary"
                )
        tokens = [
            Token(t.text, t.start + line_start, t.end + line_start)
            for t in tokenize(line)
        ]
        spans = align_spans(tokens, local)
        tags = encode_iob(spans, len(tokens))
        sentences.append(Sentence(tokens=tokens, tags=tags, region=region))
    return Document(id=doc_id, region=region, sentences=sentences, year=year)


# ---------------------------------------------------------------------------
# Splitting
# ---------------------------------------------------------------------------

@dataclass
class SplitSpec:
    train_ratio: float = 0.8
    valid_ratio: float = 0.1
    test_ratio: float = 0.1
    seed: int = 0

    def validate(self):
        ratios = (self.train_ratio, self.valid_ratio, self.test_ratio)
        if any(r <= 0 for r in ratios):
            raise ConfigError(f"split ratios must be positive, got {ratios}")
        if abs(sum(ratios) - 1.0) > 1e-9:
            raise ConfigError(f"split ratios must sum to 1, got {sum(ratios)}")


@dataclass
class Splits:
    train: Corpus
    valid: Corpus
    test: Corpus

    def parts(self) -> dict[str, Corpus]:
        return {"train": self.train, "valid": self.valid, "test": self.test}


def _allocate(n: int, ratios: Sequence[float]) -> list[int]:
    # largest-remainder rounding so every part is within one of its target
    targets = [n * r for r in ratios]
    counts = [math.floor(t) for t in targets]
    remainder = n - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: (-(targets[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    return counts


def _rebuild(corpus: Corpus, keep: set[tuple[int, int]]) -> Corpus:
    docs: Corpus = []
    for d_idx, doc in enumerate(corpus):
        sents = [s for s_idx, s in enumerate(doc.sentences) if (d_idx, s_idx) in keep]
        if sents:
            docs.append(Document(id=doc.id, region=doc.region, sentences=sents, year=doc.year))
    return docs


def split_dataset(corpus: Corpus, spec: SplitSpec) -> Splits:
    """Sentence-level split, stratified by region, deterministic per seed."""
    spec.validate()
    by_region: dict[Region, list[tuple[int, int]]] = {}
    for d_idx, doc in enumerate(corpus):
        for s_idx, sent in enumerate(doc.sentences):
            by_region.setdefault(sent.region, []).append((d_idx, s_idx))
    rng = np.random.default_rng(spec.seed)
    assigned: dict[str, set[tuple[int, int]]] = {"train": set(), "valid": set(), "test": set()}
    ratios = (spec.train_ratio, spec.valid_ratio, spec.test_ratio)
    for region in sorted(by_region):
        keys = by_region[region]
        perm = rng.permutation(len(keys))
        n_train, n_valid, _ = _allocate(len(keys), ratios)
        for rank, key_idx in enumerate(perm):
            key = keys[key_idx]
            if rank < n_train:
                assigned["train"].add(key)
            elif rank < n_train + n_valid:
                assigned["valid"].add(key)
            else:
                assigned["test"].add(key)
    return Splits(
        train=_rebuild(corpus, assigned["train"]),
        valid=_rebuild(corpus, assigned["valid"]),
        test=_rebuild(corpus, assigned["test"]),
    )


def apply_split_file(corpus: Corpus, mapping: dict) -> Splits:
    """Split according to an explicit assignment, overriding ratios.

    ``mapping`` has keys train/valid/test; entries are document ids
    (whole document) or ``doc_id#i`` (single sentence). Every sentence
    must be assigned exactly once.
    """
    for part in ("train", "valid", "test"):
        if part not in mapping:
            raise DataError(f"split file is missing the {part!r} list")
    index: dict[str, tuple[int, int]] = {}
    doc_ids: dict[str, list[tuple[int, int]]] = {}
    for d_idx, doc in enumerate(corpus):
        doc_ids[doc.id] = []
        for s_idx in range(len(doc.sentences)):
            index[f"{doc.id}#{s_idx}"] = (d_idx, s_idx)
            doc_ids[doc.id].append((d_idx, s_idx))
    taken: dict[tuple[int, int], str] = {}
    parts: dict[str, set[tuple[int, int]]] = {p: set() for p in ("train", "valid", "test")}
    for part in ("train", "valid", "test"):
        for entry in mapping[part]:
            entry = str(entry)
            if entry in index:
                keys = [index[entry]]
            elif entry in doc_ids:
                keys = doc_ids[entry]
            else:
                raise DataError(f"split entry {entry!r} matches no document or sentence")
            for key in keys:
                if key in taken:
                    raise DataError(f"split assigns {entry!r} to both {taken[key]} and {part}")
                taken[key] = part
                parts[part].add(key)
    missing = len(index) - len(taken)
    if missing:
        raise DataError(f"split file leaves {missing} sentences unassigned")
    return Splits(
        train=_rebuild(corpus, parts["train"]),
        valid=_rebuild(corpus, parts["valid"]),
        test=_rebuild(corpus, parts["test"]),
    )


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

@dataclass
class StatsCell:
    entity_tokens: int = 0
    entities: int = 0

    @property
    def tokens_per_entity(self) -> float:
        return self.entity_tokens / self.entities if self.entities else 0.0


@dataclass
class CorpusStats:
    n_documents: int
    n_sentences: int
    n_tokens: int
    cells: dict[tuple[EntityLabel, Region], StatsCell]

    def label_total(self, label: EntityLabel) -> StatsCell:
        out = StatsCell()
        for region in Region:
            cell = self.cells.get((label, region))
            if cell:
                out.entity_tokens += cell.entity_tokens
                out.entities += cell.entities
        return out

    @property
    def total(self) -> StatsCell:
        out = StatsCell()
        for cell in self.cells.values():
            out.entity_tokens += cell.entity_tokens
            out.entities += cell.entities
        return out

    def to_json_dict(self) -> dict:
        per_label = {}
        for label in EntityLabel:
            rows = {}
            for region in Region:
                cell = self.cells.get((label, region), StatsCell())
                rows[region.display] = {
                    "entity_tokens": cell.entity_tokens,
                    "entities": cell.entities,
                    "tokens_per_entity": round(cell.tokens_per_entity, 4),
                }
            tot = self.label_total(label)
            rows["Total"] = {
                "entity_tokens": tot.entity_tokens,
                "entities": tot.entities,
                "tokens_per_entity": round(tot.tokens_per_entity, 4),
            }
            per_label[label.name] = rows
        total = self.total
        return {
            "documents": self.n_documents,
            "sentences": self.n_sentences,
            "tokens": self.n_tokens,
            "entities": total.entities,
            "entity_tokens": total.entity_tokens,
            "tokens_per_entity": round(total.tokens_per_entity, 4),
            "per_label": per_label,
        }


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Per (entity label, region) counts plus corpus totals."""
    cells: dict[tuple[EntityLabel, Region], StatsCell] = {}
    n_sentences = 0
    n_tokens = 0
    for doc in corpus:
        for sent in doc.sentences:
            n_sentences += 1
            n_tokens += len(sent.tokens)
            for span in sent.spans:
                cell = cells.setdefault((span.label, sent.region), StatsCell())
                cell.entities += 1
                cell.entity_tokens += span.n_tokens
    return CorpusStats(
        n_documents=len(corpus),
        n_sentences=n_sentences,
        n_tokens=n_tokens,
        cells=cells,
    )


# ---------------------------------------------------------------------------
# JSONL / CoNLL serialization
# ---------------------------------------------------------------------------

def _tokens_from_texts(texts: Sequence[str]) -> list[Token]:
    # Reconstruct offsets by joining with single spaces.
    tokens = []
    pos = 0
    for text in texts:
        if not text:
            raise DataError("empty token text")
        tokens.append(Token(text, pos, pos + len(text)))
        pos += len(text) + 1
    return tokens


def sentence_to_json_dict(doc_id: str, sent: Sentence, year: int | None) -> dict:
    obj = {
        "doc_id": doc_id,
        "region": sent.region.display,
        "tokens": sent.token_texts,
        "tags": list(sent.tags),
    }
    if year is not None:
        obj["year"] = year
    return obj


def dumps_jsonl(corpus: Corpus) -> str:
    lines = []
    for doc in corpus:
        for sent in doc.sentences:
            lines.append(json.dumps(sentence_to_json_dict(doc.id, sent, doc.year),
                                    ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")


def save_jsonl(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(dumps_jsonl(corpus), encoding="utf-8")


def loads_jsonl(content: str) -> Corpus:
    groups: dict[str, dict] = {}
    for line_no, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"line {line_no}: invalid JSON ({exc.msg})")
        for key in ("doc_id", "region", "tokens", "tags"):
            if key not in obj:
                raise DataError(f"line {line_no}: missing key {key!r}")
        region = Region.parse(obj["region"])
        tokens = _tokens_from_texts([str(t) for t in obj["tokens"]])
        sent = Sentence(tokens=tokens, tags=[str(t) for t in obj["tags"]], region=region)
        doc_id = str(obj["doc_id"])
        group = groups.setdefault(doc_id, {"region": region, "year": obj.get("year"), "sents": []})
        group["sents"].append(sent)
    return [
        Document(id=doc_id, region=g["region"], sentences=g["sents"], year=g["year"])
        for doc_id, g in groups.items()
    ]


def load_jsonl(path: str | Path) -> Corpus:
    return loads_jsonl(Path(path).read_text(encoding="utf-8"))


def dumps_conll(corpus: Corpus) -> str:
    out = []
    for doc in corpus:
        for sent in doc.sentences:
            for token, tag in zip(sent.tokens, sent.tags):
                out.append(f"{token.text}\t{tag}\n")
            out.append("\n")
    return "".join(out)


def export_conll(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(dumps_conll(corpus), encoding="utf-8")


# ---------------------------------------------------------------------------
# Public-release ingestion adapter
# ---------------------------------------------------------------------------

_RELEASE_FILES = {
    "train": ("train.json", "train.jsonl"),
    "valid": ("valid.json", "valid.jsonl", "validation.json"),
    "test": ("test.json", "test.jsonl"),
}


def _release_sentence(obj: dict, line_no: int, fallback_id: str) -> dict:
    tokens = obj.get("tokens")
    if tokens is None:
        raise DataError(f"line {line_no}: no 'tokens' field")
    tags = obj.get("ner_tags", obj.get("tags"))
    if tags is None:
        raise DataError(f"line {line_no}: no 'ner_tags'/'tags' field")
    if tags and isinstance(tags[0], int):
        try:
            tags = [TAG_ALPHABET[i] for i in tags]
        except IndexError:
            raise DataError(f"line {line_no}: tag index outside the 11-tag alphabet")
    region = obj.get("region", obj.get("region_id"))
    if region is None:
        raise DataError(f"line {line_no}: no 'region' field")
    doc_id = obj.get("doc_id", obj.get("document", obj.get("id", fallback_id)))
    return {
        "doc_id": str(doc_id),
        "region": Region.parse(region).display,
        "tokens": [str(t) for t in tokens],
        "tags": [str(t) for t in tags],
        **({"year": obj["year"]} if obj.get("year") is not None else {}),
    }


def load_histnero(directory: str | Path) -> Splits:
    """Read the public HistNERo release from disk and map it onto the
    canonical schema, keeping its published train/valid/test assignment.

    Accepts JSON-lines files or a single JSON array per part. Integer
    ner_tags are interpreted in the fixed 11-tag alphabet order.
    """
    directory = Path(directory)
    parts: dict[str, Corpus] = {}
    for part, candidates in _RELEASE_FILES.items():
        path = None
        for name in candidates:
            if (directory / name).exists():
                path = directory / name
                break
        if path is None:
            raise DataError(f"no {part} file found in {directory}")
        text = path.read_text(encoding="utf-8").strip()
        if text.startswith("["):
            rows = json.loads(text)
            records = [
                _release_sentence(obj, i + 1, f"{part}-{i:05d}")
                for i, obj in enumerate(rows)
            ]
        else:
            records = [
                _release_sentence(json.loads(line), i + 1, f"{part}-{i:05d}")
                for i, line in enumerate(text.splitlines())
                if line.strip()
            ]
        content = "\n".join(json.dumps(r, ensure_ascii=False) for r in records)
        parts[part] = loads_jsonl(content)
    return Splits(train=parts["train"], valid=parts["valid"], test=parts["test"])
