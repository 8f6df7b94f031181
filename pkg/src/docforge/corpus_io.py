"""Loading and validating external resources; persisting generated datasets."""

from __future__ import annotations

import json
import logging
import math
import os
import threading
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image

from . import codec
from ._wordlist import FALLBACK_WORDS
from .errors import (
    AssetError,
    DuplicateKey,
    IoError,
    JsonSyntax,
    NotUtf8,
    UnsupportedValue,
)

logger = logging.getLogger(__name__)

# -- corpus ------------------------------------------------------------------------


@dataclass
class CorpusSource:
    documents: list[list[str]]
    fallback: bool = False

    @property
    def word_count(self) -> int:
        return sum(len(doc) for doc in self.documents)


def _strip_controls(word: str) -> str:
    if word.isprintable():
        return word
    return "".join(ch for ch in word if unicodedata.category(ch) != "Cc")


def tokenize(text: str) -> list[str]:
    words = (_strip_controls(w) for w in text.split())
    return [w for w in words if w]


def load_corpus(paths: Sequence[str | os.PathLike]) -> CorpusSource:
    """Read UTF-8 text files, one document per file, split on whitespace.

    Files without words are skipped. When nothing usable remains the
    built-in word list is used and ``fallback`` is set.
    """
    documents = []
    for path in paths:
        try:
            raw = Path(path).read_bytes()
        except OSError as exc:
            raise IoError(path, exc.strerror or "unreadable") from exc
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise NotUtf8(path) from exc
        words = tokenize(text)
        if words:
            documents.append(words)
    if not documents:
        logger.info("no corpus words found, using the built-in word list")
        return CorpusSource([list(FALLBACK_WORDS)], fallback=True)
    return CorpusSource(documents)


def expand_paths(sources: Iterable[str | os.PathLike], suffixes: Iterable[str]) -> list[Path]:
    """Files named directly, plus matching files found (sorted) under directories."""
    suffixes = {s.lower() for s in suffixes}
    out: list[Path] = []
    for src in sources:
        p = Path(src)
        if p.is_dir():
            out.extend(sorted(f for f in p.rglob("*")
                              if f.is_file() and f.suffix.lower() in suffixes))
        elif p.exists():
            out.append(p)
        else:
            raise IoError(p, "no such file or directory")
    return out


# -- asset pools -------------------------------------------------------------------

POOL_SUFFIXES = {
    "background": (".png", ".jpg", ".jpeg", ".bmp", ".webp", ".tif", ".tiff"),
    "texture": (".png", ".jpg", ".jpeg", ".bmp", ".webp", ".tif", ".tiff"),
    "font": (".ttf", ".otf", ".ttc"),
}


@dataclass
class AssetPool:
    kind: str
    entries: list[tuple[str, Path]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> list[str]:
        return [asset_id for asset_id, _ in self.entries]

    def path(self, asset_id: str) -> Path:
        for candidate, path in self.entries:
            if candidate == asset_id:
                return path
        raise KeyError(asset_id)


def load_pool(kind: str, sources: Iterable[str | os.PathLike]) -> AssetPool:
    """Collect asset files of one kind.

    Directories are scanned recursively and files with other extensions are
    ignored; a file named explicitly must have a valid extension. Ids are
    paths relative to the scanned directory (or the bare file name).
    """
    if kind not in POOL_SUFFIXES:
        raise AssetError(f"unknown asset kind {kind!r}")
    suffixes = POOL_SUFFIXES[kind]
    pool = AssetPool(kind)
    seen = set()
    for src in sources:
        root = Path(src)
        if root.is_dir():
            found = sorted(f for f in root.rglob("*")
                           if f.is_file() and f.suffix.lower() in suffixes)
            items = [(f.relative_to(root).as_posix(), f) for f in found]
        elif root.is_file():
            if root.suffix.lower() not in suffixes:
                raise AssetError(f"{root}: not a {kind} file (expected {', '.join(suffixes)})")
            items = [(root.name, root)]
        else:
            raise IoError(root, "no such file or directory")
        for asset_id, path in items:
            if asset_id in seen:
                raise AssetError(f"duplicate {kind} id {asset_id!r}")
            seen.add(asset_id)
            pool.entries.append((asset_id, path))
    return pool


# -- DocTree JSON ------------------------------------------------------------------


def _reject_duplicates(pairs):
    obj = {}
    for key, value in pairs:
        if key in obj:
            raise DuplicateKey(key)
        obj[key] = value
    return obj


def _reject_constant(name):
    raise UnsupportedValue(f"non-standard JSON constant {name}")


def _coerce(value, path="$"):
    if value is None:
        raise UnsupportedValue(f"{path}: null has no token representation")
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, dict):
        return {k: _coerce(v, f"{path}.{k}") for k, v in value.items()}
    if isinstance(value, list):
        return [_coerce(v, f"{path}[{i}]") for i, v in enumerate(value)]
    return value


def parse_doctree(text: str) -> dict:
    """Parse JSON text into a validated DocTree.

    Numbers keep their literal spelling as text leaves and booleans become
    ``"true"``/``"false"``; ``null`` and duplicate keys are rejected.
    """
    try:
        data = json.loads(text, object_pairs_hook=_reject_duplicates,
                          parse_int=str, parse_float=str, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise JsonSyntax(exc.lineno, exc.colno, exc.msg) from exc
    return doctree_from_json(data)


def doctree_from_json(data) -> dict:
    """Validated DocTree from already-parsed JSON data (same coercions)."""
    tree = _coerce(data)
    codec.validate_tree(tree)
    return tree


def load_doctree(path: str | os.PathLike) -> dict:
    return parse_doctree(read_text(path))


def dump_doctree(tree: dict, indent: int | None = None) -> str:
    return json.dumps(tree, ensure_ascii=False, indent=indent)


def read_text(path) -> str:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(path, exc.strerror or "unreadable") from exc
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise NotUtf8(path) from exc


def read_jsonl(path: str | os.PathLike) -> list[dict]:
    """Records of a JSON Lines file; blank lines are ignored."""
    records = []
    for lineno, line in enumerate(read_text(path).splitlines(), 1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line, object_pairs_hook=_reject_duplicates))
        except json.JSONDecodeError as exc:
            raise JsonSyntax(lineno, exc.colno, exc.msg) from exc
    return records


# -- dataset writer ----------------------------------------------------------------

MANIFEST_NAME = "metadata.jsonl"
IMAGE_DIR = "images"


def image_name(index: int) -> str:
    return f"{IMAGE_DIR}/{index:08d}.png"


class DatasetWriter:
    """Writes ``images/{index:08}.png`` plus one manifest line per sample.

    ``write`` may be called from several threads. Records are appended as
    they arrive and the manifest is re-sorted by index on ``close``.
    Noisy synthetic images barely compress, so fast zlib level 1 is the default.
    """

    def __init__(self, out_dir: str | os.PathLike, compress_level: int = 1):
        self.out_dir = Path(out_dir)
        self.compress_level = compress_level
        self._lock = threading.Lock()
        self._closed = False
        try:
            (self.out_dir / IMAGE_DIR).mkdir(parents=True, exist_ok=True)
            self.manifest_path = self.out_dir / MANIFEST_NAME
            self._fh = self.manifest_path.open("w", encoding="utf-8")
        except OSError as exc:
            raise IoError(self.out_dir, exc.strerror or "not writable") from exc

    def write(self, index: int, image: np.ndarray, annotation) -> None:
        name = image_name(index)
        Image.fromarray(image, mode="RGB").save(
            self.out_dir / name, format="PNG", compress_level=self.compress_level
        )
        line = json.dumps(annotation.to_record(name), ensure_ascii=False)
        with self._lock:
            self._fh.write(line + "\n")

    def close(self) -> None:
        with self._lock:
            if self._closed:
                return
            self._closed = True
            self._fh.close()
            lines = self.manifest_path.read_text(encoding="utf-8").splitlines()
            lines.sort(key=lambda line: json.loads(line)["file_name"])
            tmp = self.manifest_path.with_suffix(".tmp")
            tmp.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
            tmp.replace(self.manifest_path)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


# -- manifest validation -----------------------------------------------------------


@dataclass
class Violation:
    index: int
    kind: str
    message: str


@dataclass
class ValidationReport:
    records: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, index: int, kind: str, message: str) -> None:
        self.violations.append(Violation(index, kind, message))

    def to_dict(self) -> dict:
        return {
            "records": self.records,
            "ok": self.ok,
            "violations": [{"index": v.index, "kind": v.kind, "message": v.message}
                           for v in self.violations],
        }


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _schema_problem(record) -> str | None:
    if not isinstance(record, dict):
        return "record is not an object"
    if not isinstance(record.get("file_name"), str) or not record["file_name"]:
        return "file_name must be a non-empty string"
    gt = record.get("ground_truth")
    if not isinstance(gt, dict) or not isinstance(gt.get("gt_parse"), dict):
        return "ground_truth.gt_parse must be an object"
    if not isinstance(gt["gt_parse"].get("text_sequence"), str):
        return "ground_truth.gt_parse.text_sequence must be a string"
    words = record.get("words")
    if not isinstance(words, list):
        return "words must be a list"
    for i, word in enumerate(words):
        if not isinstance(word, dict) or not isinstance(word.get("text"), str) or not word["text"]:
            return f"words[{i}].text must be a non-empty string"
        quad = word.get("quad")
        if (not isinstance(quad, list) or len(quad) != 4
                or not all(isinstance(p, list) and len(p) == 2 and all(map(_is_number, p))
                           for p in quad)):
            return f"words[{i}].quad must be four [x, y] number pairs"
    return None


def validate_manifest(path: str | os.PathLike, strict: bool = False) -> ValidationReport:
    """Check a ``metadata.jsonl`` manifest; problems are reported, not raised.

    Always checked: record schema, unique file names, non-negative quad
    coordinates. ``strict`` additionally opens every image and checks quads
    against its size and that word texts re-join to ``text_sequence``.
    """
    path = Path(path)
    report = ValidationReport()
    root = path.parent
    seen: dict[str, int] = {}
    for index, line in enumerate(read_text(path).splitlines()):
        if not line.strip():
            continue
        report.records += 1
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            report.add(index, "json", exc.msg)
            continue
        problem = _schema_problem(record)
        if problem:
            report.add(index, "schema", problem)
            continue
        name = record["file_name"]
        if name in seen:
            report.add(index, "duplicate", f"file_name {name!r} already used by record {seen[name]}")
        else:
            seen[name] = index

        limits = None
        if strict:
            try:
                with Image.open(root / name) as img:
                    limits = img.size
            except (OSError, ValueError) as exc:
                report.add(index, "image", f"{name}: {exc}")
        bad = _first_out_of_bounds(record["words"], limits)
        if bad is not None:
            report.add(index, "bounds", f"word {bad[0]} vertex {bad[1]} outside image")

        if strict:
            joined = " ".join(w["text"] for w in record["words"])
            if joined != record["ground_truth"]["gt_parse"]["text_sequence"]:
                report.add(index, "text", "word texts do not re-join to text_sequence")
    return report


def _first_out_of_bounds(words, limits):
    for i, word in enumerate(words):
        for x, y in word["quad"]:
            if x < 0 or y < 0 or (limits is not None and (x > limits[0] or y > limits[1])):
                return i, [x, y]
    return None

