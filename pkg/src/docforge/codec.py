"""Conversion between document trees and flat special-token sequences.

A document tree is plain JSON-like Python data: ``dict`` (ordered, string
keys), ``list`` and ``str``. Every field ``k`` is delimited by the pair
``[START_k]`` / ``[END_k]``; arrays repeat the delimited group once per
element, and categorical values registered as class labels collapse into a
single ``[label]`` token.

Decoding accepts arbitrary (model generated) sequences and never raises.
Anything that cannot be placed in the tree is reported as a
:class:`RecoveryEvent` whose ``[start, end)`` span covers the skipped items.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Union

from .errors import (
    CodecError,
    InvalidDocTree,
    InvalidFieldName,
    MissingArgument,
    SequenceTooLong,
    UnregisteredField,
    UnregisteredPrompt,
    VocabError,
)

NAME_RE = re.compile(r"[A-Za-z0-9_.\-]+")

DocTree = dict
Value = Union[dict, list, str]


def is_valid_name(name: object) -> bool:
    return isinstance(name, str) and NAME_RE.fullmatch(name) is not None


def _check_name(name: object) -> None:
    if not is_valid_name(name):
        raise InvalidFieldName(name)


# -- token items ---------------------------------------------------------------


@dataclass(frozen=True)
class FieldStart:
    name: str

    def __post_init__(self):
        _check_name(self.name)

    @property
    def surface(self) -> str:
        return f"[START_{self.name}]"


@dataclass(frozen=True)
class FieldEnd:
    name: str

    def __post_init__(self):
        _check_name(self.name)

    @property
    def surface(self) -> str:
        return f"[END_{self.name}]"


@dataclass(frozen=True)
class ClassToken:
    label: str

    def __post_init__(self):
        _check_name(self.label)

    @property
    def surface(self) -> str:
        return f"[{self.label}]"


@dataclass(frozen=True)
class PromptToken:
    name: str

    def __post_init__(self):
        _check_name(self.name)

    @property
    def surface(self) -> str:
        return f"[{self.name}]"


@dataclass(frozen=True)
class Text:
    text: str

    def __post_init__(self):
        if not isinstance(self.text, str) or not self.text:
            raise CodecError("text items must be non-empty strings")


TokenItem = Union[FieldStart, FieldEnd, ClassToken, PromptToken, Text]
SPECIAL_TYPES = (FieldStart, FieldEnd, ClassToken, PromptToken)


# -- vocabulary ----------------------------------------------------------------


@dataclass(frozen=True)
class Vocab:
    """Registered special-token names.

    ``max_length`` bounds the number of token items ``encode`` may emit
    (0 disables the check).
    """

    fields: frozenset = frozenset()
    classes: frozenset = frozenset()
    prompts: frozenset = frozenset()
    max_length: int = 0

    def __post_init__(self):
        for attr in ("fields", "classes", "prompts"):
            names = frozenset(getattr(self, attr))
            for name in names:
                if not is_valid_name(name):
                    raise VocabError(f"{attr}: invalid name {name!r}")
            object.__setattr__(self, attr, names)
        if not isinstance(self.max_length, int) or self.max_length < 0:
            raise VocabError("max_length must be a non-negative integer")
        seen: dict[str, str] = {}
        for surface, owner in self._surfaces():
            if surface in seen:
                raise VocabError(
                    f"{surface} is rendered by both {seen[surface]} and {owner}"
                )
            seen[surface] = owner

    def _surfaces(self):
        for name in sorted(self.fields):
            yield f"[START_{name}]", f"field {name!r}"
            yield f"[END_{name}]", f"field {name!r}"
        for name in sorted(self.classes):
            yield f"[{name}]", f"class {name!r}"
        for name in sorted(self.prompts):
            yield f"[{name}]", f"prompt {name!r}"

    def special_tokens(self) -> list[str]:
        """Every surface string this vocabulary can produce, sorted."""
        return sorted(surface for surface, _ in self._surfaces())

    @classmethod
    def from_dict(cls, data: dict) -> "Vocab":
        unknown = set(data) - {"fields", "classes", "prompts", "max_length"}
        if unknown:
            raise VocabError(f"unknown vocabulary keys: {sorted(unknown)}")
        for key in ("fields", "classes", "prompts"):
            values = data.get(key, [])
            if not isinstance(values, list) or not all(isinstance(v, str) for v in values):
                raise VocabError(f"{key!r} must be a list of strings")
        return cls(
            fields=frozenset(data.get("fields", [])),
            classes=frozenset(data.get("classes", [])),
            prompts=frozenset(data.get("prompts", [])),
            max_length=data.get("max_length", 0),
        )

    def to_dict(self) -> dict:
        return {
            "fields": sorted(self.fields),
            "classes": sorted(self.classes),
            "prompts": sorted(self.prompts),
            "max_length": self.max_length,
        }

    def extended(self, fields: Iterable[str] = (), classes: Iterable[str] = (),
                 prompts: Iterable[str] = ()) -> "Vocab":
        return Vocab(
            fields=self.fields | frozenset(fields),
            classes=self.classes | frozenset(classes),
            prompts=self.prompts | frozenset(prompts),
            max_length=self.max_length,
        )


# -- document trees ------------------------------------------------------------


def validate_tree(tree: object) -> None:
    """Raise :class:`InvalidDocTree` / :class:`InvalidFieldName` unless valid.

    Arrays must be non-empty and hold objects or strings; strings must be
    non-empty. Both restrictions keep every tree representable as tokens.
    """
    if not isinstance(tree, dict):
        raise InvalidDocTree("document root must be an object")
    _validate_object(tree, "$")


def _validate_object(obj: dict, path: str) -> None:
    for key, value in obj.items():
        _check_name(key)
        where = f"{path}.{key}"
        if isinstance(value, list):
            if not value:
                raise InvalidDocTree(f"{where}: empty arrays are not representable")
            for i, element in enumerate(value):
                if isinstance(element, list):
                    raise InvalidDocTree(f"{where}[{i}]: nested arrays are not supported")
                _validate_value(element, f"{where}[{i}]")
        else:
            _validate_value(value, where)


def _validate_value(value: object, path: str) -> None:
    if isinstance(value, dict):
        _validate_object(value, path)
    elif isinstance(value, str):
        if not value:
            raise InvalidDocTree(f"{path}: empty strings are not representable")
    else:
        raise InvalidDocTree(f"{path}: unsupported value of type {type(value).__name__}")


def canonicalize(tree: Value) -> Value:
    """Collapse every single-element array into its element, recursively."""
    if isinstance(tree, dict):
        return {k: canonicalize(v) for k, v in tree.items()}
    if isinstance(tree, list):
        if len(tree) == 1:
            return canonicalize(tree[0])
        return [canonicalize(v) for v in tree]
    return tree


def trees_identical(a: Value, b: Value) -> bool:
    """Structural equality that, unlike ``==`` on dicts, respects key order."""
    if isinstance(a, dict) and isinstance(b, dict):
        return list(a) == list(b) and all(trees_identical(a[k], b[k]) for k in a)
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(trees_identical(x, y) for x, y in zip(a, b))
    return type(a) is type(b) and a == b


# -- encoding ------------------------------------------------------------------


def encode(tree: DocTree, vocab: Vocab) -> list[TokenItem]:
    """Serialize ``tree`` depth-first into token items."""
    validate_tree(tree)
    out: list[TokenItem] = []
    _encode_object(tree, vocab, out)
    if vocab.max_length and len(out) > vocab.max_length:
        raise SequenceTooLong(vocab.max_length, len(out))
    return out


def _encode_object(obj: dict, vocab: Vocab, out: list) -> None:
    for key, value in obj.items():
        if key not in vocab.fields:
            raise UnregisteredField(key)
        for element in value if isinstance(value, list) else (value,):
            out.append(FieldStart(key))
            if isinstance(element, dict):
                _encode_object(element, vocab, out)
            elif element in vocab.classes:
                out.append(ClassToken(element))
            else:
                out.append(Text(element))
            out.append(FieldEnd(key))


# -- decoding ------------------------------------------------------------------


class EventKind(str, enum.Enum):
    LOST_FIELD = "LostField"
    STRAY_END = "StrayEnd"
    ORPHAN_TEXT = "OrphanText"
    MIXED_CONTENT = "MixedContent"
    DUPLICATE_FIELD = "DuplicateField"
    UNKNOWN_TOKEN = "UnknownToken"
    STRAY_PROMPT = "StrayPrompt"


@dataclass(frozen=True)
class RecoveryEvent:
    """Items ``seq[start:end]`` were dropped for reason ``kind``."""

    kind: EventKind
    name: str | None
    start: int
    end: int

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "name": self.name,
                "start": self.start, "end": self.end}


@dataclass
class _Frame:
    name: str | None
    start: int
    leaves: list = field(default_factory=list)  # (index, text)
    children: list = field(default_factory=list)  # (name, value, start, end)
    events: list = field(default_factory=list)


def decode(seq: Iterable[TokenItem], vocab: Vocab) -> tuple[DocTree, list[RecoveryEvent]]:
    """Rebuild a document tree from a possibly malformed token sequence.

    Recovery rules:

    * a field left open when an enclosing field closes (or input ends) is
      discarded with all of its content; one ``LostField`` event spans it;
    * an end token without an open field of that name is a ``StrayEnd``;
    * leaves outside any field are ``OrphanText``;
    * leaves next to child fields inside one field are ``MixedContent``;
    * a key repeated non-consecutively keeps its first run
      (``DuplicateField``);
    * names missing from ``vocab`` are ``UnknownToken``;
    * prompt tokens are only accepted as a leading run (``StrayPrompt``).

    Events raised inside a discarded field are subsumed by its ``LostField``.
    """
    items = list(seq)
    stack = [_Frame(None, 0)]
    in_prompt = True

    for i, item in enumerate(items):
        top = stack[-1]
        if isinstance(item, PromptToken):
            if item.name not in vocab.prompts:
                top.events.append(RecoveryEvent(EventKind.UNKNOWN_TOKEN, item.name, i, i + 1))
            elif not in_prompt:
                top.events.append(RecoveryEvent(EventKind.STRAY_PROMPT, item.name, i, i + 1))
            continue
        in_prompt = False

        if isinstance(item, FieldStart):
            if item.name not in vocab.fields:
                top.events.append(RecoveryEvent(EventKind.UNKNOWN_TOKEN, item.name, i, i + 1))
            else:
                stack.append(_Frame(item.name, i))
        elif isinstance(item, FieldEnd):
            if item.name not in vocab.fields:
                top.events.append(RecoveryEvent(EventKind.UNKNOWN_TOKEN, item.name, i, i + 1))
                continue
            depth = _innermost(stack, item.name)
            if depth is None:
                top.events.append(RecoveryEvent(EventKind.STRAY_END, item.name, i, i + 1))
                continue
            frame = stack[depth]
            if depth < len(stack) - 1:
                lost = stack[depth + 1]
                frame.events.append(RecoveryEvent(EventKind.LOST_FIELD, lost.name, lost.start, i))
                del stack[depth + 1:]
            stack.pop()
            value = _build(frame)
            parent = stack[-1]
            parent.children.append((frame.name, value, frame.start, i + 1))
            parent.events.extend(frame.events)
        else:
            if isinstance(item, ClassToken):
                if item.label not in vocab.classes:
                    top.events.append(RecoveryEvent(EventKind.UNKNOWN_TOKEN, item.label, i, i + 1))
                    continue
                text = item.label
            elif isinstance(item, Text):
                text = item.text
            else:
                raise CodecError(f"not a token item: {item!r}")
            if top.name is None:
                top.events.append(RecoveryEvent(EventKind.ORPHAN_TEXT, None, i, i + 1))
            else:
                top.leaves.append((i, text))

    root = stack[0]
    if len(stack) > 1:
        lost = stack[1]
        root.events.append(RecoveryEvent(EventKind.LOST_FIELD, lost.name, lost.start, len(items)))
    tree = _build(root)
    if not isinstance(tree, dict):  # root never holds leaves, but stay total
        tree = {}
    events = sorted(root.events, key=lambda e: (e.start, e.end))
    return tree, events


def _innermost(stack: list, name: str) -> int | None:
    for depth in range(len(stack) - 1, 0, -1):
        if stack[depth].name == name:
            return depth
    return None


def _build(frame: _Frame) -> Value:
    if frame.children:
        for index, _ in frame.leaves:
            frame.events.append(RecoveryEvent(EventKind.MIXED_CONTENT, frame.name, index, index + 1))
        return _fold(frame)
    if frame.leaves:
        return " ".join(text for _, text in frame.leaves)
    return {}


def _fold(frame: _Frame) -> dict:
    obj: dict = {}
    children = frame.children
    i = 0
    while i < len(children):
        name = children[i][0]
        j = i
        while j + 1 < len(children) and children[j + 1][0] == name:
            j += 1
        if name in obj:
            frame.events.append(
                RecoveryEvent(EventKind.DUPLICATE_FIELD, name, children[i][2], children[j][3])
            )
        elif i == j:
            obj[name] = children[i][1]
        else:
            obj[name] = [c[1] for c in children[i:j + 1]]
        i = j + 1
    return obj


# -- prompts -------------------------------------------------------------------

# Prompt = opening tokens of the task's target tree.
OPENING_FIELD = {"classification": "class", "read_text": "text_sequence"}
# Question-conditioned tasks: (question field, answer field).
QUESTION_TASKS = {"docvqa": ("question", "answer")}


def make_prompt(task: str, vocab: Vocab, question: str | None = None) -> list[TokenItem]:
    """Token prefix that conditions generation on ``task``.

    Built-in tasks open their target tree: ``classification`` ->
    ``[START_class]``, ``read_text`` -> ``[START_text_sequence]``, and
    ``docvqa`` wraps the question before opening the answer. Any other
    registered prompt name becomes a single prompt token.
    """
    if task not in vocab.prompts:
        raise UnregisteredPrompt(task)
    if task in QUESTION_TASKS:
        if not question:
            raise MissingArgument(f"task {task!r} requires a question")
        q_field, a_field = QUESTION_TASKS[task]
        for name in (q_field, a_field):
            if name not in vocab.fields:
                raise UnregisteredField(name)
        question_item = ClassToken(question) if question in vocab.classes else Text(question)
        return [FieldStart(q_field), question_item, FieldEnd(q_field), FieldStart(a_field)]
    if question is not None:
        raise CodecError(f"task {task!r} does not take a question")
    if task in OPENING_FIELD:
        name = OPENING_FIELD[task]
        if name not in vocab.fields:
            raise UnregisteredField(name)
        return [FieldStart(name)]
    return [PromptToken(task)]


# -- one-line surface form -----------------------------------------------------

_SPECIAL_RE = re.compile(r"\[([A-Za-z0-9_.\-]+)\]")
_ESCAPES = str.maketrans({"\\": "\\\\", "[": "\\[", "]": "\\]"})


def escape_text(text: str) -> str:
    return text.translate(_ESCAPES)


def to_surface(seq: Iterable[TokenItem]) -> str:
    """Render token items as one line, e.g. ``[START_nm] A [END_nm]``.

    A single space separates text from an adjacent special token (and from
    an adjacent text item). Literal ``[``, ``]`` and ``\\`` are
    backslash-escaped.
    """
    parts: list[str] = []
    prev_text = None
    for item in seq:
        if isinstance(item, Text):
            if parts:
                parts.append(" ")
            parts.append(escape_text(item.text))
            prev_text = True
        else:
            if prev_text:
                parts.append(" ")
            parts.append(item.surface)
            prev_text = False
    return "".join(parts)


def from_surface(line: str, vocab: Vocab | None = None) -> list[TokenItem]:
    """Parse the one-line form produced by :func:`to_surface`.

    ``[START_x]``/``[END_x]`` become field tokens, ``[name]`` a prompt token
    if ``name`` is a registered prompt and a class token otherwise.
    Unescaped brackets that do not form a special token are kept as text.
    """
    prompts = vocab.prompts if vocab is not None else frozenset()
    items: list[TokenItem] = []
    buf: list[str] = []
    buf_after_special = False

    def flush(before_special: bool) -> None:
        text = "".join(buf)
        buf.clear()
        if buf_after_special and text.startswith(" "):
            text = text[1:]
        if before_special and text.endswith(" "):
            text = text[:-1]
        if text:
            items.append(Text(text))

    i, n = 0, len(line)
    while i < n:
        ch = line[i]
        if ch == "\\" and i + 1 < n and line[i + 1] in "[]\\":
            buf.append(line[i + 1])
            i += 2
            continue
        if ch == "[":
            m = _SPECIAL_RE.match(line, i)
            if m:
                flush(before_special=True)
                items.append(_special(m.group(1), prompts))
                buf_after_special = True
                i = m.end()
                continue
        buf.append(ch)
        i += 1
    flush(before_special=False)
    return items


def _special(name: str, prompts: frozenset) -> TokenItem:
    for prefix, cls in (("START_", FieldStart), ("END_", FieldEnd)):
        if name.startswith(prefix) and is_valid_name(name[len(prefix):]):
            return cls(name[len(prefix):])
    if name in prompts:
        return PromptToken(name)
    return ClassToken(name)
