"""Exception hierarchy shared by all docforge modules."""

from __future__ import annotations


class DocforgeError(Exception):
    """Base class for every error raised by docforge."""


# -- token codec -------------------------------------------------------------


class CodecError(DocforgeError):
    pass


class InvalidFieldName(CodecError):
    def __init__(self, name: object):
        super().__init__(f"invalid field name: {name!r}")
        self.name = name


class UnregisteredField(CodecError):
    def __init__(self, name: str):
        super().__init__(f"field {name!r} is not registered in the vocabulary")
        self.name = name


class UnregisteredPrompt(CodecError):
    def __init__(self, name: str):
        super().__init__(f"prompt {name!r} is not registered in the vocabulary")
        self.name = name


class MissingArgument(CodecError):
    pass


class SequenceTooLong(CodecError):
    def __init__(self, limit: int, actual: int):
        super().__init__(f"sequence has {actual} items, limit is {limit}")
        self.limit = limit
        self.actual = actual


class InvalidDocTree(CodecError):
    pass


class VocabError(CodecError):
    pass


class SurfaceSyntaxError(CodecError):
    pass


# -- metrics -----------------------------------------------------------------


class MetricError(DocforgeError):
    pass


class EmptyGroundTruth(MetricError):
    pass


class NoGoldAnswers(MetricError):
    pass


class LengthMismatch(MetricError):
    def __init__(self, n_pred: int, n_gt: int):
        super().__init__(f"{n_pred} predictions for {n_gt} ground truths")
        self.n_pred = n_pred
        self.n_gt = n_gt


class MalformedGroundTruth(MetricError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"ground truth #{index}: {reason}")
        self.index = index


# -- ingestion ---------------------------------------------------------------


class IngestError(DocforgeError):
    pass


class IoError(IngestError):
    def __init__(self, path, reason: str = "unreadable"):
        super().__init__(f"{path}: {reason}")
        self.path = path


class NotUtf8(IngestError):
    def __init__(self, path):
        super().__init__(f"{path}: not valid UTF-8")
        self.path = path


class JsonSyntax(IngestError):
    def __init__(self, line: int, col: int, msg: str = "invalid JSON"):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


class DuplicateKey(IngestError):
    def __init__(self, key: str):
        super().__init__(f"duplicate key: {key!r}")
        self.key = key


class UnsupportedValue(IngestError):
    pass


class AssetError(IngestError):
    pass


# -- generator ---------------------------------------------------------------


class GenerationError(DocforgeError):
    pass


class ConfigError(GenerationError):
    pass


class EmptyPool(GenerationError):
    def __init__(self, kind: str):
        super().__init__(f"asset pool {kind!r} is empty and fallbacks are disabled")
        self.kind = kind


class AssetMissing(GenerationError):
    def __init__(self, asset_id: str):
        super().__init__(f"asset {asset_id!r} cannot be resolved")
        self.asset_id = asset_id


class FontGlyphMissing(GenerationError):
    def __init__(self, codepoint: int, font_id: str = ""):
        super().__init__(f"font {font_id!r} has no glyph for U+{codepoint:04X}")
        self.codepoint = codepoint
        self.font_id = font_id


class IndexedGenerationError(GenerationError):
    """Wraps a failure of one sample so callers know which index broke."""

    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"sample {index}: {cause}")
        self.index = index
        self.cause = cause
