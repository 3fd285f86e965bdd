"""Exception hierarchy. Every error carries the stable code used in protocol acks."""

from typing import Optional


class EarSimError(Exception):
    """Base class for all earsim errors."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class ConfigError(EarSimError):
    code = "config_error"


# --- Ontology ---

class OntologyError(EarSimError):
    code = "ontology_error"


class UnknownCategoryError(OntologyError):
    code = "unknown_category"


class MalformedSignatureError(OntologyError):
    code = "malformed_signature"


# --- Scene ---

class SceneError(EarSimError):
    code = "scene_error"


class SceneSyntaxError(SceneError):
    code = "syntax_error"

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SceneSemanticError(SceneError):
    code = "semantic_error"

    def __init__(self, message: str, source_id: Optional[str] = None, violations: Optional[list] = None):
        super().__init__(message)
        self.source_id = source_id
        self.violations = violations or []


class UnknownSourceError(SceneError):
    code = "unknown_source"


# --- Attention ---

class AttentionError(EarSimError):
    code = "attention_error"


class CapacityFullError(AttentionError):
    code = "capacity_full"


class NotFoundError(AttentionError):
    code = "not_found"


class DeadStreamError(AttentionError):
    code = "dead_stream"


# --- Protocol ---

class ProtocolError(EarSimError):
    code = "protocol_error"


class BadRequestError(ProtocolError):
    code = "bad_request"


class BadSeqError(ProtocolError):
    code = "bad_seq"


class ScenarioError(EarSimError):
    code = "scenario_error"
