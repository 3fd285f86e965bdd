from .builtin import ALARM_PATH, SPEECH_PATH, load_builtin_ontology
from .models import UNKNOWN_ID, SoundCategory, SoundTemplate
from .registry import OntologyRegistry, TemplateMatch, dump_ontology, load_ontology
from .signatures import cosine_similarity, make_signature, normalize, shift_signature, spectral_centroid

__all__ = [
    "ALARM_PATH",
    "SPEECH_PATH",
    "UNKNOWN_ID",
    "OntologyRegistry",
    "SoundCategory",
    "SoundTemplate",
    "TemplateMatch",
    "cosine_similarity",
    "dump_ontology",
    "load_builtin_ontology",
    "load_ontology",
    "make_signature",
    "normalize",
    "shift_signature",
    "spectral_centroid",
]
