"""WordNet grounding, Porter stemming and n-gram language identification."""

from .porter import porter_stem
from .semantics import (
    ConceptVector,
    Grounder,
    class_fingerprint,
    concept_counts,
    default_profiles,
    default_taxonomy,
    ground_tweet,
    load_stopwords,
    preprocess,
    select_top_concepts,
    top_words,
)
from .textcat import LanguageProfile, build_profile, identify_language, load_profiles
from .wordnet import Taxonomy, TaxonomyError, rollup_depth4

__all__ = [
    "ConceptVector",
    "Grounder",
    "LanguageProfile",
    "Taxonomy",
    "TaxonomyError",
    "build_profile",
    "class_fingerprint",
    "concept_counts",
    "default_profiles",
    "default_taxonomy",
    "ground_tweet",
    "identify_language",
    "load_profiles",
    "load_stopwords",
    "porter_stem",
    "preprocess",
    "rollup_depth4",
    "select_top_concepts",
    "top_words",
]
