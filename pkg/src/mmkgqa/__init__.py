"""Multimodal recipe knowledge graph: construction, template QA generation,
corpus refinement, consistency checks and hybrid image provisioning."""
from ._backend import BACKEND
from .consistency import (
    ConsistencyConfig,
    ConsistencyReport,
    MockVisionQAClient,
    RemoteVisionQAClient,
    Verdict,
    detect_mismatch,
    hallucination_check,
    hallucination_rate,
    mismatch_rate,
)
from .diversity import ClusterAssignment, DiversityReport, davies_bouldin, diversity_report, dunn, kmeans, silhouette
from .embeddings import HashingEmbedder, RemoteEmbedder, TfidfEmbedder, cosine, tokenize
from .errors import (
    ClusteringError,
    EmbeddingError,
    GraphError,
    MMKGError,
    ParseError,
    SchemaError,
    StageError,
    TransportError,
    UnresolvableIngredient,
    ValidationError,
)
from .ingestion import build, build_graph, enrich_nutrition, link_images, parse_recipes, standardize
from .kg import EntityId, ImageLink, KnowledgeGraph, Kind, NutritionFacts, Triple
from .pipeline import KGTextClient, MultimodalAnswer, RemoteTextAnswerClient, answer_question
from .qa import QAPair, Template, generate_corpus, ingest_augmented, instantiate, load_templates
from .refine import apply_curation, balance, dedupe_exact, dedupe_semantic
from .router import (
    ImageIndex,
    MockGenerationClient,
    RemoteGenerationClient,
    RoutingDecision,
    build_index,
    retrieve,
    route,
    strategy_report,
)
from .textmetrics import bleu, rouge_l, rouge_n, token_f1

__version__ = "0.1.0"
