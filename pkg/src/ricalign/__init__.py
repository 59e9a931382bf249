"""Structured scoring of post-publication review statements, inter-reviewer
agreement with Krippendorff's alpha, and binned citation/altmetric tables."""

__version__ = "0.1.0"

from .agreement import (AlphaResult, ReliabilityMatrix, alpha_across_runs, alpha_per_article,
                        article_reliability, krippendorff_alpha)
from .analysis import (AlphaHistogram, BinLabel, BinRow, ReportTable, alpha_histogram,
                       altmetric_table, article_mean_k, assign_bin, bibliometric_table,
                       mean_alpha)
from .corpus import (Corpus, ExtractionConfig, RicArticle, Statement, extract_doi,
                     extract_statements, parse_corpus, write_corpus)
from .enrichment import (AltmetricRecord, CitationRecord, EnrichedArticle, enrich,
                         lookup_altmetrics, lookup_citations)
from .scoring import (PromptTemplate, ScoredStatement, ScoreVector, build_prompt,
                      criterion_averages, mock_score, parse_score_response, score_statement)

__all__ = [name for name in dir() if not name.startswith("_")]
