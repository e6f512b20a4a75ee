import logging
import time
import uuid
from contextlib import contextmanager
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

from app.catalog import CatalogCheck, NormalForm, NormalFormCatalog
from app.enumeration import enumerate_classes, type_table
from app.exceptions import BaseAppException
from app.feasibility import abs_degree, count_type2, cusp_parity, exists_type, is_feasible, type_of
from app.models import (
    AstTuple,
    ClassCount,
    ClassListing,
    ClassReport,
    ExistenceVerdict,
    FeasibilityReport,
    GermEquivalence,
    HashTuple,
    LegalPerm,
    LevelCurve,
    RealizationReport,
    SampledCircleMap,
    StarredTuple,
)
from app.polynomials import GermEvaluator, backend_for, format_polynomial, jacobian_det, parse_germ
from app.realization import build_spec, realize, sample_realization
from app.recognition import RecognitionConfig, fold_check, germ_ast, germ_equiv, starred_germ_tuple, trace_level_curve
from app.tuples import (
    apply,
    ast_from_hash,
    canonical_ast,
    equivalent,
    hash_from_ast,
    orbit,
    parse_ast,
    parse_hash,
    parse_runs,
    star_indices,
)

logger = logging.getLogger(__name__)


class ClassificationService:
    """Front door for the CLI and the HTTP API: parses inputs, runs one operation, logs it."""

    @contextmanager
    def _operation(self, name: str, subject: str) -> Iterator[None]:
        request_id = str(uuid.uuid4())
        started = time.perf_counter()
        logger.info(f"Processing {name} request {request_id} for {subject}")
        try:
            yield
        except BaseAppException as e:
            logger.warning(f"Request {request_id} ({name}) failed: {e.message}")
            raise
        except Exception as e:
            logger.error(f"Request {request_id} ({name}) failed with {type(e).__name__}: {e}")
            raise
        elapsed = time.perf_counter() - started
        logger.info(f"Successfully processed {name} request {request_id} in {elapsed:.3f}s")

    @staticmethod
    def recognition_config(eps0: Optional[float] = None, precision: Optional[int] = None,
                           seed: Optional[int] = None) -> RecognitionConfig:
        return RecognitionConfig.from_settings(eps0=eps0, precision=precision, seed=seed)

    # Tuples

    def canonical(self, word: str) -> AstTuple:
        with self._operation("canonical", word):
            return canonical_ast(parse_ast(word))

    def orbit(self, word: str) -> List[AstTuple]:
        with self._operation("orbit", word):
            return orbit(parse_ast(word))

    def apply(self, word: str, shift: int = 0, reversed: bool = False) -> AstTuple:
        with self._operation("apply", word):
            t = parse_ast(word)
            return apply(LegalPerm(modulus=len(t), shift=shift, reversed=reversed), t)

    def equivalent(self, first: str, second: str) -> bool:
        with self._operation("equivalent", f"{first} {second}"):
            return equivalent(parse_ast(first), parse_ast(second))

    def hash(self, word: str) -> HashTuple:
        with self._operation("hash", word):
            return hash_from_ast(parse_ast(word))

    def unhash(self, text: str) -> AstTuple:
        with self._operation("unhash", text):
            return ast_from_hash(parse_hash(text))

    def star(self, word: str) -> StarredTuple:
        with self._operation("star", word):
            return star_indices(parse_ast(word))

    # Hash tuples

    def feasibility(self, text: str, m: Optional[int] = None) -> FeasibilityReport:
        with self._operation("feasibility", text):
            return is_feasible(parse_runs(text), m)

    def type_of(self, text: str) -> Tuple[int, int]:
        with self._operation("type", text):
            return type_of(parse_hash(text))

    def degree(self, text: str) -> Fraction:
        with self._operation("degree", text):
            h = parse_hash(text)
            degree = abs_degree(h)
            if degree.denominator != 1:
                logger.info(f"Degree of {text} is not an integer ({degree}); the tuple is infeasible")
            return degree

    def cusp_parity(self, text: str) -> int:
        with self._operation("cusp-parity", text):
            return cusp_parity(parse_hash(text))

    def exists(self, n: int, m: int) -> ExistenceVerdict:
        with self._operation("exists", f"({n},{m})"):
            return exists_type(n, m)

    def count_type2(self, m: int) -> int:
        with self._operation("count2", f"m={m}"):
            return count_type2(m)

    # Enumeration

    def enumerate(self, n: int, m: int, force: bool = False, workers: Optional[int] = None) -> ClassListing:
        with self._operation("enumerate", f"({n},{m})"):
            return enumerate_classes(n, m, force=force, workers=workers)

    def table(self, n_max: int, m_max: int, force: bool = False, workers: Optional[int] = None) -> List[ClassCount]:
        with self._operation("table", f"n<={n_max}, m<={m_max}"):
            return type_table(n_max, m_max, force=force, workers=workers)

    # Realization

    def realize(self, text: str, samples: Optional[int] = None) -> RealizationReport:
        with self._operation("realize", text):
            return realize(parse_hash(text), samples)

    def sample(self, text: str, samples: Optional[int] = None) -> SampledCircleMap:
        with self._operation("sample", text):
            return sample_realization(build_spec(parse_hash(text)), samples)

    # Germs

    def jacobian(self, f1: str, f2: str) -> str:
        with self._operation("jacobian", f"({f1}, {f2})"):
            return format_polynomial(jacobian_det(parse_germ(f1, f2)))

    def fold_check(self, f1: str, f2: str, x: float, y: float) -> bool:
        with self._operation("fold-check", f"({f1}, {f2}) at ({x}, {y})"):
            return fold_check(parse_germ(f1, f2), (x, y))

    def trace(self, f1: str, f2: str, eps: float, precision: Optional[int] = None) -> Tuple[LevelCurve, List[float]]:
        """The level curve |g| = eps and arg g at each of its vertices."""
        with self._operation("trace", f"({f1}, {f2}) at eps={eps}"):
            germ = parse_germ(f1, f2)
            config = self.recognition_config(precision=precision)
            evaluator = GermEvaluator(germ, backend_for(config.precision))
            curve = trace_level_curve(germ, eps, config, evaluator)
            return curve, [evaluator.angle(x, y) for x, y in curve.points]

    def recognize(self, f1: str, f2: str, eps0: Optional[float] = None, precision: Optional[int] = None,
                  seed: Optional[int] = None) -> ClassReport:
        with self._operation("recognize", f"({f1}, {f2})"):
            return germ_ast(parse_germ(f1, f2), self.recognition_config(eps0, precision, seed))

    def starred(self, f1: str, f2: str, eps0: Optional[float] = None, precision: Optional[int] = None,
                seed: Optional[int] = None) -> StarredTuple:
        with self._operation("starred", f"({f1}, {f2})"):
            return starred_germ_tuple(parse_germ(f1, f2), self.recognition_config(eps0, precision, seed))

    def germ_equiv(self, first: Tuple[str, str], second: Tuple[str, str], eps0: Optional[float] = None,
                   precision: Optional[int] = None, seed: Optional[int] = None) -> GermEquivalence:
        with self._operation("germ-equiv", f"{first} vs {second}"):
            g1, g2 = parse_germ(*first), parse_germ(*second)
            return germ_equiv(g1, g2, self.recognition_config(eps0, precision, seed))

    # Normal forms

    def catalog(self) -> Dict[str, NormalForm]:
        return NormalFormCatalog.list_forms()

    def catalog_check(self, name: str, eps0: Optional[float] = None, precision: Optional[int] = None,
                      seed: Optional[int] = None) -> CatalogCheck:
        with self._operation("catalog-check", name):
            return NormalFormCatalog.check(name, self.recognition_config(eps0, precision, seed))


def get_service() -> ClassificationService:
    return ClassificationService()
