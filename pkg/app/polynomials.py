"""
Polynomial germs: parsing, exact Jacobians and numeric evaluation backends.
"""
import logging
import re
from tokenize import TokenError
from typing import Any, List, Sequence, Tuple

import mpmath
import numpy as np
import sympy
from sympy import Poly, QQ, symbols
from sympy.parsing.sympy_parser import convert_xor, parse_expr, rationalize, standard_transformations
from sympy.polys.polyerrors import CoercionFailed, PolynomialError

from app.exceptions import GermParseError, NotAGermError, ValidationError
from app.models import PolyGerm

logger = logging.getLogger(__name__)

X, Y = symbols("x y")

_ALLOWED = re.compile(r"[0-9xy+\-*/^(). ]")
_TRANSFORMATIONS = standard_transformations + (convert_xor, rationalize)


def _invalid_position(text: str) -> int:
    for i, char in enumerate(text):
        if not _ALLOWED.fullmatch(char):
            return i
    return -1


def parse_polynomial(text: str) -> Poly:
    """
    Parse one component in x and y with rational coefficients.

    Raises:
        GermParseError: For characters outside the grammar, syntax errors or non-polynomials
    """
    if not text or not text.strip():
        raise GermParseError("Empty polynomial", position=0)
    position = _invalid_position(text)
    if position >= 0:
        raise GermParseError(f"Unexpected character {text[position]!r} in {text!r}", position=position)
    try:
        expr = parse_expr(text, local_dict={"x": X, "y": Y}, transformations=_TRANSFORMATIONS)
    except (SyntaxError, TokenError, TypeError, sympy.SympifyError) as e:
        offset = getattr(e, "offset", None)
        raise GermParseError(f"Cannot parse {text!r}", position=(offset - 1) if offset else None)
    except ZeroDivisionError:
        raise GermParseError(f"Division by zero in {text!r}")
    try:
        return Poly(sympy.expand(expr), X, Y, domain=QQ)
    except (PolynomialError, CoercionFailed) as e:
        raise GermParseError(f"{text!r} is not a polynomial in x, y: {e}")


def parse_germ(text1: str, text2: str) -> PolyGerm:
    """
    Parse a plane-to-plane germ given by its two components.

    Raises:
        GermParseError: For malformed components
        NotAGermError: If either component has a nonzero constant term
    """
    f1 = parse_polynomial(text1)
    f2 = parse_polynomial(text2)
    for text, poly in ((text1, f1), (text2, f2)):
        constant = poly.coeff_monomial(1)
        if constant != 0:
            raise NotAGermError(details={"component": text, "constant": str(constant)})
    return PolyGerm(text1=text1, text2=text2, f1=f1, f2=f2)


def jacobian_det(g: PolyGerm) -> Poly:
    """det Dg = f1_x f2_y - f1_y f2_x, exactly."""
    return g.f1.diff(X) * g.f2.diff(Y) - g.f1.diff(Y) * g.f2.diff(X)


def format_polynomial(poly: Poly) -> str:
    return str(poly.as_expr()).replace("**", "^")


# Numeric backends

class NumberBackend:
    """Scalar arithmetic for one working precision."""
    name = "float64"
    bits = 53

    def number(self, value: Any) -> Any:
        return np.float64(value)

    def rational(self, value: sympy.Rational) -> Any:
        return self.number(int(value.p)) / self.number(int(value.q))

    def sqrt(self, value: Any) -> Any:
        return np.sqrt(value)

    def atan2(self, y: Any, x: Any) -> Any:
        return np.arctan2(y, x)

    def to_float(self, value: Any) -> float:
        return float(value)

    def array(self, values: Sequence[Tuple[Any, Any]]) -> np.ndarray:
        """(M, 2) array of points."""
        return np.array(values, dtype=np.float64).reshape(-1, 2)


class ExtendedBackend(NumberBackend):
    """numpy longdouble (64-bit mantissa on x86 platforms)."""
    name = "extended"
    bits = 64

    def number(self, value: Any) -> Any:
        return np.longdouble(value)

    def array(self, values: Sequence[Tuple[Any, Any]]) -> np.ndarray:
        return np.array(values, dtype=np.longdouble).reshape(-1, 2)


class SoftwareBackend(NumberBackend):
    """mpmath context with a fixed binary precision."""
    name = "software"

    def __init__(self, bits: int):
        self.bits = bits
        self.context = mpmath.MPContext()
        self.context.prec = bits

    def number(self, value: Any) -> Any:
        if isinstance(value, (np.floating, np.integer)):
            value = value.item()
        return self.context.mpf(value)

    def rational(self, value: sympy.Rational) -> Any:
        return self.context.mpf(int(value.p)) / int(value.q)

    def sqrt(self, value: Any) -> Any:
        return self.context.sqrt(value)

    def atan2(self, y: Any, x: Any) -> Any:
        return self.context.atan2(y, x)

    def array(self, values: Sequence[Tuple[Any, Any]]) -> np.ndarray:
        result = np.empty((len(values), 2), dtype=object)
        for i, (a, b) in enumerate(values):
            result[i, 0], result[i, 1] = a, b
        return result


def backend_for(bits: int) -> NumberBackend:
    """
    Pick the arithmetic for a working precision.

    Raises:
        ValidationError: For precisions below double
    """
    if bits < 53:
        raise ValidationError(f"Precision must be at least 53 bits, got {bits}")
    if bits == 53:
        return NumberBackend()
    if bits == 64:
        if np.finfo(np.longdouble).nmant < 63:
            logger.warning("numpy longdouble has no extended mantissa on this platform; using software precision")
            return SoftwareBackend(64)
        return ExtendedBackend()
    return SoftwareBackend(bits)


Terms = List[Tuple[int, int, Any]]


class GermEvaluator:
    """Evaluates a germ and its derivative in a chosen backend."""

    def __init__(self, germ: PolyGerm, backend: NumberBackend):
        self.germ = germ
        self.backend = backend
        self._f1 = self._terms(germ.f1)
        self._f2 = self._terms(germ.f2)
        self._d1 = (self._terms(germ.f1.diff(X)), self._terms(germ.f1.diff(Y)))
        self._d2 = (self._terms(germ.f2.diff(X)), self._terms(germ.f2.diff(Y)))
        jacobian = jacobian_det(germ)
        self._jx = self._terms(jacobian.diff(X))
        self._jy = self._terms(jacobian.diff(Y))
        exponents = [max(i, j) for terms in (self._f1, self._f2, self._jx, self._jy) for i, j, _ in terms]
        self._degree = max(exponents + [1])

    def _terms(self, poly: Poly) -> Terms:
        return [(i, j, self.backend.rational(c)) for (i, j), c in poly.terms() if c != 0]

    def _powers(self, value: Any) -> List[Any]:
        powers = [self.backend.number(1)]
        for _ in range(self._degree):
            powers.append(powers[-1] * value)
        return powers

    @staticmethod
    def _sum(terms: Terms, px: List[Any], py: List[Any], zero: Any) -> Any:
        total = zero
        for i, j, c in terms:
            total = total + c * px[i] * py[j]
        return total

    def point(self, x: Any, y: Any) -> Tuple[Any, Any]:
        return self.backend.number(x), self.backend.number(y)

    def value(self, x: Any, y: Any) -> Tuple[Any, Any]:
        px, py = self._powers(x), self._powers(y)
        zero = self.backend.number(0)
        return self._sum(self._f1, px, py, zero), self._sum(self._f2, px, py, zero)

    def value_and_jacobian(self, x: Any, y: Any) -> Tuple[Tuple[Any, Any], Tuple[Tuple[Any, Any], Tuple[Any, Any]]]:
        """(f1, f2) and the rows (f1_x, f1_y), (f2_x, f2_y)."""
        px, py = self._powers(x), self._powers(y)
        zero = self.backend.number(0)
        value = (self._sum(self._f1, px, py, zero), self._sum(self._f2, px, py, zero))
        rows = (
            (self._sum(self._d1[0], px, py, zero), self._sum(self._d1[1], px, py, zero)),
            (self._sum(self._d2[0], px, py, zero), self._sum(self._d2[1], px, py, zero)),
        )
        return value, rows

    def jacobian_gradient(self, x: Any, y: Any) -> Tuple[Any, Any]:
        px, py = self._powers(x), self._powers(y)
        zero = self.backend.number(0)
        return self._sum(self._jx, px, py, zero), self._sum(self._jy, px, py, zero)

    def norm(self, x: Any, y: Any) -> Any:
        f1, f2 = self.value(x, y)
        return self.backend.sqrt(f1 * f1 + f2 * f2)

    def angle(self, x: Any, y: Any) -> float:
        f1, f2 = self.value(x, y)
        return self.backend.to_float(self.backend.atan2(f2, f1))


def evaluate_germ(g: PolyGerm, point: Tuple[float, float], bits: int = 53):
    """
    Value and Jacobian matrix of g at a point, in the arithmetic for ``bits``.

    Returns:
        ((f1, f2), ((f1_x, f1_y), (f2_x, f2_y)))
    """
    evaluator = GermEvaluator(g, backend_for(bits))
    return evaluator.value_and_jacobian(*evaluator.point(*point))
