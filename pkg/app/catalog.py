from enum import Enum
from typing import Dict, List, Optional
import logging

from pydantic import BaseModel, Field

from app.exceptions import ValidationError
from app.models import AstTuple, ClassReport
from app.polynomials import parse_germ
from app.recognition import RecognitionConfig, germ_ast
from app.tuples import canonical_ast

logger = logging.getLogger(__name__)


class NormalFormName(str, Enum):
    IDENTITY = "identity"
    FOLD = "fold"
    CUSP = "cusp"
    CUSP_X3 = "y3+x3y"
    CUSP_X5 = "y3+x5y"
    XY_Y4 = "xy+y4"
    XY_Y5 = "xy+y5"
    XY_Y6 = "xy+y6"
    XY_Y7 = "xy+y7"
    XY2_Y4_Y5 = "xy2+y4+y5"
    XY2_Y4_Y7 = "xy2+y4+y7"
    XY2_Y5 = "xy2+y5"
    X2Y_Y4 = "x2y+y4"
    XY2_Y6_Y7 = "xy2+y6+y7"
    X2Y_XY3_Y5 = "x2y+xy3+y5"
    X3Y_Y4_X3Y2 = "x3y+y4+x3y2"


class NormalForm(BaseModel):
    """A germ (x, f2) from the list of normal forms, with its associated tuple class."""
    name: NormalFormName
    f1: str
    f2: str
    expected: AstTuple = Field(..., description="A representative of the expected class")
    representative: bool = Field(False, description="First form of its class in the list")
    stretch: bool = Field(False, description="May need raised precision to stabilize")


class CatalogCheck(BaseModel):
    form: NormalForm
    expected: AstTuple
    report: ClassReport
    matches: bool


class NormalFormCatalog:
    """Table of plane-to-plane germ normal forms."""

    FORMS = {
        NormalFormName.IDENTITY: {"f2": "y", "expected": "p", "representative": True},
        NormalFormName.FOLD: {"f2": "y^2", "expected": "ss", "representative": True},
        NormalFormName.CUSP: {"f2": "x*y + y^3", "expected": "pssp", "representative": True},
        NormalFormName.CUSP_X3: {"f2": "y^3 + x^3*y", "expected": "pssp"},
        NormalFormName.CUSP_X5: {"f2": "y^3 + x^5*y", "expected": "pssp", "stretch": True},
        NormalFormName.XY_Y4: {"f2": "x*y + y^4", "expected": "ss"},
        NormalFormName.XY_Y5: {"f2": "x*y + y^5", "expected": "pssp", "stretch": True},
        NormalFormName.XY_Y6: {"f2": "x*y + y^6", "expected": "ss", "stretch": True},
        NormalFormName.XY_Y7: {"f2": "x*y + y^7", "expected": "pssp", "stretch": True},
        NormalFormName.XY2_Y4_Y5: {"f2": "x*y^2 + y^4 + y^5", "expected": "pssppssp", "stretch": True},
        NormalFormName.XY2_Y4_Y7: {"f2": "x*y^2 + y^4 + y^7", "expected": "pssppssp", "stretch": True},
        NormalFormName.XY2_Y5: {"f2": "x*y^2 + y^5", "expected": "pssppssp", "representative": True},
        NormalFormName.X2Y_Y4: {"f2": "x^2*y + y^4", "expected": "ss", "stretch": True},
        NormalFormName.XY2_Y6_Y7: {"f2": "x*y^2 + y^6 + y^7", "expected": "spsspspp", "representative": True},
        NormalFormName.X2Y_XY3_Y5: {"f2": "x^2*y + x*y^3 + y^5", "expected": "p", "stretch": True},
        NormalFormName.X3Y_Y4_X3Y2: {"f2": "x^3*y + y^4 + x^3*y^2", "expected": "ss", "stretch": True},
    }

    @classmethod
    def get(cls, name: str) -> NormalForm:
        """
        Look up a normal form by name.

        Raises:
            ValidationError: For unknown names
        """
        try:
            key = NormalFormName(name)
        except ValueError:
            raise ValidationError(
                f"Unknown normal form: {name}",
                details={"available": [item.value for item in NormalFormName]},
            )
        row = cls.FORMS[key]
        return NormalForm(
            name=key,
            f1="x",
            f2=row["f2"],
            expected=AstTuple.from_word(row["expected"]),
            representative=row.get("representative", False),
            stretch=row.get("stretch", False),
        )

    @classmethod
    def list_forms(cls) -> Dict[str, NormalForm]:
        return {name.value: cls.get(name.value) for name in cls.FORMS}

    @classmethod
    def representatives(cls) -> List[NormalForm]:
        """One form per class, in list order."""
        return [form for form in cls.list_forms().values() if form.representative]

    @classmethod
    def expected_class(cls, name: str) -> AstTuple:
        return canonical_ast(cls.get(name).expected)

    @classmethod
    def check(cls, name: str, config: Optional[RecognitionConfig] = None) -> CatalogCheck:
        """Recognize a normal form and compare with its expected class."""
        form = cls.get(name)
        report = germ_ast(parse_germ(form.f1, form.f2), config)
        expected = canonical_ast(form.expected)
        matches = report.ast == expected
        if not matches:
            logger.warning(f"Normal form {name}: expected {expected.word}, recognized {report.ast.word}")
        return CatalogCheck(form=form, expected=expected, report=report, matches=matches)
