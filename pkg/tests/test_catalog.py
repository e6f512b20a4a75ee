import pytest

from app.catalog import NormalFormCatalog, NormalFormName
from app.exceptions import ValidationError
from app.feasibility import is_feasible
from app.models import AstTuple
from app.tuples import canonical_ast, equivalent, hash_from_ast


def test_every_name_has_a_form():
    forms = NormalFormCatalog.list_forms()
    assert set(forms) == {name.value for name in NormalFormName}
    assert all(form.f1 == "x" for form in forms.values())


def test_expected_classes_are_feasible():
    for form in NormalFormCatalog.list_forms().values():
        if not form.expected.is_regular_type:
            assert is_feasible(hash_from_ast(form.expected)).feasible, form.name


def test_representatives_cover_distinct_classes():
    representatives = NormalFormCatalog.representatives()
    assert [form.name for form in representatives][:3] == [NormalFormName.IDENTITY, NormalFormName.FOLD, NormalFormName.CUSP]
    classes = [canonical_ast(form.expected) for form in representatives]
    assert len(set(classes)) == len(classes)


def test_expected_class_is_canonical():
    assert NormalFormCatalog.expected_class("cusp") == AstTuple.from_word("sspp")


def test_cusp_family_shares_a_class():
    cusp = NormalFormCatalog.get("cusp").expected
    for name in ("y3+x3y", "xy+y5", "xy+y7"):
        assert equivalent(NormalFormCatalog.get(name).expected, cusp)


def test_unknown_name():
    with pytest.raises(ValidationError) as error:
        NormalFormCatalog.get("swallowtail")
    assert "cusp" in error.value.details["available"]


@pytest.mark.slow
@pytest.mark.parametrize("name", ["identity", "fold", "cusp", "y3+x3y", "xy+y4", "xy2+y5", "xy2+y6+y7"])
def test_check(name):
    result = NormalFormCatalog.check(name)
    assert result.matches
    assert result.report.ast == result.expected
