import numpy as np
import pytest
from hypothesis import given, strategies as st

from pretopomd.data import (
    Feature,
    FeatureKind,
    MixedDataTable,
    Schema,
    feature_group,
    infer_schema,
    load_csv,
)
from pretopomd.exceptions import (
    DataError,
    EmptyFile,
    EmptyTable,
    IncompatibleKinds,
    MissingColumn,
    TooManyLevels,
    UnknownCategoryLevel,
    UnknownFeature,
    UnparseableNumeric,
)

COLOR_SCHEMA = Schema((Feature("x", FeatureKind.NUMERIC),
                       Feature("color", FeatureKind.CATEGORICAL, ("red", "blue"))))


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_csv_basic(tmp_path):
    table = load_csv(write(tmp_path, "x,color\n1.0,red\n2.0,blue\n"), COLOR_SCHEMA)
    assert table.n == 2
    assert table.element_ids == [0, 1]
    assert table.rows == ((1.0, "red"), (2.0, "blue"))


def test_load_csv_no_rows(tmp_path):
    with pytest.raises(EmptyFile):
        load_csv(write(tmp_path, "x,color\n"), COLOR_SCHEMA)
    with pytest.raises(EmptyFile):
        load_csv(write(tmp_path, ""), COLOR_SCHEMA)


def test_load_csv_bad_numeric(tmp_path):
    with pytest.raises(UnparseableNumeric) as err:
        load_csv(write(tmp_path, "x,color\nabc,red\n"), COLOR_SCHEMA)
    assert (err.value.row, err.value.col) == (0, 0)


@pytest.mark.parametrize("cell", ["nan", "inf", ""])
def test_load_csv_rejects_non_finite_and_missing(tmp_path, cell):
    with pytest.raises(UnparseableNumeric):
        load_csv(write(tmp_path, f"x,color\n{cell},red\n"), COLOR_SCHEMA)


def test_load_csv_unknown_level(tmp_path):
    with pytest.raises(UnknownCategoryLevel) as err:
        load_csv(write(tmp_path, "x,color\n1,red\n2,green\n"), COLOR_SCHEMA)
    assert (err.value.row, err.value.col, err.value.value) == (1, 1, "green")


def test_load_csv_missing_column(tmp_path):
    with pytest.raises(MissingColumn) as err:
        load_csv(write(tmp_path, "x\n1\n"), COLOR_SCHEMA)
    assert err.value.name == "color"


def test_load_csv_wrong_order(tmp_path):
    with pytest.raises(DataError):
        load_csv(write(tmp_path, "color,x\nred,1\n"), COLOR_SCHEMA)


def test_quoted_commas(tmp_path):
    schema = Schema((Feature("label", FeatureKind.CATEGORICAL, ("a,b", "c")),))
    table = load_csv(write(tmp_path, 'label\n"a,b"\nc\n'), schema)
    assert table.rows == (("a,b",), ("c",))


def test_infer_schema(tmp_path):
    path = write(tmp_path, "v,s\n1,a\n2.5,b\n3,a\n")
    schema = infer_schema(path, max_levels=10)
    assert schema["v"].kind is FeatureKind.NUMERIC
    assert schema["s"].kind is FeatureKind.CATEGORICAL
    assert schema["s"].levels == ("a", "b")


def test_infer_schema_too_many_levels(tmp_path):
    lines = "\n".join(f"s{i}" for i in range(101))
    with pytest.raises(TooManyLevels):
        infer_schema(write(tmp_path, "s\n" + lines + "\n"), max_levels=100)
    lines = "\n".join(f"s{i}" for i in range(100))
    assert len(infer_schema(write(tmp_path, "s\n" + lines + "\n"), max_levels=100)["s"].levels) == 100


def test_infer_schema_deterministic(tmp_path):
    path = write(tmp_path, "a,b\nz,1\ny,2\nx,3\n")
    assert infer_schema(path) == infer_schema(path)


def test_schema_validation():
    with pytest.raises(DataError):
        Schema(())
    with pytest.raises(DataError):
        Schema((Feature("x", FeatureKind.NUMERIC), Feature("x", FeatureKind.NUMERIC)))
    with pytest.raises(DataError):
        Feature("", FeatureKind.NUMERIC)


def test_schema_text_round_trip():
    schema = Schema((Feature("x", FeatureKind.NUMERIC),
                     Feature("size", FeatureKind.ORDINAL, ("S", "M", "L")),
                     Feature("c", FeatureKind.CATEGORICAL, ("u", "v"))))
    assert schema.dumps() == "x:numeric\nsize:ordinal:S|M|L\nc:categorical:u|v\n"
    assert Schema.loads(schema.dumps()) == schema


def test_row_validation():
    with pytest.raises(DataError):
        MixedDataTable(COLOR_SCHEMA, [(1.0,)])
    with pytest.raises(UnknownCategoryLevel):
        MixedDataTable(COLOR_SCHEMA, [(1.0, "green")])
    with pytest.raises(UnparseableNumeric):
        MixedDataTable(COLOR_SCHEMA, [(float("nan"), "red")])


def test_encoded_uses_level_ranks():
    schema = Schema((Feature("size", FeatureKind.ORDINAL, ("S", "M", "L")),))
    table = MixedDataTable(schema, [("L",), ("S",), ("M",)])
    np.testing.assert_array_equal(table.encoded[:, 0], [2, 0, 1])


def test_feature_group():
    table = MixedDataTable.from_columns({"x": [1.0, 2.0], "y": [0.0, 1.0],
                                         "shape": ["sq", "ci"]})
    g = feature_group(table, ["x", "y"])
    assert g.is_numeric and len(g) == 2
    assert feature_group(table, ["shape"]).is_categorical
    with pytest.raises(UnknownFeature) as err:
        feature_group(table, ["x", "missing"])
    assert err.value.name == "missing"
    with pytest.raises(IncompatibleKinds):
        feature_group(table, ["x", "shape"])
    assert feature_group(table, ["x", "shape"], allow_mixed=True).kinds == {
        FeatureKind.NUMERIC, FeatureKind.CATEGORICAL}


def test_from_columns_infers_kinds():
    table = MixedDataTable.from_columns({"a": [1, 2], "b": ["q", "p"]})
    assert table.schema["a"].kind is FeatureKind.NUMERIC
    assert table.schema["b"].levels == ("p", "q")


def test_empty_table_errors():
    from pretopomd.data import require_rows
    with pytest.raises(EmptyTable):
        require_rows(MixedDataTable(COLOR_SCHEMA, []))


cells = st.tuples(st.floats(allow_nan=False, allow_infinity=False, width=64),
                  st.sampled_from(["red", "blue"]))


@given(st.lists(cells, min_size=1, max_size=20))
def test_csv_round_trip(tmp_path_factory, rows):
    table = MixedDataTable(COLOR_SCHEMA, rows)
    path = tmp_path_factory.mktemp("rt") / "t.csv"
    table.save_csv(path)
    again = load_csv(path, COLOR_SCHEMA)
    assert again == table
    assert again.to_csv() == table.to_csv()
