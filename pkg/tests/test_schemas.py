import pytest

from mzlab.multiop import MultilinearOperator
from mzlab.schemas import SchemaError, validate
from mzlab.tensorspace import DiscreteMeasure, FunctionFamily

import numpy as np


def test_valid_documents():
    T = MultilinearOperator(np.ones((2, 3)), [DiscreteMeasure([1, 2, 3])])
    validate(T.to_dict(), "operator")
    validate(DiscreteMeasure([0.5]).to_dict(), "measure")
    validate(FunctionFamily([[1.0, 2.0]]).to_dict(), "family")
    validate({"values": [[1.0]]}, "family")
    validate({"q": [2, "inf"], "p": "inf", "r": 1.5, "n": 4}, "estimate_config")


@pytest.mark.parametrize(
    "doc,schema,path",
    [
        ({"weights": [1, -1]}, "measure", "$.weights[1]"),
        ({"weights": []}, "measure", "$.weights"),
        ({"values": [[1, "a"]]}, "family", "$.values[0][1]"),
        ({"arity": 1, "input_dims": [2], "coeffs": [1, 2], "output_measure": {"weights": [0]}}, "operator", "$.output_measure.weights[0]"),
        ({"arity": 1, "input_dims": [2], "coeffs": [1, 2]}, "operator", "$"),
        ({"q": [2, "infinity"], "p": 2, "r": 2, "n": 3}, "estimate_config", "$.q[1]"),
        ({"q": [2], "p": 2, "r": 2, "n": 0}, "estimate_config", "$.n"),
    ],
)
def test_errors_name_the_path(doc, schema, path):
    with pytest.raises(SchemaError) as info:
        validate(doc, schema)
    assert info.value.path == path
    assert str(info.value).startswith(path)
