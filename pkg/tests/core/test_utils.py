import numpy as np
import pytest
from dsim.core.events import Event
from dsim.core.utils import (
    validate_callback,
    validate_finite_array,
    validate_instance_type,
    validate_non_empty_string,
    validate_positive,
    validate_unit_vector,
)
from dsim.exceptions import DsimArgumentError


class TestUtils:
    def test_validate_instance_type_success(self):
        validate_instance_type("param", 123, int)
        validate_instance_type("param", "abc", str)
        validate_instance_type("param", Event("test"), Event)

    def test_validate_instance_type_failure(self):
        with pytest.raises(DsimArgumentError) as exc_info:
            validate_instance_type("param", 123, str)
        assert "param expects an instance of str, but got int" in str(exc_info.value)

        with pytest.raises(DsimArgumentError) as exc_info:
            validate_instance_type("param", "string", Event)
        assert "param expects an instance of Event, but got str" in str(exc_info.value)

    def test_validate_non_empty_string_failure(self):
        validate_non_empty_string("param", "  abc  ")

        with pytest.raises(DsimArgumentError) as exc_info:
            validate_non_empty_string("param", "   ")
        assert "param expects a non-empty string, but got an empty string" in str(exc_info.value)

        with pytest.raises(DsimArgumentError) as exc_info:
            validate_non_empty_string("param", 123)
        assert "param expects a non-empty string, but got int" in str(exc_info.value)

    def test_validate_callback_failure(self):
        validate_callback("event_name", lambda: None)

        with pytest.raises(DsimArgumentError) as exc_info:
            validate_callback("event_name", 123)
        assert "Callback for 'event_name' must be callable" in str(exc_info.value)

    @pytest.mark.parametrize("value", [0.0, -1.0, float("nan"), float("inf")])
    def test_validate_positive_failure(self, value):
        with pytest.raises(DsimArgumentError):
            validate_positive("scale", value)

    def test_validate_finite_array(self):
        array = validate_finite_array("values", [1, 2, 3])
        assert array.dtype == float
        np.testing.assert_array_equal(array, [1.0, 2.0, 3.0])

        with pytest.raises(DsimArgumentError) as exc_info:
            validate_finite_array("values", [1.0, float("nan")])
        assert "values expects finite values" in str(exc_info.value)

        with pytest.raises(DsimArgumentError):
            validate_finite_array("values", [[1.0, 2.0]])

        with pytest.raises(DsimArgumentError):
            validate_finite_array("values", ["a", "b"])

    def test_validate_unit_vector(self):
        validate_unit_vector("alpha", [0.6, 0.8])

        with pytest.raises(DsimArgumentError):
            validate_unit_vector("alpha", [1.0, 1.0])
