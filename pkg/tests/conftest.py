import pytest
from asphalt.serialization.serializers.cbor import CBORSerializer
from asphalt.serialization.serializers.json import JSONSerializer
from asphalt.serialization.serializers.pickle import PickleSerializer

from asphalt.integrable.api import Settings
from asphalt.integrable.diffpoly import parse_expression
from asphalt.integrable.util import create_rng


@pytest.fixture(params=[JSONSerializer, CBORSerializer, PickleSerializer])
def serializer(request):
    return request.param()


@pytest.fixture(scope='session')
def settings():
    return Settings()


@pytest.fixture
def rng():
    return create_rng(20160723)


@pytest.fixture(scope='session')
def parse():
    """Parse an expression, expanding ``<a,b>`` pairings for two-component vectors."""
    def parse_expression_n3(text: str, length: int = 2):
        return parse_expression(text, length)

    return parse_expression_n3
