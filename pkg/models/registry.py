"""
Tagged union over every model family.

Scenario files select a family with the `family` key; `build_model` validates
the block and returns the matching record.
"""

from typing import Annotated, Any, Dict, Mapping, Union

from pydantic import Field, TypeAdapter

from models.bazykin import BazykinModel
from models.competition import CompetitionModel
from models.predators import RescaledTwoPredatorModel, TwoPredatorModel
from models.prey import CanonicalTwoPreyModel, RescaledTwoPreyModel, SymmetricTwoPreyModel, TwoPreyModel

ModelSpec = Annotated[
    Union[
        CompetitionModel,
        TwoPredatorModel,
        RescaledTwoPredatorModel,
        TwoPreyModel,
        RescaledTwoPreyModel,
        CanonicalTwoPreyModel,
        SymmetricTwoPreyModel,
        BazykinModel,
    ],
    Field(discriminator="family"),
]

_ADAPTER = TypeAdapter(ModelSpec)

FAMILIES: Dict[str, type] = {
    cls.model_fields["family"].default: cls
    for cls in (
        CompetitionModel, TwoPredatorModel, RescaledTwoPredatorModel, TwoPreyModel,
        RescaledTwoPreyModel, CanonicalTwoPreyModel, SymmetricTwoPreyModel, BazykinModel,
    )
}


def build_model(data: Mapping[str, Any]):
    """Validate a model block; raises pydantic.ValidationError on bad input."""
    return _ADAPTER.validate_python(dict(data))
