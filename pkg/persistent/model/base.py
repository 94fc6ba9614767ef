from pydantic import BaseModel, ConfigDict


class ArrayModel(BaseModel):
    """
    Базовая модель для неизменяемых структур с numpy-массивами внутри.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
