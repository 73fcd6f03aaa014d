"""Furniture class taxonomy shared by the dataset generator, tagger, and classifier.

The label set is 25 named furniture classes plus a reserved "unknown" class at
index 25 for low-confidence detections. The index <-> name bijection below is
fixed; serialized corpora store only the index.
"""

from __future__ import annotations

from dataclasses import dataclass

FURNITURE_CLASSES: tuple[str, ...] = (
    "bed",
    "cabinet",
    "carpet",
    "ceramic floor",
    "chair",
    "closet",
    "cupboard",
    "curtains",
    "dining table",
    "door",
    "frame",
    "futec frame",
    "futec tiles",
    "gypsum board",
    "lamp",
    "nightstand",
    "shelf",
    "sideboard",
    "sofa",
    "tv stand",
    "table",
    "transparent closet",
    "wall panel",
    "window",
    "wooden floor",
)

UNKNOWN_CLASS_NAME = "unknown"
UNKNOWN_CLASS_INDEX = len(FURNITURE_CLASSES)  # 25
NUM_CLASSES = len(FURNITURE_CLASSES) + 1  # 26, including "unknown"

# Detections below this confidence are collapsed into the "unknown" class.
# The comparison is strict: confidence == threshold keeps the original class.
CONFIDENCE_THRESHOLD = 0.10

_NAME_TO_INDEX = {name: i for i, name in enumerate(FURNITURE_CLASSES)}
_NAME_TO_INDEX[UNKNOWN_CLASS_NAME] = UNKNOWN_CLASS_INDEX


def class_name(index: int) -> str:
    if index == UNKNOWN_CLASS_INDEX:
        return UNKNOWN_CLASS_NAME
    if 0 <= index < len(FURNITURE_CLASSES):
        return FURNITURE_CLASSES[index]
    raise ValueError(f"furniture class index {index} outside [0, {UNKNOWN_CLASS_INDEX}]")


def class_index(name: str) -> int:
    try:
        return _NAME_TO_INDEX[name]
    except KeyError:
        raise ValueError(f"unknown furniture class name: {name!r}") from None


@dataclass(frozen=True)
class FurnitureTag:
    """Categorical furniture label: one of the 25 named classes or "unknown"."""

    class_index: int

    def __post_init__(self) -> None:
        if not 0 <= self.class_index <= UNKNOWN_CLASS_INDEX:
            raise ValueError(
                f"tag index {self.class_index} outside [0, {UNKNOWN_CLASS_INDEX}]"
            )

    @property
    def class_name(self) -> str:
        return class_name(self.class_index)

    @property
    def is_unknown(self) -> bool:
        return self.class_index == UNKNOWN_CLASS_INDEX

    @classmethod
    def from_name(cls, name: str) -> "FurnitureTag":
        return cls(class_index(name))
