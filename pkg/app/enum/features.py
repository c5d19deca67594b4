from enum import Enum


class FeatureName(Enum):
    """The eight hand-crafted features, in vector order."""
    MEAN_SPEED = "f1"
    MEAN_GAP = "f2"
    MEAN_ACCEL = "f3"
    MEAN_POS_ACCEL = "f4"
    MEAN_NEG_ACCEL = "f5"
    HARMONIC_TTC = "f6"
    REACTION_TIME = "f7"
    MAX_XCORR = "f8"

    @classmethod
    def labels(cls) -> list[str]:
        return [member.value for member in cls]


N_RAW_FEATURES = len(FeatureName)
