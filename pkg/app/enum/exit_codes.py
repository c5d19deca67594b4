from enum import Enum


class ExitCodes(Enum):
    SUCCESS = 0
    FAILURE = 1
    VALIDATION = 2
    NUMERICAL = 3
