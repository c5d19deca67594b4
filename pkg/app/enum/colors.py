from enum import Enum


class ChartColors(Enum):
    LOSS = "#ed6465"
    ACCURACY = "#0099ff"
    BEST = "#00a86b"
    NEUTRAL = "#7f7f7f"


class RowColors(Enum):
    """Colour cycle for per-row or per-driver series."""
    BLUE = "#1f77b4"
    ORANGE = "#ff7f0e"
    GREEN = "#2ca02c"
    RED = "#d62728"
    PURPLE = "#9467bd"
    BROWN = "#8c564b"
    PINK = "#e377c2"
    OLIVE = "#bcbd22"

    @classmethod
    def cycle(cls, index: int) -> str:
        members = list(cls)
        return members[index % len(members)].value
