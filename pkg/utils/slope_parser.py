import re

from algorithms.farey import Slope, reduce
from utils.errors import CanonError

SLOPE_PATTERN = re.compile(r"^\s*(-?\d+)\s*/\s*(\d+)\s*$")
INTEGER_PATTERN = re.compile(r"^\s*(-?\d+)\s*$")


class SlopeSyntaxError(CanonError):
    pass


# Parse Slope
def parse_slope(slope_str: str) -> Slope:
    """Parse 'p/q' (or a bare integer p) into a reduced Slope; 1/0 is infinity."""
    match = SLOPE_PATTERN.match(slope_str)
    if match:
        p, q = int(match.group(1)), int(match.group(2))
    else:
        match = INTEGER_PATTERN.match(slope_str)
        if not match:
            raise SlopeSyntaxError(
                f"Invalid slope {slope_str!r}. Please use p/q, e.g. 1/3, -4/3 or 1/0."
            )
        p, q = int(match.group(1)), 1
    return reduce(p, q)
