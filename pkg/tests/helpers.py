"""Shared test data."""

from uncoreset.model import UncertainPoint, UncertainPointSet

# worked example: ten points, k = 2, every location a rank in 1..20
FIRST = [1, 2, 3, 4, 5, 6, 8, 9, 11, 12]
SECOND = [20, 15, 7, 18, 13, 19, 17, 10, 16, 14]


def example_set() -> UncertainPointSet:
    return UncertainPointSet(
        tuple(UncertainPoint(i, ((a,), (b,))) for i, (a, b) in enumerate(zip(FIRST, SECOND), 1))
    )


def random_set(rng, n, k, d=1, grid=None) -> UncertainPointSet:
    """Integer coordinates; a small ``grid`` forces ties."""
    hi = grid or 10 * n * k
    return UncertainPointSet.from_array(rng.integers(0, hi, size=(n, k, d)))


def as_points(P: UncertainPointSet):
    return [list(p.locations) for p in P]
