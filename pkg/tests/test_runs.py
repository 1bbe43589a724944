from hypothesis import given, strategies as st

from boolres import runs


def _square(x):
    return x * x


def test_derive_seed_is_stable():
    a = runs.derive_seed(5, runs.STREAM_TRAIN, 2, 3)
    assert a == runs.derive_seed(5, runs.STREAM_TRAIN, 2, 3)
    assert a != runs.derive_seed(5, runs.STREAM_TEST, 2, 3)
    assert a != runs.derive_seed(6, runs.STREAM_TRAIN, 2, 3)
    assert 0 <= a < 2**63


def test_pool_map_preserves_order():
    tasks = list(range(23))
    assert runs.pool_map(_square, tasks, workers=1) == [t * t for t in tasks]
    assert runs.pool_map(_square, tasks, workers=2) == [t * t for t in tasks]


@given(st.integers(0, 2**32), st.lists(st.integers(0, 1000), min_size=1, max_size=4))
def test_distinct_keys_give_distinct_seeds(master, keys):
    other = keys + [0]
    assert runs.derive_seed(master, *keys) != runs.derive_seed(master, *other)
