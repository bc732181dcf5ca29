import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fockbench.fock import FockSpace, SizingError, enumerate_sector, sector_dimension


@pytest.mark.parametrize("d,n,dim", [(1, 7, 1), (3, 2, 6), (2, 3, 4)])
def test_sector_dimension_examples(d, n, dim):
    assert sector_dimension(d, n) == dim


def test_sector_dimension_rejects_bad_args():
    with pytest.raises(ValueError):
        sector_dimension(0, 3)
    with pytest.raises(ValueError):
        sector_dimension(2, -1)


def test_sector_dimension_overflow_is_sizing_error():
    with pytest.raises(SizingError):
        sector_dimension(200, 200)


@pytest.mark.parametrize("d,n,expected", [
    (2, 2, [(2, 0), (1, 1), (0, 2)]),
    (1, 4, [(4,)]),
    (3, 1, [(1, 0, 0), (0, 1, 0), (0, 0, 1)]),
])
def test_enumerate_sector_examples(d, n, expected):
    assert enumerate_sector(d, n) == expected


@pytest.mark.parametrize("d,n", list(itertools.product(range(1, 5), range(0, 9))))
def test_enumeration_count_and_order(d, n):
    states = enumerate_sector(d, n)
    assert len(states) == sector_dimension(d, n)
    assert all(sum(s) == n and min(s) >= 0 for s in states)
    # strictly decreasing in lexicographic order
    assert all(a > b for a, b in zip(states, states[1:]))
    assert states == enumerate_sector(d, n)


def test_space_layout():
    space = FockSpace(3, 4)
    assert space.dims == (1, 3, 6, 10, 15)
    assert space.offsets == (0, 1, 4, 10, 20)
    assert space.dim == 35


def test_state_index_examples():
    space = FockSpace(2, 3)
    assert space.state_index((1, 1)) == (2, 1)
    assert space.state_index((0, 0)) == (0, 0)


def test_state_index_rejects_out_of_cutoff():
    space = FockSpace(2, 3)
    with pytest.raises(ValueError):
        space.state_index((2, 2))
    with pytest.raises(ValueError):
        space.state_index((1, -1))
    with pytest.raises(ValueError):
        space.state_index((1, 1, 0))


def test_index_bijection_exhaustive_d3_n5():
    space = FockSpace(3, 5)
    seen = set()
    for n in range(6):
        for pos in range(space.dims[n]):
            occ = space.occupation_at(n, pos)
            assert space.state_index(occ) == (n, pos)
            seen.add(space.flat_index(occ))
    assert seen == set(range(space.dim))


@given(st.integers(1, 5), st.integers(0, 7), st.data())
def test_rank_matches_enumeration(d, n, data):
    space = FockSpace(d, n)
    states = enumerate_sector(d, n)
    k = data.draw(st.integers(0, len(states) - 1))
    assert space.state_index(states[k]) == (n, k)
