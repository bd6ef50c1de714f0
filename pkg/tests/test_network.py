from collections import deque

import numpy as np
import pytest
from hypothesis import given, strategies as st

from picaso.network import NetRow, NodeRole, net_cycle, node_role, pairing, reduce_row, roles, routes

R, T, P, I = NodeRole.RECEIVER, NodeRole.TRANSMITTER, NodeRole.PASSTHROUGH, NodeRole.IDLE


def test_level0_alternates():
    assert "".join(r.value for r in roles(0, 8)) == "RTRTRTRT"


def test_role_examples():
    assert node_role(2, 4) is T
    assert node_role(1, 1) is P
    assert node_role(1, 0) is R
    assert node_role(1, 3) is I


def test_level2_row():
    assert "".join(r.value for r in roles(2, 8)) == "RPPPT---"


def test_receiver_without_transmitter_is_idle():
    # a row of 4 has no node 4 to transmit at level 2
    assert roles(2, 4) == [I, I, I, I]


def test_path_through_passthroughs():
    assert routes(2, 8) == ((4, 3, 2, 1, 0),)


@pytest.mark.parametrize("width", [2, 4, 8, 16])
def test_pairing_is_matching_per_level(width):
    for level in range(NetRow(width).levels):
        pairs = pairing(level, width)
        span = 1 << level
        assert pairs == {rx: rx + span for rx in range(0, width, 2 * span)}
        # distinct endpoints
        assert len(set(pairs.values())) == len(pairs)
        assert not set(pairs) & set(pairs.values())


@pytest.mark.parametrize("width", [2, 4, 8, 16, 32])
def test_every_node_ends_in_node0(width):
    """Following receiver links level by level, every node's data reaches 0."""
    owner = list(range(width))
    for level in range(NetRow(width).levels):
        for rx, tx in pairing(level, width).items():
            owner = [rx if o == tx else o for o in owner]
    assert owner == [0] * width


@given(st.lists(st.integers(-1000, 1000), min_size=16, max_size=16))
def test_reduce_row_sums_into_node0(vals):
    assert reduce_row(vals)[0] == sum(vals)


@given(st.integers(0, 4), st.data())
def test_bit_streams_arrive_in_order(level_exp, data):
    """A transmitter's LSB-first stream reaches its receiver bit for bit."""
    width = 1 << (level_exp + 1)
    level = level_exp
    nbits = data.draw(st.integers(1, 12))
    streams = data.draw(st.lists(st.lists(st.integers(0, 1), min_size=nbits, max_size=nbits),
                                 min_size=width, max_size=width))
    fifo = {rx: deque() for rx in pairing(level, width)}
    for t in range(nbits):
        out = net_cycle([s[t] for s in streams], level)
        for rx in fifo:
            fifo[rx].append(out[rx])
        for node, role in enumerate(roles(level, width)):
            if role is not R:
                assert out[node] == 0
    for rx, tx in pairing(level, width).items():
        assert list(fifo[rx]) == streams[tx]


def test_net_cycle_batched_rows():
    bits = np.array([[0, 1, 0, 1], [1, 0, 1, 1]], dtype=np.uint16)
    assert net_cycle(bits, 0).tolist() == [[1, 0, 1, 0], [0, 0, 1, 0]]
    assert net_cycle(bits, 1).tolist() == [[0, 0, 0, 0], [1, 0, 0, 0]]


def test_bad_width():
    with pytest.raises(ValueError):
        NetRow(6)
    with pytest.raises(ValueError):
        net_cycle([0, 1, 0], 0)
    with pytest.raises(ValueError):
        node_role(0, 5, width=4)
