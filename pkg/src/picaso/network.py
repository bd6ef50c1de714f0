"""Binary-hopping reduction network between the PE-blocks of one row.

At level ``L`` the row is cut into groups of ``2**(L+1)`` nodes.  The first
node of a group receives, the node ``2**L`` places to its right transmits,
and the nodes in between forward the stream combinationally.  Running levels
``0 .. log2(width) - 1`` with the receivers accumulating leaves the row total
in node 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class NodeRole(enum.Enum):
    TRANSMITTER = "T"
    RECEIVER = "R"
    PASSTHROUGH = "P"
    IDLE = "-"


def _is_pow2(x: int) -> bool:
    return x > 0 and x & (x - 1) == 0


def node_role(level: int, index: int, width: int | None = None) -> NodeRole:
    """Role of node ``index`` at ``level``.

    With ``width`` given, a receiver whose transmitter would fall off the end
    of the row (and the pass-through nodes leading to it) are IDLE.
    """
    if level < 0 or index < 0:
        raise ValueError("level and index must be non-negative")
    if width is not None and index >= width:
        raise ValueError(f"node {index} outside a row of {width}")
    span = 1 << level
    pos = index % (2 * span)
    if pos == span:
        return NodeRole.TRANSMITTER
    if pos > span:
        return NodeRole.IDLE
    has_tx = width is None or index - pos + span < width
    if not has_tx:
        return NodeRole.IDLE
    return NodeRole.RECEIVER if pos == 0 else NodeRole.PASSTHROUGH


def roles(level: int, width: int) -> list[NodeRole]:
    return [node_role(level, i, width) for i in range(width)]


@dataclass(frozen=True)
class NetRow:
    """A row of ``width`` network nodes (``width`` a power of two)."""

    width: int
    level: int = 0

    def __post_init__(self):
        if not _is_pow2(self.width):
            raise ValueError(f"network row width must be a power of two, got {self.width}")
        if self.level < 0:
            raise ValueError("level must be non-negative")

    @property
    def levels(self) -> int:
        """Number of levels (jumps) needed to reduce the row into node 0."""
        return self.width.bit_length() - 1

    def roles(self) -> list[NodeRole]:
        return roles(self.level, self.width)


@lru_cache(maxsize=None)
def routes(level: int, width: int) -> tuple[tuple[int, ...], ...]:
    """Hop paths ``(transmitter, pass..., receiver)`` active at ``level``.

    Paths are traced node by node from each transmitter towards the left,
    so a role table that failed to connect a transmitter raises here.
    """
    out = []
    for tx in range(width):
        if node_role(level, tx, width) is not NodeRole.TRANSMITTER:
            continue
        path = [tx]
        node = tx - 1
        while node >= 0 and node_role(level, node, width) is NodeRole.PASSTHROUGH:
            path.append(node)
            node -= 1
        if node < 0 or node_role(level, node, width) is not NodeRole.RECEIVER:
            raise AssertionError(f"transmitter {tx} at level {level} reaches no receiver")
        path.append(node)
        out.append(tuple(path))
    return tuple(out)


def pairing(level: int, width: int) -> dict[int, int]:
    """Map receiver -> transmitter at ``level``."""
    return {p[-1]: p[0] for p in routes(level, width)}


def net_cycle(bits, level: int):
    """Deliver one cycle of network bits along a row.

    ``bits`` holds the bit each node emits this cycle, indexed by node on
    the last axis (leading axes are independent rows).  Receivers get their
    transmitter's bit; every other node sees 0.
    """
    arr = np.asarray(bits)
    width = arr.shape[-1]
    if not _is_pow2(width):
        raise ValueError(f"network row width must be a power of two, got {width}")
    out = np.zeros_like(arr)
    pairs = pairing(level, width)
    if pairs:
        rx = np.fromiter(pairs.keys(), dtype=np.intp)
        tx = np.fromiter(pairs.values(), dtype=np.intp)
        out[..., rx] = arr[..., tx]
    if isinstance(bits, list):
        return out.tolist()
    return out


def reduce_row(values, width: int | None = None) -> list[int]:
    """Word-level model of a full row reduction: returns node values after
    running every level with receivers adding what they are sent."""
    vals = list(values)
    width = width or len(vals)
    for level in range(NetRow(width).levels):
        for rx, tx in pairing(level, width).items():
            vals[rx] += vals[tx]
    return vals
