"""Domain-separated SHA-256 Merkle tree with single and batch inclusion proofs.

Prefix bytes keep the three kinds of node apart::

    leaf      SHA-256(0x00 || commitment)
    internal  SHA-256(0x01 || left || right)
    padding   SHA-256(0x02 || uint64_be(position))

The leaf layer is padded with padding labels up to the next power of two,
and to at least two leaves, so every tree has a real hash at its root.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .crypto import g1_to_bytes, sha256
from .errors import EmptyTreeError, MalformedProofError

LEAF_PREFIX = b"\x00"
NODE_PREFIX = b"\x01"
PAD_PREFIX = b"\x02"

LEFT = "left"
RIGHT = "right"


def leaf_label(commitment) -> bytes:
    """Label of a leaf holding a commitment (G1 point or its 48-byte encoding)."""
    if not isinstance(commitment, (bytes, bytearray)):
        commitment = g1_to_bytes(commitment)
    return sha256(LEAF_PREFIX, bytes(commitment))


def internal_hash(left: bytes, right: bytes) -> bytes:
    return sha256(NODE_PREFIX, left, right)


def pad_label(position: int) -> bytes:
    return sha256(PAD_PREFIX, struct.pack(">Q", position))


def padded_size(leaf_count: int) -> int:
    size = 2
    while size < leaf_count:
        size *= 2
    return size


def depth_for(leaf_count: int) -> int:
    return padded_size(leaf_count).bit_length() - 1


@dataclass(frozen=True)
class MerkleTree:
    leaf_labels: tuple
    levels: tuple  # levels[0] is the padded leaf layer, levels[-1] == (root,)
    leaf_count: int

    @property
    def root(self) -> bytes:
        return self.levels[-1][0]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1


@dataclass(frozen=True)
class InclusionProof:
    leaf_index: int
    path: tuple  # ((sibling digest, side of sibling), ...) from leaf upwards


@dataclass(frozen=True)
class MultiProof:
    disclosed_indices: tuple
    auxiliary_nodes: dict = field(default_factory=dict)  # (level, index) -> digest

    def sorted_nodes(self) -> list:
        return [(lvl, idx, self.auxiliary_nodes[(lvl, idx)]) for lvl, idx in sorted(self.auxiliary_nodes)]


def build(leaf_labels) -> MerkleTree:
    labels = tuple(bytes(x) for x in leaf_labels)
    if not labels:
        raise EmptyTreeError("cannot build a Merkle tree with no leaves")
    size = padded_size(len(labels))
    layer = list(labels) + [pad_label(i) for i in range(len(labels), size)]
    levels = [tuple(layer)]
    while len(layer) > 1:
        layer = [internal_hash(layer[i], layer[i + 1]) for i in range(0, len(layer), 2)]
        levels.append(tuple(layer))
    return MerkleTree(labels, tuple(levels), len(labels))


def root_of(leaf_labels) -> bytes:
    return build(leaf_labels).root


def prove(tree: MerkleTree, index: int) -> InclusionProof:
    if not 0 <= index < tree.leaf_count:
        raise IndexError(f"leaf index {index} out of range for {tree.leaf_count} leaves")
    path = []
    idx = index
    for level in tree.levels[:-1]:
        sib = idx ^ 1
        path.append((level[sib], LEFT if sib < idx else RIGHT))
        idx //= 2
    return InclusionProof(index, tuple(path))


def verify(root: bytes, label: bytes, proof: InclusionProof) -> bool:
    node = label
    idx = proof.leaf_index
    for sibling, side in proof.path:
        # side must agree with the claimed index, otherwise the index is unbound
        if side != (LEFT if idx & 1 else RIGHT):
            return False
        node = internal_hash(sibling, node) if side == LEFT else internal_hash(node, sibling)
        idx //= 2
    return idx == 0 and node == root


def prove_multi(tree: MerkleTree, indices) -> MultiProof:
    """Minimal set of sibling labels needed to rebuild the root from ``indices``."""
    indices = list(indices)
    if len(set(indices)) != len(indices):
        raise IndexError("duplicate leaf index in multiproof request")
    for i in indices:
        if not 0 <= i < tree.leaf_count:
            raise IndexError(f"leaf index {i} out of range for {tree.leaf_count} leaves")
    aux = {}
    if not indices:
        aux[(tree.depth, 0)] = tree.root
        return MultiProof((), aux)
    known = set(indices)
    for lvl in range(tree.depth):
        for idx in known:
            sib = idx ^ 1
            if sib not in known:
                aux[(lvl, sib)] = tree.levels[lvl][sib]
        known = {idx // 2 for idx in known}
    return MultiProof(tuple(sorted(indices)), aux)


def recompute_root(disclosed: dict, proof: MultiProof, leaf_count: int) -> bytes:
    """Root implied by disclosed leaf labels plus the proof's auxiliary nodes.

    Raises MalformedProofError when nodes are missing, superfluous, or
    positioned outside the tree.
    """
    if leaf_count < 1:
        raise MalformedProofError("leaf_count must be positive")
    if sorted(disclosed) != list(proof.disclosed_indices):
        raise MalformedProofError("disclosed leaves do not match the proof's indices")
    depth = depth_for(leaf_count)
    for i in disclosed:
        if not 0 <= i < leaf_count:
            raise MalformedProofError(f"disclosed index {i} outside the tree")
    for lvl, idx in proof.auxiliary_nodes:
        if not (0 <= lvl <= depth and 0 <= idx < (1 << (depth - lvl))):
            raise MalformedProofError(f"auxiliary node ({lvl}, {idx}) outside the tree")

    used = set()
    if not disclosed:
        if set(proof.auxiliary_nodes) != {(depth, 0)}:
            raise MalformedProofError("empty disclosure must carry exactly the root")
        return proof.auxiliary_nodes[(depth, 0)]

    layer = {i: bytes(d) for i, d in disclosed.items()}
    for lvl in range(depth):
        nxt = {}
        for idx in sorted(layer):
            parent = idx // 2
            if parent in nxt:
                continue
            sib = idx ^ 1
            if sib in layer:
                sib_label = layer[sib]
                if (lvl, sib) in proof.auxiliary_nodes:
                    raise MalformedProofError(f"auxiliary node ({lvl}, {sib}) is derivable")
            else:
                try:
                    sib_label = proof.auxiliary_nodes[(lvl, sib)]
                except KeyError:
                    raise MalformedProofError(f"missing auxiliary node ({lvl}, {sib})") from None
                used.add((lvl, sib))
            left, right = (layer[idx], sib_label) if idx % 2 == 0 else (sib_label, layer[idx])
            nxt[parent] = internal_hash(left, right)
        layer = nxt
    if used != set(proof.auxiliary_nodes):
        raise MalformedProofError("multiproof carries unused auxiliary nodes")
    return layer[0]
