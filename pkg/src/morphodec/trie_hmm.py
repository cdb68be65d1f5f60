"""Trie-structured diphone HMM index over compiled lexicon headers.

Every compiled header becomes a left-to-right HMM whose states are labeled
with the header's diphones; shared prefixes share states, so the whole
lexicon is one trie hanging off a virtual root.  Each entry is registered
as a terminal at the state where its header completes.

Two extras support cross-morpheme junctions:

* For every entry whose header starts with a consonant-initial (C1V)
  diphone, junction nodes labeled with the matching C2C1 diphones are
  inserted as root children and linked into the entry's first state.  They
  let a morpheme consume the co-articulated boundary diphone produced when
  it follows a sonorant coda.
* A vowel-less entry (header = one bare consonant) gets a coda-matching
  state: it emits a match for any observation carrying that consonant in
  its coda slot (VC2 right or C2C1 left).

Probabilities are fixed-form, not trained: self-transitions get ``alpha``,
each of a state's N children gets ``(1 - alpha) / N``, everything else 0.
A state emits its own label with probability ``beta`` and anything else
with ``(1 - beta) / M`` over the M-symbol inventory (left unnormalized on
purpose; ``normalize_emissions`` rescales misses by ``M / (M - 1)``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError
from .phonology import KIND_C1V, KIND_C2C1, KIND_VC2, DiphoneInventory

ROOT = 0


@dataclass
class TrieState:
    id: int
    label: str                      # diphone symbol; '' for the root; bare consonant for coda states
    children: list[int] = field(default_factory=list)
    terminals: list = field(default_factory=list)   # LexiconEntry refs completed here
    junction: bool = False
    coda_match: bool = False
    depth: int = 0


@dataclass(frozen=True)
class HmmParams:
    alpha: float = 0.8
    beta: float = 0.9
    m: int = 618
    normalize_emissions: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f"alpha must be in (0,1), got {self.alpha}")
        if not 0.0 < self.beta < 1.0:
            raise ValidationError(f"beta must be in (0,1), got {self.beta}")
        if self.m < 1:
            raise ValidationError(f"inventory size must be >= 1, got {self.m}")

    @property
    def miss(self) -> float:
        """Emission probability of a non-matching symbol."""
        if self.normalize_emissions and self.m > 1:
            return (1.0 - self.beta) / (self.m - 1)
        return (1.0 - self.beta) / self.m


class TrieHmmIndex:
    """Immutable after build; safe to share across decoding workers."""

    def __init__(self, states, entries, inventory: DiphoneInventory):
        self.states = states
        self.entries = tuple(entries)
        self.inventory = inventory

    def __len__(self) -> int:
        return len(self.states)

    @property
    def root(self) -> TrieState:
        return self.states[ROOT]

    def state(self, state_id: int) -> TrieState:
        return self.states[state_id]

    def terminal_states(self):
        return [s for s in self.states if s.terminals]

    def junction_states(self):
        return [s for s in self.states if s.junction]


def build_index(entries, inventory: DiphoneInventory) -> TrieHmmIndex:
    """Build the shared-prefix trie with junction entry nodes.

    Entries are sorted into a canonical order first, so identical entry
    sets always produce identical state numbering.
    """
    ordered = sorted(entries, key=lambda e: (e.header, e.key()))
    states = [TrieState(ROOT, "")]

    def child_with_label(parent: TrieState, label: str) -> TrieState | None:
        for cid in parent.children:
            if states[cid].label == label:
                return states[cid]
        return None

    first_state = {}
    for entry in ordered:
        if entry.header is None:
            raise ValidationError(f"entry ({entry.surface}, {entry.orth}) has no compiled header")
        node = states[ROOT]
        for position, symbol in enumerate(entry.header):
            nxt = child_with_label(node, symbol)
            if nxt is None:
                nxt = TrieState(len(states), symbol, depth=node.depth + 1,
                                coda_match=entry.coda_only and node.id == ROOT)
                states.append(nxt)
                node.children.append(nxt.id)
            node = nxt
            if position == 0:
                first_state[symbol] = node.id
        node.terminals.append(entry)

    # Junction entry nodes: one per C2C1 symbol, linked into every first
    # state whose C1V onset matches the C2C1's second consonant.
    junction_by_symbol = {}
    for entry in ordered:
        head = entry.header[0]
        if entry.coda_only or head not in inventory:
            continue
        diphone = inventory.lookup(head)
        if diphone.kind != KIND_C1V:
            continue
        onset = diphone.left.symbol
        for symbol in inventory.symbols:
            cc = inventory.lookup(symbol)
            if cc.kind != KIND_C2C1 or cc.right.symbol != onset:
                continue
            node = junction_by_symbol.get(symbol)
            if node is None:
                node = TrieState(len(states), symbol, depth=1, junction=True)
                states.append(node)
                states[ROOT].children.append(node.id)
                junction_by_symbol[symbol] = node
            target = first_state[head]
            if target not in node.children:
                node.children.append(target)

    return TrieHmmIndex(states, ordered, inventory)


def transition_prob(index: TrieHmmIndex, i: int, j: int, params: HmmParams) -> float:
    """alpha on the self-loop, (1 - alpha)/N to each of N children, else 0."""
    if i == j:
        return params.alpha
    state = index.state(i)
    if j in state.children:
        return (1.0 - params.alpha) / len(state.children)
    return 0.0


def emission_match(index: TrieHmmIndex, state: TrieState, observed: str) -> bool:
    """Does ``observed`` count as this state's own symbol?"""
    if state.coda_match:
        diphone = index.inventory.lookup(observed)
        if diphone.kind == KIND_VC2:
            return diphone.right.symbol == state.label
        if diphone.kind == KIND_C2C1:
            return diphone.left.symbol == state.label
        return False
    return observed == state.label


def emission_prob(index: TrieHmmIndex, i: int, observed: str, params: HmmParams) -> float:
    """beta for the state's own symbol, (1 - beta)/M otherwise."""
    if observed not in index.inventory:
        raise ValidationError(f"observed symbol {observed!r} is not in the inventory")
    state = index.state(i)
    return params.beta if emission_match(index, state, observed) else params.miss


def to_dot(index: TrieHmmIndex) -> str:
    """Graphviz rendering of the trie (ids, labels, terminals, junction flags)."""
    lines = ["digraph trie {", "  rankdir=LR;"]
    for state in index.states:
        label = state.label or "root"
        extras = []
        if state.terminals:
            extras.append("; ".join(t.orth for t in state.terminals))
        shape = "doublecircle" if state.terminals else "circle"
        style = ' style="bold"' if state.junction else ""
        text = label if not extras else f"{label}\\n{extras[0]}"
        lines.append(f'  n{state.id} [label="{text}" shape={shape}{style}];')
    for state in index.states:
        for child in state.children:
            lines.append(f"  n{state.id} -> n{child};")
    lines.append("}")
    return "\n".join(lines)
