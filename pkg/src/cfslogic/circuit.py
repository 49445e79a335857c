"""And/Xor-Inverter graph (XAIG) circuits.

A circuit is a DAG of nodes: the constant-0 node (always index 0), primary
inputs, 2-input And gates and 2-input Xor gates.  Edges may carry an
inversion.  Literals are plain ints encoded ``node_index << 1 | complement``.

Construction applies constant propagation and (optionally) same-operand
simplifications, but never structural hashing: functionally duplicate gates
are kept on purpose because downstream rare-pattern analysis is sensitive to
circuit structure.

After :meth:`Circuit.freeze` the circuit is immutable and safe to share
across threads.
"""

from __future__ import annotations

import numpy as np

KIND_CONST0 = 0
KIND_INPUT = 1
KIND_AND = 2
KIND_XOR = 3

CONST0 = 0  # literal for constant false
CONST1 = 1  # literal for constant true


def lit(node: int, complement: bool = False) -> int:
    return node << 1 | int(complement)


def lit_not(x: int) -> int:
    return x ^ 1


def lit_node(x: int) -> int:
    return x >> 1


def lit_comp(x: int) -> bool:
    return bool(x & 1)


def lit_str(x: int) -> str:
    return f"!{x >> 1}" if x & 1 else str(x >> 1)


class CircuitError(Exception):
    pass


class XaigParseError(CircuitError):
    """Malformed XAIG input; carries the offending line number."""

    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class Circuit:
    """An XAIG under construction or frozen.

    :param simplify_same_operand: apply and(x,x)=x, and(x,!x)=0, xor(x,x)=0,
        xor(x,!x)=1 during construction.  Constant propagation is always on.
        The flag exists so structure-sensitivity studies can disable the
        extra rewrites.
    """

    def __init__(self, simplify_same_operand: bool = True):
        self.simplify_same_operand = simplify_same_operand
        self._kind = [KIND_CONST0]
        self._f0 = [0]  # input index for inputs, fanin literal for gates
        self._f1 = [0]
        self.num_inputs = 0
        self._buses: list[tuple[str, list[int]]] = []
        self._bus_index: dict[str, int] = {}
        self._frozen = False
        # set by freeze()
        self.kind = None
        self.f0 = None
        self.f1 = None
        self.fanout_count = None
        self._level = None

    # -- construction ------------------------------------------------------

    def _check_mutable(self):
        if self._frozen:
            raise CircuitError("circuit is frozen")

    def _check_lit(self, x):
        if not 0 <= (x >> 1) < len(self._kind):
            raise CircuitError(f"literal {x} references unknown node")

    def add_input(self) -> int:
        self._check_mutable()
        if len(self._kind) != self.num_inputs + 1:
            raise CircuitError("inputs must be added before any gate")
        n = len(self._kind)
        self._kind.append(KIND_INPUT)
        self._f0.append(self.num_inputs)
        self._f1.append(0)
        self.num_inputs += 1
        return n << 1

    def add_and(self, a: int, b: int) -> int:
        self._check_mutable()
        self._check_lit(a)
        self._check_lit(b)
        if a == CONST0 or b == CONST0:
            return CONST0
        if a == CONST1:
            return b
        if b == CONST1:
            return a
        if self.simplify_same_operand:
            if a == b:
                return a
            if a == b ^ 1:
                return CONST0
        n = len(self._kind)
        self._kind.append(KIND_AND)
        self._f0.append(a)
        self._f1.append(b)
        return n << 1

    def add_xor(self, a: int, b: int) -> int:
        self._check_mutable()
        self._check_lit(a)
        self._check_lit(b)
        if a >> 1 == 0:
            return b ^ (a & 1)
        if b >> 1 == 0:
            return a ^ (b & 1)
        if self.simplify_same_operand and a >> 1 == b >> 1:
            return (a ^ b) & 1
        # fanin complements are pushed to the output edge
        n = len(self._kind)
        self._kind.append(KIND_XOR)
        self._f0.append(a & ~1)
        self._f1.append(b & ~1)
        return (n << 1) | ((a ^ b) & 1)

    def add_output_bus(self, name: str, lits: list[int]):
        self._check_mutable()
        if name in self._bus_index:
            raise CircuitError(f"duplicate bus name {name!r}")
        for x in lits:
            self._check_lit(x)
        self._bus_index[name] = len(self._buses)
        self._buses.append((name, list(lits)))

    # -- frozen view -------------------------------------------------------

    @property
    def frozen(self) -> bool:
        return self._frozen

    @property
    def num_nodes(self) -> int:
        return len(self._kind)

    @property
    def output_buses(self) -> list[tuple[str, list[int]]]:
        return [(name, list(lits)) for name, lits in self._buses]

    def bus(self, name: str) -> list[int]:
        return list(self._buses[self._bus_index[name]][1])

    def freeze(self) -> "Circuit":
        if self._frozen:
            return self
        self.kind = np.array(self._kind, dtype=np.int8)
        self.f0 = np.array(self._f0, dtype=np.int64)
        self.f1 = np.array(self._f1, dtype=np.int64)
        fanout = np.zeros(len(self._kind), dtype=np.int64)
        gate = self.kind >= KIND_AND
        np.add.at(fanout, self.f0[gate] >> 1, 1)
        np.add.at(fanout, self.f1[gate] >> 1, 1)
        for _, lits in self._buses:
            for x in lits:
                fanout[x >> 1] += 1
        self.fanout_count = fanout
        self._frozen = True
        return self

    def levels(self) -> np.ndarray:
        """Per-node logic level: constants and inputs at 0, gates at
        1 + max(fanin levels)."""
        if self._level is None:
            from ._kernels import compute_levels

            self.freeze()
            self._level = compute_levels(self.kind, self.f0, self.f1)
        return self._level

    def stats(self) -> dict:
        self.freeze()
        kind = self.kind
        out_nodes = [x >> 1 for _, lits in self._buses for x in lits]
        level = self.levels()
        if out_nodes:
            level_count = int(level[out_nodes].max())
        else:
            level_count = int(level.max()) if len(level) else 0
        return {
            "node_count": len(kind),
            "and_count": int((kind == KIND_AND).sum()),
            "xor_count": int((kind == KIND_XOR).sum()),
            "level_count": level_count,
            "input_count": self.num_inputs,
            "output_bus_shape": [(name, len(lits)) for name, lits in self._buses],
        }

    def check(self):
        """Assert structural invariants; raises CircuitError on violation."""
        for n, k in enumerate(self._kind):
            if k >= KIND_AND:
                for f in (self._f0[n], self._f1[n]):
                    if f >> 1 >= n:
                        raise CircuitError(f"gate {n} fanin {f >> 1} not topological")
                    if f >> 1 == 0:
                        raise CircuitError(f"gate {n} has constant fanin")

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self._kind == other._kind
            and self._f0 == other._f0
            and self._f1 == other._f1
            and self.num_inputs == other.num_inputs
            and self._buses == other._buses
        )

    def __repr__(self):
        state = "frozen" if self._frozen else "building"
        return (
            f"Circuit({len(self._kind)} nodes, {self.num_inputs} inputs, "
            f"{len(self._buses)} buses, {state})"
        )

    # internal: append a gate without any rewriting (file reader)
    def _append_raw(self, kind, a, b):
        n = len(self._kind)
        self._kind.append(kind)
        self._f0.append(a)
        self._f1.append(b)
        return n


def decompose_xors(circuit: Circuit) -> Circuit:
    """Rewrite every Xor gate as Ands and inverters.

    xor(a,b) becomes not(not(a & !b) & not(!a & b)).  Output bus functions
    are unchanged; the returned circuit is frozen.
    """
    out = Circuit(simplify_same_operand=circuit.simplify_same_operand)
    mapping = [CONST0] * circuit.num_nodes

    def tr(x):
        return mapping[x >> 1] ^ (x & 1)

    for n in range(circuit.num_nodes):
        k = circuit._kind[n]
        if k == KIND_CONST0:
            mapping[n] = CONST0
        elif k == KIND_INPUT:
            mapping[n] = out.add_input()
        elif k == KIND_AND:
            mapping[n] = out.add_and(tr(circuit._f0[n]), tr(circuit._f1[n]))
        else:
            a = tr(circuit._f0[n])
            b = tr(circuit._f1[n])
            u = out.add_and(a, b ^ 1)
            v = out.add_and(a ^ 1, b)
            mapping[n] = out.add_and(u ^ 1, v ^ 1) ^ 1
    for name, lits in circuit.output_buses:
        out.add_output_bus(name, [tr(x) for x in lits])
    return out.freeze()


XAIG_MAGIC = "xaig"


def write_xaig(circuit: Circuit, sink):
    """Write the line-oriented XAIG text format.

    Header ``xaig <num_nodes> <num_inputs>``, then one line per gate
    ``<id> AND|XOR <lit> <lit>``, then ``bus <name> <width> <lit...>`` lines
    in declaration order.  Node 0 is the implicit constant 0 and inputs are
    the nodes 1..num_inputs; neither is listed.
    """
    close = False
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        sink = open(sink, "w")
        close = True
    try:
        sink.write(f"{XAIG_MAGIC} {circuit.num_nodes} {circuit.num_inputs}\n")
        for n in range(circuit.num_inputs + 1, circuit.num_nodes):
            op = "AND" if circuit._kind[n] == KIND_AND else "XOR"
            sink.write(
                f"{n} {op} {lit_str(circuit._f0[n])} {lit_str(circuit._f1[n])}\n"
            )
        for name, lits in circuit.output_buses:
            bits = " ".join(lit_str(x) for x in lits)
            sink.write(f"bus {name} {len(lits)} {bits}\n" if lits else f"bus {name} 0\n")
    finally:
        if close:
            sink.close()


def read_xaig(source) -> Circuit:
    """Parse :func:`write_xaig` output; returns a frozen circuit.

    Raises :class:`XaigParseError` with a line number on malformed input.
    """
    close = False
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        source = open(source)
        close = True
    try:
        lines = [(i + 1, ln.strip()) for i, ln in enumerate(source)]
    finally:
        if close:
            source.close()
    lines = [(no, ln) for no, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise XaigParseError(0, "empty file")

    no, header = lines[0]
    parts = header.split()
    if not parts or parts[0] != XAIG_MAGIC:
        raise XaigParseError(no, f"bad header (expected version {XAIG_MAGIC!r})")
    if len(parts) != 3:
        raise XaigParseError(no, "header must be 'xaig <num_nodes> <num_inputs>'")
    try:
        num_nodes, num_inputs = int(parts[1]), int(parts[2])
    except ValueError:
        raise XaigParseError(no, "non-integer header field") from None
    if num_inputs < 0 or num_nodes < num_inputs + 1:
        raise XaigParseError(no, "inconsistent node/input counts")

    def parse_lit(no, tok, max_node):
        comp = tok.startswith("!")
        body = tok[1:] if comp else tok
        if not body.isdigit():
            raise XaigParseError(no, f"bad literal {tok!r}")
        node = int(body)
        if node >= max_node:
            raise XaigParseError(no, f"literal {tok!r} not topological")
        return node << 1 | comp

    c = Circuit()
    for _ in range(num_inputs):
        c.add_input()
    next_id = num_inputs + 1
    for no, ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "bus":
            if len(parts) < 3:
                raise XaigParseError(no, "bad bus line")
            name, width = parts[1], parts[2]
            if not width.isdigit() or len(parts) != 3 + int(width):
                raise XaigParseError(no, "bus width mismatch")
            lits = [parse_lit(no, t, num_nodes) for t in parts[3:]]
            if name in c._bus_index:
                raise XaigParseError(no, f"duplicate bus {name!r}")
            c.add_output_bus(name, lits)
            continue
        if len(parts) != 4 or parts[1] not in ("AND", "XOR"):
            raise XaigParseError(no, f"bad gate line {ln!r}")
        if not parts[0].isdigit() or int(parts[0]) != next_id:
            raise XaigParseError(no, f"expected gate id {next_id}")
        a = parse_lit(no, parts[2], next_id)
        b = parse_lit(no, parts[3], next_id)
        if a >> 1 == 0 or b >> 1 == 0:
            raise XaigParseError(no, "constant fanin on gate")
        c._append_raw(KIND_AND if parts[1] == "AND" else KIND_XOR, a, b)
        next_id += 1
    if next_id != num_nodes:
        raise XaigParseError(lines[-1][0], f"expected {num_nodes} nodes, got {next_id}")
    return c.freeze()
