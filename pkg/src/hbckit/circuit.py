"""Complex nodal analysis for grounded linear R/C networks driven by one voltage source.

A :class:`Netlist` is an immutable description of a circuit: resistors,
capacitors and exactly one independent voltage source over named nodes, with
``gnd`` as the distinguished reference node.  :func:`solve_ac` computes the
complex node voltages at a single frequency, :func:`transfer` the output/source
voltage ratio, and :func:`sweep` a whole :class:`FrequencyResponse`.

The source is eliminated symbolically (known-voltage / supernode reduction),
so the source branch constraint holds exactly and the solved system contains
only admittances.  The reduced matrix is Jacobi-equilibrated before the dense
solve and the solution is polished by iterative refinement until the KCL
residual meets :data:`KCL_TOLERANCE`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GROUND = "gnd"

RESISTOR = "resistor"
CAPACITOR = "capacitor"
VSOURCE = "voltage-source"

#: Relative KCL residual every solve must satisfy (see module docstring).
KCL_TOLERANCE = 1e-9

_REFINEMENT_STEPS = 3


class CircuitError(Exception):
    """Base class for circuit-construction and solver failures."""


class NetlistError(CircuitError):
    """Raised when a netlist violates a structural invariant."""


class SingularSystemError(CircuitError):
    """Raised when the nodal system is singular or cannot meet the residual bound.

    ``node`` names the offending node when it can be identified (e.g. a node
    with no admittance to the rest of the circuit).
    """

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class Element:
    """One two-terminal element: resistor (ohms), capacitor (farads) or source (volts)."""

    kind: str
    value: float
    pos: str
    neg: str
    label: str = ""

    def __post_init__(self):
        if self.kind not in (RESISTOR, CAPACITOR, VSOURCE):
            raise NetlistError(f"unknown element kind {self.kind!r}")
        if self.pos == self.neg:
            raise NetlistError(
                f"element {self.label or self.kind} has coincident endpoints {self.pos!r}"
            )
        if not math.isfinite(self.value):
            raise NetlistError(f"element {self.label or self.kind} has non-finite value")
        if self.kind == VSOURCE:
            if self.value < 0:
                raise NetlistError("source amplitude must be >= 0")
        elif self.value <= 0:
            raise NetlistError(
                f"{self.kind} {self.label or ''} must have a positive value, got {self.value}"
            )


def resistor(ohms, pos, neg, label=""):
    return Element(RESISTOR, float(ohms), pos, neg, label)


def capacitor(farads, pos, neg, label=""):
    return Element(CAPACITOR, float(farads), pos, neg, label)


def vsource(volts, pos, neg, label="source"):
    return Element(VSOURCE, float(volts), pos, neg, label)


class Netlist:
    """Immutable grounded R/C/V-source circuit with a designated output.

    Args:
        elements: the circuit elements; exactly one must be a voltage source.
        output: node label for single-ended pickup, or an ordered ``(plus,
            minus)`` pair for differential pickup.

    Raises:
        NetlistError: if any structural invariant fails (no ground node,
            duplicate sources, floating sub-network, unknown output node).
    """

    def __init__(self, elements, output):
        elements = tuple(elements)
        if not elements:
            raise NetlistError("netlist has no elements")
        sources = [e for e in elements if e.kind == VSOURCE]
        if len(sources) != 1:
            raise NetlistError(f"netlist must contain exactly one voltage source, got {len(sources)}")

        nodes = set()
        for e in elements:
            nodes.add(e.pos)
            nodes.add(e.neg)
        if GROUND not in nodes:
            raise NetlistError(f"netlist has no ground node {GROUND!r}")

        if isinstance(output, str):
            out_nodes = (output,)
        else:
            out_nodes = tuple(output)
            if len(out_nodes) != 2:
                raise NetlistError("differential output must name exactly two nodes")
        for n in out_nodes:
            if n not in nodes:
                raise NetlistError(f"output node {n!r} is not part of the netlist")

        self.elements = elements
        self.output = output if isinstance(output, str) else out_nodes
        self.nodes = frozenset(nodes)
        self.source = sources[0]
        self._check_connectivity()

    def _check_connectivity(self):
        adjacency = {n: set() for n in self.nodes}
        for e in self.elements:
            adjacency[e.pos].add(e.neg)
            adjacency[e.neg].add(e.pos)
        seen = {GROUND}
        stack = [GROUND]
        while stack:
            for m in adjacency[stack.pop()]:
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        floating = self.nodes - seen
        if floating:
            raise NetlistError(
                "floating sub-network: no path to ground from "
                + ", ".join(sorted(floating))
            )

    def find(self, label):
        """Return the unique element carrying ``label``."""
        matches = [e for e in self.elements if e.label == label]
        if len(matches) != 1:
            raise KeyError(f"{len(matches)} elements labelled {label!r}")
        return matches[0]

    @property
    def is_differential_output(self):
        return not isinstance(self.output, str)


def _admittance(element, f):
    if element.kind == RESISTOR:
        return 1.0 / element.value
    return 2j * math.pi * f * element.value


def _solve_unit(netlist, f):
    """Node voltages for a unit-amplitude source; returns dict node -> complex."""
    if f <= 0:
        raise ValueError(f"frequency must be positive, got {f}")

    src = netlist.source
    for terminal in (src.pos, src.neg):
        if terminal != GROUND and not any(
            e.kind != VSOURCE and terminal in (e.pos, e.neg) for e in netlist.elements
        ):
            raise SingularSystemError(
                f"source terminal {terminal!r} has no admittance path; malformed topology",
                node=terminal,
            )
    nodes = sorted(netlist.nodes - {GROUND})
    index = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)

    Y = np.zeros((n, n), dtype=complex)
    for e in netlist.elements:
        if e.kind == VSOURCE:
            continue
        y = _admittance(e, f)
        i = index.get(e.pos)
        j = index.get(e.neg)
        if i is not None:
            Y[i, i] += y
        if j is not None:
            Y[j, j] += y
        if i is not None and j is not None:
            Y[i, j] -= y
            Y[j, i] -= y

    # Eliminate the source. With one grounded terminal the other terminal is a
    # known voltage; with both terminals off ground the pair forms a supernode
    # (v_pos = v_neg + 1) and the two KCL rows are summed.
    known = {}
    if src.neg == GROUND:
        known[src.pos] = 1.0 + 0.0j
    elif src.pos == GROUND:
        known[src.neg] = -1.0 + 0.0j

    if known:
        (k_node, k_volt), = known.items()
        k = index[k_node]
        keep = [i for i in range(n) if i != k]
        A = Y[np.ix_(keep, keep)]
        b = -Y[np.ix_(keep, [k])][:, 0] * k_volt
        unknown_nodes = [nodes[i] for i in keep]
    else:
        p = index[src.pos]
        m = index[src.neg]
        keep = [i for i in range(n) if i != p]
        pos_of_m = keep.index(m)
        A = Y[np.ix_(keep, keep)]
        b = -Y[np.ix_(keep, [p])][:, 0] * 1.0
        # fold column p into column m (v_p = v_m + 1)
        A[:, pos_of_m] += Y[np.ix_(keep, [p])][:, 0]
        # supernode KCL: row m absorbs row p
        row_p = Y[p, keep].copy()
        row_p[pos_of_m] += Y[p, p]
        A[pos_of_m, :] += row_p
        b[pos_of_m] -= Y[p, p]
        unknown_nodes = [nodes[i] for i in keep]

    x = _equilibrated_solve(A, b, unknown_nodes)

    voltages = {GROUND: 0.0 + 0.0j}
    for node, v in zip(unknown_nodes, x):
        voltages[node] = v
    if known:
        voltages[k_node] = k_volt
    else:
        voltages[src.pos] = voltages[src.neg] + 1.0

    voltages = _refine(netlist, f, A, b, unknown_nodes, voltages)
    return voltages


def _equilibrated_solve(A, b, unknown_nodes):
    diag = np.abs(np.diagonal(A))
    if diag.size and diag.min() == 0.0:
        bad = unknown_nodes[int(np.argmin(diag))]
        raise SingularSystemError(
            f"node {bad!r} has no admittance to the rest of the circuit", node=bad
        )
    d = 1.0 / np.sqrt(diag)
    As = A * d[:, None] * d[None, :]
    bs = b * d
    try:
        y = np.linalg.solve(As, bs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"singular nodal system: {exc}") from exc
    return y * d


def _refine(netlist, f, A, b, unknown_nodes, voltages):
    """Iterative refinement of the solve.

    Accepts as soon as the current-relative KCL residual meets
    :data:`KCL_TOLERANCE`.  Networks mixing large-admittance branches that
    carry essentially no current with tiny signal currents have an
    eps-level floor on that metric; those are still accepted when the
    reduced system is solved to backward-stable (machine) precision, and
    only a genuinely bad solve raises.
    """
    for _ in range(_REFINEMENT_STEPS):
        if kcl_residual(netlist, f, voltages) <= KCL_TOLERANCE:
            return voltages
        x = np.array([voltages[n] for n in unknown_nodes])
        r = b - A @ x
        dx = _equilibrated_solve(A, r, unknown_nodes)
        x = x + dx
        for node, v in zip(unknown_nodes, x):
            voltages[node] = v
        src = netlist.source
        if src.pos != GROUND and src.neg != GROUND:
            voltages[src.pos] = voltages[src.neg] + 1.0
    if kcl_residual(netlist, f, voltages) <= KCL_TOLERANCE:
        return voltages
    x = np.array([voltages[n] for n in unknown_nodes])
    r = b - A @ x
    scale = np.linalg.norm(A, np.inf) * np.linalg.norm(x, np.inf) + np.linalg.norm(b, np.inf)
    backward = np.linalg.norm(r, np.inf) / scale if scale > 0 else 0.0
    if backward > 1e-12:
        raise SingularSystemError(
            f"solve at {f} Hz did not converge (backward error {backward:.3e}); "
            "the netlist is numerically degenerate"
        )
    return voltages


def source_current(netlist, f, voltages):
    """Current delivered by the source into its positive terminal."""
    src = netlist.source
    total = 0.0 + 0.0j
    for e in netlist.elements:
        if e.kind == VSOURCE:
            continue
        y = _admittance(e, f)
        if e.pos == src.pos:
            total += (voltages[e.pos] - voltages[e.neg]) * y
        elif e.neg == src.pos:
            total += (voltages[e.neg] - voltages[e.pos]) * y
    return total


def kcl_residual(netlist, f, voltages):
    """Worst-node KCL residual relative to the largest branch-current magnitude."""
    src = netlist.source
    sums = {n: 0.0 + 0.0j for n in netlist.nodes}
    i_max = 0.0
    for e in netlist.elements:
        if e.kind == VSOURCE:
            continue
        y = _admittance(e, f)
        i_branch = (voltages[e.pos] - voltages[e.neg]) * y
        sums[e.pos] += i_branch
        sums[e.neg] -= i_branch
        i_max = max(i_max, abs(i_branch))
    i_src = source_current(netlist, f, voltages)
    sums[src.pos] -= i_src
    sums[src.neg] += i_src
    i_max = max(i_max, abs(i_src))
    if i_max == 0.0:
        return 0.0
    worst = max(abs(s) for n, s in sums.items() if n != GROUND)
    return worst / i_max


def solve_ac(netlist, f):
    """Solve the netlist at frequency ``f`` (hertz).

    Returns:
        dict mapping every node (including ``gnd``) to its complex voltage.

    Raises:
        SingularSystemError: for degenerate topologies or when the KCL
            residual bound cannot be met.
        ValueError: if ``f`` is not positive.
    """
    unit = _solve_unit(netlist, f)
    amp = netlist.source.value
    return {n: v * amp for n, v in unit.items()}


def transfer(netlist, f):
    """Complex ratio V(output)/V(source) at frequency ``f``.

    Computed from a unit-amplitude solve, so it is defined even for a
    zero-amplitude source and scales exactly with source amplitude.
    """
    v = _solve_unit(netlist, f)
    if netlist.is_differential_output:
        a, b = netlist.output
        return v[a] - v[b]
    return v[netlist.output]


def sweep(netlist, frequencies):
    """Evaluate :func:`transfer` over a strictly increasing frequency list."""
    freqs = np.asarray(frequencies, dtype=float)
    if freqs.ndim != 1 or freqs.size == 0:
        raise ValueError("frequencies must be a non-empty 1-D sequence")
    if freqs[0] <= 0 or np.any(np.diff(freqs) <= 0):
        raise ValueError("frequencies must be strictly increasing and positive")
    h = np.empty(freqs.size, dtype=complex)
    for i, f in enumerate(freqs):
        try:
            h[i] = transfer(netlist, f)
        except CircuitError as exc:
            raise SingularSystemError(f"sweep failed at {f:.6g} Hz: {exc}") from exc
    return FrequencyResponse(freqs, h)


@dataclass(frozen=True)
class FrequencyResponse:
    """Ordered (frequency, complex transfer) samples with a dB magnitude view."""

    frequencies: np.ndarray
    transfer: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        h = np.asarray(self.transfer, dtype=complex)
        if freqs.ndim != 1 or freqs.shape != h.shape:
            raise ValueError("frequencies and transfer must be 1-D arrays of equal length")
        if freqs.size == 0:
            raise ValueError("response must contain at least one point")
        if freqs[0] <= 0 or np.any(np.diff(freqs) <= 0):
            raise ValueError("frequencies must be strictly increasing and positive")
        freqs.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "transfer", h)

    def __len__(self):
        return self.frequencies.size

    @property
    def magnitude(self):
        return np.abs(self.transfer)

    @property
    def loss_db(self):
        """20*log10(|H|); exact zeros map to -inf rather than raising."""
        mag = self.magnitude
        out = np.full(mag.shape, -np.inf)
        nz = mag > 0
        out[nz] = 20.0 * np.log10(mag[nz])
        return out

    @property
    def phase_deg(self):
        return np.angle(self.transfer, deg=True)
