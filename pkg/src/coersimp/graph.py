"""Graph views of canonical constraint contexts.

A canonical context is read as two directed graphs. The type graph has one
node per type parameter and one edge per subtyping constraint (which, in
canonical form, always relates two bare parameters). The dirt graph has one
node per dirt parameter plus a single shared sink for closed upper bounds;
each edge carries the finite operation set of its upper bound as a label.

The graphs are rebuilt from the context on demand rather than kept in sync
with it; contexts at this scale are tiny and rebuilding keeps the phase code
free of cache invalidation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import ParamContext

# Shared sink node for dirt constraints with a closed upper bound. Not a
# parameter name; kept out of node lists and metrics.
SINK = "*closed*"


@dataclass(frozen=True)
class TypeEdge:
    name: str
    src: str
    dst: str


@dataclass(frozen=True)
class DirtEdge:
    name: str
    src: str
    dst: str  # parameter name or SINK
    ops: frozenset[str]

    def label(self) -> str:
        inner = ",".join(sorted(self.ops))
        return f"{self.name}:{{{inner}}}"


@dataclass
class Digraph:
    """Shared adjacency structure for both graphs."""

    nodes: list[str]
    edges: list  # TypeEdge | DirtEdge, in context order

    def out_edges(self, node: str) -> list:
        return [e for e in self.edges if e.src == node]

    def in_edges(self, node: str) -> list:
        return [e for e in self.edges if e.dst == node]

    def successors(self) -> dict[str, list[str]]:
        succ: dict[str, list[str]] = {n: [] for n in self.nodes}
        for e in self.edges:
            if e.src in succ and e.dst in succ:
                succ[e.src].append(e.dst)
        return succ


def build_type_graph(ctx: ParamContext) -> Digraph:
    nodes = [name for name, _ in ctx.ty_params]
    edges = []
    for name, lo, hi in ctx.ty_cos:
        edges.append(TypeEdge(name, lo.name, hi.name))
    return Digraph(nodes, edges)


def build_dirt_graph(ctx: ParamContext) -> Digraph:
    nodes = list(ctx.dirt_params)
    edges = []
    for name, lo, hi in ctx.dirt_cos:
        dst = hi.tail if hi.tail is not None else SINK
        edges.append(DirtEdge(name, lo.tail, dst, hi.ops))
    return Digraph(nodes, edges)


def tarjan_scc(nodes: list[str], succ: dict[str, list[str]]) -> list[list[str]]:
    """Strongly connected components, iteratively, in reverse topological
    order of the condensation. Node order inside a component follows
    discovery order."""
    index: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    sccs: list[list[str]] = []
    counter = 0

    for root in nodes:
        if root in index:
            continue
        # Each frame is (node, iterator position into its successors).
        work = [(root, 0)]
        while work:
            node, pos = work.pop()
            if pos == 0:
                index[node] = lowlink[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            advanced = False
            kids = succ.get(node, [])
            for i in range(pos, len(kids)):
                kid = kids[i]
                if kid not in index:
                    work.append((node, i + 1))
                    work.append((kid, 0))
                    advanced = True
                    break
                if kid in on_stack:
                    lowlink[node] = min(lowlink[node], index[kid])
            if advanced:
                continue
            if lowlink[node] == index[node]:
                comp = []
                while True:
                    top = stack.pop()
                    on_stack.discard(top)
                    comp.append(top)
                    if top == node:
                        break
                comp.reverse()
                sccs.append(comp)
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
    return sccs


def context_metrics(ctx: ParamContext) -> dict[str, int]:
    return {
        "skel_params": len(ctx.skel_params),
        "ty_params": len(ctx.ty_params),
        "dirt_params": len(ctx.dirt_params),
        "ty_constraints": len(ctx.ty_cos),
        "dirt_constraints": len(ctx.dirt_cos),
    }


def to_dot(ctx: ParamContext, fps=None) -> str:
    """Deterministic DOT rendering of both graphs.

    Polarities (if given) are appended to node labels: `+`, `-`, or `+-`.
    """

    def mark(name: str) -> str:
        if fps is None:
            return ""
        tag = ""
        if name in fps.pos:
            tag += "+"
        if name in fps.neg:
            tag += "-"
        return f" [{tag}]" if tag else ""

    tg = build_type_graph(ctx)
    dg = build_dirt_graph(ctx)
    lines = ["digraph constraints {", "  rankdir=LR;"]
    lines.append("  subgraph cluster_type {")
    lines.append('    label="type constraints";')
    for node in tg.nodes:
        lines.append(f'    "ty_{node}" [label="{node}{mark(node)}"];')
    for e in tg.edges:
        lines.append(f'    "ty_{e.src}" -> "ty_{e.dst}" [label="{e.name}"];')
    lines.append("  }")
    lines.append("  subgraph cluster_dirt {")
    lines.append('    label="dirt constraints";')
    for node in dg.nodes:
        lines.append(f'    "dt_{node}" [label="{node}{mark(node)}"];')
    if any(e.dst == SINK for e in dg.edges):
        lines.append(f'    "dt_{SINK}" [label="closed", shape=box];')
    for e in dg.edges:
        lines.append(f'    "dt_{e.src}" -> "dt_{e.dst}" [label="{e.label()}"];')
    lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
