"""Directed hyperlink graph store.

The offline stand-in for a live encyclopedia link database: a directed
graph where nodes are normalized article titles and an edge u -> v means
"page u contains a hyperlink to page v". The store answers the three
queries the difficulty metrics need: in-link sets, in-link counts, and
shortest-path hop distances from a root article.

The graph is immutable once loaded; concurrent readers need no locking.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, TextIO

from .errors import NotFoundError, ParseError

COMMENT_PREFIX = "#"


class TraversalMode(str, Enum):
    """Edge interpretation for distance queries."""

    DIRECTED = "DIRECTED"
    UNDIRECTED = "UNDIRECTED"


def normalize_title(raw: str) -> str:
    """Normalize an article title: trim, case-fold, spaces to underscores.

    Runs of whitespace and underscores collapse to a single underscore,
    so the function is idempotent: normalize(normalize(t)) == normalize(t).
    """
    return "_".join(raw.casefold().replace("_", " ").split())


@dataclass
class LinkGraph:
    """Immutable directed link graph with both adjacency views materialized.

    ``out_adjacency[i]`` and ``in_adjacency[i]`` are sorted tuples of node
    ids and are exact transposes of each other. Node ids are assigned by
    sorted title order, so the same edge multiset always produces a
    structurally identical graph regardless of input line order.
    """

    nodes: dict[str, int]
    titles: tuple[str, ...]
    out_adjacency: tuple[tuple[int, ...], ...]
    in_adjacency: tuple[tuple[int, ...], ...]
    node_count: int
    edge_count: int
    dropped_duplicates: int = 0
    dropped_self_loops: int = 0
    _in_sets: tuple[frozenset[int], ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if len(self._in_sets) != self.node_count:
            object.__setattr__(
                self, "_in_sets", tuple(frozenset(adj) for adj in self.in_adjacency)
            )

    def resolve(self, raw_keyword: str) -> int | None:
        """Map raw text to a node id via title normalization; None if absent."""
        return self.nodes.get(normalize_title(raw_keyword))

    def title_of(self, node_id: int) -> str:
        return self.titles[node_id]

    def _require(self, title: str) -> int:
        node = self.resolve(title)
        if node is None:
            raise NotFoundError(f"unknown title: {title!r}")
        return node

    def in_links(self, title: str) -> frozenset[int]:
        """Set of node ids with an edge into ``title``.

        Raises NotFoundError for unknown titles; an isolated node yields
        the empty set, which is not an error.
        """
        return self.in_links_by_id(self._require(title))

    def in_links_by_id(self, node_id: int) -> frozenset[int]:
        return self._in_sets[node_id]

    def in_link_count(self, title: str) -> int:
        """Number of incoming links for ``title``."""
        return len(self.in_adjacency[self._require(title)])

    def in_link_count_by_id(self, node_id: int) -> int:
        return len(self.in_adjacency[node_id])

    def _neighbors(self, node_id: int, mode: TraversalMode) -> Iterable[int]:
        if mode is TraversalMode.DIRECTED:
            return self.out_adjacency[node_id]
        # Undirected view: union of both adjacency lists (they are disjoint
        # unless the graph has a 2-cycle, which BFS tolerates).
        return self.out_adjacency[node_id] + self.in_adjacency[node_id]

    def distances_from(
        self, root: str, mode: TraversalMode = TraversalMode.DIRECTED
    ) -> list[int | None]:
        """BFS hop counts from ``root`` to every node; None where unreachable."""
        source = self._require(root)
        dist: list[int | None] = [None] * self.node_count
        dist[source] = 0
        queue: deque[int] = deque([source])
        while queue:
            node = queue.popleft()
            base = dist[node]
            assert base is not None
            for nxt in self._neighbors(node, mode):
                if dist[nxt] is None:
                    dist[nxt] = base + 1
                    queue.append(nxt)
        return dist

    def distance_from_root(
        self,
        root: str,
        target: str,
        mode: TraversalMode = TraversalMode.DIRECTED,
    ) -> int | None:
        """Shortest-path hop count from ``root`` to ``target``.

        Returns 0 iff target is the root itself, and None when no path
        exists under the requested mode. The unreachable sentinel is never
        a fabricated large number; imputation is the caller's decision.
        """
        target_id = self._require(target)
        return self.distances_from(root, mode)[target_id]


def _parse_edge_lines(
    lines: Iterable[str],
) -> Iterator[tuple[int, str, str]]:
    """Yield (line_number, source, target) for every payload line."""
    for line_number, line in enumerate(lines, start=1):
        stripped = line.rstrip("\n").rstrip("\r")
        if not stripped.strip() or stripped.lstrip().startswith(COMMENT_PREFIX):
            continue
        fields = stripped.split("\t")
        if len(fields) != 2:
            raise ParseError(
                f"expected 2 tab-separated fields, got {len(fields)}", line_number
            )
        source = normalize_title(fields[0])
        target = normalize_title(fields[1])
        if not source or not target:
            raise ParseError("empty title", line_number)
        yield line_number, source, target


def load_graph(lines: Iterable[str]) -> LinkGraph:
    """Build a LinkGraph from an edge-list stream.

    Input is UTF-8 TSV, one ``source<TAB>target`` pair per line;
    ``#``-prefixed comment lines and blank lines are skipped. Duplicate
    edges and self-loops are dropped and counted. An empty stream yields
    a valid empty graph.
    """
    edges: set[tuple[str, str]] = set()
    titles: set[str] = set()
    dropped_duplicates = 0
    dropped_self_loops = 0
    for _line_number, source, target in _parse_edge_lines(lines):
        titles.add(source)
        titles.add(target)
        if source == target:
            dropped_self_loops += 1
            continue
        if (source, target) in edges:
            dropped_duplicates += 1
            continue
        edges.add((source, target))

    ordered_titles = tuple(sorted(titles))
    nodes = {title: i for i, title in enumerate(ordered_titles)}
    out_lists: list[list[int]] = [[] for _ in ordered_titles]
    in_lists: list[list[int]] = [[] for _ in ordered_titles]
    for source, target in edges:
        out_lists[nodes[source]].append(nodes[target])
        in_lists[nodes[target]].append(nodes[source])

    return LinkGraph(
        nodes=nodes,
        titles=ordered_titles,
        out_adjacency=tuple(tuple(sorted(lst)) for lst in out_lists),
        in_adjacency=tuple(tuple(sorted(lst)) for lst in in_lists),
        node_count=len(ordered_titles),
        edge_count=len(edges),
        dropped_duplicates=dropped_duplicates,
        dropped_self_loops=dropped_self_loops,
    )


def load_graph_file(path: str) -> LinkGraph:
    with open(path, encoding="utf-8") as handle:
        return load_graph(handle)


def write_canonical(graph: LinkGraph, stream: TextIO) -> None:
    """Write the graph back out as a canonical, sorted edge-list TSV.

    The output is a valid load_graph input and is byte-stable for a given
    edge multiset, so re-ingesting or re-running ingestion is idempotent.
    """
    stream.write(f"# nodes={graph.node_count}\n")
    stream.write(f"# edges={graph.edge_count}\n")
    stream.write(f"# dropped_duplicates={graph.dropped_duplicates}\n")
    stream.write(f"# dropped_self_loops={graph.dropped_self_loops}\n")
    for source_id, targets in enumerate(graph.out_adjacency):
        source = graph.titles[source_id]
        for target_id in targets:
            stream.write(f"{source}\t{graph.titles[target_id]}\n")
