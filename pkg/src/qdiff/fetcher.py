"""Thin cached HTTP client for pulling in-link sets from a remote endpoint.

The endpoint is expected to answer ``GET <base>?title=<normalized>`` with a
JSON array of source-article titles that link into the queried article.
Each response is written to the cache directory as a standard edge-list
TSV named after the normalized title, so fetched data feeds straight into
the graph loader. The graph store itself never touches the network; this
client is the only networking code in the package.
"""

from __future__ import annotations

import json
import urllib.parse
import urllib.request
from pathlib import Path
from typing import Callable

from .errors import ParseError
from .linkgraph import normalize_title

Opener = Callable[[str], bytes]


def _default_opener(url: str) -> bytes:
    with urllib.request.urlopen(url, timeout=30) as response:
        return response.read()


class InLinkFetcher:
    """Fetch and cache the set of articles linking into a given title."""

    def __init__(
        self,
        endpoint: str,
        cache_dir: str | Path,
        opener: Opener | None = None,
    ):
        self.endpoint = endpoint
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self._opener = opener or _default_opener

    def cache_path(self, title: str) -> Path:
        # Percent-encode so titles with path separators ("tcp/ip") cannot
        # nest or escape the cache directory.
        name = urllib.parse.quote(normalize_title(title), safe="")
        return self.cache_dir / f"{name}.tsv"

    def fetch(self, title: str) -> list[tuple[str, str]]:
        """Edges (source, title) for the article; cache hit skips the network."""
        normalized = normalize_title(title)
        path = self.cache_path(normalized)
        if path.exists():
            return self._read_cache(path)
        url = f"{self.endpoint}?title={urllib.parse.quote(normalized)}"
        raw = self._opener(url)
        try:
            sources = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"endpoint returned invalid JSON: {exc.msg}") from None
        if not isinstance(sources, list):
            raise ParseError("endpoint must return a JSON array of titles")
        edges = sorted(
            {
                (normalize_title(str(source)), normalized)
                for source in sources
                if normalize_title(str(source))
                and normalize_title(str(source)) != normalized
            }
        )
        text = "".join(f"{source}\t{target}\n" for source, target in edges)
        path.write_text(text, encoding="utf-8")
        return edges

    @staticmethod
    def _read_cache(path: Path) -> list[tuple[str, str]]:
        edges = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            source, target = line.split("\t")
            edges.append((source, target))
        return edges
