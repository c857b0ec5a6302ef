"""Cached in-link fetcher: network only on cache miss, edge-list output."""

from __future__ import annotations

import json

import pytest

from qdiff.errors import ParseError
from qdiff.fetcher import InLinkFetcher
from qdiff.linkgraph import load_graph


class StubOpener:
    def __init__(self, payloads: dict[str, list[str]]):
        self.payloads = payloads
        self.calls: list[str] = []

    def __call__(self, url: str) -> bytes:
        self.calls.append(url)
        title = url.split("title=")[1]
        return json.dumps(self.payloads[title]).encode("utf-8")


def test_fetch_writes_edge_list_and_caches(tmp_path):
    opener = StubOpener({"tcp": ["Internet", "UDP Protocol", "tcp"]})
    fetcher = InLinkFetcher("http://kg.example/inlinks", tmp_path, opener)

    edges = fetcher.fetch("TCP")
    # Self-link dropped, titles normalized, deterministic order.
    assert edges == [("internet", "tcp"), ("udp_protocol", "tcp")]
    assert fetcher.cache_path("tcp").exists()
    assert len(opener.calls) == 1

    again = fetcher.fetch("tcp ")
    assert again == edges
    assert len(opener.calls) == 1  # cache hit, no second request

    graph = load_graph(fetcher.cache_path("tcp").read_text().splitlines(True))
    assert graph.in_link_count("tcp") == 2


def test_slash_titles_stay_inside_cache_dir(tmp_path):
    opener = StubOpener({"tcp/ip": ["Internet"], "../escape": []})
    fetcher = InLinkFetcher("http://kg.example/inlinks", tmp_path, opener)
    for title in ("TCP/IP", "../escape"):
        path = fetcher.cache_path(title)
        assert path.parent == tmp_path
        assert "/" not in path.name
    fetcher.fetch("TCP/IP")
    assert fetcher.cache_path("tcp/ip").exists()


def test_bad_endpoint_payload_rejected(tmp_path):
    fetcher = InLinkFetcher(
        "http://kg.example/inlinks", tmp_path, lambda url: b"not json"
    )
    with pytest.raises(ParseError):
        fetcher.fetch("x")


def test_non_array_payload_rejected(tmp_path):
    fetcher = InLinkFetcher(
        "http://kg.example/inlinks", tmp_path, lambda url: b'{"a": 1}'
    )
    with pytest.raises(ParseError):
        fetcher.fetch("x")
