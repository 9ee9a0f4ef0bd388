import json
import math
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from tabmi.backend import (
    CandidateDistribution,
    ContextPair,
    CountBackend,
    HttpBackend,
    candidate_values,
    fit_builtin,
    format_value,
    textualize,
)
from tabmi.dataset import FeatureSchema, make_table
from tabmi.errors import BackendUnavailableError, UnknownFeatureError
from tabmi.pseudofeatures import fit_bins


def test_textualize_template():
    pairs = [ContextPair("age", 39.0), ContextPair("income", ">50K")]
    assert textualize(pairs) == "age is 39, income is >50K"


def test_textualize_empty_and_single():
    assert textualize([]) == ""
    assert textualize([ContextPair("x", 1.5)]) == "x is 1.5"


def test_format_value_shortest_roundtrip():
    assert format_value(39.0) == "39"
    assert format_value(0.1) == "0.1"
    assert float(format_value(1 / 3)) == 1 / 3


@pytest.fixture
def toy():
    schema = FeatureSchema((("a", "categorical"), ("b", "categorical")))
    rows = (
        [{"a": "x", "b": "p"}] * 4
        + [{"a": "x", "b": "q"}] * 2
        + [{"a": "y", "b": "q"}] * 2
    )
    table = make_table(schema, rows)
    layout = fit_bins(table)
    return table, layout, fit_builtin(table, layout)


def test_empty_context_scores_marginals(toy):
    table, layout, backend = toy
    dist = backend.score([], "b")
    # smoothed marginal log-frequencies, alpha = 0.5
    n, k = 8, 2
    expected = [math.log((4 + 0.5) / (n + 0.5 * k)),
                math.log((4 + 0.5) / (n + 0.5 * k))]
    assert dist.candidates == ["p", "q"]
    assert dist.logits == pytest.approx(expected, abs=1e-12)


def test_conditional_scoring_matches_counts(toy):
    table, layout, backend = toy
    dist = backend.score([ContextPair("a", "x")], "b")
    # P(b | a=x) with Laplace 0.5: p -> (4+.5)/(6+1), q -> (2+.5)/(6+1)
    expected = [math.log(4.5 / 7), math.log(2.5 / 7)]
    assert dist.logits == pytest.approx(expected, abs=1e-12)


def test_unique_prefix_argmax():
    schema = FeatureSchema((("a", "categorical"), ("b", "categorical")))
    rows = (
        [{"a": "u", "b": "rare"}]
        + [{"a": "v", "b": "common"}] * 5
        + [{"a": "w", "b": "other"}] * 2
    )
    t = make_table(schema, rows)
    layout = fit_bins(t)
    backend = fit_builtin(t, layout)
    dist = backend.score([ContextPair("a", "u")], "b")
    assert dist.candidates[int(np.argmax(dist.logits))] == "rare"


def test_candidate_order_follows_layout(toy):
    table, layout, backend = toy
    assert backend.score([], "a").candidates == list(layout.categories["a"])


def test_numeric_candidates_are_bin_midpoints():
    schema = FeatureSchema((("v", "numerical"),))
    t = make_table(schema, [{"v": float(i)} for i in range(11)])
    layout = fit_bins(t)
    cands = candidate_values(layout, "v")
    assert len(cands) == layout.count("v")
    for c in cands:
        lo, hi = layout.cuts["v"][0], layout.cuts["v"][-1]
        assert lo < c < hi
        # every representative maps back to its own bin
    assert [layout.local_bin("v", c) for c in cands] == list(range(len(cands)))


def test_softmax_normalizes(toy):
    _, _, backend = toy
    dist = backend.score([ContextPair("a", "y")], "b")
    z = dist.logits - dist.logits.max()
    p = np.exp(z) / np.exp(z).sum()
    assert p.sum() == pytest.approx(1.0, abs=1e-9)


def test_fit_deterministic(toy):
    table, layout, backend = toy
    again = fit_builtin(table, layout)
    for f in layout.feature_order:
        assert np.array_equal(backend.log_marg[f], again.log_marg[f])
        assert np.array_equal(backend.log_cond[f], again.log_cond[f])


def test_marginals_match_training_frequencies_within_smoothing(toy):
    table, layout, backend = toy
    dist = backend.score([], "a")
    z = dist.logits - dist.logits.max()
    p = np.exp(z) / np.exp(z).sum()
    freq = np.array([6 / 8, 2 / 8])
    assert np.abs(p - freq).max() < 0.05


def test_unknown_feature(toy):
    _, _, backend = toy
    with pytest.raises(UnknownFeatureError):
        backend.score([], "nope")


def test_state_roundtrip(toy):
    table, layout, backend = toy
    again = CountBackend.from_state(layout, backend.state_dict())
    d1 = backend.score([ContextPair("a", "x")], "b")
    d2 = again.score([ContextPair("a", "x")], "b")
    assert np.allclose(d1.logits, d2.logits)


def test_distribution_invariants():
    with pytest.raises(ValueError):
        CandidateDistribution("t", [], np.array([]))
    with pytest.raises(ValueError):
        CandidateDistribution("t", ["a", "a"], np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        CandidateDistribution("t", ["a"], np.array([np.inf]))


# ---------------------------------------------------------------------------
# HTTP backend against a stub server


class _StubHandler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def do_GET(self):
        body = json.dumps({"ok": True, "max_in_flight": 2}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        req = json.loads(self.rfile.read(length))
        logits = [float(-i) for i in range(len(req["candidates"]))]
        body = json.dumps({"logits": logits}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(body)


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def test_http_backend_roundtrip(stub_server, toy):
    _, layout, _ = toy
    backend = HttpBackend(stub_server, layout)
    assert backend.max_in_flight == 2
    dist = backend.score([ContextPair("a", "x")], "b")
    assert dist.candidates == list(layout.categories["b"])
    assert list(dist.logits) == [0.0, -1.0]


def test_http_backend_unavailable(toy):
    _, layout, _ = toy
    with pytest.raises(BackendUnavailableError):
        HttpBackend("http://127.0.0.1:9", layout, timeout=0.5)
