import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from priorshift import io
from priorshift.core import TraceRecorder
from priorshift.errors import ParseError, SumNotOne


def test_prior_round_trip(tmp_path):
    path = tmp_path / "p.txt"
    io.write_prior(path, [0.5, 0.5])
    assert io.read_prior(path).tolist() == [0.5, 0.5]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(1e-300, 1.0), min_size=2, max_size=30))
def test_prior_round_trip_bitwise(tmp_path_factory, raw):
    p = np.array(raw) / np.sum(raw)
    path = tmp_path_factory.mktemp("rt") / "p.txt"
    io.write_prior(path, p)
    assert np.array_equal(io.read_prior(path), p)


def test_posterior_round_trip_bitwise(tmp_path, rng):
    raw = rng.random((50, 7)) ** 3
    post = raw / raw.sum(axis=1, keepdims=True)
    path = tmp_path / "post.csv"
    io.write_posteriors(path, post)
    back = io.read_posteriors(path)
    # rows already summing to exactly 1 are left alone by the reader
    exact = np.array([math.fsum(r) == 1.0 for r in post.tolist()])
    assert np.array_equal(back[exact], post[exact])
    np.testing.assert_allclose(back, post, rtol=1e-15)


def test_posteriors_without_header_and_crlf(tmp_path):
    path = tmp_path / "p.csv"
    path.write_bytes(b"0.25,0.75\r\n1,0\r\n")
    assert io.read_posteriors(path).tolist() == [[0.25, 0.75], [1.0, 0.0]]


def test_prior_comments_and_crlf(tmp_path):
    path = tmp_path / "p.txt"
    path.write_bytes(b"# train prior\r\n0.25  # first\r\n\r\n0.75\r\n")
    assert io.read_prior(path).tolist() == [0.25, 0.75]


def test_parse_error_reports_line(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("0.5\n# ok\nabc\n")
    with pytest.raises(ParseError) as info:
        io.read_prior(path)
    assert info.value.line == 3
    csv_path = tmp_path / "p.csv"
    csv_path.write_text("a,b\n0.5,0.5\n0.5,x\n")
    with pytest.raises(ParseError) as info:
        io.read_posteriors(csv_path)
    assert (info.value.line, info.value.column) == (3, 2)


def test_ragged_csv(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("0.5,0.5\n1.0\n")
    with pytest.raises(ParseError) as info:
        io.read_posteriors(path)
    assert info.value.line == 2


def test_prior_file_validated(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("0.7\n0.2\n")
    with pytest.raises(SumNotOne):
        io.read_prior(path)


def test_labels(tmp_path):
    path = tmp_path / "y.txt"
    io.write_labels(path, [0, 2, 1])
    assert io.read_labels(path, 3).tolist() == [0, 2, 1]
    with pytest.raises(ParseError) as info:
        io.read_labels(path, 2)
    assert info.value.line == 2
    path.write_text("0\n1.5\n")
    with pytest.raises(ParseError):
        io.read_labels(path)


def test_trace_round_trip(tmp_path):
    rec = TraceRecorder("log_likelihood")
    for it in range(13):
        rec.record(np.array([0.1 * it / 12, 1 - 0.1 * it / 12]), -1.0 / (it + 1),
                   np.nan if it == 0 else 0.1 / it)
    trace = rec.finish("converged")
    path = tmp_path / "t.csv"
    io.write_trace(path, trace)
    back = io.read_trace(path)
    assert back.objective_name == "log_likelihood"
    assert back.termination == "converged"
    assert np.array_equal(back.objective, trace.objective)
    assert np.array_equal(back.max_change, trace.max_change, equal_nan=True)
    assert back.estimate_iterations.tolist() == [0, 10, 12]
    assert np.array_equal(back.estimates, trace.estimates)


def test_atomic_write_leaves_no_temp_files(tmp_path):
    io.write_prior(tmp_path / "p.txt", [0.5, 0.5])
    assert sorted(p.name for p in tmp_path.iterdir()) == ["p.txt"]
