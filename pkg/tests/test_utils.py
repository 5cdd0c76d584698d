import threading

import pytest

from libs.utils import decade_grid, log_grid, ordered_map, str_shortening, thread_count


def test_ordered_map_keeps_input_order():
    assert ordered_map(lambda x: x * x, range(10)) == [x * x for x in range(10)]
    assert ordered_map(str, []) == []


def test_nested_ordered_map_runs_in_the_outer_worker(monkeypatch):
    monkeypatch.setenv("XLAB_THREADS", "4")

    def outer(i):
        here = threading.get_ident()
        inner = ordered_map(lambda _: threading.get_ident(), range(4))
        return here, inner

    for here, inner in ordered_map(outer, range(4)):
        assert inner == [here] * 4


def test_thread_count_from_env(monkeypatch):
    monkeypatch.setenv("XLAB_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("XLAB_THREADS", "0")
    assert thread_count() == 1
    monkeypatch.setenv("XLAB_THREADS", "many")
    assert thread_count() >= 1


def test_grids():
    grid = log_grid(1e-2, 1e2, 5)
    assert grid.tolist() == pytest.approx([1e-2, 1e-1, 1.0, 1e1, 1e2])
    assert decade_grid(1.0, 100.0, 10).size == 21
    with pytest.raises(ValueError):
        log_grid(1.0, 1.0, 4)


def test_str_shortening():
    assert str_shortening("a\nb") == "a\\nb"
    assert "truncated" in str_shortening("x" * 300, limit=10)
