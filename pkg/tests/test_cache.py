import pytest
from cache import ResultCache, _make_params_key


class TestResultCache:
    """Test the ResultCache class."""

    def test_params_key_consistency(self):
        """Parameter keys do not depend on insertion order."""
        params1 = {"mode": "selective", "tol": 1e-8}
        params2 = {"tol": 1e-8, "mode": "selective"}

        assert _make_params_key(params1) == _make_params_key(params2)

    def test_params_key_empty(self):
        assert _make_params_key({}) == frozenset()

    def test_closure_cache_miss_then_hit(self, fig1a_system):
        cache = ResultCache()

        assert cache.get_closure(fig1a_system, "selective", 1e-8) is None
        basis = cache.closure_for(fig1a_system, "selective", 1e-8)
        again = cache.closure_for(fig1a_system, "selective", 1e-8)

        assert again is basis
        stats = cache.get_stats()["closure_cache"]
        assert stats["size"] == 1
        assert stats["hits"] == 1
        assert stats["misses"] == 2

    def test_closure_keyed_by_mode_and_tolerance(self, fig1a_system):
        cache = ResultCache()
        basis = cache.closure_for(fig1a_system, "selective", 1e-8)

        assert cache.get_closure(fig1a_system, "collective", 1e-8) is None
        assert cache.get_closure(fig1a_system, "selective", 1e-6) is None
        assert cache.get_closure(fig1a_system, "selective", 1e-8) is basis

    def test_closure_keyed_by_system(self, fig1a_system):
        cache = ResultCache()
        cache.closure_for(fig1a_system)
        shifted = fig1a_system.model_copy(update={"shifts_hz": (1600.0, 820.0, -450.0)})

        assert cache.get_closure(shifted, "selective", 1e-8) is None

    def test_report_cache(self):
        cache = ResultCache()
        params = {"system": "abc", "mode": "selective"}
        cache.set_report("controllability", params, {"dim": 22})

        assert cache.get_report("controllability", {"mode": "selective", "system": "abc"}) == {"dim": 22}
        assert cache.get_report("simulation", params) is None

    def test_lru_eviction(self, fig1a_system, fig1c_system):
        cache = ResultCache(max_closures=1)
        cache.set_closure(fig1a_system, "selective", 1e-8, "a")
        cache.set_closure(fig1c_system, "selective", 1e-8, "c")

        assert cache.get_closure(fig1a_system, "selective", 1e-8) is None
        assert cache.get_closure(fig1c_system, "selective", 1e-8) == "c"

    def test_clear(self):
        cache = ResultCache()
        cache.set_report("controllability", {"a": 1}, {"dim": 1})
        cache.clear()

        stats = cache.get_stats()
        assert stats["report_cache"]["size"] == 0
        assert stats["closure_cache"]["hits"] == 0

    def test_ideal_cached_next_to_closure(self, fig1a_system):
        cache = ResultCache()
        closure = cache.closure_for(fig1a_system)
        ideal = cache.ideal_for(fig1a_system)

        assert cache.ideal_for(fig1a_system) is ideal
        assert cache.get_closure(fig1a_system, "selective", 1e-8) is closure
        assert ideal.dim == closure.dim - 1
        stats = cache.get_stats()["closure_cache"]
        assert stats["size"] == 2
        assert stats["hits"] == 2
