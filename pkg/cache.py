import logging
from threading import Lock
from typing import Any, Dict, Optional

from cachetools import LRUCache

from lie.analysis import algebra_generators
from lie.closure import AlgebraBasis, closure, ideal_closure
from spins.system import ControlMode, ControlModel, SpinSystem

logger = logging.getLogger(__name__)


def _make_params_key(params: Dict[str, Any]) -> frozenset:
    """
    Hashable key from flat parameters (primitive values only).
    """
    if not params:
        return frozenset()
    return frozenset(params.items())


class ResultCache:
    """
    LRU cache for Lie-algebra closures and the reports derived from them,
    keyed by system fingerprint, control mode and tolerance.
    """

    def __init__(self, max_closures: int = 32, max_reports: int = 256):
        self._closure_cache: LRUCache = LRUCache(maxsize=max_closures)
        self._report_cache: LRUCache = LRUCache(maxsize=max_reports)
        self._lock = Lock()
        self._hits = 0
        self._misses = 0

    @staticmethod
    def _closure_key(sys: SpinSystem, mode: ControlMode, tol: float) -> tuple:
        return (sys.fingerprint(), mode, float(tol))

    def get_closure(self, sys: SpinSystem, mode: ControlMode, tol: float) -> Optional[AlgebraBasis]:
        """Cached basis or None."""
        with self._lock:
            basis = self._closure_cache.get(self._closure_key(sys, mode, tol))
            if basis is None:
                self._misses += 1
            else:
                self._hits += 1
            return basis

    def set_closure(self, sys: SpinSystem, mode: ControlMode, tol: float, basis: AlgebraBasis):
        with self._lock:
            self._closure_cache[self._closure_key(sys, mode, tol)] = basis

    def closure_for(self, sys: SpinSystem, mode: ControlMode = "selective", tol: float = 1e-8) -> AlgebraBasis:
        """Closure of the system's generators, computed once per (system, mode, tol)."""
        basis = self.get_closure(sys, mode, tol)
        if basis is not None:
            logger.debug("Closure cache hit for %s (%s)", sys.name, mode)
            return basis
        basis = closure(algebra_generators(sys, mode), tol)
        self.set_closure(sys, mode, tol, basis)
        return basis

    def ideal_for(self, sys: SpinSystem, mode: ControlMode = "selective", tol: float = 1e-8) -> AlgebraBasis:
        """Ideal generated by the control Hamiltonians, cached next to the closures."""
        key = self._closure_key(sys, mode, tol) + ("ideal",)
        with self._lock:
            basis = self._closure_cache.get(key)
            if basis is None:
                self._misses += 1
            else:
                self._hits += 1
        if basis is not None:
            return basis
        model = ControlModel.from_system(sys, mode)
        basis = ideal_closure(model.drift, model.controls, tol)
        with self._lock:
            self._closure_cache[key] = basis
        return basis

    def get_report(self, kind: str, params: Dict[str, Any]) -> Optional[Dict[str, Any]]:
        with self._lock:
            return self._report_cache.get((kind, _make_params_key(params)))

    def set_report(self, kind: str, params: Dict[str, Any], report: Dict[str, Any]):
        with self._lock:
            self._report_cache[(kind, _make_params_key(params))] = report

    def clear(self):
        """Clear all caches."""
        with self._lock:
            self._closure_cache.clear()
            self._report_cache.clear()
            self._hits = self._misses = 0

    def get_stats(self) -> Dict[str, Any]:
        """Get cache statistics for monitoring."""
        with self._lock:
            return {
                "closure_cache": {
                    "size": len(self._closure_cache),
                    "maxsize": self._closure_cache.maxsize,
                    "hits": self._hits,
                    "misses": self._misses,
                },
                "report_cache": {
                    "size": len(self._report_cache),
                    "maxsize": self._report_cache.maxsize,
                },
            }


# Global cache instance
global_cache = ResultCache()
