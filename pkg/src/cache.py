import threading
import logging
from collections import OrderedDict
from typing import Any, Callable, Dict, Hashable, Optional

logger = logging.getLogger(__name__)

_MISSING = object()


def _freeze_for_key(obj):
    """将可变/嵌套结构转为可哈希的不可变表示（dict->tuple, list/tuple/set->tuple）。"""
    if isinstance(obj, dict):
        return tuple(sorted((str(k), _freeze_for_key(v)) for k, v in obj.items()))
    if isinstance(obj, (list, tuple)):
        return tuple(_freeze_for_key(v) for v in obj)
    if isinstance(obj, (set, frozenset)):
        return tuple(sorted(_freeze_for_key(v) for v in obj))
    try:
        hash(obj)
        return obj
    except Exception:
        return repr(obj)


class SymbolCache:
    """
    线程安全的记忆化缓存（LRU）。

    - max_entries 为 None 表示不限容量；否则超出时淘汰最久未使用的条目。
    - metrics 记录 hits / misses / evictions。
    - 同一进程内所有线程共享一个逻辑映射；多进程时每个进程各持一份，结果一致。
    """

    def __init__(self, max_entries: Optional[int] = None):
        if max_entries is not None and (not isinstance(max_entries, int) or max_entries <= 0):
            raise ValueError("max_entries must be a positive int or None")
        self.max_entries = max_entries
        self._data: "OrderedDict[Hashable, Any]" = OrderedDict()
        self._lock = threading.RLock()
        self.metrics = {"hits": 0, "misses": 0, "evictions": 0}

    def __len__(self) -> int:
        with self._lock:
            return len(self._data)

    def __contains__(self, key) -> bool:
        with self._lock:
            return _freeze_for_key(key) in self._data

    def get(self, key, default=None):
        k = _freeze_for_key(key)
        with self._lock:
            if k in self._data:
                self._data.move_to_end(k)
                self.metrics["hits"] += 1
                return self._data[k]
            self.metrics["misses"] += 1
            return default

    def put(self, key, value) -> None:
        k = _freeze_for_key(key)
        with self._lock:
            self._data[k] = value
            self._data.move_to_end(k)
            if self.max_entries is not None:
                while len(self._data) > self.max_entries:
                    self._data.popitem(last=False)
                    self.metrics["evictions"] += 1

    def get_or_compute(self, key, compute: Callable[[], Any]):
        """命中则返回缓存值，否则调用 compute() 并写入。compute 在锁外执行。"""
        value = self.get(key, _MISSING)
        if value is not _MISSING:
            return value
        value = compute()
        self.put(key, value)
        return value

    def resize(self, max_entries: Optional[int]) -> None:
        if max_entries is not None and (not isinstance(max_entries, int) or max_entries <= 0):
            raise ValueError("max_entries must be a positive int or None")
        with self._lock:
            self.max_entries = max_entries
            if max_entries is not None:
                while len(self._data) > max_entries:
                    self._data.popitem(last=False)
                    self.metrics["evictions"] += 1

    def clear(self) -> None:
        with self._lock:
            self._data.clear()
            for k in self.metrics:
                self.metrics[k] = 0
        logger.debug("SymbolCache: 已清空")

    def get_metrics(self) -> Dict[str, int]:
        with self._lock:
            out = dict(self.metrics)
            out["size"] = len(self._data)
            return out
