import os
import csv
import json
import time
import shutil
import logging
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

logger = logging.getLogger(__name__)

CSV_HEADER = ("free_value", "exact", "asym", "abs_err", "volume", "allowed")


class StorageError(OSError):
    """读写结果文件失败，消息包含路径"""
    pass


def ensure_parent_dir(path: str) -> None:
    """
    确保文件所在目录存在。
    """
    Path(path).resolve().parent.mkdir(parents=True, exist_ok=True)


def _atomic_write(dest: Path, write_fn, suffix: str) -> None:
    with tempfile.NamedTemporaryFile(mode="w", encoding="utf-8", newline="", delete=False,
                                     dir=str(dest.parent), prefix=".tmp_", suffix=suffix) as tf:
        write_fn(tf)
        tf.flush()
        try:
            os.fsync(tf.fileno())
        except Exception:
            pass
        tmp_name = tf.name
    # 用 move 做原子替换（Windows 也兼容）
    shutil.move(tmp_name, str(dest))


def _write_with_backup(path: str, write_fn, suffix: str, make_backup: bool, retries: int, retry_delay: float) -> None:
    dest = Path(path)
    try:
        ensure_parent_dir(path)
    except Exception as e:
        raise StorageError(f"无法创建目录: {dest.parent}: {e}") from e

    backup_path = dest.with_suffix(dest.suffix + ".bak") if make_backup else None
    if backup_path and dest.exists():
        try:
            shutil.copy2(str(dest), str(backup_path))
        except Exception:
            logger.exception("创建备份失败，继续写入：%s", backup_path)

    last_exc: Optional[Exception] = None
    for attempt in range(retries + 1):
        try:
            _atomic_write(dest, write_fn, suffix)
            return
        except Exception as e:
            last_exc = e
            logger.exception("写入失败（尝试 %d/%d）: %s", attempt + 1, retries + 1, dest)
            time.sleep(retry_delay)

    if backup_path and backup_path.exists():
        try:
            shutil.move(str(backup_path), str(dest))
            logger.error("写入失败，已从备份恢复：%s", backup_path)
        except Exception:
            logger.exception("写入失败且恢复备份也失败")
    raise StorageError(f"写入文件失败: {dest}: {last_exc}") from last_exc


def write_csv_records(path: str, records: Iterable[Sequence[str]], header: Sequence[str] = CSV_HEADER, *,
                      make_backup: bool = False, retries: int = 0, retry_delay: float = 0.1) -> None:
    """
    原子地写出 CSV：UTF-8、LF 换行、首行为表头。

    抛出:
        StorageError: 写入失败（消息包含路径）
    """
    rows = [list(r) for r in records]

    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        w.writerows(rows)

    _write_with_backup(path, _write, ".csv", make_backup, retries, retry_delay)
    logger.info("已写出 %d 行到 %s", len(rows), path)


def read_csv_records(path: str, header: Sequence[str] = CSV_HEADER) -> List[Dict[str, str]]:
    """
    读取 CSV 并校验表头。

    抛出:
        StorageError: 文件不存在、不可读或表头不符
    """
    p = Path(path)
    try:
        with p.open("r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            try:
                head = next(reader)
            except StopIteration:
                raise StorageError(f"CSV 文件为空: {p}")
            if tuple(head) != tuple(header):
                raise StorageError(f"CSV 表头不符: {p}: {head}")
            return [dict(zip(header, row)) for row in reader if row]
    except StorageError:
        raise
    except OSError as e:
        logger.exception("读取 CSV 失败：%s", p)
        raise StorageError(f"读取文件失败: {p}: {e}") from e


def save_json(path: str, data: Any, *, make_backup: bool = True, retries: int = 2, retry_delay: float = 0.1) -> None:
    """
    原子地保存 JSON，失败时尝试从备份恢复并抛出 StorageError。
    """
    def _write(fh):
        json.dump(data, fh, ensure_ascii=False, indent=2)

    _write_with_backup(path, _write, ".json", make_backup, retries, retry_delay)


def load_json(path: str) -> Optional[Any]:
    """
    读取 JSON，若解析失败并存在备份则从备份恢复并返回备份内容。
    文件不存在返回 None；其他失败抛出 StorageError。
    """
    p = Path(path)
    if not p.exists():
        return None
    try:
        with p.open("r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError:
        logger.exception("JSON 解析失败，尝试从备份恢复：%s", p)
        bak = p.with_suffix(p.suffix + ".bak")
        if bak.exists():
            try:
                with bak.open("r", encoding="utf-8") as bf:
                    data = json.load(bf)
                shutil.copy2(str(bak), str(p))
                return data
            except Exception:
                logger.exception("从备份读取也失败：%s", bak)
        raise StorageError(f"JSON 文件损坏: {p}")
    except OSError as e:
        raise StorageError(f"读取文件失败: {p}: {e}") from e
