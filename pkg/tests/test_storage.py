import json
from pathlib import Path

import pytest

from src import storage
from src.storage import CSV_HEADER, StorageError


def test_csv_write_and_read(tmp_path):
    path = tmp_path / "out" / "rows.csv"
    records = [("4", "0.1", "0.09", "0.01", "12.5", "true"),
               ("5", "-0.2", "", "", "", "false")]
    storage.write_csv_records(str(path), records)

    raw = path.read_bytes()
    assert b"\r\n" not in raw
    assert raw.decode("utf-8").splitlines()[0] == ",".join(CSV_HEADER)

    rows = storage.read_csv_records(str(path))
    assert len(rows) == 2
    assert rows[0]["free_value"] == "4" and rows[0]["allowed"] == "true"
    assert rows[1]["asym"] == ""
    # 不留临时文件
    assert [p.name for p in path.parent.iterdir()] == ["rows.csv"]


def test_header_only_file(tmp_path):
    path = tmp_path / "empty.csv"
    storage.write_csv_records(str(path), [])
    assert path.read_text(encoding="utf-8") == ",".join(CSV_HEADER) + "\n"
    assert storage.read_csv_records(str(path)) == []


def test_read_errors_include_path(tmp_path):
    missing = tmp_path / "missing.csv"
    with pytest.raises(StorageError) as ei:
        storage.read_csv_records(str(missing))
    assert "missing.csv" in str(ei.value)

    wrong = tmp_path / "wrong.csv"
    wrong.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
    with pytest.raises(StorageError):
        storage.read_csv_records(str(wrong))

    empty = tmp_path / "blank.csv"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(StorageError):
        storage.read_csv_records(str(empty))


def test_write_into_file_as_directory_fails(tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("x", encoding="utf-8")
    with pytest.raises(StorageError) as ei:
        storage.write_csv_records(str(blocker / "rows.csv"), [])
    assert "file.txt" in str(ei.value)


def test_json_save_load_and_backup(tmp_path):
    path = tmp_path / "summary.json"
    assert storage.load_json(str(path)) is None

    storage.save_json(str(path), {"a": 1})
    storage.save_json(str(path), {"a": 2})
    assert storage.load_json(str(path)) == {"a": 2}
    assert json.loads(Path(str(path) + ".bak").read_text(encoding="utf-8")) == {"a": 1}

    # 主文件损坏时从备份恢复
    path.write_text("{broken", encoding="utf-8")
    assert storage.load_json(str(path)) == {"a": 1}
    assert json.loads(path.read_text(encoding="utf-8")) == {"a": 1}


def test_corrupt_json_without_backup(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{broken", encoding="utf-8")
    with pytest.raises(StorageError):
        storage.load_json(str(path))


def test_failed_write_restores_backup(tmp_path, monkeypatch):
    path = tmp_path / "keep.json"
    storage.save_json(str(path), {"a": 1})

    calls = []

    def boom(dest, write_fn, suffix):
        calls.append(dest)
        raise OSError("disk full")

    monkeypatch.setattr(storage, "_atomic_write", boom)
    with pytest.raises(StorageError):
        storage.save_json(str(path), {"a": 2}, retries=1, retry_delay=0)
    assert len(calls) == 2
    assert json.loads(path.read_text(encoding="utf-8")) == {"a": 1}
