import dataclasses
import json

from solitonlab.config import EnvConfig, load_config
from solitonlab.infra.logging import log_event


def test_env_overrides(monkeypatch):
    monkeypatch.setenv("SOLITONLAB_THREADS", "4")
    monkeypatch.setenv("SOLITONLAB_PROGRESS", "1")
    config = load_config()
    assert config.threads == 4
    assert config.progress is True


def test_bad_thread_count_falls_back(monkeypatch):
    monkeypatch.setenv("SOLITONLAB_THREADS", "many")
    assert load_config().threads == 2
    monkeypatch.setenv("SOLITONLAB_THREADS", "0")
    assert load_config().threads == 1


def test_config_fields():
    assert {f.name for f in dataclasses.fields(EnvConfig)} == {"threads", "progress"}


def test_log_event_writes_json_to_stderr(monkeypatch, capsys):
    monkeypatch.setenv("SOLITONLAB_QUIET", "0")
    log_event("grid_done", steps=3, value=1.5 + 2j)
    captured = capsys.readouterr()
    assert captured.out == ""
    lines = captured.err.strip().splitlines()
    assert len(lines) == 1
    payload = json.loads(lines[0])
    assert payload["event"] == "grid_done"
    assert payload["steps"] == 3
    assert payload["value"] == [1.5, 2.0]
    assert "ts" in payload


def test_quiet_env_silences_events(monkeypatch, capsys):
    monkeypatch.setenv("SOLITONLAB_QUIET", "1")
    log_event("grid_done", steps=3)
    assert capsys.readouterr().err == ""
