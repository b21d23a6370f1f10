import logging

import pytest
from colorama import Fore, Style

from utils.logger import ColourFormatter, paint
from utils.settings import Settings


def test_paint_wraps_text():
    assert paint("ok", Fore.GREEN) == f"{Fore.GREEN}ok{Style.RESET_ALL}"


def test_formatter_colours_only_the_level():
    record = logging.LogRecord("canon", logging.WARNING, __file__, 1, "margin %.1f", (0.5,), None)
    text = ColourFormatter("%(levelname)s %(message)s").format(record)
    assert text == f"{Fore.YELLOW}WARNING{Style.RESET_ALL} margin 0.5"
    assert record.levelname == "WARNING"


def test_settings_from_env(monkeypatch):
    monkeypatch.setenv("CANON_SEED", "7")
    monkeypatch.setenv("CANON_LOG_LEVEL", "debug")
    settings = Settings.from_env()
    assert (settings.seed, settings.log_level) == (7, "DEBUG")
    monkeypatch.setenv("CANON_SEED", "seven")
    with pytest.raises(ValueError, match="CANON_SEED"):
        Settings.from_env()
