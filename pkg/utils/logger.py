# Console logging with coloured level names
import logging

from colorama import Fore, Style, just_fix_windows_console

LEVEL_COLOURS = {
    logging.DEBUG: Fore.CYAN,
    logging.INFO: Fore.GREEN,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.MAGENTA,
}

_configured = False


class ColourFormatter(logging.Formatter):
    """Formatter that paints the level name; the message itself is left alone."""

    def format(self, record: logging.LogRecord) -> str:
        colour = LEVEL_COLOURS.get(record.levelno, "")
        original = record.levelname
        record.levelname = f"{colour}{original}{Style.RESET_ALL}"
        try:
            return super().format(record)
        finally:
            record.levelname = original


def configure_logging(level: str = "WARNING") -> None:
    """Install a single coloured stream handler on the root logger."""
    global _configured
    root = logging.getLogger()
    root.setLevel(getattr(logging, level.upper(), logging.WARNING))
    if _configured:
        return
    just_fix_windows_console()
    handler = logging.StreamHandler()
    handler.setFormatter(ColourFormatter("%(levelname)s %(name)s: %(message)s"))
    root.addHandler(handler)
    _configured = True


def paint(text: str, colour: str) -> str:
    """Wrap text in a colorama colour, e.g. paint('ok', Fore.GREEN)."""
    return f"{colour}{text}{Style.RESET_ALL}"
