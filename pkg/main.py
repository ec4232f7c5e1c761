"""Dynamic speckle compression toolkit: command-line entry point."""
import logging
import sys

from config import settings
from cli.commands import run

# Configure logging
logging.basicConfig(
    level=settings.log_level.upper(),
    format=settings.log_format,
)

logger = logging.getLogger(__name__)


def main() -> int:
    """Run one CLI subcommand and return its exit code."""
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
