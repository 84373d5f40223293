"""Main entry point for the passive target tracker.

Run this script to use the command-line interface without installing
the package, e.g. ``python main.py run --runs 4``.
"""

import sys
from pathlib import Path

# Add src directory to Python path for imports
src_path = Path(__file__).parent / "src"
if str(src_path) not in sys.path:
    sys.path.insert(0, str(src_path))

from features.experiment import main as cli_main


def main() -> None:
    """Run the command-line interface and exit with its status."""
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
