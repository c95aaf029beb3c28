import sys

from src.infrastructure.entrypoints.cli import main

if __name__ == "__main__":
    sys.exit(main())
