"""Console script for the scan figure."""

import sys

from .core import script_main


def main(argv=None):
    return script_main("scan", argv)


if __name__ == "__main__":
    sys.exit(main())
