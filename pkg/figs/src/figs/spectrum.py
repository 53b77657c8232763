"""Console script for the spectrum figure."""

import sys

from .core import script_main


def main(argv=None):
    return script_main("spectrum", argv)


if __name__ == "__main__":
    sys.exit(main())
