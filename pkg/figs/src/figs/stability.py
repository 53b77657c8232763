"""Console script for the stability figure."""

import sys

from .core import script_main


def main(argv=None):
    return script_main("stability", argv)


if __name__ == "__main__":
    sys.exit(main())
