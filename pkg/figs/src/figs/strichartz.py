"""Console script for the strichartz figure."""

import sys

from .core import script_main


def main(argv=None):
    return script_main("strichartz", argv)


if __name__ == "__main__":
    sys.exit(main())
