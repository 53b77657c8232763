"""Console script for the kernel figure."""

import sys

from .core import script_main


def main(argv=None):
    return script_main("kernel", argv)


if __name__ == "__main__":
    sys.exit(main())
