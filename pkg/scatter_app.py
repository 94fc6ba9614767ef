import sys
from typing import List, Optional

from presentations.cli_app import run


def main(argv: Optional[List[str]] = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
