import sys
from .cli import parser
from .domain import FpiError


def main(argv: list[str] | None = None) -> int:
    args = parser.parse_args(argv)
    if not hasattr(args, "function"):
        parser.print_help()
        return 0
    try:
        return args.function(args)
    except FpiError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
