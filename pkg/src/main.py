# src/main.py

"""
Command-line entry point: `python -m src.main <command> [flags]`.

Exit codes: 0 success, 2 usage error, 3 data/contract error,
4 numerical failure.
"""

import sys
from typing import Optional, Sequence

from src.scripts import ablate, evaluate, export_slices, prepare_data, run_sr, selftest, train_model
from src.utils.errors import ContractError, CuboidNetError, UsageError

COMMANDS = {
    "prepare": prepare_data,
    "train": train_model,
    "sr": run_sr,
    "eval": evaluate,
    "ablate": ablate,
    "slices": export_slices,
    "selftest": selftest,
}

USAGE = "usage: python -m src.main {" + ",".join(COMMANDS) + "} [--help] [flags]"


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)

    if not argv or argv[0] in ("-h", "--help"):
        print(USAGE)
        return 0 if argv else UsageError.exit_code

    command, rest = argv[0], argv[1:]
    if command not in COMMANDS:
        print(f"❌ unknown command {command!r}\n{USAGE}", file=sys.stderr)
        return UsageError.exit_code

    try:
        return COMMANDS[command].main(rest)
    except SystemExit as e:
        # --help inside a sub-command
        return e.code if isinstance(e.code, int) else 0
    except CuboidNetError as e:
        print(f"❌ {command}: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"❌ {command}: {e}", file=sys.stderr)
        return ContractError.exit_code


if __name__ == "__main__":
    sys.exit(main())
