# src/utils/errors.py

"""
Error hierarchy shared by the library and the CLI.

Every error knows the exit code the CLI should return for it:
- 2  usage error (bad flags, unknown config keys)
- 3  data / contract error (shapes, container parsing, missing files)
- 4  numerical failure (non-finite values, failed self-test checks)
"""

from typing import Optional


class CuboidNetError(Exception):
    exit_code = 1


class UsageError(CuboidNetError):
    exit_code = 2


class ContractError(CuboidNetError):
    exit_code = 3


class ContainerParseError(ContractError):
    def __init__(self, message: str, byte_offset: Optional[int] = None):
        self.detail = message
        if byte_offset is not None:
            message = f"{message} (at byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


class NumericalFailure(CuboidNetError):
    exit_code = 4
