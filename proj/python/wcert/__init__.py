"""Exact Whittaker-module orbifold certificates.

    >>> import wcert
    >>> r = wcert.run("certify-orbifold", "scenarios/weyl_p2.json")
    >>> r.exit_code, r.report["verdict"]
    (0, 'certified')
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Union

from ._core import (
    EXIT_ERROR,
    EXIT_FAIL,
    EXIT_PASS,
    Scalar,
    commands,
    commutator,
    normal_form,
    sha256_hex,
    _run,
)

__all__ = [
    "EXIT_ERROR",
    "EXIT_FAIL",
    "EXIT_PASS",
    "Result",
    "Scalar",
    "commands",
    "commutator",
    "normal_form",
    "run",
    "sha256_hex",
]


@dataclass(frozen=True)
class Result:
    exit_code: int
    text: str
    report: dict

    @property
    def passed(self) -> bool:
        return self.exit_code == EXIT_PASS


def run(
    command: str,
    scenario: Union[str, os.PathLike, Mapping[str, Any]],
    *,
    seed: Optional[int] = None,
    scale: Union[str, Mapping[str, Any], None] = None,
) -> Result:
    """Run one CLI command on a scenario file or an in-memory scenario dict.

    `scale` is either the CLI string ("D=1,N=3") or a dict of the same keys.
    Invalid input raises ValueError.
    """
    if isinstance(scale, Mapping):
        scale = ",".join(f"{k}={v}" for k, v in scale.items())
    if isinstance(scenario, Mapping):
        code, text, body = _run(command, json.dumps(dict(scenario)), False, seed, scale or "")
    else:
        code, text, body = _run(command, os.fspath(scenario), True, seed, scale or "")
    return Result(code, text, json.loads(body))
