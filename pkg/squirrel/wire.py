"""
Line-delimited JSON ask/tell protocol.

    {"op": "init", "space": [...], "seed": 0, "registry_path": "reg.json"}  -> {"ok": true}
    {"op": "suggest"}                                                       -> {"configs": [...]}
    {"op": "observe", "values": [...]}                                      -> {"ok": true}

Responses go to stdout, one JSON object per line. The first error ends the
session with an ``{"error": ...}`` line; ``serve`` returns the CLI exit code
(2 for configuration errors, 3 for protocol errors).
"""

import json
import logging
from typing import Callable, Optional, TextIO

from pydantic import ValidationError

from squirrel.errors import ConfigError, ProtocolError
from squirrel.models import OptimizerSettings, WireRequest
from squirrel.scheduler import SquirrelOptimizer
from squirrel.space import build_space
from squirrel.warmstart.registry import load_registry

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROTOCOL = 3


class WireSession:
    def __init__(
        self,
        optimizer: Optional[SquirrelOptimizer] = None,
        settings: OptimizerSettings | None = None,
    ):
        self.optimizer = optimizer
        self.settings = settings

    def handle(self, request: WireRequest) -> dict:
        if request.op == "init":
            if request.space is None:
                raise ConfigError("init needs a 'space'")
            space = build_space(request.space)
            registry = load_registry(request.registry_path) if request.registry_path else None
            self.optimizer = SquirrelOptimizer(
                space, seed=request.seed or 0, registry=registry, settings=self.settings
            )
            return {"ok": True}

        if self.optimizer is None:
            raise ProtocolError(f"'{request.op}' before 'init'")
        if request.op == "suggest":
            return {"configs": self.optimizer.suggest()}
        if request.values is None:
            raise ProtocolError("observe needs 'values'")
        self.optimizer.observe(None, request.values)
        return {"ok": True}


def parse_request(line: str) -> WireRequest:
    try:
        return WireRequest.model_validate(json.loads(line))
    except (json.JSONDecodeError, ValidationError) as e:
        raise ProtocolError(f"malformed request: {e}") from e


def serve(
    stdin: TextIO,
    stdout: TextIO,
    session: WireSession,
    on_exit: Optional[Callable[[WireSession], None]] = None,
) -> int:
    code = EXIT_OK
    for line in stdin:
        if not line.strip():
            continue
        try:
            response = session.handle(parse_request(line))
        except ConfigError as e:
            logger.error("Configuration error: %s", e)
            response, code = {"error": str(e)}, EXIT_CONFIG
        except ProtocolError as e:
            logger.error("Protocol error: %s", e)
            response, code = {"error": str(e)}, EXIT_PROTOCOL
        stdout.write(json.dumps(response) + "\n")
        stdout.flush()
        if code != EXIT_OK:
            break

    if on_exit is not None and session.optimizer is not None:
        on_exit(session)
    return code
