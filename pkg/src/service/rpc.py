"""JSON-RPC 2.0 models and request dispatcher."""
import logging
from typing import Any, Awaitable, Callable, Dict, Literal, Optional, Union

from pydantic import BaseModel

from ..utils.errors import (
    ChainError,
    ConfigError,
    ConvergenceError,
    DataError,
    MarkovInferenceError,
)

logger = logging.getLogger(__name__)

MethodHandler = Callable[[dict], Awaitable[Any]]


class RPCRequest(BaseModel):
    """JSON-RPC 2.0 request model."""

    jsonrpc: Literal["2.0"] = "2.0"
    method: str
    params: Optional[dict] = None
    id: Optional[Union[str, int]] = None


class RPCError(BaseModel):
    """JSON-RPC 2.0 error model."""

    code: int
    message: str
    data: Optional[Any] = None


class RPCResponse(BaseModel):
    """JSON-RPC 2.0 response model."""

    jsonrpc: Literal["2.0"] = "2.0"
    id: Optional[Union[str, int]]
    result: Optional[Any] = None
    error: Optional[RPCError] = None


class ErrorCode:
    """JSON-RPC 2.0 standard error codes and application codes."""

    # Standard JSON-RPC 2.0 error codes
    PARSE_ERROR = -32700
    INVALID_REQUEST = -32600
    METHOD_NOT_FOUND = -32601
    INVALID_PARAMS = -32602
    INTERNAL_ERROR = -32603

    # Application error codes, one per error category
    DATA_ERROR = -32010
    CONVERGENCE_ERROR = -32011
    CONFIG_ERROR = -32012
    CHAIN_ERROR = -32013


def error_code(error: MarkovInferenceError) -> int:
    if isinstance(error, DataError):
        return ErrorCode.DATA_ERROR
    if isinstance(error, ConvergenceError):
        return ErrorCode.CONVERGENCE_ERROR
    if isinstance(error, ConfigError):
        return ErrorCode.CONFIG_ERROR
    if isinstance(error, ChainError):
        return ErrorCode.CHAIN_ERROR
    return ErrorCode.INTERNAL_ERROR


class RPCDispatcher:
    """Routes JSON-RPC requests to registered async methods."""

    def __init__(self) -> None:
        self.methods: Dict[str, MethodHandler] = {}

    def register_method(self, method_name: str, handler: MethodHandler) -> None:
        """Register a handler for a JSON-RPC method such as "tools/list"."""
        self.methods[method_name] = handler
        logger.info(f"Registered JSON-RPC method: {method_name}")

    async def handle_request(self, request: RPCRequest) -> RPCResponse:
        try:
            if request.method not in self.methods:
                return RPCResponse(
                    id=request.id,
                    error=RPCError(
                        code=ErrorCode.METHOD_NOT_FOUND,
                        message=f"Method not found: {request.method}",
                    ),
                )
            result = await self.methods[request.method](request.params or {})
            return RPCResponse(id=request.id, result=result)

        except MarkovInferenceError as e:
            logger.warning(f"{request.method} failed: {type(e).__name__}: {e}")
            return RPCResponse(
                id=request.id,
                error=RPCError(
                    code=error_code(e), message=str(e), data={"type": type(e).__name__}
                ),
            )
        except (ValueError, TypeError) as e:
            return RPCResponse(
                id=request.id,
                error=RPCError(code=ErrorCode.INVALID_PARAMS, message=str(e)),
            )
        except Exception as e:
            logger.error(f"Internal error handling {request.method}: {e}", exc_info=True)
            return RPCResponse(
                id=request.id,
                error=RPCError(
                    code=ErrorCode.INTERNAL_ERROR,
                    message="Internal error",
                    data={"details": str(e)},
                ),
            )
