"""JSON-RPC service layer."""
from .operations import InferenceOperations
from .rpc import ErrorCode, RPCDispatcher, RPCError, RPCRequest, RPCResponse, error_code
from .tools import ToolRegistry, ToolSchema

__all__ = [
    "ErrorCode",
    "InferenceOperations",
    "RPCDispatcher",
    "RPCError",
    "RPCRequest",
    "RPCResponse",
    "ToolRegistry",
    "ToolSchema",
    "error_code",
]
