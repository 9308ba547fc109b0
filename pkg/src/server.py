"""FastAPI server exposing the inference operations over JSON-RPC 2.0."""
import json
import logging
from contextlib import asynccontextmanager
from typing import Any

from fastapi import FastAPI

from . import __version__
from .config import configure_logging, load_settings
from .service import InferenceOperations, RPCDispatcher, RPCRequest, ToolRegistry

logger = logging.getLogger(__name__)

SERVICE_NAME = "markov-pql"
PROTOCOL_VERSION = "2024-11-05"

MODEL_SCHEMA = {
    "type": "object",
    "description": "Model family plus hyper-quantities, e.g. {'family': 'kimura4'}",
    "properties": {
        "family": {"type": "string"},
        "n_states": {"type": "integer"},
        "k_states": {"type": "integer"},
        "p_known": {"type": "array", "items": {"type": "number"}},
        "labels": {"type": "array", "items": {"type": "string"}},
    },
    "required": ["family"],
}
NUMBERS = {"type": "array", "items": {"type": "number"}}
METHODS = {
    "type": "array",
    "items": {"type": "string"},
    "description": "ml, qlK or plM (default ml, ql2, pl)",
}

tool_registry = ToolRegistry()
dispatcher = RPCDispatcher()
operations = InferenceOperations()


def register_all_tools() -> None:
    """Register the inference tools."""

    tool_registry.register_tool(
        name="stationary_distribution",
        description="Equilibrium distribution of a transition matrix",
        input_schema={
            "type": "object",
            "properties": {
                "matrix": {"type": "array", "items": NUMBERS, "description": "Row-stochastic"},
            },
            "required": ["matrix"],
        },
        handler=operations.stationary_distribution,
    )

    tool_registry.register_tool(
        name="simulate_chain",
        description="Simulate a path of n transitions from a parametric model",
        input_schema={
            "type": "object",
            "properties": {
                "model": MODEL_SCHEMA,
                "theta": NUMBERS,
                "n": {"type": "integer", "description": "Number of transitions"},
                "seed": {"type": "integer"},
            },
            "required": ["model", "theta", "n"],
        },
        handler=operations.simulate_chain,
    )

    tool_registry.register_tool(
        name="fit_counts",
        description="Fit a model by ML, QL or PL to tuple counts or a state sequence",
        input_schema={
            "type": "object",
            "properties": {
                "model": MODEL_SCHEMA,
                "method": {"type": "string", "description": "ml, qlK or plM"},
                "counts": {"type": "array", "description": "Nested tuple-count array"},
                "sequence": {"type": "array", "items": {"type": "string"}},
            },
            "required": ["model"],
        },
        handler=operations.fit_counts,
    )

    tool_registry.register_tool(
        name="asymptotic_variance",
        description="Limit standard deviations and efficiencies per method at theta",
        input_schema={
            "type": "object",
            "properties": {"model": MODEL_SCHEMA, "theta": NUMBERS, "methods": METHODS},
            "required": ["model", "theta"],
        },
        handler=operations.asymptotic_variance,
    )

    tool_registry.register_tool(
        name="least_false_values",
        description="Kimura4 least-false parameters under the perturbed Kimura6 truth",
        input_schema={
            "type": "object",
            "properties": {"eps": NUMBERS, "methods": METHODS, "base": NUMBERS},
            "required": ["eps"],
        },
        handler=operations.least_false_values,
    )


def register_jsonrpc_methods() -> None:
    """Register all JSON-RPC 2.0 methods."""

    async def initialize(params: dict) -> dict:
        return {
            "protocolVersion": PROTOCOL_VERSION,
            "capabilities": {"tools": {"listChanged": False}, "logging": {}},
            "serverInfo": {"name": SERVICE_NAME, "version": __version__},
        }

    async def ping(params: dict) -> dict:
        return {}

    async def tools_list(params: dict) -> dict:
        return {"tools": tool_registry.list_tools()}

    async def tools_call(params: dict) -> dict:
        name = params.get("name")
        arguments = params.get("arguments", {})
        if not name:
            raise ValueError("Tool name is required")

        result: Any = await tool_registry.execute_tool(name, arguments)
        return {"content": [{"type": "text", "text": json.dumps(result)}]}

    dispatcher.register_method("initialize", initialize)
    dispatcher.register_method("ping", ping)
    dispatcher.register_method("tools/list", tools_list)
    dispatcher.register_method("tools/call", tools_call)


@asynccontextmanager
async def lifespan(app: FastAPI):
    settings = load_settings()
    configure_logging(settings)
    operations.fit_options = settings.inference.fit_options()
    logger.info(f"Starting {SERVICE_NAME} service...")
    register_all_tools()
    register_jsonrpc_methods()
    logger.info(f"Registered {len(tool_registry.tools)} tools")
    logger.info(f"Registered {len(dispatcher.methods)} JSON-RPC methods")
    yield
    logger.info(f"Shutting down {SERVICE_NAME} service...")


app = FastAPI(
    title="Markov chain PL/QL inference",
    description="ML, pseudo- and quasi-likelihood inference for Markov chains over JSON-RPC 2.0",
    version=__version__,
    lifespan=lifespan,
)


@app.post("/")
@app.post("/rpc")
async def jsonrpc_endpoint(request: RPCRequest):
    response = await dispatcher.handle_request(request)
    return response.model_dump(exclude_none=True)


@app.get("/health")
async def health_check():
    return {"status": "healthy", "service": SERVICE_NAME, "version": __version__}
