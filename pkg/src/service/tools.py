"""Tool registry: named async operations with JSON input schemas."""
import logging
from typing import Any, Awaitable, Callable, Dict, List

from pydantic import BaseModel

logger = logging.getLogger(__name__)

ToolHandler = Callable[..., Awaitable[Any]]


class ToolSchema(BaseModel):
    """Listing entry returned by tools/list."""

    name: str
    description: str
    inputSchema: Dict[str, Any]


class ToolRegistry:
    """Inference operations addressable by name from tools/call.

    Handlers are coroutines taking the tool's arguments as keywords; the schema's
    `required` list is enforced before dispatch.
    """

    def __init__(self) -> None:
        self.tools: Dict[str, ToolHandler] = {}
        self.tool_schemas: Dict[str, ToolSchema] = {}

    def register_tool(
        self, name: str, description: str, input_schema: Dict[str, Any], handler: ToolHandler
    ) -> None:
        self.tools[name] = handler
        self.tool_schemas[name] = ToolSchema(
            name=name, description=description, inputSchema=input_schema
        )
        logger.info(f"Registered tool: {name}")

    def list_tools(self) -> List[Dict[str, Any]]:
        return [schema.model_dump() for schema in self.tool_schemas.values()]

    def missing_arguments(self, tool_name: str, arguments: Dict[str, Any]) -> List[str]:
        required = self.tool_schemas[tool_name].inputSchema.get("required", [])
        return [key for key in required if key not in arguments]

    async def execute_tool(self, tool_name: str, arguments: Dict[str, Any]) -> Any:
        """Run a registered tool; ValueError for unknown tools or missing arguments."""
        if tool_name not in self.tools:
            raise ValueError(f"Tool not found: {tool_name}")
        missing = self.missing_arguments(tool_name, arguments)
        if missing:
            raise ValueError(f"Missing arguments for {tool_name}: {missing}")
        logger.debug(f"Executing tool {tool_name} with {sorted(arguments)}")
        return await self.tools[tool_name](**arguments)
