"""Integration tests for the JSON-RPC inference server."""
import json

import pytest
from fastapi.testclient import TestClient

from src.server import app, register_all_tools, register_jsonrpc_methods
from src.service import ErrorCode


@pytest.fixture(scope="module")
def client():
    """Create a test client with all tools registered."""
    register_all_tools()
    register_jsonrpc_methods()
    with TestClient(app) as c:
        yield c


def call_tool(client, name, arguments, request_id=1):
    response = client.post(
        "/rpc",
        json={
            "jsonrpc": "2.0",
            "id": request_id,
            "method": "tools/call",
            "params": {"name": name, "arguments": arguments},
        },
    )
    assert response.status_code == 200
    return response.json()


def tool_payload(data):
    return json.loads(data["result"]["content"][0]["text"])


def test_health_endpoint(client):
    """Test health check endpoint."""
    response = client.get("/health")
    assert response.status_code == 200
    data = response.json()
    assert data["status"] == "healthy"
    assert data["service"] == "markov-pql"
    assert "version" in data


def test_jsonrpc_initialize(client):
    """Test JSON-RPC initialize method."""
    response = client.post(
        "/",
        json={
            "jsonrpc": "2.0",
            "id": 1,
            "method": "initialize",
            "params": {"capabilities": {}, "clientInfo": {"name": "test-client"}},
        },
    )

    assert response.status_code == 200
    data = response.json()
    assert data["jsonrpc"] == "2.0"
    assert data["id"] == 1
    assert data["result"]["serverInfo"]["name"] == "markov-pql"
    assert "protocolVersion" in data["result"]
    assert "capabilities" in data["result"]


def test_jsonrpc_ping(client):
    """Test JSON-RPC ping method."""
    response = client.post("/", json={"jsonrpc": "2.0", "id": 2, "method": "ping"})
    assert response.status_code == 200
    assert response.json()["result"] == {}


def test_tools_list(client):
    """Test that every inference tool is advertised."""
    response = client.post("/rpc", json={"jsonrpc": "2.0", "id": 3, "method": "tools/list"})
    tools = {tool["name"]: tool for tool in response.json()["result"]["tools"]}

    assert set(tools) == {
        "stationary_distribution",
        "simulate_chain",
        "fit_counts",
        "asymptotic_variance",
        "least_false_values",
    }
    assert tools["fit_counts"]["inputSchema"]["required"] == ["model"]


def test_unknown_method(client):
    response = client.post("/rpc", json={"jsonrpc": "2.0", "id": 4, "method": "nope"})
    assert response.json()["error"]["code"] == ErrorCode.METHOD_NOT_FOUND


def test_tool_call_without_name(client):
    response = client.post(
        "/rpc", json={"jsonrpc": "2.0", "id": 5, "method": "tools/call", "params": {}}
    )
    assert response.json()["error"]["code"] == ErrorCode.INVALID_PARAMS


def test_stationary_distribution_tool(client):
    data = call_tool(client, "stationary_distribution", {"matrix": [[0.5, 0.5], [0.25, 0.75]]})
    assert tool_payload(data)["pi"] == pytest.approx([1 / 3, 2 / 3])


def test_fit_counts_tool(client):
    data = call_tool(
        client,
        "fit_counts",
        {
            "model": {"family": "general_two_state", "labels": ["V", "C"]},
            "method": "ml",
            "counts": [[1104, 7534], [7533, 3829]],
        },
    )
    doc = tool_payload(data)
    assert doc["theta.beta"] == pytest.approx(0.663, abs=5e-4)
    assert doc["equilibrium.V"] == pytest.approx(0.432, abs=5e-4)
    assert doc["equilibrium.C"] == pytest.approx(0.568, abs=5e-4)


def test_asymptotic_variance_tool(client):
    data = call_tool(
        client,
        "asymptotic_variance",
        {"model": {"family": "symmetric_two_state"}, "theta": [0.3], "methods": ["ml", "pl"]},
    )
    (row,) = tool_payload(data)
    assert row["parameter"] == "theta"
    assert row["ml_sd"] == pytest.approx((0.3 * 0.7) ** 0.5, rel=1e-6)


def test_reducible_matrix_reports_chain_error(client):
    data = call_tool(
        client,
        "stationary_distribution",
        {"matrix": [[1.0, 0.0], [0.0, 1.0]]},
    )
    assert data["error"]["code"] == ErrorCode.CHAIN_ERROR
    assert data["error"]["data"]["type"] == "NotIrreducible"


def test_invalid_theta_reports_config_error(client):
    data = call_tool(
        client,
        "simulate_chain",
        {"model": {"family": "general_two_state"}, "theta": [1.5, 0.2], "n": 10},
    )
    assert data["error"]["code"] == ErrorCode.CONFIG_ERROR


def test_missing_tool_argument(client):
    data = call_tool(client, "simulate_chain", {"model": {"family": "general_two_state"}})
    assert data["error"]["code"] == ErrorCode.INVALID_PARAMS
