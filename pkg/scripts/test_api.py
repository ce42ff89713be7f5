#!/usr/bin/env python3
"""
Test script for the HTTP API.
Uses FastAPI's TestClient, so no server needs to be running.
"""
import sys
from pathlib import Path

# Add backend to path
backend_dir = Path(__file__).parent.parent / "backend"
sys.path.insert(0, str(backend_dir))

from fastapi.testclient import TestClient

from app.main import app

client = TestClient(app)
API = "/api/v1"

PILLOW = {
    "dimension": 2,
    "gram": [["1", "0"], ["0", "1"]],
    "generators": [{"matrix": [[0, -1], [1, 0]]}],
    "name": "pillow",
}


def test_health():
    """Test health endpoints."""
    print("=" * 60)
    print("Testing health endpoints...")
    print("=" * 60)

    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"
    print("  ✅ /health - PASSED")

    response = client.get("/health/detailed")
    body = response.json()
    config = body["config"]
    assert response.status_code == 200
    assert body["status"] == "healthy" and body["self_check"]["passed"] is True
    assert config["enumeration_cap"] > 0 and config["default_t_grid"]
    print("  ✅ /health/detailed runs the self-check and reports limits - PASSED")

    response = client.get(f"{API}/")
    assert response.status_code == 200 and "spectrum" in response.json()["endpoints"]
    print("  ✅ API root lists endpoints - PASSED")

    print("✅ Health - ALL TESTS PASSED\n")
    return True


def test_group_endpoints():
    """Test endpoints that take a group."""
    print("=" * 60)
    print("Testing group endpoints...")
    print("=" * 60)

    response = client.post(f"{API}/validate", json={"group": PILLOW})
    assert response.status_code == 200
    body = response.json()
    assert body["valid"] and body["order"] == 4 and len(body["elements"]) == 4
    print("  ✅ validate inline pillow - PASSED")

    response = client.post(f"{API}/spectrum", json={"group": PILLOW, "p": 0, "max_norm2": "1"})
    assert response.status_code == 200
    entries = {e["mu2"]: e["multiplicity"] for e in response.json()["entries"]}
    assert entries == {"0": 1, "1": 1}
    assert response.json()["shells"] == [{"mu2": "0", "count": 1}, {"mu2": "1", "count": 4}]
    print("  ✅ spectrum inline pillow p=0 with its dual shells - PASSED")

    response = client.post(f"{API}/compare", json={
        "a": {"catalog": "pillow"}, "b": {"catalog": "square"}, "p": 1, "max_norm2": "4"
    })
    assert response.status_code == 200 and response.json()["verdict"] == "equal"
    print("  ✅ compare pillow and square on 1-forms - PASSED")

    response = client.post(f"{API}/strata", json={"catalog": "square"})
    found = response.json()["strata"]
    assert response.status_code == 200 and len(found) == 8
    assert sorted(s["dim"] for s in found) == [0, 0, 0, 0, 1, 1, 1, 1]
    print("  ✅ strata of the square - PASSED")

    response = client.post(f"{API}/heat", json={"catalog": "O1-d2", "p": 0})
    body = response.json()
    assert response.status_code == 200
    assert body["B_minus"]["exact"] == "1/2" and body["B_minus"]["k"] == 1
    assert body["discriminator"]["verdict"] == "not-isospectral-to-any-manifold"
    print("  ✅ heat on O_1 in d=2 - PASSED")

    response = client.post(f"{API}/trace-check", json={"catalog": "pillow", "p": 0, "t": [0.1, 0.05, 0.02]})
    body = response.json()
    assert response.status_code == 200
    assert body["routes_agree"] and len(body["samples"]) == 3
    print("  ✅ trace-check on the pillow - PASSED")

    print("✅ Group endpoints - ALL TESTS PASSED\n")
    return True


def test_tables_and_catalog():
    """Test Krawtchouk and catalog endpoints."""
    print("=" * 60)
    print("Testing tables and catalog...")
    print("=" * 60)

    response = client.get(f"{API}/krawtchouk", params={"d": 4, "p": 2})
    body = response.json()
    assert response.status_code == 200
    assert body["values"] == [6, 0, -2, 0, 6] and body["zeros"] == [1, 3]
    print("  ✅ krawtchouk d=4 p=2 - PASSED")

    response = client.get(f"{API}/catalog")
    assert response.status_code == 200 and len(response.json()["entries"]) == 14
    print("  ✅ catalog listing - PASSED")

    response = client.get(f"{API}/catalog/O2-d4")
    body = response.json()
    assert response.status_code == 200
    assert body["group"]["dimension"] == 4 and body["claims"]
    print("  ✅ catalog entry with group file - PASSED")

    print("✅ Tables and catalog - ALL TESTS PASSED\n")
    return True


def test_errors():
    """Test status codes of structured errors."""
    print("=" * 60)
    print("Testing error responses...")
    print("=" * 60)

    hexagonal = {**PILLOW, "gram": [["1", "1/2"], ["1/2", "1"]]}
    response = client.post(f"{API}/validate", json={"group": hexagonal})
    assert response.status_code == 400
    assert response.json()["error"] == "NotOrthogonal"
    print("  ✅ Non-orthogonal generator: 400 NotOrthogonal - PASSED")

    response = client.post(f"{API}/spectrum", json={"group": PILLOW, "p": 0})
    assert response.status_code == 422
    assert response.json()["error"] == "RequestValidationError"
    print("  ✅ Missing field: 422 - PASSED")

    response = client.post(f"{API}/validate", json={"group": PILLOW, "catalog": "pillow"})
    assert response.status_code == 422
    print("  ✅ Both group and catalog: 422 - PASSED")

    response = client.post(f"{API}/spectrum", json={"catalog": "torus8", "p": 0, "max_norm2": "10000"})
    assert response.status_code == 413
    assert response.json()["error"] == "BudgetExceeded"
    print("  ✅ Enumeration budget: 413 BudgetExceeded - PASSED")

    response = client.get(f"{API}/catalog/klein-bottle")
    assert response.status_code == 400
    print("  ✅ Unknown catalog entry: 400 - PASSED")

    response = client.post(f"{API}/heat", json={"catalog": "torus2", "p": 0})
    assert response.status_code == 200
    assert response.json()["discriminator"]["applicable"] is False
    print("  ✅ Discriminator reported as not applicable on a torus - PASSED")

    print("✅ Error responses - ALL TESTS PASSED\n")
    return True


def main():
    """Run all API tests."""
    print("\n" + "=" * 60)
    print("HTTP API - Test")
    print("=" * 60)
    print()

    all_passed = True

    try:
        all_passed &= test_health()
        all_passed &= test_group_endpoints()
        all_passed &= test_tables_and_catalog()
        all_passed &= test_errors()

        print("=" * 60)
        if all_passed:
            print("✅ ALL TESTS PASSED")
        else:
            print("❌ SOME TESTS FAILED - Please review errors above")
        print("=" * 60)

        return 0 if all_passed else 1

    except Exception as e:
        print(f"\n❌ TEST ERROR: {e}")
        import traceback
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
