#!/usr/bin/env python3
"""
Smoke test for a running Stable Map Classifier API.
Checks a handful of endpoints against known answers.
"""

import os
import sys
from datetime import datetime

import requests

BASE_URL = os.environ.get("STABLEMAPS_URL", "http://localhost:8080")


def check(label, method, path, expected, **kwargs):
    """Call one endpoint and compare a subset of the JSON body."""
    print(f"\n🔍 {label}...")
    try:
        response = requests.request(method, f"{BASE_URL}{path}", timeout=120, **kwargs)
    except Exception as e:
        print(f"❌ {label} error: {str(e)}")
        return False
    if response.status_code != 200:
        print(f"❌ {label} failed with status {response.status_code}")
        print(f"   Response: {response.text}")
        return False
    data = response.json()
    mismatched = {key: data.get(key) for key, value in expected.items() if data.get(key) != value}
    if mismatched:
        print(f"❌ {label} returned {mismatched}, expected {expected}")
        return False
    print(f"✅ {label} passed")
    return True


CHECKS = [
    ("Health check", "GET", "/health", {"status": "healthy"}, {}),
    ("Canonical form", "GET", "/tuples/pssp/canonical", {"canonical": "sspp"}, {}),
    ("Hash tuple", "GET", "/tuples/pssp/hash", {"hash": [0, 2]}, {}),
    ("Feasibility", "GET", "/hash/0,1,2,1/feasibility", {"feasible": True}, {}),
    ("Obstructed type", "GET", "/types/4/6/exists", {"exists": False, "reason": "mod4-obstruction"}, {}),
    ("Class count", "GET", "/types/4/28/count", {"n": 4, "m": 28, "count": 80}, {}),
    ("Closed form (2,m)", "GET", "/types/2/8/closed-form", {"count": 3}, {}),
    ("Realization", "POST", "/realize", {"verified": True}, {"json": {"hash": "0,1,2,1"}}),
    ("Jacobian", "POST", "/germs/jacobian", {"jacobian": "x + 3*y^2"}, {"json": {"f1": "x", "f2": "x*y + y^3"}}),
    ("Cusp recognition", "POST", "/germs/recognize", {"ast": "sspp", "stabilized": True},
     {"json": {"f1": "x", "f2": "x*y + y^3"}}),
]


def main():
    """Main test function."""
    print("🚀 Starting Stable Map Classifier API Tests")
    print("=" * 50)
    print(f"Base URL: {BASE_URL}")
    print(f"Timestamp: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print("=" * 50)

    try:
        requests.get(f"{BASE_URL}/health", timeout=5)
    except requests.exceptions.ConnectionError:
        print(f"❌ Cannot connect to service. Make sure it's running on {BASE_URL}")
        print("   Start the service with: python -m app.main")
        return 1

    tests_passed = sum(check(label, method, path, expected, **kwargs)
                       for label, method, path, expected, kwargs in CHECKS)

    print("\n" + "=" * 50)
    print("📊 Test Summary")
    print("=" * 50)
    print(f"Tests passed: {tests_passed}/{len(CHECKS)}")
    if tests_passed == len(CHECKS):
        print("🎉 All tests passed! The service is working correctly.")
        return 0
    print("⚠️  Some tests failed. Check the output above for details.")
    return 1


if __name__ == "__main__":
    sys.exit(main())
