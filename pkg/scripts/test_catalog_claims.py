#!/usr/bin/env python3
"""
Test script for the example catalog.
Builds every listed entry, checks all of its claims and round-trips each
group through the JSON loader.
"""
import sys
from pathlib import Path

# Add backend to path
backend_dir = Path(__file__).parent.parent / "backend"
sys.path.insert(0, str(backend_dir))

from app.core.exceptions import InvalidCodim, ValidationError
from app.geometry.catalog import (
    LISTED_NAMES,
    check_claims,
    entry_by_name,
    list_entries,
    make_half_dim_pair,
    make_Ok_Mk,
)
from app.services.group_loader import group_loader
from app.utils.serialization import dumps


def test_entries():
    """Test catalog construction and naming."""
    print("=" * 60)
    print("Testing catalog entries...")
    print("=" * 60)

    entries = list_entries()
    assert [e.name for e in entries] == LISTED_NAMES
    assert all(e.claims for e in entries), "Every entry carries at least one claim"
    print(f"  ✅ {len(entries)} listed entries built - PASSED")

    assert entry_by_name("torus5").group.d == 5
    assert entry_by_name("O3-d7").group.order == 2
    print("  ✅ Parametric names torusN and Ok-dN - PASSED")

    for bad in ("klein-bottle", "O0-d3"):
        try:
            entry_by_name(bad)
            assert False, f"{bad} should be rejected"
        except ValidationError:
            pass
    print("  ✅ Unknown names and k = 0 rejected - PASSED")

    try:
        make_Ok_Mk(3, 3)
        assert False, "k = d should be rejected"
    except InvalidCodim as e:
        assert e.context == {"d": 3, "k": 3}
    orbifold, manifold = make_half_dim_pair(4)
    assert (orbifold.name, manifold.name) == ("O2-d4", "M2-d4")
    print("  ✅ InvalidCodim and half-dimensional pairs - PASSED")

    print("✅ Catalog entries - ALL TESTS PASSED\n")
    return True


def test_claims():
    """Test every claim of every listed entry."""
    print("=" * 60)
    print("Testing catalog claims...")
    print("=" * 60)

    total = 0
    for name in LISTED_NAMES:
        results = check_claims(entry_by_name(name))
        failed = [r for r in results if not r.passed]
        assert not failed, f"{name}: " + "; ".join(f"{r.claim.description} ({r.detail})" for r in failed)
        total += len(results)
        print(f"  ✅ {name}: {len(results)} claims - PASSED")

    print(f"✅ Catalog claims - ALL {total} CLAIMS PASSED\n")
    return True


def test_emit_round_trip():
    """Test that emitted group files load back to the same group."""
    print("=" * 60)
    print("Testing emit and reload...")
    print("=" * 60)

    for name in LISTED_NAMES:
        group = entry_by_name(name).group
        spec = group_loader.to_spec(group)
        text = dumps(spec.model_dump(exclude_none=True))
        reloaded = group_loader.from_spec(group_loader.parse(text, source=name))
        assert reloaded.order == group.order and reloaded.d == group.d
        assert {(e.g, e.a) for e in reloaded.elements} == {(e.g, e.a) for e in group.elements}
        assert reloaded.L.G == group.L.G
    print(f"  ✅ {len(LISTED_NAMES)} groups survive emit and reload - PASSED")

    print("✅ Emit and reload - ALL TESTS PASSED\n")
    return True


def main():
    """Run all catalog tests."""
    print("\n" + "=" * 60)
    print("Example Catalog - Test")
    print("=" * 60)
    print()

    all_passed = True

    try:
        all_passed &= test_entries()
        all_passed &= test_claims()
        all_passed &= test_emit_round_trip()

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
