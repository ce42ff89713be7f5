#!/usr/bin/env python3
"""
Test script for crystallographic groups.
Tests group closure, generator validation, eigenvalue types and traces.
"""
import itertools
import math
import sys
from fractions import Fraction
from pathlib import Path

# Add backend to path
backend_dir = Path(__file__).parent.parent / "backend"
sys.path.insert(0, str(backend_dir))

from app.core.exceptions import (
    InconsistentTranslation,
    NonInvertible,
    NotFiniteOrder,
    NotOrthogonal,
    OrderCapExceeded,
)
from app.geometry.catalog import list_entries
from app.geometry.crystal import (
    AffineElement,
    build_group,
    det_normal_factor,
    eigenvalue_type,
    element_order,
    tr_p,
)
from app.geometry.exact_linalg import ZMatrix
from app.geometry.lattice import LatticeGram


QUARTER_TURN = [[0, -1], [1, 0]]
ROTATION_120 = [[-1, -1, 0], [1, 0, 0], [0, 0, 1]]
HEXAGONAL_PRISM = [[1, "1/2", 0], ["1/2", 1, 0], [0, 0, 1]]


def test_group_closure():
    """Test closing generators into a group."""
    print("=" * 60)
    print("Testing group closure...")
    print("=" * 60)

    pillow = build_group(LatticeGram.standard(2), [AffineElement.of(QUARTER_TURN)], name="pillow")
    assert pillow.order == 4
    assert pillow.elements[0].is_identity
    assert pillow.name == "pillow"
    print("  ✅ Quarter turn generates order 4 - PASSED")

    screw = AffineElement.of(ROTATION_120, [0, 0, Fraction(1, 3)])
    group = build_group(LatticeGram.from_entries(HEXAGONAL_PRISM), [screw])
    assert group.order == 3
    translations = sorted(e.a[2] for e in group.elements)
    assert translations == [0, Fraction(1, 3), Fraction(2, 3)]
    print("  ✅ Screw translations reduced mod 1 - PASSED")

    klein = build_group(
        LatticeGram.standard(3),
        [AffineElement.of([[1, 0, 0], [0, -1, 0], [0, 0, -1]]), AffineElement.of([[-1, 0, 0], [0, 1, 0], [0, 0, -1]])]
    )
    assert klein.order == 4
    print("  ✅ Klein four group of half-turns - PASSED")

    torus = build_group(LatticeGram.standard(3), [])
    assert torus.order == 1
    print("  ✅ No generators gives the torus - PASSED")

    print("✅ Group closure - ALL TESTS PASSED\n")
    return True


def test_generator_validation():
    """Test rejection of invalid generators."""
    print("=" * 60)
    print("Testing generator validation...")
    print("=" * 60)

    hexagonal = LatticeGram.from_entries([[1, "1/2"], ["1/2", 1]])
    try:
        build_group(hexagonal, [AffineElement.of(QUARTER_TURN)])
        assert False, "Quarter turn does not preserve the hexagonal lattice"
    except NotOrthogonal as e:
        assert e.context["generator"] == 0
    print("  ✅ NotOrthogonal with generator index - PASSED")

    try:
        build_group(LatticeGram.standard(2), [AffineElement.of([[2, 0], [0, 1]])])
        assert False, "det 2 should be rejected"
    except NonInvertible:
        pass
    print("  ✅ NonInvertible - PASSED")

    try:
        build_group(LatticeGram.standard(2), [AffineElement.of([[1, 0], [0, 1]], [Fraction(1, 2), 0])])
        assert False, "A pure half translation is not in the point group"
    except InconsistentTranslation:
        pass
    print("  ✅ InconsistentTranslation - PASSED")

    try:
        build_group(LatticeGram.standard(2), [AffineElement.of(QUARTER_TURN)], order_cap=2)
        assert False, "Order cap 2 should be exceeded"
    except OrderCapExceeded:
        pass
    print("  ✅ OrderCapExceeded - PASSED")

    print("✅ Generator validation - ALL TESTS PASSED\n")
    return True


def test_eigenvalue_types():
    """Test eigenvalue types, traces and normal determinants."""
    print("=" * 60)
    print("Testing eigenvalue types...")
    print("=" * 60)

    quarter = eigenvalue_type(ZMatrix(QUARTER_TURN))
    assert quarter.turns == (Fraction(1, 4),) and quarter.r == 0 and quarter.fixed_dim == 0
    assert quarter.label() == "E(π/2;)"
    print(f"  ✅ Quarter turn {quarter.label()} - PASSED")

    third = eigenvalue_type(ZMatrix(ROTATION_120))
    assert third.turns == (Fraction(1, 3),) and third.fixed_dim == 1 and third.codim == 2
    print(f"  ✅ Order-3 rotation {third.label()} - PASSED")

    reflection = eigenvalue_type(ZMatrix.diagonal([-1, -1, 1, 1]))
    assert reflection.turns == () and reflection.r == 2 and reflection.fixed_dim == 2
    print(f"  ✅ Codim-2 reflection {reflection.label()} - PASSED")

    # order 12: rotations by pi/6 and pi/2 in two planes (companion of Phi_12 and Phi_4)
    block = ZMatrix([
        [0, 0, 0, -1, 0, 0],
        [1, 0, 0, 0, 0, 0],
        [0, 1, 0, 1, 0, 0],
        [0, 0, 1, 0, 0, 0],
        [0, 0, 0, 0, 0, -1],
        [0, 0, 0, 0, 1, 0],
    ])
    mixed = eigenvalue_type(block)
    assert mixed.turns == (Fraction(1, 12), Fraction(1, 4), Fraction(5, 12))
    assert element_order(block) == 12
    print(f"  ✅ Mixed cyclotomic factors {mixed.label()} - PASSED")

    try:
        eigenvalue_type(ZMatrix([[1, 1], [0, 1]]))
        assert False, "A shear has infinite order"
    except NotFiniteOrder:
        pass
    print("  ✅ Shear rejected as NotFiniteOrder - PASSED")

    assert [tr_p(ZMatrix(QUARTER_TURN), p) for p in range(3)] == [1, 0, 1]
    assert [tr_p(ZMatrix(ROTATION_120), p) for p in range(4)] == [1, 0, 0, 1]
    assert det_normal_factor(ZMatrix(QUARTER_TURN)) == 2
    assert det_normal_factor(ZMatrix(ROTATION_120)) == 3
    assert det_normal_factor(ZMatrix.diagonal([-1, 1, 1])) == 2
    print("  ✅ Exterior traces and |det(I - A)| - PASSED")

    print("✅ Eigenvalue types - ALL TESTS PASSED\n")
    return True


def _signed_permutations(d: int):
    for perm in itertools.permutations(range(d)):
        for signs in itertools.product((1, -1), repeat=d):
            yield ZMatrix([[signs[i] if j == perm[i] else 0 for j in range(d)] for i in range(d)])


def _principal_minor_sum(g: ZMatrix, p: int) -> int:
    """Trace on the p-th exterior power as the sum of principal p x p minors."""
    if p == 0:
        return 1
    rows = g.tolist()
    return sum(
        ZMatrix([[rows[i][j] for j in subset] for i in subset]).det()
        for subset in itertools.combinations(range(len(rows)), p)
    )


def test_trace_properties():
    """Test traces, normal determinants and inverses against direct computation."""
    print("=" * 60)
    print("Testing trace properties...")
    print("=" * 60)

    matrices = [g for d in range(1, 5) for g in _signed_permutations(d)]
    matrices += [ZMatrix(ROTATION_120)]
    for entry in list_entries():
        if entry.group.d <= 4:
            matrices += [e.g for e in entry.group.elements]

    for g in matrices:
        d = g.shape[0]
        for p in range(d + 1):
            assert tr_p(g, p) == _principal_minor_sum(g, p), (g.tolist(), p)
    print(f"  ✅ tr_p equals the sum of principal minors on {len(matrices)} matrices, d <= 4 - PASSED")

    for g in matrices:
        et = eigenvalue_type(g)
        expected = 2 ** et.r * math.prod(4 * math.sin(math.pi * float(t)) ** 2 for t in et.turns)
        assert abs(float(det_normal_factor(g)) - expected) <= 1e-9 * expected, (g.tolist(), et.label())
        assert 2 * et.s + et.r + et.fixed_dim == et.d
    print("  ✅ |det(I - A)| = 2^r prod 4 sin^2(theta / 2) - PASSED")

    for entry in list_entries():
        group = entry.group
        members = {(e.g, e.a) for e in group.elements}
        for e in group.elements:
            assert any(e.compose(f).is_identity for f in group.elements), entry.name
            for f in group.elements:
                product = e.compose(f)
                assert (product.g, product.a) in members, entry.name
    print("  ✅ Every catalog group is closed and contains inverses - PASSED")

    print("✅ Trace properties - ALL TESTS PASSED\n")
    return True


def main():
    """Run all crystallographic group tests."""
    print("\n" + "=" * 60)
    print("Crystallographic Groups - Test")
    print("=" * 60)
    print()

    all_passed = True

    try:
        all_passed &= test_group_closure()
        all_passed &= test_generator_validation()
        all_passed &= test_eigenvalue_types()
        all_passed &= test_trace_properties()

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
