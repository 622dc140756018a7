import math

import numpy as np
import pytest

from conftest import vacuum_fock_mixture
from qcert.errors import KOutOfRange, NegativeBase, PowerDomainViolation, SubWignerLevel
from qcert.functionals import (
    FunctionalSpec,
    Kind,
    check_power_domain,
    eval_bigs,
    eval_p,
    eval_xi,
    eval_xik,
)
from qcert.gausspoly import (
    build_fock_superposition,
    build_fock_wigner,
    build_gaussian,
    evaluate,
    mix,
    squeezed_widths,
)
from qcert.oracle import quadrature_smear

AXIS = np.linspace(-4, 4, 241)
GX, GP = np.meshgrid(AXIS, AXIS, indexing="ij")
SMALL = np.linspace(-3, 3, 13)
SX, SP = np.meshgrid(SMALL, SMALL, indexing="ij")


def all_functionals(state):
    yield FunctionalSpec(Kind.XI, state, T=1.0)
    yield FunctionalSpec(Kind.XI, state, T=1.5)
    yield FunctionalSpec(Kind.XI, state, T=2.0)
    for dT in (1.0, 2.0, 3.0):
        yield FunctionalSpec(Kind.BIGS, state, T=1.0, dT=dT)
    yield FunctionalSpec(Kind.BIGS, state, T=1.5, dT=0.75)
    yield FunctionalSpec(Kind.BIGS, state, T=2.0, dT=1.3)
    for k in (0.2, 0.5):
        for T in (1.0, 1.5, 2.0):
            yield FunctionalSpec(Kind.XIK, state, T=T, k=k)


# ------------------------------------------------------------ P(T)

def test_eval_p_examples(vacuum, fock1):
    assert eval_p(vacuum, 2.0, 0, 0) == pytest.approx(1 / (2 * math.pi), abs=1e-16)
    expected = -0.5 / (2.25 * math.pi)
    assert eval_p(fock1, 1.5, 0, 0) == pytest.approx(expected, abs=1e-15)
    assert quadrature_smear(fock1, 0.5, 0, 0) == pytest.approx(expected, abs=1e-9)
    np.testing.assert_array_equal(eval_p(fock1, 1.0, SX, SP), evaluate(fock1, SX, SP))
    with pytest.raises(SubWignerLevel):
        eval_p(fock1, 0.9, 0, 0)


# ------------------------------------------------------------ xi

def test_xi_vacuum_null(vacuum):
    for T in (1.0, 1.7, 3.0):
        assert np.max(np.abs(eval_xi(vacuum, T, SX, SP))) < 1e-12


def test_xi_mixture_origin():
    w = 0.1
    value = eval_xi(vacuum_fock_mixture(w), 1.0, 0, 0)
    assert value == pytest.approx(-w * w / math.pi, abs=1e-15)
    # the same arithmetic from quadrature-smeared levels
    m = vacuum_fock_mixture(w)
    p1 = evaluate(m, 0, 0)
    p2 = quadrature_smear(m, 1.0, 0, 0)
    assert p1 - 4 * math.pi * p2**2 == pytest.approx(value, abs=1e-9)


def test_xi_squeezed_flank():
    g = build_gaussian(0.5, 2.0)
    expected = (math.exp(-2) - 8 / 9 * math.exp(-4 / 3)) / math.pi
    assert expected == pytest.approx(-0.03150, abs=1e-5)
    assert eval_xi(g, 1.0, 1, 0) == pytest.approx(expected, abs=1e-15)


def test_xi_scalar_and_array_agree(fock1):
    grid = eval_xi(fock1, 1.0, SX, SP)
    assert isinstance(eval_xi(fock1, 1.0, 0.5, 0.5), float)
    assert grid[7, 7] == eval_xi(fock1, 1.0, SX[7, 7], SP[7, 7])


# ------------------------------------------------------------ S

def test_bigs_examples(vacuum):
    assert np.max(np.abs(eval_bigs(vacuum, 1.0, 2.0, SX, SP))) < 1e-12
    g = build_gaussian(0.5, 2.0)
    assert eval_bigs(g, 1.0, 1.0, 1, 0) == pytest.approx(eval_xi(g, 1.0, 1, 0), abs=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_bigs_reduces_to_xi(seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=4) + 1j * rng.normal(size=4)
    state = mix([(build_fock_superposition(c / np.linalg.norm(c)), 0.6),
                 (build_fock_wigner(int(rng.integers(0, 4)), 0.3, -0.2), 0.4)])
    x, p = rng.uniform(-3, 3, 2)
    for T in (1.0, 1.3, 2.2):
        assert eval_bigs(state, T, T, x, p) == pytest.approx(eval_xi(state, T, x, p), abs=1e-12)


def test_power_domain_rule():
    check_power_domain(1.0, 1.0)    # integer exponent 2
    check_power_domain(1.0, 2.0)    # integer exponent 3
    check_power_domain(1.0, 1.5)    # T + dT = 2.5 >= 2
    check_power_domain(1.5, 1.5)
    with pytest.raises(PowerDomainViolation):
        check_power_domain(1.0, 0.5)
    with pytest.raises(PowerDomainViolation):
        check_power_domain(1.0, -1.0)
    with pytest.raises(PowerDomainViolation):
        FunctionalSpec(Kind.BIGS, build_fock_wigner(0), T=1.0, dT=0.5)
    with pytest.raises(ValueError):
        FunctionalSpec(Kind.BIGS, build_fock_wigner(0), T=1.0)


def test_nonstrict_bigs_raises_negative_base(fock1):
    # the level-1.5 distribution of |1> is negative at the origin
    with pytest.raises(NegativeBase):
        eval_bigs(fock1, 1.0, 0.5, 0.0, 0.0, strict=False)
    value = eval_bigs(build_fock_wigner(0), 1.0, 0.5, 0.3, 0.2, strict=False)
    assert abs(value) < 1e-12


# ------------------------------------------------------------ xi_k

def test_xik_vacuum_null(vacuum):
    assert np.max(np.abs(eval_xik(vacuum, 1.0, 0.3, SX, SP))) < 1e-12


@pytest.mark.parametrize("T", [1.0, 1.4, 2.0])
def test_xik_half_is_xi_and_symmetric(fock1, T):
    state = mix([(fock1, 0.4), (build_fock_superposition([0.6, 0.8j], 0.5, 0.0), 0.6)])
    np.testing.assert_allclose(eval_xik(state, T, 0.5, SX, SP), eval_xi(state, T, SX, SP),
                               rtol=0, atol=1e-12)
    np.testing.assert_allclose(eval_xik(state, T, 0.3, SX, SP), eval_xik(state, T, 0.7, SX, SP),
                               rtol=0, atol=1e-12)


@pytest.mark.parametrize("k", [0.0, 1.0, -0.2, 1.5])
def test_xik_k_range(vacuum, k):
    with pytest.raises(KOutOfRange):
        eval_xik(vacuum, 1.0, k, 0, 0)
    with pytest.raises(KOutOfRange):
        FunctionalSpec(Kind.XIK, vacuum, k=k)


# ------------------------------------------------------------ invariants

@pytest.mark.parametrize("center", [(0.0, 0.0), (-3.0, 2.5), (1.7, -0.4), (3.0, 3.0)])
def test_coherent_null(center):
    state = build_fock_wigner(0, *center)
    for spec in all_functionals(state):
        assert np.max(np.abs(spec(SX, SP))) < 1e-12, spec.describe()


CLASSICAL = {
    "vacuum_pair": mix([(build_fock_wigner(0, -1.0, 0.5), 0.3), (build_fock_wigner(0, 1.2, -0.7), 0.7)]),
    "vacuum_triple": mix([(build_fock_wigner(0, 0.0, 0.0), 0.5), (build_fock_wigner(0, 2.0, 0.0), 0.25),
                          (build_fock_wigner(0, 0.0, -1.5), 0.25)]),
    "thermal": build_gaussian(1.5, 1.5),
    "broad_anisotropic": build_gaussian(1.0, 3.0),
    "displaced_broad": build_gaussian(2.0, 1.2, 0.5, -0.5),
}


@pytest.mark.parametrize("name", sorted(CLASSICAL))
def test_classical_states_nonnegative(name):
    state = CLASSICAL[name]
    for spec in all_functionals(state):
        assert np.min(spec(GX, GP)) >= -1e-10, spec.describe()


@pytest.mark.parametrize("zeta", [0.02, 0.05, 0.1, 0.3])
def test_squeezing_detected(zeta):
    g = build_gaussian(*squeezed_widths(zeta))
    assert np.min(eval_xi(g, 1.0, GX, GP)) < -1e-12


def test_squeezed_minimum_on_narrow_flank():
    g = build_gaussian(*squeezed_widths(0.1))
    values = eval_xi(g, 1.0, GX, GP)
    i, j = np.unravel_index(np.argmin(values), values.shape)
    assert abs(AXIS[j]) < 1e-12 and 0.8 < abs(AXIS[i]) < 1.2


# ------------------------------------------------------------ weak-perturbation examples

@pytest.mark.parametrize("eps", [0.1, 0.01, 0.001])
def test_mixture_origin_closed_form(eps):
    # P(1)(0) = (1 - 2 eps)/pi and P(2)(0) = (1 - eps)/(2 pi) give xi = -eps^2/pi
    m = vacuum_fock_mixture(eps)
    assert eval_p(m, 1.0, 0, 0) == pytest.approx((1 - 2 * eps) / math.pi, abs=1e-15)
    assert eval_p(m, 2.0, 0, 0) == pytest.approx((1 - eps) / (2 * math.pi), abs=1e-15)
    assert eval_xi(m, 1.0, 0, 0) == pytest.approx(-eps * eps / math.pi, abs=1e-12)


def test_mixture_first_order_formula_comparison(vacuum, fock1):
    """Compare with the first-order expression w e^{-r^2/T}(r^2 - T^2)/(pi T^3).

    The normalized mixture gives -w^2/pi at the origin, not the expression's
    -w/pi.  The expression is instead the first-order xi of the unnormalized
    sum P0 + w P1, which is checked here to O(w^2).
    """
    T = 1.0
    r2 = SX**2 + SP**2
    for w in (0.01, 0.001):
        printed = w * np.exp(-r2 / T) * (r2 - T * T) / (math.pi * T**3)
        direct = eval_xi(vacuum_fock_mixture(w), T, SX, SP)
        print(f"\nmixture w={w}: xi(0,0) direct {direct[6, 6]:.6e}, first-order expression {printed[6, 6]:.6e}")
        assert direct[6, 6] == pytest.approx(-w * w / math.pi, abs=1e-15)
        assert np.max(np.abs(direct - printed)) > 0.3 * w

        def unnormalized(level):
            return eval_p(vacuum, level, SX, SP) + w * eval_p(fock1, level, SX, SP)

        xi_un = unnormalized(T) - 4 * math.pi * T * unnormalized(2 * T) ** 2
        assert np.max(np.abs(xi_un - printed)) < 0.05 * w * w


def test_superposition_sign_structure():
    w = 0.1
    d = build_fock_superposition([math.cos(w), math.sin(w)])
    values = eval_xi(d, 1.0, GX, GP)
    neg = values < -1e-12
    assert np.count_nonzero(neg & (np.abs(GX) > np.abs(GP))) > 5 * np.count_nonzero(neg & (np.abs(GP) > np.abs(GX)))
    assert eval_xi(d, 1.0, 0.5, 0.0) < 0.0 < eval_xi(d, 1.0, 0.0, 0.5)


def test_spec_describe_and_rebind(vacuum, fock1):
    spec = FunctionalSpec("bigs", vacuum, T=1.0, dT=2.0)
    assert spec.describe() == {"functional": "bigs", "T": 1.0, "dT": 2.0}
    assert spec.with_dT(1.0)(0.3, 0.1) == pytest.approx(eval_xi(vacuum, 1.0, 0.3, 0.1), abs=1e-15)
    assert spec.with_state(fock1).state is fock1
