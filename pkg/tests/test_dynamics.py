"""Tests for the equations of motion, closure relation and observables."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moneyflow import (
    Derivatives,
    DomainError,
    InitialSpec,
    ModelParams,
    NonFiniteError,
    RawParams,
    State,
    Variant,
    closure_defect,
    energy,
    gauge_shift,
    lagrangian,
    linearized_rhs,
    observables,
    resolve_closure,
    rhs,
    swap_currencies,
)

FIG_PARAMS = ModelParams(alpha1=1.5, alpha2=10.0)
FIG_STATE = State(eta=0.2, upsilon=0.0, rho=0.5)


# ============================================================================
# Parameters and state
# ============================================================================


class TestParameters:
    def test_variant_parse(self):
        assert Variant.parse("erratum") is Variant.ILINSKI_ERRATUM
        assert Variant.parse("ILINSKI_ERRATUM") is Variant.ILINSKI_ERRATUM
        assert Variant.parse("correct") is Variant.CORRECT
        with pytest.raises(DomainError):
            Variant.parse("wrong")

    def test_upsilon_coupling_per_variant(self):
        assert FIG_PARAMS.upsilon_coupling == 1.5
        assert FIG_PARAMS.with_variant("erratum").upsilon_coupling == 1.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"alpha1": -0.1, "alpha2": 10.0},
            {"alpha1": 1.0, "alpha2": 0.0},
            {"alpha1": 1.0, "alpha2": 10.0, "beta": 0.0},
            {"alpha1": math.nan, "alpha2": 10.0},
            {"alpha1": 1.0, "alpha2": math.inf},
        ],
    )
    def test_invalid_params(self, kwargs):
        with pytest.raises(DomainError):
            ModelParams(**kwargs)

    def test_raw_params_derive(self):
        raw = RawParams(sigma2=2.0, h=4.0, M=10, f=0.75, T=12.5)
        params = raw.derive()
        assert params.alpha1 == pytest.approx(1.5)
        assert params.alpha2 == pytest.approx(5.0)
        assert raw.horizon_tau == pytest.approx(50.0)
        assert raw.to_time(raw.to_tau(3.0)) == pytest.approx(3.0)

    def test_raw_params_rejects_fractional_agents(self):
        with pytest.raises(DomainError):
            RawParams(sigma2=1.0, h=1.0, M=2.5, f=0.1)

    @pytest.mark.parametrize("rho", [0.0, 1.0, -0.2, 1.5])
    def test_state_rho_outside_open_interval(self, rho):
        with pytest.raises(DomainError):
            State(0.0, 0.0, rho)

    def test_state_non_finite(self):
        with pytest.raises(NonFiniteError):
            State(math.nan, 0.0, 0.5)

    def test_initial_spec_exactly_one(self):
        with pytest.raises(DomainError):
            InitialSpec(FIG_STATE)
        with pytest.raises(DomainError):
            InitialSpec(FIG_STATE, c0=0.0, eta_prime0=0.0)


# ============================================================================
# Right-hand side
# ============================================================================


class TestRhs:
    def test_fixed_point_is_stationary(self):
        d = rhs(FIG_PARAMS, 0.0, State(0.0, 0.0, 0.5))
        assert d.as_array().tolist() == [0.0, 0.0, 0.0], f"Expected zeros, got {d}"

    def test_rho_equation(self):
        d = rhs(FIG_PARAMS, 0.0, FIG_STATE)
        assert d.rho_prime == pytest.approx(math.sinh(0.2), rel=1e-15)

    def test_overflow_is_non_finite(self):
        with np.errstate(over="ignore"), pytest.raises(NonFiniteError):
            rhs(FIG_PARAMS, 0.0, State(1000.0, 0.0, 0.5))

    def test_variants_differ_only_in_upsilon(self):
        s = State(0.1, 0.3, 0.6)
        correct = rhs(FIG_PARAMS, 0.05, s)
        erratum = rhs(FIG_PARAMS.with_variant(Variant.ILINSKI_ERRATUM), 0.05, s)
        assert correct.eta_prime == erratum.eta_prime
        assert correct.rho_prime == erratum.rho_prime
        assert correct.upsilon_prime - erratum.upsilon_prime == pytest.approx(
            0.5 * correct.rho_prime, rel=1e-12
        )

    def test_linearized_rhs_agrees_near_fixed_point(self):
        eps = 1e-5
        s = State(eps, -0.5 * eps, 0.5 + eps)
        full = rhs(FIG_PARAMS, 0.0, s).as_array()
        lin = linearized_rhs(FIG_PARAMS, 0.0, s).as_array()
        assert np.max(np.abs(full - lin)) < 1e-8, f"Difference {full - lin} not O(eps^2)"


# ============================================================================
# Closure relation
# ============================================================================


class TestClosure:
    def test_closure_value_from_c0(self):
        c0, eta_prime0 = resolve_closure(FIG_PARAMS, InitialSpec(FIG_STATE, c0=0.0))
        assert c0 == 0.0
        assert eta_prime0 == pytest.approx(-0.302004, abs=5e-4)

    def test_closure_round_trip(self):
        s = State(0.1, -0.2, 0.55)
        c0, eta_prime0 = resolve_closure(FIG_PARAMS, InitialSpec.from_c0(s, 0.07))
        back, _ = resolve_closure(FIG_PARAMS, InitialSpec.from_eta_prime(s, eta_prime0))
        assert back == pytest.approx(c0, abs=1e-15)

    @given(
        eta=st.floats(-1.0, 1.0),
        upsilon=st.floats(-1.0, 1.0),
        rho=st.floats(0.01, 0.99),
        c0=st.floats(-0.5, 0.5),
    )
    @settings(max_examples=200, deadline=None)
    def test_rhs_satisfies_closure(self, eta, upsilon, rho, c0):
        d = rhs(FIG_PARAMS, c0, State(eta, upsilon, rho))
        residual, bound = closure_defect(FIG_PARAMS, c0, rho, d.eta_prime, d.rho_prime)
        assert residual <= bound, f"residual {residual} above {bound}"


# ============================================================================
# Energy, Lagrangian and observables
# ============================================================================


class TestEnergyAndObservables:
    def test_energy_at_fixed_point(self):
        assert energy(FIG_PARAMS, 0.0, State(0.0, 0.0, 0.5)) == pytest.approx(-1.0)

    def test_lagrangian_at_fixed_point(self):
        d = Derivatives(0.0, 0.0, 0.0)
        assert lagrangian(FIG_PARAMS, State(0.0, 0.0, 0.5), d) == pytest.approx(1.0)

    def test_lagrangian_along_flow(self):
        s = State(0.2, 0.0, 0.5)
        d = rhs(FIG_PARAMS, 0.0, s)
        # eta' + alpha1 rho' vanishes here, so only the hopping and upsilon terms remain.
        assert lagrangian(FIG_PARAMS, s, d) == pytest.approx(1.1710687575, abs=1e-6)

    def test_energy_is_gauge_invariant(self):
        s = State(0.2, 0.1, 0.45)
        shifted = gauge_shift(s, 3.0)
        assert energy(FIG_PARAMS, 0.1, shifted) == pytest.approx(energy(FIG_PARAMS, 0.1, s), rel=1e-14)

    def test_observables(self):
        raw = RawParams(sigma2=2.0, h=4.0, M=10, f=0.75)
        params = raw.derive()
        s = State(0.3, 0.2, 0.6)
        d = rhs(params, 0.0, s)
        obs = observables(params, s, d, raw)
        assert obs.S == pytest.approx(math.exp(0.3))
        assert obs.R == pytest.approx(d.eta_prime)
        assert obs.F == pytest.approx(0.75 * 0.2)
        assert abs(obs.psi1) ** 2 + abs(obs.psi2) ** 2 == pytest.approx(10.0)

    def test_observables_without_raw(self):
        s = State(0.3, 0.2, 0.6)
        obs = observables(FIG_PARAMS, s, rhs(FIG_PARAMS, 0.0, s))
        assert obs.psi1 is None and obs.psi2 is None
        assert obs.F == pytest.approx(0.75 * 0.2)


# ============================================================================
# Symmetries of the vector field
# ============================================================================


class TestSymmetries:
    @given(
        alpha1=st.floats(0.0, 3.0),
        alpha2=st.floats(4.5, 20.0),
        c0=st.floats(-0.2, 0.2),
        eta=st.floats(-1.0, 1.0),
        upsilon=st.floats(-1.0, 1.0),
        rho=st.floats(0.05, 0.95),
        shift=st.floats(-2.0, 2.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_gauge_shift_leaves_field_unchanged(self, alpha1, alpha2, c0, eta, upsilon, rho, shift):
        params = ModelParams(alpha1, alpha2)
        s = State(eta, upsilon, rho)
        a = rhs(params, c0, s).as_array()
        b = rhs(params, c0, gauge_shift(s, shift)).as_array()
        np.testing.assert_allclose(b, a, rtol=1e-12, atol=1e-14)

    @given(
        alpha1=st.floats(0.0, 3.0),
        alpha2=st.floats(4.5, 20.0),
        c0=st.floats(-0.2, 0.2),
        eta=st.floats(-1.0, 1.0),
        upsilon=st.floats(-1.0, 1.0),
        rho=st.floats(0.05, 0.95),
        variant=st.sampled_from(list(Variant)),
    )
    @settings(max_examples=100, deadline=None)
    def test_currency_swap_negates_field(self, alpha1, alpha2, c0, eta, upsilon, rho, variant):
        params = ModelParams(alpha1, alpha2, variant=variant)
        s = State(eta, upsilon, rho)
        swapped, swapped_c0 = swap_currencies(s, c0)
        a = rhs(params, c0, s).as_array()
        b = rhs(params, swapped_c0, swapped).as_array()
        np.testing.assert_allclose(b, -a, rtol=1e-12, atol=1e-14)
