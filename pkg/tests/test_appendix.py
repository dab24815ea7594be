import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hom_multiport.appendix import (
    appendix_exit_polynomial,
    block_check,
    blocks,
    build_component,
    build_U,
    build_V,
    exit_mode_for_line,
    exterior_decay,
    higher_order,
    lift_polynomial,
    tensor_square,
    two_photon_lift,
)
from hom_multiport.elements import NonUnitaryError, grover4, is_unitary
from hom_multiport.fock import ModeLabel, norm, to_fock
from hom_multiport.network import build_pattern_I, inject, run
from hom_multiport.verification import DECAY_PHASE, random_unit_vector

from conftest import c, random_unitary

H = 1 / math.sqrt(2)
JS = (0, 2, 6, 26)

# Worked by hand: columns are left, interior and right inputs, rows the exits.
U0 = np.array([
    [0, 0, H, H, 0, 0],
    [H, -H, 0, 0, 0, 0],
    [0, 0, 0.5, -0.5, 0.5, 0.5],
    [0, 0, -0.5, 0.5, 0.5, 0.5],
    [H, H, 0, 0, 0, 0],
    [0, 0, 0, 0, H, -H],
])


class TestComponents:
    def test_p1_identity_at_j0(self):
        assert np.array_equal(build_component("P1", 0), np.eye(6))

    def test_p1_at_j2(self):
        assert np.array_equal(build_component("P1", 2), np.diag([1, -1, 1, 1, 1, 1]))

    def test_p2_acts_on_right_lower_line(self):
        assert np.array_equal(build_component("P2", 6), np.diag([1, 1, 1, 1, 1, -1]))

    def test_m1_embedding(self):
        m1 = build_component("M1", 0)
        assert np.array_equal(m1[:4, :4], grover4().column_matrix)
        assert np.array_equal(m1[4:, 4:], np.eye(2))
        assert not m1[:4, 4:].any() and not m1[4:, :4].any()

    def test_m2_embedding(self):
        m2 = build_component("M2", 0)
        assert np.array_equal(m2[2:, 2:], grover4().column_matrix)

    def test_beam_splitter_directions(self):
        inbound = build_component("BS1", 0, inbound=True)
        outbound = build_component("BS1", 0)
        assert np.allclose(inbound @ outbound, np.eye(6))
        assert np.allclose(outbound[:2, :2], [[H, H], [-H, H]])

    def test_q_rail(self):
        q = build_component("Q", 0, inter_multiport_phase=math.pi)
        assert np.array_equal(np.diag(q), [1, 1, 1, -1, 1, 1])
        q = build_component("Q", 0, inter_multiport_phase=math.pi, inter_multiport_rail="upper")
        assert np.array_equal(np.diag(q), [1, 1, -1, 1, 1, 1])

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            build_component("M3", 0)


class TestEvolution:
    def test_u0_frozen(self):
        assert np.allclose(build_U(0), U0, atol=1e-15)

    @pytest.mark.parametrize("j", JS)
    def test_unitary(self, j):
        assert is_unitary(build_U(j), 1e-12)
        assert is_unitary(build_V(j), 1e-12)

    @pytest.mark.parametrize("j", JS)
    def test_v_is_u_times_bs1(self, j):
        assert np.array_equal(build_V(j), build_U(j) @ build_component("BS1", j, inbound=True))

    @pytest.mark.parametrize("j", [1, 3, 27])
    def test_invalid_j(self, j):
        with pytest.raises(ValueError):
            build_U(j)

    @pytest.mark.parametrize("j", JS)
    def test_middle_blocks(self, j):
        b = blocks(build_U(j))
        assert np.array_equal(b[("I", "I")], [[0.5, -0.5], [-0.5, 0.5]])
        assert np.array_equal(b[("I", "R")], [[0.5, 0.5], [0.5, 0.5]])

    @pytest.mark.parametrize("j", JS)
    def test_templates(self, j):
        assert all(bc.passed for bc in block_check(build_U(j), "U"))
        assert all(bc.passed for bc in block_check(build_V(j), "V"))

    def test_identity_fails_template(self):
        report = {bc.block: bc.passed for bc in block_check(np.eye(6), "U")}
        assert not report["middle[I,I]"]

    @pytest.mark.parametrize("j", JS)
    def test_v_single_entries(self, j):
        report = {bc.block: bc for bc in block_check(build_V(j), "V")}
        for name in ("E", "F"):
            assert report[name].passed and "1 at" in report[name].detail

    def test_engine_columns(self):
        # left-input columns of U0 against single-photon engine runs
        for line, port in ((0, "a0"), (1, "b0")):
            r = run(inject(build_pattern_I(0, 2, inject_through_left_phase=True), c(port)))
            for row in (0, 1, 4, 5):
                mode = exit_mode_for_line(row, 1)
                assert r.exit_polynomial.terms.get((mode,), 0) == pytest.approx(U0[row, line], abs=1e-15)


class TestHigherOrder:
    @pytest.mark.parametrize("j", JS)
    def test_order_one(self, j):
        assert np.array_equal(higher_order(j, 1), build_U(j))
        assert np.array_equal(higher_order(j, 1, pattern="V"), build_V(j))

    def test_invalid_order(self):
        with pytest.raises(ValueError):
            higher_order(0, 0)

    def test_literal_iterates_do_not_decay(self):
        # the bare (M2 M1)^n is a finite-order unitary, so decay needs the exit projection
        m = build_component("M2", 0) @ build_component("M1", 0)
        assert np.allclose(np.linalg.matrix_power(m, 6), np.eye(6))

    def test_bound_state_without_plate(self):
        x = np.array([0, 0, H, -H, 0, 0])
        mags = exterior_decay(0, x, 5)
        assert max(mags) < 1e-15
        assert np.allclose(higher_order(0, 5) @ x, x)

    def test_order_two_matches_engine(self, pair_I):
        # pi plate: the right-moving biphoton reflects at M2 and leaves on pass two
        for phi in (0.0, math.pi):
            poly, left = appendix_exit_polynomial(pair_I, "I", 0, inter_multiport_phase=phi)
            net = build_pattern_I(0, 2, phi, inject_through_left_phase=True)
            assert left < 1e-15
            assert poly.isclose(run(inject(net, pair_I)).exit_polynomial, 1e-12)
        second = higher_order(0, 2, inter_multiport_phase=math.pi)
        assert abs(second[0, 0]) > 0.1

    @settings(max_examples=50, deadline=None)
    @given(
        arrays(np.float64, 12, elements=st.floats(-1, 1)),
        st.sampled_from(JS),
        st.sampled_from("UV"),
    )
    def test_decay_after_first_pass(self, raw, j, pattern):
        x = raw[:6] + 1j * raw[6:]
        if np.linalg.norm(x) < 1e-3:
            return
        x = x / np.linalg.norm(x)
        mags = exterior_decay(j, x, 10, pattern=pattern, inter_multiport_phase=DECAY_PHASE)
        assert all(b <= a + 1e-12 for a, b in zip(mags[1:], mags[2:]))
        assert mags[-1] < 1e-3

    def test_first_pass_can_be_dark(self):
        # D has rank one, so a right input orthogonal to it emits nothing on pass one
        d = blocks(build_U(0))[("R", "R")]
        null = np.linalg.svd(d)[2][-1].conj()
        x = np.zeros(6, dtype=complex)
        x[4:] = null
        mags = exterior_decay(0, x, 3, inter_multiport_phase=DECAY_PHASE)
        assert mags[0] < 1e-12 < mags[1]

    @pytest.mark.parametrize("j", JS)
    def test_series_converges(self, j):
        x = random_unit_vector()
        total = sum(m * m for m in exterior_decay(j, x, 60, inter_multiport_phase=DECAY_PHASE))
        assert total == pytest.approx(1.0, abs=1e-12)


def lift_apply(u, lines_in):
    """Symmetric lift acting on one basis state with photons on ``lines_in``."""
    lift = two_photon_lift(u)
    vec = np.zeros(len(lift.basis), dtype=complex)
    vec[lift.basis.index(tuple(sorted(lines_in)))] = 1
    return dict(zip(lift.basis, lift.symmetric @ vec))


class TestTwoPhotonLift:
    def test_dimensions(self):
        lift = two_photon_lift(build_U(0))
        assert lift.full.shape == (36, 36)
        assert lift.symmetric.shape == (21, 21)
        assert is_unitary(lift.symmetric)

    def test_identity(self):
        assert np.allclose(two_photon_lift(np.eye(6)).symmetric, np.eye(21))
        assert np.allclose(tensor_square(np.eye(6)), np.eye(36))

    def test_non_unitary(self):
        with pytest.raises(NonUnitaryError):
            two_photon_lift(np.ones((6, 6)))

    def test_lowest_order_pair(self):
        # a0 b0 under U0 -> -1/2 f0^2 + 1/2 e1^2: kets |f0^2> and |e1^2> at -+1/sqrt2
        out = {k: v for k, v in lift_apply(U0, (0, 1)).items() if abs(v) > 1e-12}
        assert out.keys() == {(1, 1), (4, 4)}
        assert out[(1, 1)] == pytest.approx(-H, abs=1e-12)
        assert out[(4, 4)] == pytest.approx(H, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_substitution(self, seed):
        u = random_unitary(6, seed)
        ins = [ModeLabel("a", k) for k in range(6)]
        outs = [ModeLabel("e", k) for k in range(6)]
        for lines in ((0, 1), (2, 2), (1, 5)):
            poly = c(f"a{lines[0]}") * c(f"a{lines[1]}")
            if lines[0] == lines[1]:
                poly = poly * H  # normalized |2>
            got = {tuple(outs.index(m) for m in ket.monomial): ket.amplitude
                   for ket in to_fock(lift_polynomial(u, poly, ins, outs))}
            want = lift_apply(u, lines)
            for key in set(got) | {k for k, v in want.items() if abs(v) > 1e-12}:
                assert got.get(key, 0) == pytest.approx(want.get(key, 0), abs=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_norm_preserved(self, seed):
        u = random_unitary(6, seed)
        ins = [ModeLabel("a", k) for k in range(6)]
        outs = [ModeLabel("e", k) for k in range(6)]
        poly = 0.5 * (c("a0") ** 2 - c("a3") ** 2) + 0.5j * c("a1") * c("a2") * math.sqrt(2)
        assert norm(lift_polynomial(u, poly, ins, outs)) == pytest.approx(norm(poly), abs=1e-12)


class TestExitMapping:
    def test_times(self):
        assert exit_mode_for_line(0, 1) == ModeLabel("e", 0, "H", "L", 2)
        assert exit_mode_for_line(5, 2) == ModeLabel("f", 1, "H", "R", 5)
        assert exit_mode_for_line(4, 1, n_multiports=1).time_bin == 2

    def test_invalid(self):
        with pytest.raises(ValueError):
            exit_mode_for_line(2, 1)
        with pytest.raises(ValueError):
            exit_mode_for_line(4, 2, n_multiports=1)

    def test_wrong_input_port(self):
        with pytest.raises(KeyError):
            appendix_exit_polynomial(c("e0"), "I", 0)
