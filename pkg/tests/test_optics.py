import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperhom.bell import HYPER_LABELS, HyperLabel, OamBell, hyper_state, oam_bell, polarization_bell
from hyperhom.optics import (
    DIM,
    SOURCE_LABEL,
    CircuitError,
    ElementSetting,
    ModeUnitary,
    PathState,
    apply_local,
    bc_unitary,
    bs_unitary,
    compose_circuit,
    dove_unitary,
    fidelity,
    hwp_unitary,
    lift_two_photon,
    mirror_unitary,
    pbs_unitary,
    prepare_hyper,
    qwp_unitary,
)
from hyperhom.states import MODES, InternalMode, Polarization, TwoPhotonState, inner_product, normalize

from .conftest import two_photon_states

R = 1 / math.sqrt(2)
angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


def vec(path, pol="H", sign=+1):
    v = np.zeros(DIM, dtype=complex)
    v[4 * path + InternalMode(Polarization[pol], sign).index] = 1
    return v


def pol_block(u: ModeUnitary, path=0, sign=+1):
    """2x2 polarization action of ``u`` on one path and OAM mode."""
    idx = [4 * path + InternalMode(p, sign).index for p in Polarization]
    return u.matrix[np.ix_(idx, idx)]


class TestWaveplates:
    def test_hwp_zero(self):
        np.testing.assert_allclose(pol_block(hwp_unitary(0)), np.diag([1, -1]), atol=1e-15)

    def test_hwp_45(self):
        np.testing.assert_allclose(pol_block(hwp_unitary(math.pi / 4)), [[0, 1], [1, 0]], atol=1e-15)

    def test_hwp_22_5(self):
        out = hwp_unitary(math.pi / 8).matrix @ vec(0, "H")
        np.testing.assert_allclose(out, R * (vec(0, "H") + vec(0, "V")), atol=1e-15)

    def test_hwp_identity_on_oam(self):
        u = hwp_unitary(0.3)
        for p in Polarization:
            for q in Polarization:
                assert u.matrix[InternalMode(p, 1).index, InternalMode(q, -1).index] == 0

    def test_qwp_zero(self):
        np.testing.assert_allclose(pol_block(qwp_unitary(0)), np.diag([1, 1j]), atol=1e-15)

    def test_qwp_45_makes_circular(self):
        out = pol_block(qwp_unitary(math.pi / 4)) @ np.array([1, 0])
        assert abs(out[0]) == pytest.approx(R)
        assert abs(out[1]) == pytest.approx(R)
        assert cmath.phase(out[1] / out[0]) == pytest.approx(-math.pi / 2)

    @given(angles, angles, angles)
    def test_qwp_hwp_qwp_composition(self, a, b, c):
        def retarder(theta, delta):
            # textbook form: R(-theta) diag(1, e^{i delta}) R(theta)
            cs, sn = math.cos(theta), math.sin(theta)
            rot = np.array([[cs, sn], [-sn, cs]])
            return np.linalg.inv(rot) @ np.diag([1, cmath.exp(1j * delta)]) @ rot

        direct = retarder(c, math.pi / 2) @ retarder(b, math.pi) @ retarder(a, math.pi / 2)
        circ = compose_circuit(
            [ElementSetting("QWP", a), ElementSetting("HWP", b), ElementSetting("QWP", c)]
        )
        np.testing.assert_allclose(pol_block(circ), direct, atol=1e-12)

    @given(angles)
    def test_unitary(self, t):
        for u in (hwp_unitary(t), qwp_unitary(t), hwp_unitary(t, arm=2), dove_unitary(t, 2),
                  bc_unitary(t, 1), bc_unitary(t, 2)):
            assert u.is_unitary(1e-12)


class TestDovePrism:
    def oam_block(self, u, path=0):
        idx = [4 * path + InternalMode(Polarization.H, s).index for s in (+1, -1)]
        return u.matrix[np.ix_(idx, idx)]

    def test_zero_angle_flips(self):
        np.testing.assert_allclose(self.oam_block(dove_unitary(0)), [[0, 1], [1, 0]], atol=1e-15)

    def test_quarter_turn_phase(self):
        # |+1> -> exp(-i pi)|-1>
        out = self.oam_block(dove_unitary(math.pi / 2)) @ np.array([1, 0])
        np.testing.assert_allclose(out, [0, -1], atol=1e-15)

    def test_nu_plus_to_mu_plus(self):
        out = apply_local(oam_bell("nu+"), [ElementSetting("DP", 0.0, 1)])
        assert out.allclose(oam_bell("mu+"))

    def test_m_dependence(self):
        u = self.oam_block(dove_unitary(0.1, m=3))
        assert u[1, 0] == pytest.approx(cmath.exp(-2j * 3 * 0.1))


class TestMirrors:
    def test_single_flip(self):
        out = mirror_unitary(1).matrix @ vec(0, "H", +1)
        np.testing.assert_allclose(out, vec(0, "H", -1))

    def test_two_mirrors_identity(self):
        u = compose_circuit([ElementSetting("MIRROR", arm=1), ElementSetting("MIRROR", arm=1)])
        np.testing.assert_allclose(u.matrix, np.eye(DIM), atol=0)

    def test_odd_count_rejected(self):
        with pytest.raises(CircuitError, match="arm"):
            compose_circuit([ElementSetting("MIRROR", arm=2)])
        with pytest.raises(CircuitError):
            compose_circuit([ElementSetting("MIRROR", arm=1), ElementSetting("MIRROR")])


class TestBeamSplitter:
    def test_single_photon_splits_evenly(self):
        out = bs_unitary().matrix @ vec(0)
        assert abs(out @ vec(0)) ** 2 == pytest.approx(0.5)
        assert abs(out @ vec(1)) ** 2 == pytest.approx(0.5)

    def test_in2_sign(self):
        out = bs_unitary().matrix @ vec(1)
        np.testing.assert_allclose(out, R * (vec(0) - vec(1)), atol=1e-15)

    def test_orthogonal_photons_distinguishable(self):
        h = np.zeros((4, 4)); h[0, 2] = 1  # photon 1 H+, photon 2 V+
        ps = lift_two_photon(bs_unitary())(TwoPhotonState(h))
        assert ps.coincidence_probability() == pytest.approx(0.5)

    def test_singlet_always_coincident(self):
        ps = lift_two_photon(bs_unitary())(polarization_bell("psi-"))
        assert ps.coincidence_probability() == pytest.approx(1.0)
        assert ps.bunched_probability() == pytest.approx(0.0, abs=1e-15)

    def test_symmetric_state_bunches(self):
        ps = lift_two_photon(bs_unitary())(hyper_state("psi- x nu-"))
        assert ps.coincidence_probability() == pytest.approx(0.0, abs=1e-15)

    @given(two_photon_states())
    def test_total_probability(self, s):
        ps = lift_two_photon(bs_unitary())(s)
        assert ps.coincidence_probability() + ps.bunched_probability() == pytest.approx(1.0, abs=1e-10)

    @given(two_photon_states())
    def test_convention_independence(self, s):
        a = lift_two_photon(bs_unitary("hadamard"))(s).coincidence_probability()
        b = lift_two_photon(bs_unitary("symmetric"))(s).coincidence_probability()
        assert abs(a - b) < 1e-12

    def test_exactly_unitary(self):
        assert bs_unitary().unitarity_error() < 1e-15


class TestPBS:
    def test_h_transmits(self):
        out = pbs_unitary().matrix @ vec(0, "H")
        np.testing.assert_allclose(out, vec(0, "H"))

    def test_v_reflects_with_i(self):
        out = pbs_unitary().matrix @ vec(0, "V")
        np.testing.assert_allclose(out, 1j * vec(1, "V"))
        out = pbs_unitary().matrix @ vec(1, "V")
        np.testing.assert_allclose(out, 1j * vec(0, "V"))

    def test_vv_branch_picks_up_pi(self):
        st_ = normalize(hyper_state("phi+ x mu+"))
        out = lift_two_photon(pbs_unitary())(st_).coincidence_state()
        hh = out[InternalMode(Polarization.H, 1), InternalMode(Polarization.H, 1)]
        vv = out[InternalMode(Polarization.V, 1), InternalMode(Polarization.V, 1)]
        assert vv / hh == pytest.approx(-1)

    def test_unitary(self):
        assert pbs_unitary().is_unitary()


class TestBabinet:
    def test_zero_is_identity(self):
        np.testing.assert_allclose(bc_unitary(0.0, 1).matrix, np.eye(DIM))

    def test_quarter_phase_rotates_vv_branch(self):
        st_ = polarization_bell("phi+")
        out = lift_two_photon(bc_unitary(math.pi / 2, 2))(st_).block(0, 1)
        v = InternalMode(Polarization.V, 1)
        h = InternalMode(Polarization.H, 1)
        assert out[v, v] / out[h, h] == pytest.approx(1j)

    @pytest.mark.parametrize("oam", list(OamBell))
    def test_pbs_then_compensation_gives_internal_phase(self, oam):
        source = hyper_state(HyperLabel.parse(f"phi+ x {oam}"))
        u = bc_unitary(-math.pi, 1) @ pbs_unitary()
        out = normalize(lift_two_photon(u)(source).coincidence_state())

        # brute force: (|HH> + e^{i Phi_O} |VV>)/sqrt2 x |OAM>, Phi_O from the swap eigenvalue
        o = oam_bell(oam).amps[:2, :2] * math.sqrt(2)  # OAM pattern, entries +-1 or 0
        phase = 1 if np.allclose(o.T, o) else -1
        expected = np.zeros((4, 4), dtype=complex)
        for a, b in [(0, 0), (1, 1)]:
            for o1 in range(2):
                for o2 in range(2):
                    sign = 1 if a == 0 else phase
                    expected[2 * a + o1, 2 * b + o2] = sign * o[o1, o2] / 2
        assert fidelity(out, TwoPhotonState(expected)) == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(out.amps, expected, atol=1e-12)


class TestLift:
    def test_identity(self):
        st_ = hyper_state("psi+ x mu-")
        out = lift_two_photon(ModeUnitary.identity())(st_)
        assert out.block(0, 1).allclose(st_)

    def test_hwp_on_arm1_maps_phi_to_psi(self):
        out = lift_two_photon(hwp_unitary(math.pi / 4, arm=1))(polarization_bell("phi+"))
        assert out.block(0, 1).allclose(polarization_bell("psi+"))

    def test_norm_preserved_for_catalog(self):
        u = compose_circuit([ElementSetting("HWP", 0.3, 1), ElementSetting("BS"), ElementSetting("QWP", 1.1, 2)])
        for lab in HYPER_LABELS:
            assert lift_two_photon(u)(hyper_state(lab)).norm == pytest.approx(1.0, abs=1e-12)

    @given(two_photon_states(), two_photon_states(), angles, angles)
    def test_inner_products_preserved(self, a, b, t1, t2):
        u = compose_circuit(
            [ElementSetting("HWP", t1, 1), ElementSetting("DP", t2, 2), ElementSetting("BS"), ElementSetting("QWP", t2)]
        )
        lift = lift_two_photon(u)
        ua, ub = lift(a), lift(b)
        assert abs(np.vdot(ua.amps, ub.amps) - inner_product(a, b)) < 1e-10

    def test_matrix_form_is_kron(self):
        u = bs_unitary()
        st_ = hyper_state("phi+ x nu+")
        lifted = lift_two_photon(u)
        direct = lifted.matrix() @ PathState.embed(st_).amps.ravel()
        np.testing.assert_allclose(direct.reshape(DIM, DIM), lifted(st_).amps, atol=1e-15)


class TestCompose:
    def test_empty(self):
        np.testing.assert_allclose(compose_circuit([]).matrix, np.eye(DIM))

    def test_two_hwp_zero(self):
        u = compose_circuit([ElementSetting("HWP", 0.0), ElementSetting("HWP", 0.0)])
        np.testing.assert_allclose(u.matrix, np.eye(DIM), atol=1e-15)

    def test_order_is_propagation_order(self):
        els = [ElementSetting("HWP", 0.2, 1), ElementSetting("QWP", 0.7, 1)]
        u = compose_circuit(els)
        np.testing.assert_allclose(u.matrix, (qwp_unitary(0.7, 1) @ hwp_unitary(0.2, 1)).matrix)

    def test_unknown_element(self):
        with pytest.raises(CircuitError):
            ElementSetting("LENS")
        with pytest.raises(CircuitError):
            compose_circuit(["HWP"])

    @given(st.lists(st.sampled_from(["HWP", "QWP", "DP", "BS", "PBS", "DELAY"]), max_size=8), angles)
    def test_random_circuits_unitary(self, kinds, t):
        els = [ElementSetting(k, t if k not in ("BS", "PBS") else 0.0) for k in kinds]
        assert compose_circuit(els).unitarity_error() < 1e-10


class TestPrepareHyper:
    def test_source_needs_nothing(self):
        assert prepare_hyper("phi+ x nu+") == []

    def test_psi_plus(self):
        assert prepare_hyper("psi+ x nu+") == [ElementSetting("HWP", math.pi / 4, 1)]
        out = apply_local(hyper_state(SOURCE_LABEL), prepare_hyper("psi+ x nu+"))
        assert out.allclose(hyper_state("psi+ x nu+"))

    def test_mu_plus(self):
        assert prepare_hyper("phi+ x mu+") == [ElementSetting("DP", 0.0, 1)]

    @pytest.mark.parametrize("target", HYPER_LABELS, ids=str)
    def test_all_targets(self, target):
        els = prepare_hyper(target)
        assert all(el.kind in ("HWP", "DP") and el.arm in (1, 2) for el in els)
        out = apply_local(hyper_state(SOURCE_LABEL), els)
        assert fidelity(hyper_state(target), out) > 1 - 1e-10

    def test_matches_full_circuit_route(self):
        # the same settings pushed through compose_circuit and the path-resolved lift
        for target in HYPER_LABELS:
            u = compose_circuit(prepare_hyper(target))
            ps = lift_two_photon(u)(PathState.embed(hyper_state(SOURCE_LABEL)))
            assert fidelity(ps.block(0, 1), hyper_state(target)) > 1 - 1e-10
            assert ps.block(0, 1).norm == pytest.approx(1.0)


class TestElementText:
    @pytest.mark.parametrize(
        "text",
        ["arm1: HWP 45deg", "arm2: QWP 22.5deg", "arm1: DP 0deg", "arm1: BC -180deg",
         "both: BS", "both: PBS", "arm2: DELAY 0.1ps", "arm1: MIRROR"],
    )
    def test_round_trip(self, text):
        el = ElementSetting.from_text(text)
        assert el.to_text() == text
        assert ElementSetting.from_text(el.to_text()) == el

    def test_degrees_to_radians(self):
        assert ElementSetting.from_text("arm1: HWP 45deg").value == pytest.approx(math.pi / 4)
        assert ElementSetting.from_text("arm1: HWP 0.5rad").value == 0.5
        assert ElementSetting.from_text("arm2: DELAY 150fs").value == pytest.approx(150e-15)

    @pytest.mark.parametrize("bad", ["arm3: HWP 1deg", "arm1: HWP", "arm1: BS", "both: LENS 3deg", "HWP 3deg"])
    def test_rejects(self, bad):
        with pytest.raises(CircuitError):
            ElementSetting.from_text(bad)
