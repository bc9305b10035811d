import numpy as np
import pytest

from spinstress.elasticity import (
    ComplianceMatrix,
    DefectFrame,
    StiffnessMatrix,
    StrainTensor,
    StressTensor,
    bond_matrix,
    compliance,
    cubic_111_frames,
    rotate_stiffness,
    rotate_stiffness_tensor,
    stiffness_cubic,
    stiffness_hexagonal,
    strain_from_stress,
    stress_from_strain,
    tensor_to_voigt,
    voigt_to_tensor,
)
from spinstress.exceptions import ContractError, NumericalError, ValidationError


@pytest.fixture
def sic3c():
    return stiffness_cubic(390, 142, 256)


@pytest.fixture
def sic4h():
    return stiffness_hexagonal(507, 108, 52, 547, 159)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def rot_z(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s, 0], [-s, c, 0], [0, 0, 1]])


def einsum_rotation(c, r):
    # independent oracle: full tensor built by hand from Voigt, rotated with einsum
    pairs = {(0, 0): 0, (1, 1): 1, (2, 2): 2, (1, 2): 3, (2, 1): 3, (0, 2): 4, (2, 0): 4, (0, 1): 5, (1, 0): 5}
    t = np.zeros((3, 3, 3, 3))
    for (i, j), p in pairs.items():
        for (k, l), q in pairs.items():
            t[i, j, k, l] = c[p, q]
    out = np.einsum("ia,jb,kc,ld,abcd->ijkl", r, r, r, r, t)
    order = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)]
    return np.array([[out[i, j, k, l] for k, l in order] for i, j in order])


def test_cubic_entries(sic3c):
    assert sic3c[1, 1] == 390
    assert sic3c[1, 2] == 142
    assert sic3c[4, 4] == 256
    assert sic3c[1, 4] == 0
    assert sic3c.symmetry_class == "cubic"
    assert sic3c.frame == "crystal"


def test_cubic_positive_definite(sic3c):
    assert np.linalg.eigvalsh(sic3c.matrix).min() > 0


def test_cubic_stability_message():
    with pytest.raises(ValidationError, match="C44 > 0"):
        stiffness_cubic(1, 0, 0)
    with pytest.raises(ValidationError, match="C11 - C12"):
        stiffness_cubic(100, 100, 10)


def test_hexagonal_c66(sic4h):
    assert sic4h[6, 6] == pytest.approx(199.5)
    assert sic4h[3, 3] == 547
    assert sic4h[1, 3] == 52


def test_hexagonal_stability_margin():
    assert 547 * (507 + 108) - 2 * 52**2 == 330997
    stiffness_hexagonal(507, 108, 52, 547, 159)


def test_hexagonal_stability_violation():
    with pytest.raises(ValidationError, match=r"C11 > \|C12\|"):
        stiffness_hexagonal(1, 1, 1, 1, 1)
    with pytest.raises(ValidationError, match="C33"):
        stiffness_hexagonal(500, 100, 400, 100, 100)


def test_voigt_tensor_round_trip(sic4h):
    t = voigt_to_tensor(sic4h.matrix)
    assert t[0, 2, 2, 0] == sic4h[5, 5]
    np.testing.assert_array_equal(tensor_to_voigt(t), sic4h.matrix)


def test_identity_rotation(sic3c):
    np.testing.assert_array_equal(rotate_stiffness(sic3c, DefectFrame.identity()).matrix, sic3c.matrix)


def test_cubic_invariant_under_90_deg(sic3c):
    rotated = rotate_stiffness(sic3c, rot_z(np.pi / 2))
    np.testing.assert_allclose(rotated.matrix, sic3c.matrix, atol=1e-10)


def test_rotation_to_111_brute_force(sic3c):
    frame = DefectFrame.from_axes([1, 1, 1], [1, 1, -2])
    oracle = einsum_rotation(sic3c.matrix, frame.rotation)
    assert oracle[2, 2] == pytest.approx(566.0, abs=1e-9)
    assert oracle[0, 0] == pytest.approx(522.0, abs=1e-9)
    assert (390 + 284 + 1024) / 3 == pytest.approx(566)
    rotated = rotate_stiffness(sic3c, frame)
    np.testing.assert_allclose(rotated.matrix, oracle, atol=1e-10)
    assert rotated.symmetry_class == "trigonal"
    assert rotated.frame == "defect"


def test_bond_and_index_sum_agree(sic3c, sic4h):
    rng = np.random.default_rng(0)
    for _ in range(5):
        r = random_rotation(rng)
        for c in (sic3c, sic4h):
            np.testing.assert_allclose(rotate_stiffness(c, r).matrix, rotate_stiffness_tensor(c, r).matrix, atol=1e-10)
            np.testing.assert_allclose(rotate_stiffness(c, r).matrix, einsum_rotation(c.matrix, r), atol=1e-10)


def test_bond_matrix_transforms_stress():
    rng = np.random.default_rng(1)
    r = random_rotation(rng)
    sigma = StressTensor.from_components(*rng.normal(size=6))
    np.testing.assert_allclose(bond_matrix(r) @ sigma.voigt, sigma.rotated(r).voigt, atol=1e-12)


def test_group_property(sic3c):
    rng = np.random.default_rng(2)
    r1, r2 = random_rotation(rng), random_rotation(rng)
    twice = rotate_stiffness(StiffnessMatrix(rotate_stiffness(sic3c, r1).matrix), r2)
    once = rotate_stiffness(sic3c, r2 @ r1)
    np.testing.assert_allclose(twice.matrix, once.matrix, rtol=1e-9, atol=1e-9 * 390)


def test_invariants_preserved(sic4h):
    rng = np.random.default_rng(3)
    t = sic4h.tensor
    iijj, ijij = np.einsum("iijj->", t), np.einsum("ijij->", t)
    for _ in range(10):
        rotated = rotate_stiffness(sic4h, random_rotation(rng)).tensor
        assert np.einsum("iijj->", rotated) == pytest.approx(iijj, rel=1e-9)
        assert np.einsum("ijij->", rotated) == pytest.approx(ijij, rel=1e-9)


def test_voigt_trace_not_invariant(sic3c):
    rotated = rotate_stiffness(sic3c, DefectFrame.from_axes([1, 1, 1], [1, 1, -2]))
    assert abs(np.trace(rotated.matrix) - np.trace(sic3c.matrix)) > 1.0


def test_hexagonal_transverse_isotropy(sic4h):
    for theta in np.linspace(0, 2 * np.pi, 7):
        np.testing.assert_allclose(rotate_stiffness(sic4h, rot_z(theta)).matrix, sic4h.matrix, atol=1e-9 * 547)


def test_rotation_preserves_positive_definiteness(sic3c):
    rng = np.random.default_rng(4)
    for _ in range(10):
        assert np.linalg.eigvalsh(rotate_stiffness(sic3c, random_rotation(rng)).matrix).min() > 0


def test_non_orthonormal_frame_rejected(sic3c):
    with pytest.raises(ValidationError):
        DefectFrame.from_axes([1, 1, 1], [1, 0, 0])
    with pytest.raises(ValidationError):
        rotate_stiffness(sic3c, np.diag([1.0, 1.0, 2.0]))
    with pytest.raises(ValidationError):
        rotate_stiffness(sic3c, np.diag([1.0, 1.0, -1.0]))


def test_frame_right_handed():
    frame = DefectFrame.from_axes([1, 1, 1], [1, 1, -2])
    r = frame.rotation
    np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(r) == pytest.approx(1.0)
    np.testing.assert_allclose(frame.y_axis, np.array([-1, 1, 0]) / np.sqrt(2), atol=1e-12)


def test_cubic_111_frames_are_mirror_frames():
    frames = cubic_111_frames()
    assert len(frames) == 6
    for f in frames:
        # y axis is a <110> direction, so xz is a {110} mirror plane
        assert sorted(np.abs(f.y_axis * np.sqrt(2)).round(12)) == [0, 1, 1]


def test_hexagonal_compliance_closed_form(sic4h):
    s = compliance(sic4h)
    assert s[4, 4] == pytest.approx(1 / 159, rel=1e-12)
    assert s[4, 4] == pytest.approx(6.289e-3, rel=1e-3)
    assert s[3, 3] == pytest.approx(615 / 330997, rel=1e-12)
    assert s[1, 3] == pytest.approx(-52 / 330997, rel=1e-12)
    np.testing.assert_allclose(s.matrix @ sic4h.matrix, np.eye(6), atol=1e-9)


def test_compliance_identity():
    s = compliance(StiffnessMatrix(np.eye(6)))
    np.testing.assert_allclose(s.matrix, np.eye(6), atol=1e-15)


def test_compliance_keeps_frame(sic3c):
    rotated = rotate_stiffness(sic3c, DefectFrame.from_axes([1, 1, 1], [1, 1, -2]))
    assert compliance(rotated).frame == "defect"
    assert compliance(sic3c).frame == "crystal"


def test_compliance_ill_conditioned():
    c = np.eye(6)
    c[5, 5] = 1e-13
    with pytest.raises(NumericalError):
        compliance(StiffnessMatrix(c))


def test_not_positive_definite():
    with pytest.raises(ValidationError):
        StiffnessMatrix(-np.eye(6))


def test_strain_voigt_convention():
    eps = StrainTensor.from_components(1, 2, 3, 4, 5, 6)
    np.testing.assert_array_equal(eps.voigt, [1, 2, 3, 8, 10, 12])
    np.testing.assert_array_equal(StrainTensor.from_voigt(eps.voigt).matrix, eps.matrix)
    sigma = StressTensor.from_components(1, 2, 3, 4, 5, 6)
    np.testing.assert_array_equal(sigma.voigt, [1, 2, 3, 4, 5, 6])


def test_strain_from_zero_stress(sic4h):
    eps = strain_from_stress(compliance(sic4h), StressTensor.zero(frame="crystal"))
    assert not np.any(eps.matrix)


def test_uniaxial_stress_4h(sic4h):
    eps = strain_from_stress(compliance(sic4h), StressTensor.from_components(zz=1.0, frame="crystal"))
    assert eps.matrix[2, 2] == pytest.approx(1.858e-3, rel=1e-3)
    assert eps.matrix[0, 0] == pytest.approx(-1.571e-4, rel=1e-3)
    assert eps.matrix[1, 1] == pytest.approx(-1.571e-4, rel=1e-3)
    assert eps.matrix[0, 1] == eps.matrix[1, 2] == eps.matrix[0, 2] == 0


def test_shear_stress_4h_against_tensor_contraction(sic4h):
    sigma = StressTensor.from_components(zx=1.0, frame="crystal")
    eps = strain_from_stress(compliance(sic4h), sigma)
    # oracle: invert the rank-4 contraction directly on the 9-dim space
    t = sic4h.tensor.reshape(9, 9)
    eps_oracle = (np.linalg.pinv(t) @ sigma.matrix.reshape(9)).reshape(3, 3)
    np.testing.assert_allclose(eps.matrix, eps_oracle, atol=1e-12)
    assert eps.matrix[0, 2] == pytest.approx(1 / 159 / 2, rel=1e-12)
    assert eps.matrix[0, 2] == pytest.approx(3.145e-3, rel=1e-3)


def test_stress_strain_round_trip(sic3c):
    rng = np.random.default_rng(5)
    c = rotate_stiffness(sic3c, DefectFrame.from_axes([1, 1, 1], [-1, -1, 2]))
    s = compliance(c)
    for _ in range(10):
        sigma = StressTensor.from_components(*rng.normal(size=6))
        back = stress_from_strain(c, strain_from_stress(s, sigma))
        np.testing.assert_allclose(back.matrix, sigma.matrix, rtol=1e-9, atol=1e-12)


def test_frame_mismatch(sic4h):
    with pytest.raises(ContractError):
        strain_from_stress(compliance(sic4h), StressTensor.from_components(zz=1.0, frame="defect"))
    with pytest.raises(ContractError):
        stress_from_strain(sic4h, StrainTensor.zero(frame="defect"))


def test_tensor_validation():
    with pytest.raises(ValidationError):
        StrainTensor(np.arange(9.0).reshape(3, 3))
    with pytest.raises(ValidationError):
        ComplianceMatrix(np.ones((5, 5)))
