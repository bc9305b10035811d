import io
import json

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from spinstress.elasticity import StrainTensor
from spinstress.exceptions import IdentifiabilityError, ValidationError
from spinstress.regression import (
    ZfsCouplingRegressor,
    ZfsSample,
    default_strain_battery,
    design_row,
    dump_dataset,
    fit,
    generate_synthetic,
    load_dataset,
    samples_to_arrays,
)
from spinstress.spin import CouplingSet, decompose_zfs

H = CouplingSet([-4700, 2530, -900, -1760, 3200, 1320], kind="strain")


def test_design_row_axial():
    b = design_row(StrainTensor.from_components(zz=0.002))
    expected = np.zeros((5, 6))
    expected[0, 1] = 0.002
    np.testing.assert_array_equal(b, expected)


def test_design_row_zx():
    b = design_row(StrainTensor.from_components(zx=0.002))
    assert b[3, 3] == pytest.approx(0.001)  # c_xz, h26
    assert b[1, 5] == pytest.approx(0.001)  # c_d, h16
    assert np.count_nonzero(b) == 2


def test_design_row_linear():
    rng = np.random.default_rng(0)
    e1 = StrainTensor.from_components(*rng.normal(size=6))
    e2 = StrainTensor.from_components(*rng.normal(size=6))
    np.testing.assert_allclose(design_row(2 * e1 + -3 * e2), 2 * design_row(e1) - 3 * design_row(e2), atol=1e-14)


def test_default_battery():
    battery = default_strain_battery()
    assert len(battery) == 24
    assert max(np.abs(e.matrix).max() for e in battery) == 0.002


def test_noiseless_round_trip():
    samples = generate_synthetic(H, default_strain_battery(), noise_rms=0.0, seed=0)
    result = fit(samples, np.zeros((3, 3)))
    np.testing.assert_allclose(result.h.values, H.values, rtol=1e-9)
    assert np.all(result.h.errors < 1e-6)
    assert result.sample_count == 24


def test_noiseless_channels_exact():
    battery = default_strain_battery()
    for sample, eps in zip(generate_synthetic(H, battery, 0.0, 1), battery):
        np.testing.assert_allclose(decompose_zfs(sample.d_matrix)[1].as_array(), design_row(eps) @ H.values, atol=1e-12)


def test_nonaxial_baseline_subtracted():
    baseline = np.array([[10.0, 3.0, 0.5], [3.0, -4.0, 1.0], [0.5, 1.0, 1336.0]])
    samples = generate_synthetic(H, default_strain_battery(), 0.0, 2, baseline=baseline)
    result = fit(samples, baseline)
    np.testing.assert_allclose(result.h.values, H.values, rtol=1e-9)


def test_deterministic_seed():
    a = generate_synthetic(H, default_strain_battery(), 1e-3, seed=42)
    b = generate_synthetic(H, default_strain_battery(), 1e-3, seed=42)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.d_matrix, y.d_matrix)
    c = generate_synthetic(H, default_strain_battery(), 1e-3, seed=43)
    assert not np.array_equal(a[0].d_matrix, c[0].d_matrix)


def test_noise_statistics():
    battery = default_strain_battery() * 42  # 1008 samples
    samples = generate_synthetic(H, battery, 1e-3, seed=5)
    _, y = samples_to_arrays(samples, np.zeros((3, 3)))
    clean = np.array([design_row(e) @ H.values for e in battery])
    rms = np.sqrt(np.mean((y - clean) ** 2))
    assert abs(rms - 1e-3) < 0.1e-3


def test_noisy_recovery_and_error_scaling():
    small, large = [], []
    for seed in range(40):
        r1 = fit(generate_synthetic(H, default_strain_battery(), 1e-3, seed), np.zeros((3, 3)))
        r4 = fit(generate_synthetic(H, default_strain_battery() * 4, 1e-3, 1000 + seed), np.zeros((3, 3)))
        assert np.all(np.abs(r1.h.values - H.values) <= 5 * r1.h.errors)
        small.append(r1.h.errors)
        large.append(r4.h.errors)
    ratio = np.mean(small, axis=0) / np.mean(large, axis=0)
    np.testing.assert_allclose(ratio, 2.0, rtol=0.1)


def test_strain_scale_equivariance():
    battery = default_strain_battery()
    scaled = [3.0 * e for e in battery]
    r1 = fit(generate_synthetic(H, battery, 0.0, 0), np.zeros((3, 3)))
    r2 = fit(generate_synthetic(H, scaled, 0.0, 0), np.zeros((3, 3)))
    np.testing.assert_allclose(r2.h.values, r1.h.values, rtol=1e-9)


def test_condition_number_repeated_samples():
    battery = default_strain_battery()
    r1 = fit(generate_synthetic(H, battery, 0.0, 0), np.zeros((3, 3)))
    r2 = fit(generate_synthetic(H, battery * 3, 0.0, 0), np.zeros((3, 3)))
    assert r2.condition_number <= r1.condition_number * (1 + 1e-9)


def test_rank_deficient_exx_only():
    battery = default_strain_battery(directions=("xx",))
    samples = generate_synthetic(H, battery, 0.0, 0)
    with pytest.raises(IdentifiabilityError) as info:
        fit(samples, np.zeros((3, 3)))
    assert set(info.value.unresolved) == {"h43", "h26", "h16"}
    assert "h43" in str(info.value)


def test_too_few_samples():
    samples = generate_synthetic(H, default_strain_battery()[:1], 0.0, 0)
    with pytest.raises(ValidationError):
        fit(samples, np.zeros((3, 3)))


def test_strain_bound():
    with pytest.raises(ValidationError):
        ZfsSample(StrainTensor.from_components(xx=0.2), np.zeros((3, 3)))


def test_estimator_api():
    samples = generate_synthetic(H, default_strain_battery(), 0.0, 0)
    X, y = samples_to_arrays(samples, np.zeros((3, 3)))
    est = ZfsCouplingRegressor()
    with pytest.raises(NotFittedError):
        est.predict(X)
    est.fit(X, y)
    np.testing.assert_allclose(est.coef_, H.values, rtol=1e-9)
    np.testing.assert_allclose(est.predict(X), y, atol=1e-9)
    assert est.score(X, y) == pytest.approx(1.0)
    assert est.get_params() == {"rank_tol": 1e-10}
    assert clone(est).get_params() == est.get_params()
    assert est.couplings_.kind == "strain"


def test_estimator_rejects_bad_shapes():
    with pytest.raises(ValidationError):
        ZfsCouplingRegressor().fit(np.zeros((4, 5)), np.zeros((4, 5)))
    with pytest.raises(ValidationError):
        ZfsCouplingRegressor().fit(np.zeros((4, 6)), np.zeros((4, 3)))


def test_dataset_json_round_trip(tmp_path):
    baseline = np.diag([0.0, 0.0, 1336.0])
    samples = generate_synthetic(H, default_strain_battery(), 1e-3, 7, baseline=baseline)
    path = tmp_path / "data.json"
    path.write_text(json.dumps(dump_dataset(samples, baseline)))
    loaded, base = load_dataset(path)
    np.testing.assert_array_equal(base, baseline)
    assert len(loaded) == len(samples)
    for a, b in zip(loaded, samples):
        np.testing.assert_array_equal(a.d_matrix, b.d_matrix)
        np.testing.assert_array_equal(a.strain.matrix, b.strain.matrix)
        assert a.label == b.label


def test_dataset_uses_tensor_shears():
    records = [
        {"strain": {}, "d_matrix": [0] * 9},
        {"strain": {"eyz": 0.001}, "d_matrix": [0] * 9, "label": "shear"},
    ]
    samples, _ = load_dataset(io.StringIO(json.dumps(records)))
    assert samples[0].strain.matrix[1, 2] == 0.001
    assert samples[0].strain.voigt[3] == 0.002


def test_dataset_errors():
    with pytest.raises(ValidationError, match="baseline"):
        load_dataset([{"strain": {"exx": 0.001}, "d_matrix": [0] * 9}])
    with pytest.raises(ValidationError):
        load_dataset([{"strain": {"foo": 1}, "d_matrix": [0] * 9}])
    with pytest.raises(ValidationError):
        load_dataset([{"strain": {}, "d_matrix": [0] * 8}])
    with pytest.raises(ValidationError):
        load_dataset({"not": "a list"})
