import numpy as np
import pytest

from mcert.errors import InputError
from mcert.geometry import GroupElement, haar_so
from mcert.symbols import (EuclideanSymbol, RadialProfile, SymbolFamily,
                           euclidean_symbol_from_csv, euclidean_symbol_to_csv,
                           group_symbol_from_profile, read_matrix_csv, read_points_csv,
                           write_matrix_csv, write_points_csv)


class TestFamilies:
    def test_parse_roundtrip(self):
        fam = SymbolFamily.parse("radial-power:exponent=5,shift=1")
        assert fam.kind == "radial-power"
        assert fam.parameters["exponent"] == 5.0

    def test_unknown_kind_rejected(self):
        with pytest.raises(InputError):
            SymbolFamily.parse("wavelet:scale=2")

    def test_malformed_parameter(self):
        with pytest.raises(InputError):
            SymbolFamily.parse("radial-power:exponent")

    def test_radial_power_profile_and_derivatives(self):
        prof = SymbolFamily.parse("radial-power:exponent=5").build_profile()
        xs = np.array([1.0, 2.0, 9.0])
        assert np.allclose(prof(xs), (1.0 + xs) ** -5)
        assert np.allclose(prof.derivative(1, xs), -5.0 * (1.0 + xs) ** -6)
        assert np.allclose(prof.derivative(3, xs), -5.0 * 6.0 * 7.0 * (1.0 + xs) ** -8)

    def test_finite_difference_fallback(self):
        prof = RadialProfile(lambda x: np.sin(x))
        xs = np.array([2.0, 3.0])
        assert np.allclose(prof.derivative(1, xs), np.cos(xs), atol=1e-6)
        assert np.allclose(prof.derivative(2, xs), -np.sin(xs), atol=1e-4)

    def test_log_power_profile(self):
        prof = SymbolFamily.parse("radial-log-power:exponent=2,log_exponent=1").build_profile()
        assert prof(np.array([3.0])) > 0

    def test_bump_support(self):
        bump = SymbolFamily.parse("hm-bump:center=1.5,width=0.5").build_profile()
        assert bump(np.array([1.5])) == pytest.approx(1.0)
        assert bump(np.array([2.1])) == 0.0

    def test_riesz_euclidean(self):
        sym = SymbolFamily.parse("riesz-like:axis=1").build_euclidean(3)
        out = sym(np.array([[0.0, 2.0, 0.0], [1.0, 0.0, 0.0]]))
        assert out[0] == pytest.approx(1.0)
        assert out[1] == pytest.approx(0.0)

    def test_group_lift_modes(self):
        prof = SymbolFamily.parse("radial-power:exponent=2").build_profile()
        rng = np.random.default_rng(0)
        g = haar_so(3, 1, rng)[0]  # orthogonal: |g| = 1 and ||g|| = 1
        hs_sym = group_symbol_from_profile(prof, mode="hs")
        op_sym = group_symbol_from_profile(prof, mode="opnorm")
        assert hs_sym(g) == pytest.approx((1 + 1.0) ** -2)
        assert op_sym(g) == pytest.approx((1 + 1.0) ** -2)
        stack = haar_so(3, 4, rng)
        assert hs_sym(stack).shape == (4,)


class TestCsvInterfaces:
    def test_euclidean_symbol_roundtrip(self, tmp_path):
        rng = np.random.default_rng(1)
        pts = rng.uniform(-2, 2, size=(40, 2))
        sym = EuclideanSymbol(2, lambda x: np.exp(1j * x[..., 0]) * x[..., 1])
        path = tmp_path / "sym.csv"
        euclidean_symbol_to_csv(sym, pts, path)
        loaded = euclidean_symbol_from_csv(path, 2)
        # nearest-node interpolation is exact on the sample nodes
        assert np.allclose(loaded(pts), sym(pts), atol=1e-12)

    def test_matrix_roundtrip(self, tmp_path):
        rng = np.random.default_rng(2)
        m = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        path = tmp_path / "m.csv"
        write_matrix_csv(m, path)
        back = read_matrix_csv(path)
        assert np.allclose(back, m, atol=0)

    def test_points_roundtrip(self, tmp_path):
        rng = np.random.default_rng(3)
        pts = [GroupElement(k) for k in haar_so(3, 5, rng)]
        path = tmp_path / "pts.csv"
        write_points_csv(pts, path)
        back = read_points_csv(path, 3)
        assert len(back) == 5
        for a, b in zip(pts, back):
            assert np.allclose(a.entries, b.entries, atol=0)

    def test_bad_matrix_csv(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("i,j,re,im\n0,0,abc,0\n", encoding="utf-8")
        with pytest.raises(InputError):
            read_matrix_csv(path)

    def test_empty_points_csv(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("a00\n", encoding="utf-8")
        with pytest.raises(InputError):
            read_points_csv(path, 3)
