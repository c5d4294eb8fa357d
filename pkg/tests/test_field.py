import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from filament_waves.errors import ConfigurationError, SymmetryError
from filament_waves.field import (
    Grid2D,
    SpectralField,
    SymmetricField,
    dealiased_pointwise,
    embed,
    evaluate_symmetric,
    read_coeffs_csv,
    read_grid_csv,
    restrict,
    sobolev_norm,
    sym_norm,
    symmetry_defect,
    to_coeffs,
    to_grid,
    write_coeffs_csv,
    write_grid_csv,
)

from conftest import random_hermitian, random_symmetric


def single_mode(grid, j, k, comp=0, value=1.0):
    c = np.zeros((2,) + grid.shape, dtype=complex)
    c[comp, grid.J + j, grid.K + k] = value
    c[comp, grid.J - j, grid.K - k] = np.conj(value)
    return SpectralField(grid, c)


class TestGrid:
    def test_for_truncation_is_admissible(self):
        g = Grid2D.for_truncation(8, 5)
        assert g.Nt >= 17 and g.Ns >= 11 and g.Nt % 2 == 0 and g.Ns % 2 == 0

    @pytest.mark.parametrize("args", [(3, 8, 1, 1), (8, 8, 4, 1), (8, 7, 1, 1), (2, 8, 0, 0)])
    def test_invalid(self, args):
        with pytest.raises(ConfigurationError):
            Grid2D(*args)

    def test_coefficient_shape_checked(self):
        with pytest.raises(ConfigurationError):
            SpectralField(Grid2D(8, 8, 2, 2), np.zeros((2, 4, 4)))


class TestTransforms:
    def test_constant_mode(self):
        g = Grid2D(8, 8, 2, 2)
        vals = to_grid(single_mode(g, 0, 0))
        assert np.allclose(vals[0], 1.0, atol=1e-15) and np.allclose(vals[1], 0.0)

    def test_pure_mode(self):
        g = Grid2D(16, 16, 4, 4)
        f = single_mode(g, 3, 2, value=0.25) + single_mode(g, 3, -2, value=0.25)
        t, s = g.points()
        expect = np.cos(3 * t)[:, None] * np.cos(2 * s)[None, :]
        assert np.max(np.abs(to_grid(f)[0] - expect)) < 1e-14

    def test_round_trip_against_direct_dft(self, rng):
        g = Grid2D(32, 32, 8, 8)
        f = random_hermitian(g, rng)
        vals = to_grid(f)
        t, s = g.points()
        j, k = g.modes()
        # direct (slow) synthesis as the oracle
        phase = np.exp(1j * (np.multiply.outer(t, j[:, 0])[:, None, :, None]
                             + np.multiply.outer(s, k[0])[None, :, None, :]))
        direct = np.einsum("cjk,mnjk->cmn", f.coeffs, phase).real
        assert np.max(np.abs(vals - direct)) < 1e-13
        back = to_coeffs(vals, g)
        assert np.max(np.abs(back.coeffs - f.coeffs)) < 1e-13

    @pytest.mark.parametrize("J,K,Nt,Ns", [(3, 5, 8, 12), (6, 2, 14, 6), (10, 10, 64, 32)])
    def test_round_trip_grid_sizes(self, rng, J, K, Nt, Ns):
        g = Grid2D(Nt, Ns, J, K)
        f = random_hermitian(g, rng)
        assert np.max(np.abs(to_coeffs(to_grid(f), g).coeffs - f.coeffs)) < 1e-12
        assert f.hermitian_defect() < 1e-15

    def test_too_small_target_grid(self, rng):
        g = Grid2D(16, 16, 6, 6)
        with pytest.raises(ConfigurationError):
            to_grid(random_hermitian(g, rng), 8, 16)


class TestSobolev:
    def test_examples(self):
        g = Grid2D(8, 8, 2, 2)
        assert sobolev_norm(SpectralField.zeros(g)) == 0.0
        for s in (0, 1, 3, 7.5):
            assert sobolev_norm(single_mode(g, 0, 0), s) == pytest.approx(1.0, abs=1e-15)
        assert sobolev_norm(single_mode(g, 1, 1), 1) == pytest.approx(np.sqrt(6), rel=1e-15)

    def test_parseval(self, rng):
        g = Grid2D(24, 20, 7, 6)
        f = random_hermitian(g, rng)
        vals = to_grid(f)
        grid_l2 = np.sqrt(np.mean(np.sum(vals**2, axis=0)))
        assert sobolev_norm(f, 0) == pytest.approx(grid_l2, rel=1e-12)

    def test_negative_index_rejected(self):
        with pytest.raises(ConfigurationError):
            sobolev_norm(SpectralField.zeros(Grid2D(8, 8, 2, 2)), -1)

    @pytest.mark.parametrize("s", [2, 3])
    def test_banach_algebra_constant_bounded(self, rng, s):
        g = Grid2D(32, 32, 6, 6)
        ratios = []
        for _ in range(10):
            u = random_hermitian(g, rng, decay=0.3)
            v = random_hermitian(g, rng, decay=0.3)
            uv = dealiased_pointwise(u, lambda x, y, v=v: tuple(a * b for a, b in zip((x, y), to_grid(v, *x.shape))), 4)
            ratios.append(sobolev_norm(uv, s) / (sobolev_norm(u, s) * sobolev_norm(v, s)))
        assert max(ratios) < 10.0


class TestSymmetric:
    def test_single_x_mode(self):
        g = Grid2D.for_truncation(4, 4)
        X = np.zeros((5, 5))
        X[3, 2] = 1.0
        v = SymmetricField(g, X, np.zeros((4, 5)))
        vals = to_grid(embed(v))
        t, s = g.points()
        assert np.max(np.abs(vals[0] - np.cos(3 * t)[:, None] * np.cos(2 * s)[None, :])) < 1e-14
        assert np.max(np.abs(vals[1])) < 1e-15

    def test_single_y_mode(self):
        g = Grid2D.for_truncation(4, 4)
        Y = np.zeros((4, 5))
        Y[0, 0] = 1.0
        vals = to_grid(embed(SymmetricField(g, np.zeros((5, 5)), Y)))
        t, _ = g.points()
        assert np.max(np.abs(vals[1] - np.sin(t)[:, None])) < 1e-14
        assert np.max(np.abs(vals[0])) < 1e-15

    def test_asymmetric_field_rejected(self):
        g = Grid2D.for_truncation(4, 4)
        c = np.zeros((2,) + g.shape, dtype=complex)
        # x = cos(t) sin(s): odd in s
        for sj in (1, -1):
            for sk in (1, -1):
                c[0, g.J + sj, g.K + sk] = -0.25j * sk
        f = SpectralField(g, c)
        with pytest.raises(SymmetryError) as err:
            restrict(f)
        assert err.value.defect == pytest.approx(f.l2_norm(), rel=1e-14)

    def test_symmetries_hold_pointwise(self, rng):
        g = Grid2D.for_truncation(6, 5)
        v = random_symmetric(g, rng)
        t = rng.uniform(0, 2 * np.pi, 20)
        s = rng.uniform(0, 2 * np.pi, 20)
        x, y = evaluate_symmetric(v, t, s)
        xm, ym = evaluate_symmetric(v, -t, s)
        xs, ys = evaluate_symmetric(v, t, -s)
        assert np.allclose(x, xm, atol=1e-13) and np.allclose(y, -ym, atol=1e-13)
        assert np.allclose(x, xs, atol=1e-13) and np.allclose(y, ys, atol=1e-13)

    def test_evaluate_matches_grid(self, rng):
        g = Grid2D.for_truncation(5, 4)
        v = random_symmetric(g, rng)
        t, s = g.points()
        x, y = evaluate_symmetric(v, t[:, None], s[None, :])
        vals = to_grid(embed(v))
        assert np.max(np.abs(vals[0] - x)) < 1e-13 and np.max(np.abs(vals[1] - y)) < 1e-13

    def test_norm_consistency(self, rng):
        g = Grid2D.for_truncation(6, 6)
        v = random_symmetric(g, rng)
        assert sym_norm(v) == pytest.approx(embed(v).l2_norm(), rel=1e-14)
        assert sym_norm(v, 3) == pytest.approx(sobolev_norm(embed(v), 3), rel=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(J=st.integers(1, 7), K=st.integers(0, 7), seed=st.integers(0, 2**32 - 1))
    def test_restrict_embed_identity(self, J, K, seed):
        g = Grid2D.for_truncation(J, K)
        v = random_symmetric(g, np.random.default_rng(seed), decay=0.0)
        w = restrict(embed(v))
        assert np.array_equal(w.X, v.X) and np.array_equal(w.Y, v.Y)
        assert symmetry_defect(embed(v)) == 0.0
        assert embed(v).hermitian_defect() == 0.0

    def test_vector_round_trip(self, rng):
        g = Grid2D.for_truncation(3, 4)
        v = random_symmetric(g, rng)
        w = SymmetricField.from_vector(g, v.to_vector())
        assert np.array_equal(w.X, v.X) and np.array_equal(w.Y, v.Y)
        with pytest.raises(ConfigurationError):
            SymmetricField.from_vector(g, v.to_vector()[:-1])


class TestDealiasing:
    def test_identity(self, rng):
        g = Grid2D(16, 16, 5, 5)
        f = random_hermitian(g, rng)
        out = dealiased_pointwise(f, lambda x, y: (x, y))
        assert np.max(np.abs(out.coeffs - f.coeffs)) < 1e-15

    def test_square_of_cosine(self):
        g = Grid2D(16, 16, 4, 4)
        f = single_mode(g, 1, 0, value=0.5)
        out = dealiased_pointwise(f, lambda x, y: (x * x, y))
        assert out.coefficient(0, 0)[0] == pytest.approx(0.5, abs=1e-15)
        assert out.coefficient(2, 0)[0] == pytest.approx(0.25, abs=1e-15)
        assert out.coefficient(-2, 0)[0] == pytest.approx(0.25, abs=1e-15)

    def test_top_mode_square_is_truncated(self):
        J = 4
        g = Grid2D.for_truncation(J, 2)
        f = single_mode(g, J, 0, value=0.5)
        out = dealiased_pointwise(f, lambda x, y: (x * x, y), padding=4)
        expect = np.zeros((2,) + g.shape, dtype=complex)
        expect[0, g.J, g.K] = 0.5  # cos^2(Jt) = 1/2 + cos(2Jt)/2, and 2J > J is dropped
        assert np.max(np.abs(out.coeffs - expect)) < 1e-15

    def test_without_padding_the_square_aliases(self):
        J = 4
        g = Grid2D.for_truncation(J, 2)
        f = single_mode(g, J, 0, value=0.5)
        out = dealiased_pointwise(f, lambda x, y: (x * x, y), padding=1)
        # on Nt = 2J + 2 points mode 2J folds onto -2
        assert out.coefficient(-2, 0)[0] == pytest.approx(0.25, abs=1e-15)


class TestCsv:
    def test_coefficients_round_trip_exactly(self, tmp_path, rng):
        g = Grid2D.for_truncation(5, 3)
        f = random_hermitian(g, rng)
        p = tmp_path / "c.csv"
        write_coeffs_csv(f, p, comments=["written by a test"])
        assert p.read_text().splitlines()[1] == "j,k,re_x,im_x,re_y,im_y"
        back = read_coeffs_csv(p)
        assert back.grid == g and np.array_equal(back.coeffs, f.coeffs)

    def test_symmetric_round_trip_bit_identical(self, tmp_path, rng):
        g = Grid2D.for_truncation(6, 6)
        v = random_symmetric(g, rng)
        p = tmp_path / "v.csv"
        write_coeffs_csv(embed(v), p)
        w = restrict(read_coeffs_csv(p, g))
        assert np.array_equal(w.X, v.X) and np.array_equal(w.Y, v.Y)

    def test_grid_samples_round_trip(self, tmp_path, rng):
        g = Grid2D(8, 6, 3, 2)
        f = random_hermitian(g, rng)
        p = tmp_path / "g.csv"
        write_grid_csv(f, p)
        assert p.read_text().splitlines()[0] == "t,s,x,y"
        assert np.array_equal(read_grid_csv(p, g), to_grid(f))

    def test_bad_header(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(ConfigurationError):
            read_coeffs_csv(p)
