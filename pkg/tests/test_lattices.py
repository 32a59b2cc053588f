import dataclasses
import math

import numpy as np
import pytest

from lastsim.decoders import SingularLatticeError
from lastsim.lattices import (Lattice, NestedLastCode, RateInfeasibleError,
                              ShapingContext, _BinaryTrellisShaper,
                              _CubicShaper, build_nested_code,
                              construct_mod_p_lattice, effective_radius,
                              embed_message, encode, fundamental_volume,
                              make_shaper, uniform_voronoi_sample)


# ---------------------------------------------------------------------------
# mod-p construction

def test_mod_p_block_form_example():
    lat = construct_mod_p_lattice(2, np.array([[1]]), 1.0)
    assert lat.generator.tolist() == [[1.0, 0.0], [1.0, 2.0]]
    assert fundamental_volume(lat) == pytest.approx(2.0)


def test_mod_p_degenerate_k0():
    lat = construct_mod_p_lattice(3, np.zeros((2, 0), dtype=int), 1.0)
    assert np.array_equal(lat.generator, 3.0 * np.eye(2))


def test_mod_p_unit_volume_normalization():
    rng = np.random.default_rng(0)
    p, k, m = 5, 2, 4
    P = rng.integers(0, p, size=(m - k, k))
    kappa = p ** (-(m - k) / m)
    lat = construct_mod_p_lattice(p, P, kappa)
    assert fundamental_volume(lat) == pytest.approx(1.0, abs=1e-12)


def test_mod_p_rejects_bad_input():
    with pytest.raises(ValueError):
        construct_mod_p_lattice(4, np.array([[1]]), 1.0)  # not prime
    with pytest.raises(ValueError):
        construct_mod_p_lattice(3, np.array([[3]]), 1.0)  # entry out of range
    with pytest.raises(ValueError):
        construct_mod_p_lattice(3, np.array([[1]]), 0.0)  # bad kappa


# ---------------------------------------------------------------------------
# geometry helpers

def test_fundamental_volume_examples():
    assert fundamental_volume(Lattice(np.eye(2))) == pytest.approx(1.0)
    assert fundamental_volume(Lattice(2.0 * np.eye(3))) == pytest.approx(8.0)
    rng = np.random.default_rng(1)
    G = rng.standard_normal((4, 4))
    sv = np.linalg.svd(G, compute_uv=False)
    assert fundamental_volume(Lattice(G)) == pytest.approx(float(np.prod(sv)), rel=1e-10)


def test_lattice_rejects_singular_generator():
    with pytest.raises(SingularLatticeError):
        Lattice(np.array([[1.0, 2.0], [0.5, 1.0]]))


def test_effective_radius_examples():
    assert effective_radius(np.eye(2)) == pytest.approx(1.0 / math.sqrt(math.pi))
    assert effective_radius(np.array([[2.0]])) == pytest.approx(1.0)
    rng = np.random.default_rng(2)
    A = rng.standard_normal((5, 5))
    r = effective_radius(A)
    vol_sphere = math.exp(0.5 * 5 * math.log(math.pi * r * r) - math.lgamma(3.5))
    assert vol_sphere == pytest.approx(abs(np.linalg.det(A)), rel=1e-10)


# ---------------------------------------------------------------------------
# codebook construction

def test_prime_power_selection_example():
    # M=2, T=3, R=4: RT = 12, 2^12 = 4096 is itself the smallest prime power
    code = build_nested_code(2, 3, 4.0, 100.0, seed=0)
    assert code.dimension == 12
    assert code.prime ** code.message_dim >= 2 ** 12
    assert (code.prime, code.message_dim) == (2, 12)


def test_rate_window_invariant():
    for M, T, R in [(2, 3, 4.0), (2, 3, 8.0), (2, 3, 12.0), (1, 2, 3.0)]:
        code = build_nested_code(M, T, R, 100.0, seed=1)
        rate = math.log2(float(code.prime) ** code.message_dim) / T
        assert R - 1.0 <= rate <= R + 1.0


def test_build_reproducibility_bit_identical():
    a = build_nested_code(2, 2, 3.0, 50.0, seed=123)
    b = build_nested_code(2, 2, 3.0, 50.0, seed=123)
    assert np.array_equal(a.code_matrix, b.code_matrix)
    assert np.array_equal(a.dither, b.dither)
    assert a.phi == b.phi and a.kappa == b.kappa


def test_self_similarity_ratio_exact():
    code = build_nested_code(3, 5, 4.0, 316.0, seed=2)
    ratio = 2.0 ** (code.rate_bpcu / (2 * code.antennas))
    assert np.allclose(code.coding_lattice.generator * ratio,
                       code.shaping_lattice.generator, rtol=1e-12, atol=0)
    # and the same ratio in terms of rho and the multiplexing gain
    rho_form = code.snr ** (-code.multiplexing_gain / (2 * code.antennas))
    assert rho_form == pytest.approx(1.0 / ratio, rel=1e-12)


def test_volume_consistency():
    code = build_nested_code(2, 3, 4.0, 100.0, seed=3)
    vs = fundamental_volume(code.shaping_lattice)
    vc = fundamental_volume(code.coding_lattice)
    assert vs / vc == pytest.approx(2.0 ** (code.rate_bpcu * code.blocklength), rel=1e-9)


def test_generators_stay_lower_triangular():
    code = build_nested_code(2, 3, 8.0, 100.0, seed=4)
    for G in (code.mod_p_generator, code.shaping_lattice.generator,
              code.coding_lattice.generator):
        assert np.allclose(G, np.tril(G))
    assert np.all(np.diag(code.coding_lattice.generator) > 0)
    # diagonal pattern kappa (k entries) then kappa*p, and scalar stacking
    k, p = code.message_dim, code.prime
    diag = np.diag(code.mod_p_generator)
    assert np.allclose(diag[:k], code.kappa, rtol=1e-12)
    assert np.allclose(diag[k:], code.kappa * p, rtol=1e-12)
    scale = 2.0 ** (-code.rate_bpcu / (2 * code.antennas))
    assert np.allclose(code.coding_lattice.generator,
                       scale * code.phi * code.mod_p_generator, rtol=1e-12)


def test_mod_p_volume_is_one():
    code = build_nested_code(2, 3, 8.0, 100.0, seed=5)
    assert fundamental_volume(Lattice(code.mod_p_generator)) == pytest.approx(1.0, rel=1e-9)


def test_average_codeword_energy_within_power_budget():
    code = build_nested_code(2, 3, 4.0, 100.0, seed=6)
    rng = np.random.default_rng(99)
    e = []
    for _ in range(2000):
        msg = rng.integers(0, code.prime, size=code.message_dim)
        x = encode(code, msg)
        e.append(float(x @ x))
    assert np.mean(e) <= code.antennas * code.blocklength


def test_dither_lies_in_shaping_voronoi():
    code = build_nested_code(2, 2, 3.0, 63.0, seed=7)
    sh = code.shaper()
    assert sh.distance(code.dither) == pytest.approx(float(np.linalg.norm(code.dither)), abs=1e-9)


def test_rate_infeasible():
    with pytest.raises(RateInfeasibleError):
        build_nested_code(1, 1, 120.0, 100.0, seed=8)


def test_rho_must_exceed_one():
    with pytest.raises(ValueError):
        build_nested_code(1, 1, 1.0, 0.5, seed=9)


# ---------------------------------------------------------------------------
# encoding

def test_encode_zero_message_zero_dither():
    code = build_nested_code(1, 1, 1.0, 10.0, seed=10)
    code = dataclasses.replace(code, dither=np.zeros(code.dimension), _shaping=None)
    x = encode(code, np.zeros(code.message_dim, dtype=int))
    assert np.allclose(x, 0.0)


def test_encode_k0_codebook_is_single_dithered_point():
    code = build_nested_code(1, 1, 0.0, 10.0, seed=11)
    assert code.message_dim == 0
    x = encode(code, np.zeros(0, dtype=int))
    sh = code.shaper()
    assert np.allclose(x, sh.reduce_mod(code.dither))


def test_encode_validates_message():
    code = build_nested_code(1, 1, 1.0, 10.0, seed=12)
    with pytest.raises(ValueError):
        encode(code, np.array([code.prime]))
    with pytest.raises(ValueError):
        encode(code, np.array([0, 0]))


def test_toy_codebook_injective_and_inside_voronoi():
    # M=1, T=1, R=3 picks p=3, k=2: nine codewords
    code = build_nested_code(1, 1, 3.0, 100.0, seed=13)
    assert (code.prime, code.message_dim) == (3, 2)
    sh = code.shaper()
    words = []
    for a in range(3):
        for b in range(3):
            x = encode(code, np.array([a, b]))
            # Voronoi membership: the nearest shaping-lattice point is 0
            assert sh.distance(x) == pytest.approx(float(np.linalg.norm(x)), abs=1e-9)
            words.append(x)
    words = np.array(words)
    for i in range(9):
        for j in range(i + 1, 9):
            assert np.linalg.norm(words[i] - words[j]) > 1e-9


def test_embed_message_systematic_lift():
    code = build_nested_code(1, 2, 2.0, 40.0, seed=14)
    msg = np.arange(code.message_dim) % code.prime
    z = embed_message(code, msg)
    assert z.shape == (code.dimension,)
    assert np.array_equal(z[:code.message_dim], msg)
    assert not z[code.message_dim:].any()


# ---------------------------------------------------------------------------
# serialization

def test_serialization_round_trip_bit_identical():
    code = build_nested_code(2, 3, 8.0, 100.0, seed=15)
    clone = NestedLastCode.from_json(code.to_json())
    assert np.array_equal(clone.code_matrix, code.code_matrix)
    assert np.array_equal(clone.dither, code.dither)
    assert np.array_equal(clone.coding_lattice.generator, code.coding_lattice.generator)
    assert np.array_equal(clone.shaping_lattice.generator, code.shaping_lattice.generator)
    assert (clone.prime, clone.message_dim, clone.kappa, clone.phi) == \
        (code.prime, code.message_dim, code.kappa, code.phi)
    msg = np.arange(code.message_dim) % code.prime
    assert np.array_equal(encode(clone, msg), encode(code, msg))


# ---------------------------------------------------------------------------
# shaping backends

def test_shaper_backend_selection():
    cubic = build_nested_code(2, 3, 4.0, 100.0, seed=16)   # k = m
    assert isinstance(cubic.shaper(), _CubicShaper)
    trellis = build_nested_code(3, 5, 4.0, 100.0, seed=17)  # p=2, k=20, m=30
    assert isinstance(trellis.shaper(), _BinaryTrellisShaper)
    generic = build_nested_code(2, 3, 8.0, 100.0, seed=18)  # p=11
    assert isinstance(generic.shaper(), ShapingContext)


def test_trellis_shaper_matches_generic():
    rng = np.random.default_rng(19)
    for _ in range(25):
        k = int(rng.integers(1, 5))
        mk = int(rng.integers(1, 4))
        P = rng.integers(0, 2, size=(mk, k))
        scale = float(rng.uniform(0.5, 1.5))
        lat = construct_mod_p_lattice(2, P, scale)
        generic = ShapingContext(lat.generator)
        trellis = make_shaper(lat.generator, prime=2, message_dim=k,
                              code_matrix=P, scale=scale)
        for _ in range(10):
            v = 3.0 * rng.standard_normal(k + mk)
            assert trellis.distance(v) == pytest.approx(generic.distance(v), abs=1e-9)


def test_uniform_voronoi_sample_membership():
    rng = np.random.default_rng(20)
    G = rng.standard_normal((3, 3)) + 2 * np.eye(3)
    sh = ShapingContext(G)
    for _ in range(50):
        u = uniform_voronoi_sample(sh, rng)
        assert sh.distance(u) == pytest.approx(float(np.linalg.norm(u)), abs=1e-9)
