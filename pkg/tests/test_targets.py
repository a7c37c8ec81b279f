import numpy as np
import pytest
from scipy.special import eval_hermite, gammaln

from dickesim import (
    DickeSpace,
    GkpLattice,
    QuantumState,
    TargetKind,
    TargetSpec,
    TruncationError,
    TruncationWarning,
    cat2_state,
    cat4_state,
    coherent_state,
    fidelity,
    gkp_state,
    make_target,
)
from dickesim.targets import coherent_tail_weight


def coherent_overlap(gamma, delta):
    """Closed form <gamma|delta> = exp(-|g|^2/2 - |d|^2/2 + conj(g) d)."""
    return np.exp(-0.5 * abs(gamma) ** 2 - 0.5 * abs(delta) ** 2 + np.conj(gamma) * delta)


def test_coherent_gamma_zero_is_ground():
    st = coherent_state(DickeSpace(10), 0.0)
    assert st.amplitudes[0] == pytest.approx(1.0)
    assert np.all(st.amplitudes[1:] == 0)


def test_coherent_normalized():
    st = coherent_state(DickeSpace(40), 3.0)
    assert np.linalg.norm(st.amplitudes) == pytest.approx(1.0, abs=1e-12)


def test_coherent_tail_against_brute_force_poisson():
    # oracle: explicit Poisson partial sums
    lam = 9.0
    terms = np.exp(-lam + np.arange(200) * np.log(lam) - gammaln(np.arange(200) + 1))
    for n in (20, 30, 40):
        brute = terms[n + 1:].sum()
        assert coherent_tail_weight(n, 3.0) == pytest.approx(brute, rel=1e-8, abs=1e-18)
    assert coherent_tail_weight(40, 3.0) < 1e-12


def test_coherent_overlap_identity():
    space = DickeSpace(60)
    for g, d in [(1.5, -0.5 + 1j), (2.0, 2.0), (0.3j, 1.1)]:
        a = coherent_state(space, g)
        b = coherent_state(space, d)
        inner = np.vdot(a.amplitudes, b.amplitudes)
        assert inner == pytest.approx(coherent_overlap(g, d), abs=1e-8)


def test_coherent_warns_when_space_too_small():
    # gamma = 3 at N = 22 leaves a tail of ~7e-5: inside the warn window
    with pytest.warns(TruncationWarning):
        coherent_state(DickeSpace(22), 3.0)


def test_coherent_errors_when_space_far_too_small():
    with pytest.raises(TruncationError):
        coherent_state(DickeSpace(17), 3.0)


def test_cat2_gamma_zero_collapses_to_ground():
    st = cat2_state(DickeSpace(8), 0.0)
    assert abs(st.amplitudes[0]) == pytest.approx(1.0, abs=1e-12)


def test_cat2_overlap_with_opposite_parity_cat():
    # oracle: expand <(|g>-i|-g>) | (|g>+i|-g>)> into closed-form coherent overlaps
    g = 1.2  # modest so the truncation tail is negligible at N=40
    space = DickeSpace(40)
    from dickesim.targets import coherent_amplitudes

    leg_p = coherent_amplitudes(40, g)
    leg_m = coherent_amplitudes(40, -g)
    minus_vec = leg_p - 1j * leg_m
    plus_vec = leg_p + 1j * leg_m
    # <g|g> + i<g|-g> + i<-g|g> - <-g|-g>
    analytic = (coherent_overlap(g, g) + 1j * coherent_overlap(g, -g)
                + 1j * coherent_overlap(-g, g) - coherent_overlap(-g, -g))
    assert np.vdot(minus_vec, plus_vec) == pytest.approx(analytic, abs=1e-8)
    minus = cat2_state(space, g)
    plus_state = QuantumState.from_amplitudes(space, plus_vec, normalize=True)
    expected_sq = abs(analytic) ** 2 / (np.linalg.norm(minus_vec)
                                        * np.linalg.norm(plus_vec)) ** 2
    assert fidelity(minus, plus_state) == pytest.approx(expected_sq, abs=1e-8)


def test_cat4_sector_support():
    # for phi a multiple of pi/2 the four legs interfere to a single n mod 4 sector
    space = DickeSpace(40)
    for mult, sector in [(0, 0), (1, 3), (2, 2), (3, 1)]:
        st = cat4_state(space, 3.0, mult * np.pi / 2)
        n = np.arange(41)
        off_sector = np.abs(st.amplitudes[n % 4 != sector])
        assert np.max(off_sector) < 1e-12


def test_cat4_generic_phi_spans_sectors():
    st = cat4_state(DickeSpace(40), 3.0, np.pi / 4)
    n = np.arange(41)
    weights = [np.sum(np.abs(st.amplitudes[n % 4 == j]) ** 2) for j in range(4)]
    assert weights[0] > 0.3 and weights[3] > 0.3


def test_gkp_envelope_parameter():
    assert 10 ** (-10.0 / 20) == pytest.approx(0.31622776601, abs=1e-10)


def _position_oracle_square(n_emitters, spacing, offset, db):
    """Independent construction: finite-energy peaks in position space.

    Applies the e^(-Delta^2 n) envelope through its position-space kernel
    (sum over Mehler-damped peaks), then projects onto oscillator
    eigenfunctions by quadrature.
    """
    delta = 10 ** (-db / 20)
    rho = np.exp(-delta ** 2)
    peaks = offset + spacing * np.arange(-10, 11)
    x = np.linspace(-24, 24, 14001)
    dx = x[1] - x[0]
    psi = np.zeros_like(x)
    for y in peaks:
        psi += (np.pi * (1 - rho ** 2)) ** -0.5 * np.exp(
            (2 * x * y * rho - (x ** 2 + y ** 2) * rho ** 2) / (1 - rho ** 2)
            - (x ** 2 + y ** 2) / 2)
    coeffs = np.empty(n_emitters + 1)
    for n in range(n_emitters + 1):
        lognorm = -0.5 * (n * np.log(2.0) + gammaln(n + 1)) - 0.25 * np.log(np.pi)
        phi_n = eval_hermite(n, x) * np.exp(-x * x / 2 + lognorm)
        coeffs[n] = np.trapezoid(phi_n * psi, dx=dx)
    return coeffs / np.linalg.norm(coeffs)


def test_gkp_square_matches_position_oracle():
    space = DickeSpace(40)
    with pytest.warns(TruncationWarning):
        st = gkp_state(space, GkpLattice.SQUARE, 10.0, allow_truncation=True)
    oracle = _position_oracle_square(40, np.sqrt(2 * np.pi), 0.0, 10.0)
    oracle_state = QuantumState.from_amplitudes(space, oracle, normalize=True)
    assert fidelity(st, oracle_state) > 1 - 1e-6


def test_gkp_square_codewords_match_position_oracle():
    space = DickeSpace(40)
    for codeword, offset in [("zero", 0.0), ("one", np.sqrt(np.pi))]:
        with pytest.warns(TruncationWarning):
            st = gkp_state(space, GkpLattice.SQUARE, 10.0, codeword,
                           allow_truncation=True)
        oracle = _position_oracle_square(40, 2 * np.sqrt(np.pi), offset, 10.0)
        oracle_state = QuantumState.from_amplitudes(space, oracle, normalize=True)
        assert fidelity(st, oracle_state) > 1 - 1e-6


def test_gkp_square_amplitudes_real_and_even():
    with pytest.warns(TruncationWarning):
        st = gkp_state(DickeSpace(40), GkpLattice.SQUARE, 10.0, allow_truncation=True)
    assert np.max(np.abs(st.amplitudes.imag)) < 1e-12
    odd = np.abs(st.amplitudes[1::2])
    assert np.max(odd) < 1e-12


def test_gkp_square_fourfold_symmetry():
    # the sensor state is invariant under a 90-degree phase-space rotation
    with pytest.warns(TruncationWarning):
        st = gkp_state(DickeSpace(44), GkpLattice.SQUARE, 10.0, allow_truncation=True)
    n = np.arange(45)
    rotated = QuantumState.from_amplitudes(
        DickeSpace(44), st.amplitudes * np.exp(-1j * (np.pi / 2) * n), normalize=True)
    assert fidelity(st, rotated) > 1 - 1e-10


def _displacement_expectation(amps, alpha, cutoff=200):
    """<D(alpha)> via an independent route: scipy expm of the truncated ladder."""
    from scipy.linalg import expm

    a = np.zeros((cutoff, cutoff), dtype=complex)
    n = np.arange(cutoff - 1)
    a[n, n + 1] = np.sqrt(n + 1.0)
    disp = expm(alpha * a.conj().T - np.conj(alpha) * a)
    vec = np.zeros(cutoff, dtype=complex)
    vec[:len(amps)] = amps
    return np.vdot(vec, disp @ vec)


def test_gkp_stabilizer_expectations():
    # grid states score high on their lattice displacements, low off-lattice
    with pytest.warns(TruncationWarning):
        hx = gkp_state(DickeSpace(48), GkpLattice.HEX, 10.0, allow_truncation=True)
    ell = np.sqrt(4 * np.pi / np.sqrt(3))
    gen1 = ell / np.sqrt(2)
    gen2 = ell * (0.5 + 1j * np.sqrt(3) / 2) / np.sqrt(2)
    for gen in (gen1, gen2):
        ev = _displacement_expectation(hx.amplitudes, gen)
        assert ev.real > 0.8 and abs(ev.imag) < 1e-6
    assert abs(_displacement_expectation(hx.amplitudes, gen1 / 2)) < 0.05

    with pytest.warns(TruncationWarning):
        sq = gkp_state(DickeSpace(48), GkpLattice.SQUARE, 10.0, allow_truncation=True)
    gen = np.sqrt(2 * np.pi) / np.sqrt(2)
    for g in (gen, 1j * gen):
        ev = _displacement_expectation(sq.amplitudes, g)
        assert ev.real > 0.8 and abs(ev.imag) < 1e-6
    assert abs(_displacement_expectation(sq.amplitudes, gen / 2)) < 0.05


def test_gkp_hex_half_turn_symmetry():
    # the hex lattice state is invariant under a 180-degree phase-space
    # rotation but not under 90 degrees (which the square state survives)
    with pytest.warns(TruncationWarning):
        st = gkp_state(DickeSpace(48), GkpLattice.HEX, 10.0, allow_truncation=True)
    n = np.arange(49)
    half_turn = QuantumState.from_amplitudes(
        DickeSpace(48), st.amplitudes * np.exp(-1j * np.pi * n), normalize=True)
    assert fidelity(st, half_turn) > 1 - 1e-10
    quarter = QuantumState.from_amplitudes(
        DickeSpace(48), st.amplitudes * np.exp(-1j * (np.pi / 2) * n), normalize=True)
    assert fidelity(st, quarter) < 0.9


def test_gkp_truncation_error_names_minimum_n():
    with pytest.raises(TruncationError, match=r"need N >= \d+"):
        gkp_state(DickeSpace(20), GkpLattice.SQUARE, 10.0)


def test_gkp_rejects_nonpositive_db():
    with pytest.raises(ValueError):
        gkp_state(DickeSpace(20), GkpLattice.SQUARE, -3.0)


def test_make_target_custom_passthrough():
    space = DickeSpace(4)
    spec = TargetSpec(TargetKind.CUSTOM, custom_amplitudes=(1.0, 0.0, 0.0, 0.0, 0.0))
    st = make_target(spec, space)
    assert abs(st.amplitudes[0]) == pytest.approx(1.0)


def test_make_target_dispatch_matches_direct_calls():
    space = DickeSpace(40)
    via_spec = make_target(TargetSpec(TargetKind.CAT2, gamma=3.0), space)
    direct = cat2_state(space, 3.0)
    assert fidelity(via_spec, direct) == pytest.approx(1.0, abs=1e-14)


def test_every_target_normalized():
    space = DickeSpace(40)
    specs = [
        TargetSpec(TargetKind.COHERENT, gamma=2.0),
        TargetSpec(TargetKind.CAT2, gamma=3.0),
        TargetSpec(TargetKind.CAT4, gamma=3.0, phi=np.pi / 4),
        TargetSpec(TargetKind.GKP_SQUARE, allow_truncation=True),
        TargetSpec(TargetKind.GKP_HEX, allow_truncation=True),
    ]
    import warnings

    for spec in specs:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            st = make_target(spec, space)
        assert np.linalg.norm(st.amplitudes) == pytest.approx(1.0, abs=1e-10)
