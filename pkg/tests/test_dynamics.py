import numpy as np
import pytest

from entshield import (
    BELL_INIT,
    AmplitudeState,
    DivergenceError,
    OUNoise,
    ParameterError,
    RngStream,
    SampledPath,
    SystemParams,
    TimeGrid,
    analytic_constant_G,
    coupling_at,
    rhs,
    run_trajectory,
    sample_path,
    step_rk4,
)
from entshield.dynamics import integrate_block

HALF_PI = np.pi / 2


def zero_path(grid):
    return SampledPath(grid, np.zeros(grid.n_steps))


# ---------------------------------------------------------------------------
# coupling
# ---------------------------------------------------------------------------

def test_coupling_antinode_is_maximal():
    params = SystemParams(G0=(0.7, 0.7), x0=(HALF_PI, HALF_PI))
    assert np.isclose(coupling_at(params, 0.0, 1), 0.7)


def test_coupling_node_vanishes():
    params = SystemParams(x0=(0.0, 0.0))
    assert coupling_at(params, 0.0, 2) == 0.0


def test_coupling_sine_periodicity():
    params = SystemParams(kappa=1.0, x0=(HALF_PI, HALF_PI), noise_scale=1.0)
    assert abs(coupling_at(params, HALF_PI, 1)) < 1e-15


def test_coupling_rejects_bad_atom_index():
    with pytest.raises(ParameterError):
        coupling_at(SystemParams(), 0.0, 3)


# ---------------------------------------------------------------------------
# right-hand side
# ---------------------------------------------------------------------------

def test_rhs_bell_state_drives_only_cavity():
    state = AmplitudeState(atom1=2**-0.5, atom2=2**-0.5)
    d = rhs(state, 0.8, 0.3, SystemParams())
    assert d.atom1 == 0 and d.atom2 == 0 and d.memory == 0 and d.ground == 0
    assert np.isclose(d.cavity, -1j * (0.8 + 0.3) / np.sqrt(2))


def test_rhs_memory_source_term():
    state = AmplitudeState(cavity=1.0)
    params = SystemParams(Gamma_Q=2.0, gamma_Q=3.0)
    d = rhs(state, 0.0, 0.0, params)
    assert d.cavity == 0.0
    assert np.isclose(d.memory, 0.5 * 2.0 * 3.0)


def test_memory_stays_zero_without_dissipation():
    grid = TimeGrid(dt=1e-3, n_steps=2001)
    params = SystemParams(Gamma_Q=0.0)
    rec = run_trajectory(params, zero_path(grid), BELL_INIT, stride=100)
    assert np.max(np.abs(rec.states[:, 4])) == 0.0


# ---------------------------------------------------------------------------
# integrator
# ---------------------------------------------------------------------------

def test_step_small_dt_is_identity():
    state = AmplitudeState(atom1=0.6, atom2=0.5j, cavity=0.1, memory=0.05)
    out = step_rk4(state, 1e-12, 1.0, 1.0, SystemParams())
    assert abs(out.atom1 - state.atom1) < 1e-11
    assert abs(out.cavity - state.cavity) < 1e-11


def test_zero_coupling_zero_dissipation_is_constant():
    grid = TimeGrid(dt=1e-2, n_steps=501)
    params = SystemParams(Gamma_Q=0.0, G0=(0.0, 0.0))
    rec = run_trajectory(params, zero_path(grid), BELL_INIT, stride=10)
    assert np.all(rec.states == rec.states[0])


def test_rk4_fourth_order_convergence():
    params = SystemParams()
    t_end = 2.0
    errs = []
    for dt in (2e-3, 1e-3):
        grid = TimeGrid(dt=dt, n_steps=int(round(t_end / dt)) + 1)
        rec = run_trajectory(params, zero_path(grid), BELL_INIT,
                             stride=grid.n_steps - 1)
        exact = analytic_constant_G(params, t_end, BELL_INIT)
        st = rec.state_at(-1)
        errs.append(max(abs(st.atom1 - exact.atom1), abs(st.cavity - exact.cavity),
                        abs(st.memory - exact.memory)))
    ratio = errs[0] / errs[1]
    assert 12.0 < ratio < 20.0, f"halving dt changed the error by {ratio:.1f}x"


def test_matches_matrix_exponential_oracle():
    grid = TimeGrid(dt=1e-3, n_steps=20001)
    params = SystemParams()
    rec = run_trajectory(params, zero_path(grid), BELL_INIT, stride=2000)
    worst = 0.0
    for k, t in enumerate(rec.times):
        exact = analytic_constant_G(params, t, BELL_INIT)
        st = rec.state_at(k)
        worst = max(worst, abs(st.atom1 - exact.atom1), abs(st.atom2 - exact.atom2),
                    abs(st.cavity - exact.cavity), abs(st.memory - exact.memory))
    assert worst < 1e-6


def test_norm_conserved_without_dissipation():
    grid = TimeGrid(dt=1e-3, n_steps=20001)
    params = SystemParams(Gamma_Q=0.0)
    rec = run_trajectory(params, zero_path(grid), BELL_INIT, stride=200)
    assert np.max(np.abs(rec.norm_sq - rec.norm_sq[0])) < 1e-8


def test_norm_never_exceeds_unity():
    grid = TimeGrid(dt=1e-3, n_steps=5001)
    noise = sample_path(OUNoise(15.0, 2.0), grid, RngStream(40, 0))
    rec = run_trajectory(SystemParams(), noise, BELL_INIT, stride=50)
    assert np.max(rec.norm_sq) <= 1.0 + 1e-6


def test_trajectory_is_linear_in_initial_state():
    grid = TimeGrid(dt=1e-3, n_steps=2001)
    noise = sample_path(OUNoise(15.0, 2.0), grid, RngStream(41, 0))
    params = SystemParams()
    full = run_trajectory(params, noise, BELL_INIT, stride=100)
    half_init = AmplitudeState(atom1=BELL_INIT.atom1 / 2, atom2=BELL_INIT.atom2 / 2)
    half = run_trajectory(params, noise, half_init, stride=100)
    assert np.allclose(half.states[:, :3], 0.5 * full.states[:, :3], atol=1e-12)
    assert np.allclose(half.states[:, 4], 0.5 * full.states[:, 4], atol=1e-12)


def test_trajectory_is_bit_deterministic():
    grid = TimeGrid(dt=1e-3, n_steps=2001)
    noise = sample_path(OUNoise(15.0, 2.0), grid, RngStream(42, 0))
    a = run_trajectory(SystemParams(), noise, BELL_INIT, stride=100)
    b = run_trajectory(SystemParams(), noise, BELL_INIT, stride=100)
    assert np.array_equal(a.states, b.states)


def test_atom_swap_symmetry():
    grid = TimeGrid(dt=1e-3, n_steps=2001)
    noise = sample_path(OUNoise(15.0, 2.0), grid, RngStream(43, 0))
    params = SystemParams(G0=(1.0, 0.6), x0=(HALF_PI, HALF_PI / 2))
    swapped = SystemParams(G0=(0.6, 1.0), x0=(HALF_PI / 2, HALF_PI))
    rec = run_trajectory(params, noise, BELL_INIT, stride=100)
    rec_swapped = run_trajectory(swapped, noise, BELL_INIT, stride=100)
    assert np.array_equal(rec.states[:, 0], rec_swapped.states[:, 1])
    assert np.array_equal(rec.states[:, 1], rec_swapped.states[:, 0])
    # a shared displacement with symmetric parameters keeps the atoms equal
    sym = run_trajectory(SystemParams(), noise, BELL_INIT, stride=100)
    assert np.array_equal(sym.states[:, 0], sym.states[:, 1])


@pytest.mark.filterwarnings("ignore:invalid value encountered in sin")
def test_divergence_error_names_the_step():
    grid = TimeGrid(dt=1e-3, n_steps=201)
    xi = np.zeros((1, grid.n_steps))
    xi[0, 50:] = np.inf
    with pytest.raises(DivergenceError) as err:
        integrate_block(SystemParams(), xi, grid, BELL_INIT, stride=10)
    assert err.value.step is not None


def test_records_include_endpoints():
    grid = TimeGrid(dt=1e-3, n_steps=1001)
    rec = run_trajectory(SystemParams(), zero_path(grid), BELL_INIT, stride=300)
    assert rec.times[0] == 0.0
    assert np.isclose(rec.times[-1], 1.0)


def test_rejects_unnormalized_initial_state():
    grid = TimeGrid(dt=1e-3, n_steps=101)
    big = AmplitudeState(atom1=1.0, atom2=1.0)
    with pytest.raises(ParameterError):
        run_trajectory(SystemParams(), zero_path(grid), big)


# ---------------------------------------------------------------------------
# constant-coupling oracle
# ---------------------------------------------------------------------------

def test_oracle_identity_at_t_zero():
    init = AmplitudeState(atom1=0.3, atom2=0.4j, cavity=0.2, memory=0.1)
    out = analytic_constant_G(SystemParams(), 0.0, init)
    for field in ("atom1", "atom2", "cavity", "ground", "memory"):
        assert getattr(out, field) == getattr(init, field)


def test_oracle_rabi_oscillation_without_dissipation():
    # Gamma_Q = 0, G1 = G2 = G: symmetric state exchanges with the cavity
    # at frequency sqrt(2) G, so |cavity|^2 = sin^2(sqrt(2) G t)
    params = SystemParams(Gamma_Q=0.0)
    for t in (0.3, 1.0, 2.7):
        st = analytic_constant_G(params, t, BELL_INIT)
        assert np.isclose(abs(st.cavity) ** 2, np.sin(np.sqrt(2) * t) ** 2,
                          atol=1e-12)


def test_oracle_block_decoupling_without_coupling():
    params = SystemParams(G0=(0.0, 0.0))
    init = AmplitudeState(atom1=0.5, atom2=0.5, cavity=0.5, memory=0.2)
    st = analytic_constant_G(params, 3.0, init)
    assert np.isclose(st.atom1, 0.5) and np.isclose(st.atom2, 0.5)
    assert abs(st.cavity) < abs(init.cavity)


def test_single_trajectory_freezing():
    # fast strong coupling noise pins the atomic amplitudes near their
    # initial values, unlike the deterministic decay
    grid = TimeGrid(dt=1e-3, n_steps=20001)
    params = SystemParams()
    quiet = run_trajectory(params, zero_path(grid), BELL_INIT, stride=20000)
    noisy_path = sample_path(OUNoise(gamma_xi=100.0, Gamma_xi=2.0), grid,
                             RngStream(44, 0))
    noisy = run_trajectory(params, noisy_path, BELL_INIT, stride=20000)
    drift_quiet = abs(quiet.state_at(-1).atom1 - BELL_INIT.atom1)
    drift_noisy = abs(noisy.state_at(-1).atom1 - BELL_INIT.atom1)
    assert drift_noisy < drift_quiet
