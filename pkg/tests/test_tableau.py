import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfperc.layout import build
from surfperc.pauli import PauliOperator, from_support, multiply, single_qubit
from surfperc.tableau import (CodeState, Status, _gf2_rref, init_code_state,
                              logical_status)


def P(s, n=5):
    return PauliOperator.from_string(n, s)


def span_lines(strings, n=5):
    """Canonical form of the group generated by the given Pauli strings."""
    vecs = []
    for s in strings:
        op = P(s, n)
        vecs.append((op.x_bits << n) | op.z_bits)
    mask = (1 << n) - 1
    lines = []
    for v in _gf2_rref(vecs):
        lines.append(PauliOperator(n, (v >> n) & mask, v & mask, 0).to_string()[1:])
    return sorted(lines)


@pytest.fixture
def d2():
    return build(2)


@pytest.fixture
def fresh(d2):
    return init_code_state(d2)


class TestInit:
    def test_five_qubit_group(self, fresh):
        assert fresh.canonical_lines() == span_lines(
            ["Z1 Z2 Z3", "X1 X3 X4", "Z3 Z4 Z5", "X2 X3 X5"])
        assert fresh.logical_x.to_string() == "+X4 X5"
        assert fresh.logical_z.to_string() == "+Z2 Z5"

    def test_generator_count_formula(self):
        for d in (2, 3, 4, 6):
            state = init_code_state(build(d))
            assert state.rank == d * d + (d - 1) * (d - 1) - 1

    def test_logicals_anticommute(self):
        for d in (2, 3, 5):
            state = init_code_state(build(d))
            assert not state.logical_x.commutes_with(state.logical_z)
            assert logical_status(state) == Status.ALIVE

    def test_all_generator_signs_positive(self, fresh):
        assert all(g.sign == 1 for g in fresh.generators)


class TestGoldenReplayAliveSequence:
    """Y2 then Y5 on the 5-qubit code: the state stays alive."""

    def test_step_groups_and_logicals(self, fresh):
        rng = np.random.default_rng(7)
        rec = fresh.measure(single_qubit(5, 1, "Y"), rng)
        assert rec.case == 3 and not rec.deterministic
        assert fresh.canonical_lines() == span_lines(
            ["Y2", "X1 X3 X4", "Z3 Z4 Z5", "Z1 Y2 Y3 X5"])
        assert fresh.status == Status.ALIVE

        rec = fresh.measure(single_qubit(5, 4, "Y"), rng)
        assert rec.case == 3
        assert fresh.canonical_lines() == span_lines(
            ["Y2", "X1 X3 X4", "Y5", "Z1 X3 Z4 Y5"])
        assert fresh.status == Status.ALIVE
        assert fresh.logical_class_contains(P("Z1 Z4"), "z")
        assert fresh.logical_class_contains(P("Z3 Y4"), "x")
        fresh.check_invariants()


class TestGoldenReplayDiagonalSequence:
    """Y2, Y3, Y4 measure a full diagonal: the logical pair collapses."""

    def test_collapse(self, fresh):
        rng = np.random.default_rng(11)
        fresh.measure(single_qubit(5, 1, "Y"), rng)
        assert fresh.canonical_lines() == span_lines(
            ["Y2", "X1 X3 X4", "Z3 Z4 Z5", "Z1 Y2 Y3 X5"])
        fresh.measure(single_qubit(5, 2, "Y"), rng)
        assert fresh.canonical_lines() == span_lines(
            ["Y2", "Y3", "X1 Y3 Y4 Z5", "Z1 Y2 Y3 X5"])
        assert fresh.status == Status.ALIVE
        rec = fresh.measure(single_qubit(5, 3, "Y"), rng)
        assert rec.case == 4 and fresh.status == Status.COLLAPSED
        # the post-measurement state is additionally stabilized by the
        # measured diagonal qubit
        assert fresh.rank == 5
        assert fresh.canonical_lines() == span_lines(
            ["Y2", "Y3", "X1 Y3 Y4 Z5", "Z1 Y2 Y3 X5", "Y4"])
        assert fresh.logical_x.equal_up_to_sign(P("Y4"))
        assert fresh.logical_z.equal_up_to_sign(P("Y4"))

    def test_status_sticky_after_collapse(self, fresh):
        rng = np.random.default_rng(0)
        for q in (1, 2, 3):
            fresh.measure(single_qubit(5, q, "Y"), rng)
        assert fresh.status == Status.COLLAPSED
        for q in range(5):
            fresh.measure(single_qubit(5, q, "Z"), rng)
        assert fresh.status == Status.COLLAPSED


class TestMeasureCases:
    def test_existing_plaquette_deterministic(self, d2, fresh):
        before = fresh.canonical_lines()
        rec = fresh.measure(fresh._row_operator(0), coin=0.9)
        assert rec.deterministic and rec.outcome == 1 and rec.case == 1
        assert fresh.canonical_lines() == before
        assert fresh.rank == 4

    def test_all_x_destroys_logical_z(self):
        for d in (2, 3):
            lay = build(d)
            state = init_code_state(lay)
            rng = np.random.default_rng(d)
            for q in range(lay.n_qubits):
                state.measure(single_qubit(lay.n_qubits, q, "X"), rng)
            assert state.status == Status.ZLOST
            assert state.rank == lay.n_qubits

    def test_measure_after_loss_updates_group(self, fresh):
        rng = np.random.default_rng(1)
        for q in range(5):
            fresh.measure(single_qubit(5, q, "X"), rng)
        assert fresh.status == Status.ZLOST
        rec = fresh.measure(single_qubit(5, 0, "Z"), rng)
        assert rec.case in (2, 3)
        assert fresh.group_contains(P("Z1"))
        assert fresh.status == Status.ZLOST

    def test_non_hermitian_rejected(self, fresh):
        with pytest.raises(ValueError):
            fresh.measure(PauliOperator(5, 1, 1, 1))

    def test_length_mismatch_rejected(self, fresh):
        with pytest.raises(ValueError):
            fresh.measure(single_qubit(4, 0, "X"))

    def test_outcome_follows_coin(self, fresh):
        rec = fresh.measure(single_qubit(5, 1, "Y"), coin=0.7)
        assert rec.outcome == -1
        g = [g for g in fresh.generators if g.equal_up_to_sign(P("Y2"))]
        assert len(g) == 1 and g[0].sign == -1


class TestGroupContains:
    def test_product_of_adjacent_plaquettes(self, fresh):
        assert fresh.group_contains(P("Z1 Z2 Z4 Z5"))

    def test_single_x_not_in_fresh_group(self, fresh):
        assert not fresh.group_contains(P("X1"))

    def test_x_in_group_after_measuring_it(self, fresh):
        fresh.measure(single_qubit(5, 0, "X"), coin=0.3)
        assert fresh.group_contains(P("X1"))

    def test_sign_is_ignored(self, fresh):
        fresh.measure(single_qubit(5, 0, "X"), coin=0.9)  # inserted with -1
        assert fresh.group_contains(P("X1"))
        assert fresh.group_contains(PauliOperator.from_string(5, "-X1"))


class TestCaseOneExtension:
    """A state whose generators span less than a maximal mixed group."""

    def _small_state(self):
        return CodeState(
            3,
            [PauliOperator.from_string(3, "Z1 Z2")],
            logical_x=PauliOperator.from_string(3, "X1 X2"),
            logical_z=PauliOperator.from_string(3, "Z2"),
        )

    def test_append_grows_rank_with_random_sign(self):
        state = self._small_state()
        rec = state.measure(PauliOperator.from_string(3, "Z3"), coin=0.8)
        assert rec.case == 1 and not rec.deterministic
        assert rec.outcome == -1
        assert state.rank == 2
        assert state.group_contains(PauliOperator.from_string(3, "Z3"))
        rec2 = state.measure(PauliOperator.from_string(3, "Z3"), coin=0.1)
        assert rec2.deterministic and rec2.outcome == -1

    def test_invariants_after_extension(self):
        state = self._small_state()
        state.measure(PauliOperator.from_string(3, "Z3"), coin=0.2)
        state.check_invariants()
        assert state.status == Status.ALIVE

    def test_companion_rows_pair_with_generators(self):
        from surfperc import _kernels
        for make in (self._small_state, lambda: init_code_state(build(3))):
            state = make()
            w = state._w
            for i in range(state.rank):
                for j in range(state.rank):
                    got = _kernels._sym(state._dx[i], state._dz[i],
                                        state._sx[j], state._sz[j], w)
                    assert got == (1 if i == j else 0)


def test_measuring_same_operator_twice_is_deterministic(fresh):
    rng = np.random.default_rng(5)
    ops = [single_qubit(5, 1, "Y"), single_qubit(5, 3, "X"), P("Z3 Z4 Z5")]
    for op in ops:
        first = fresh.measure(op, rng)
        second = fresh.measure(op, rng)
        assert second.deterministic
        assert second.outcome == first.outcome


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_determinism_flag_matches_group_membership(data):
    lay = build(2)
    state = init_code_state(lay)
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31)))
    for _ in range(data.draw(st.integers(1, 12))):
        q = data.draw(st.integers(0, 4))
        basis = data.draw(st.sampled_from("XYZ"))
        op = single_qubit(5, q, basis)
        expected = state.group_contains(op)
        rec = state.measure(op, rng)
        assert rec.deterministic == expected
    state.check_invariants()


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_subround_order_invariance(data):
    """Pairwise-commuting Pauli sets applied in any order with the same
    per-operator coins generate the same group and status."""
    d = data.draw(st.sampled_from([2, 3]))
    lay = build(d)
    n = lay.n_qubits
    qubits = data.draw(st.lists(st.integers(0, n - 1), min_size=1,
                                max_size=n, unique=True))
    bases = [data.draw(st.sampled_from("XYZ")) for _ in qubits]
    coins = [data.draw(st.floats(0.01, 0.99)) for _ in qubits]
    perm = data.draw(st.permutations(range(len(qubits))))

    a = init_code_state(lay)
    for q, b, c in zip(qubits, bases, coins):
        a.measure(single_qubit(n, q, b), coin=c)
    b_state = init_code_state(lay)
    for i in perm:
        b_state.measure(single_qubit(n, qubits[i], bases[i]), coin=coins[i])

    assert a.canonical_bits() == b_state.canonical_bits()
    assert a.status == b_state.status


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_invariants_hold_after_random_rounds(data):
    d = data.draw(st.sampled_from([2, 3]))
    lay = build(d)
    n = lay.n_qubits
    state = init_code_state(lay)
    rng = np.random.default_rng(data.draw(st.integers(0, 2**31)))
    for _ in range(data.draw(st.integers(1, 3 * n))):
        kind = data.draw(st.integers(0, 3))
        if kind == 0:
            op = from_support(n, lay.plaquettes[data.draw(
                st.integers(0, len(lay.plaquettes) - 1))], "Z")
        elif kind == 1:
            op = from_support(n, lay.stars[data.draw(
                st.integers(0, len(lay.stars) - 1))], "X")
        else:
            op = single_qubit(n, data.draw(st.integers(0, n - 1)),
                              data.draw(st.sampled_from("XYZ")))
        state.measure(op, rng)
    state.check_invariants()
    if state.status == Status.ALIVE:
        assert state.rank == n - 1
    else:
        assert state.rank == n


def test_copy_is_independent(fresh):
    clone = fresh.copy()
    fresh.measure(single_qubit(5, 0, "X"), coin=0.2)
    assert clone.status == Status.ALIVE
    assert clone.rank == 4 and fresh.rank == 4
    assert clone.canonical_bits() != fresh.canonical_bits()


def test_canonical_dump_format(fresh):
    dump = fresh.canonical_dump()
    lines = dump.strip().split("\n")
    assert lines == sorted(lines)
    for line in lines:
        op = PauliOperator.from_string(5, "+" + line)
        assert fresh.group_contains(op)


def test_invalid_custom_states_rejected():
    with pytest.raises(ValueError):  # anticommuting generators
        CodeState(2, [P("X1", 2), P("Z1", 2)],
                  P("X1 X2", 2), P("Z2", 2))
    with pytest.raises(ValueError):  # dependent generators
        CodeState(3, [P("Z1 Z2", 3), P("Z2 Z3", 3), P("Z1 Z3", 3)],
                  P("X1 X2 X3", 3), P("Z3", 3))
    with pytest.raises(ValueError):  # commuting logical pair
        CodeState(2, [P("Z1 Z2", 2)], P("X1 X2", 2), P("X1 X2", 2))
