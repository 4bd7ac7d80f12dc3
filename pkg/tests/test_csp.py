"""Constraint instances, solvers, and the fiber-collapse reduction."""

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cigroupoids.core import BoundExceeded, CayleyTable, load_fixture
from cigroupoids.csp import (
    CSPInstance,
    NotInvariant,
    Relation,
    SortMismatch,
    close_under,
    fold_join,
    format_csp,
    gen_instance,
    is_invariant,
    multisorted_to_product,
    parse_csp,
    polymorphisms,
    product_table,
    reduce_instance,
    single_sorted_instance,
    solve_brute,
    solve_consistency,
)
from cigroupoids.plonka import (
    STANDARD_JOIN,
    NotPseudopartition,
    adjoin_infinity,
    join_matrix,
    sigma,
)

SQUAG = load_fixture("fig4a")
AINF = adjoin_infinity(SQUAG)
FIG2A = load_fixture("fig2a")
FIG4B = load_fixture("fig4b")
MEET2 = CayleyTable([[0, 0], [0, 1]])


def neq(n: int) -> frozenset:
    return frozenset((a, b) for a in range(n) for b in range(n) if a != b)


def naive_invariant(tuples, g: CayleyTable) -> bool:
    for t1 in tuples:
        for t2 in tuples:
            if tuple(g.rows[a][b] for a, b in zip(t1, t2)) not in tuples:
                return False
    return True


# ---------------------------------------------------------------------------
# Relations and instances


def test_relation_validates_shape():
    with pytest.raises(ValueError):
        Relation(2, (0,), frozenset({(0, 1)}))
    with pytest.raises(ValueError):
        Relation(2, (0, 0), frozenset({(0, 1, 2)}))


def test_instance_validation():
    r = Relation.single_sorted({(0, 1)}, 2)
    with pytest.raises(ValueError):
        CSPInstance(("x",), (SQUAG,), (0,), ((("x", "ghost"), r),))
    with pytest.raises(ValueError):
        CSPInstance(("x", "x"), (SQUAG,), (0, 0), ())
    with pytest.raises(ValueError):
        CSPInstance(("x",), (SQUAG,), (1,), ())
    with pytest.raises(ValueError):
        # tuple entry 7 escapes the 3-element carrier
        bad = Relation.single_sorted({(7,)}, 1)
        CSPInstance(("x",), (SQUAG,), (0,), ((("x",), bad),))


def test_instance_search_space():
    inst = CSPInstance(("x", "y"), (MEET2, SQUAG), (0, 1), ())
    assert inst.search_space() == 6
    assert inst.sort_of("y") == 1


# ---------------------------------------------------------------------------
# Invariance


def test_sigma_graph_is_invariant():
    part = sigma(AINF)
    graph = frozenset(
        (a, b) for a in range(4) for b in range(4) if part.related(a, b)
    )
    assert is_invariant(Relation.single_sorted(graph, 2), AINF)


def test_two_element_unary_not_invariant():
    # 0·1 = 2 escapes {0, 1}
    r = Relation.single_sorted({(0,), (1,)}, 1)
    assert not is_invariant(r, SQUAG)


def test_disequality_not_invariant_on_squag():
    # cancellation gives a≠b ⟹ ac≠bc, but invariance checks products of
    # arbitrary tuple pairs: (0,1)·(1,0) = (2,2) has equal coordinates
    r = Relation.single_sorted(neq(3), 2)
    assert not is_invariant(r, SQUAG)
    assert (SQUAG.rows[0][1], SQUAG.rows[1][0]) == (2, 2)
    for a, b in neq(3):
        for c in range(3):
            assert SQUAG.rows[a][c] != SQUAG.rows[b][c]


def test_equality_graph_invariant():
    r = Relation.single_sorted({(a, a) for a in range(3)}, 2)
    assert is_invariant(r, SQUAG)


def test_is_invariant_sort_mismatch():
    with pytest.raises(SortMismatch):
        is_invariant(Relation(2, (0, 1), frozenset({(0, 0)})), SQUAG)
    with pytest.raises(SortMismatch):
        is_invariant(Relation.single_sorted({(5,)}, 1), SQUAG)


@given(
    st.sets(
        st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=0, max_size=9
    )
)
@settings(max_examples=80)
def test_invariance_matches_naive(tuples):
    r = Relation.single_sorted(tuples, 2)
    assert is_invariant(r, SQUAG) == naive_invariant(frozenset(tuples), SQUAG)


# ---------------------------------------------------------------------------
# Polymorphisms


def test_singleton_unaries_give_idempotent_binaries():
    rels = [Relation.single_sorted({(a,)}, 1) for a in range(2)]
    out = polymorphisms(rels, 2, 2)
    got = {tuple(map(tuple, t.rows)) for t in out}
    assert got == {
        ((0, 0), (0, 1)),
        ((0, 0), (1, 1)),
        ((0, 1), (0, 1)),
        ((0, 1), (1, 1)),
    }


def test_no_relations_all_unary_maps():
    assert len(polymorphisms([], 1, 2)) == 4
    assert len(polymorphisms([], 1, 3)) == 27


def test_squag_graph_polymorphisms_contain_squag():
    graph = frozenset(
        (a, b, SQUAG.rows[a][b]) for a in range(3) for b in range(3)
    )
    out = polymorphisms([Relation.single_sorted(graph, 3)], 2, 3)
    assert len(out) == 27
    assert SQUAG in out


def test_polymorphism_bounds():
    with pytest.raises(BoundExceeded):
        polymorphisms([], 3, 2)
    with pytest.raises(BoundExceeded):
        polymorphisms([], 2, 5)
    with pytest.raises(SortMismatch):
        polymorphisms([Relation.single_sorted({(9,)}, 1)], 1, 3)


def naive_binary_polys(rels, n):
    pts = list(itertools.product(range(n), repeat=2))
    out = []
    for flat in itertools.product(range(n), repeat=len(pts)):
        f = dict(zip(pts, flat))
        ok = True
        for r in rels:
            for t1, t2 in itertools.product(sorted(r.tuples), repeat=2):
                image = tuple(
                    f[(t1[c], t2[c])] for c in range(r.arity)
                )
                if image not in r.tuples:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(flat)
    return sorted(out)


@pytest.mark.parametrize(
    "tuples",
    [
        {(0, 1)},
        {(0, 0), (1, 1)},
        {(0, 1), (1, 0)},
        set(),
        {(0,), (1,)},
    ],
)
def test_binary_polymorphisms_match_naive(tuples):
    arity = len(next(iter(tuples), (0, 0)))
    rels = [Relation.single_sorted(tuples, arity)] if tuples else []
    fast = polymorphisms(rels, 2, 2)
    flat = sorted(
        tuple(t.rows[i][j] for i in range(2) for j in range(2)) for t in fast
    )
    assert flat == naive_binary_polys(rels, 2)


# ---------------------------------------------------------------------------
# Brute-force solver


def test_brute_single_unary():
    inst = single_sorted_instance(SQUAG, ["v"], [(["v"], {(2,)})])
    assert solve_brute(inst) == {"v": 2}


def test_brute_forced_least():
    inst = single_sorted_instance(
        SQUAG, ["u", "v"], [(["u", "v"], neq(3)), (["u"], {(0,)})]
    )
    assert solve_brute(inst) == {"u": 0, "v": 1}


def test_brute_triangle_coloring():
    inst = single_sorted_instance(
        SQUAG,
        ["x", "y", "z"],
        [(["x", "y"], neq(3)), (["y", "z"], neq(3)), (["x", "z"], neq(3))],
    )
    assert solve_brute(inst) == {"x": 0, "y": 1, "z": 2}


def test_brute_unsat():
    inst = single_sorted_instance(
        MEET2,
        ["x", "y", "z"],
        [(["x", "y"], neq(2)), (["y", "z"], neq(2)), (["x", "z"], neq(2))],
    )
    assert solve_brute(inst) is None


def test_brute_lex_least_matches_enumeration():
    inst = single_sorted_instance(
        SQUAG,
        ["a", "b"],
        [(["a", "b"], {(1, 2), (2, 0), (1, 0)})],
    )
    sols = [
        dict(zip(("a", "b"), vals))
        for vals in itertools.product(range(3), repeat=2)
        if vals in {(1, 2), (2, 0), (1, 0)}
    ]
    assert solve_brute(inst) == sols[0]


def test_brute_bound():
    inst = single_sorted_instance(
        load_fixture("fig3b"), [f"v{i}" for i in range(10)], []
    )
    with pytest.raises(BoundExceeded):
        solve_brute(inst)


def test_brute_many_sorted():
    rel = Relation(2, (0, 1), frozenset({(1, 2)}))
    inst = CSPInstance(("u", "v"), (MEET2, SQUAG), (0, 1), ((("u", "v"), rel),))
    assert solve_brute(inst) == {"u": 1, "v": 2}


# ---------------------------------------------------------------------------
# Consistency solver


def test_arc_inconsistency_detected():
    inst = single_sorted_instance(
        SQUAG, ["v"], [(["v"], {(0,)}), (["v"], {(1,)})]
    )
    assert solve_consistency(inst) is None


def test_consistency_agrees_on_handmade():
    cases = [
        single_sorted_instance(SQUAG, ["v"], [(["v"], {(2,)})]),
        single_sorted_instance(
            SQUAG,
            ["x", "y", "z"],
            [(["x", "y"], neq(3)), (["y", "z"], neq(3)), (["x", "z"], neq(3))],
        ),
        single_sorted_instance(
            MEET2,
            ["x", "y", "z"],
            [(["x", "y"], neq(2)), (["y", "z"], neq(2)), (["x", "z"], neq(2))],
        ),
    ]
    for inst in cases:
        assert solve_consistency(inst) == solve_brute(inst)


@pytest.mark.parametrize("template", [FIG4B, SQUAG], ids=["s2", "squag"])
def test_consistency_matches_brute_on_generated(template):
    # the consistency search is also lex-least because pruning is sound
    for seed in range(100):
        inst = gen_instance(seed, template, num_vars=5, num_constraints=4)
        assert solve_consistency(inst) == solve_brute(inst), seed


def test_consistency_repeated_scope_variable():
    rel = Relation.single_sorted({(0, 1), (1, 1), (2, 0)}, 2)
    inst = CSPInstance(("x",), (SQUAG,), (0,), ((("x", "x"), rel),))
    assert solve_brute(inst) == {"x": 1}
    assert solve_consistency(inst) == {"x": 1}


# ---------------------------------------------------------------------------
# Reduction


def test_reduce_forces_absorbing_top():
    inst = single_sorted_instance(
        AINF, ["v"], [(["v"], {(0,), (1,), (2,), (3,)})]
    )
    red = reduce_instance(inst)
    assert not red.trivially_unsat
    assert red.a == {"v": 3}
    assert red.b_sets == {"v": (0, 1, 2, 3)}
    assert red.b_prime == {"v": (3,)}
    assert red.reduced.sorts[red.reduced.sort_of("v")].n == 1
    assert solve_brute(red.reduced) == {"v": 0}


def test_reduce_into_squag_fiber():
    inst = single_sorted_instance(AINF, ["v"], [(["v"], {(0,), (1,), (2,)})])
    red = reduce_instance(inst)
    assert red.a["v"] in (0, 1, 2)
    assert red.a == {"v": 0}
    fiber = red.reduced.sorts[red.reduced.sort_of("v")]
    assert fiber == SQUAG
    assert solve_brute(red.reduced) is not None


def test_reduce_is_identity_inside_one_fiber():
    graph = {(a, b, SQUAG.rows[a][b]) for a in range(3) for b in range(3)}
    inst = single_sorted_instance(AINF, ["x", "y", "z"], [(["x", "y", "z"], graph)])
    red = reduce_instance(inst)
    assert red.b_prime == {v: (0, 1, 2) for v in "xyz"}
    (scope, rel), = (
        c for c in red.reduced.constraints if len(c[0]) == 3
    )
    # fiber 0 keeps the parent labels, so the tuples come back unchanged
    assert rel.tuples == frozenset(graph)
    assert solve_brute(red.reduced) is not None


def test_reduce_rejects_non_invariant():
    inst = single_sorted_instance(AINF, ["v"], [(["v"], {(0,), (1,)})])
    with pytest.raises(NotInvariant):
        reduce_instance(inst)


def test_reduce_rejects_bad_template():
    inst = single_sorted_instance(FIG2A, ["v"], [(["v"], {(0,)})])
    with pytest.raises(NotPseudopartition):
        reduce_instance(inst)
    xor = CayleyTable([[0, 1], [1, 0]])
    with pytest.raises(NotPseudopartition):
        reduce_instance(single_sorted_instance(xor, ["v"], []))


def test_reduce_requires_single_sort():
    inst = CSPInstance(("v",), (SQUAG, MEET2), (0,), ())
    with pytest.raises(ValueError):
        reduce_instance(inst)


def test_reduce_empty_projection_short_circuits():
    inst = single_sorted_instance(
        AINF, ["v", "w"], [(["v"], {(0,)}), (["v"], {(1,)})]
    )
    red = reduce_instance(inst)
    assert red.trivially_unsat
    assert red.b_sets["v"] == ()
    assert solve_brute(red.reduced) is None
    with pytest.raises(ValueError):
        red.transform({"v": 0, "w": 0})


def test_reduce_unconstrained_variable_gets_full_projection():
    inst = single_sorted_instance(AINF, ["v", "w"], [(["v"], {(3,)})])
    red = reduce_instance(inst)
    assert red.b_sets["w"] == (0, 1, 2, 3)
    assert red.a["w"] == 3


def test_reduce_sat_equivalence_on_generated():
    sat_seen = unsat_seen = 0
    for seed in range(60):
        inst = gen_instance(seed, AINF, num_vars=4, num_constraints=3)
        red = reduce_instance(inst)
        orig = solve_brute(inst)
        reduced = solve_brute(red.reduced)
        assert (orig is None) == (reduced is None), seed
        if orig is None:
            unsat_seen += 1
        else:
            sat_seen += 1
            image = red.transform(orig)
            for scope, rel in red.reduced.constraints:
                assert tuple(image[v] for v in scope) in rel.tuples, seed
    assert sat_seen and unsat_seen


def test_fold_result_stays_in_one_sigma_class():
    jm = join_matrix(AINF, STANDARD_JOIN)
    part = sigma(AINF)
    rng = random.Random(7)
    for _ in range(30):
        size = rng.randint(1, 4)
        values = rng.sample(range(4), size)
        results = {
            fold_join(jm, list(p)) for p in itertools.permutations(values)
        }
        blocks = {part.block_of[r] for r in results}
        assert len(blocks) == 1


# ---------------------------------------------------------------------------
# Many-sorted to product


def test_product_table_componentwise():
    prod = product_table([MEET2, SQUAG])
    assert prod.n == 6
    # element a*3+b pairs (a in meet, b in squag)
    assert prod.rows[1 * 3 + 0][1 * 3 + 1] == 1 * 3 + SQUAG.rows[0][1]
    assert prod.rows[0 * 3 + 2][1 * 3 + 2] == 0 * 3 + 2


def test_single_sorted_passthrough():
    inst = single_sorted_instance(SQUAG, ["v"], [])
    assert multisorted_to_product(inst) is inst


def test_product_translation_preserves_satisfiability():
    rel = Relation(2, (0, 1), frozenset({(1, 2)}))
    sat = CSPInstance(("u", "v"), (MEET2, SQUAG), (0, 1), ((("u", "v"), rel),))
    lifted = multisorted_to_product(sat)
    assert len(lifted.sorts) == 1 and lifted.sorts[0].n == 6
    sol = solve_brute(lifted)
    assert sol is not None
    # the lifted solution projects onto a solution of the original
    assert (sol["u"] // 3) % 2 == 1 and sol["v"] % 3 == 2

    pin = Relation(1, (0,), frozenset({(0,)}))
    unsat = CSPInstance(
        ("u", "v"),
        (MEET2, SQUAG),
        (0, 1),
        ((("u", "v"), rel), (("u",), pin)),
    )
    assert solve_brute(unsat) is None
    assert solve_brute(multisorted_to_product(unsat)) is None


def test_product_translation_empty_constraints():
    inst = CSPInstance(("u", "v"), (MEET2, SQUAG), (0, 1), ())
    assert solve_brute(inst) is not None
    assert solve_brute(multisorted_to_product(inst)) is not None


def test_product_translation_of_reduced_instances():
    for seed in range(20):
        inst = gen_instance(seed, AINF, num_vars=4, num_constraints=3)
        red = reduce_instance(inst)
        direct = solve_brute(red.reduced)
        lifted = solve_brute(multisorted_to_product(red.reduced))
        assert (direct is None) == (lifted is None), seed


# ---------------------------------------------------------------------------
# Generation


def test_gen_deterministic():
    a = gen_instance(1, SQUAG)
    b = gen_instance(1, SQUAG)
    assert a == b
    assert gen_instance(2, SQUAG) != a


def test_generated_relations_are_invariant():
    for template in (SQUAG, FIG4B, AINF):
        for seed in range(20):
            inst = gen_instance(seed, template, num_vars=4, num_constraints=3)
            for _, rel in inst.constraints:
                assert is_invariant(rel, template)


def test_closure_frozen_values():
    # a single tuple is already closed, by idempotence
    assert close_under(SQUAG, {(0, 1)}) == frozenset({(0, 1)})
    assert close_under(SQUAG, {(0, 1), (1, 0)}) == frozenset(
        {(0, 1), (1, 0), (2, 2)}
    )


@given(
    st.sets(
        st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=4
    )
)
@settings(max_examples=60)
def test_closure_matches_naive_fixpoint(seeds):
    got = close_under(SQUAG, seeds)
    ref = set(seeds)
    while True:
        new = {
            tuple(SQUAG.rows[a][b] for a, b in zip(t1, t2))
            for t1 in ref
            for t2 in ref
        } - ref
        if not new:
            break
        ref |= new
    assert got == frozenset(ref)
    assert naive_invariant(got, SQUAG)


# ---------------------------------------------------------------------------
# Serialization


def test_format_frozen():
    inst = single_sorted_instance(
        SQUAG, ["x", "y"], [(["x", "y"], {(0, 0), (1, 1)})]
    )
    assert format_csp(inst) == (
        "sorts 1\n"
        "3\n"
        "0 2 1\n"
        "2 1 0\n"
        "1 0 2\n"
        "var x 0\n"
        "var y 0\n"
        "con x y\n"
        "t 0 0\n"
        "t 1 1\n"
        "end\n"
    )


def test_format_parse_roundtrip():
    rel = Relation(2, (0, 1), frozenset({(1, 2), (0, 0)}))
    inst = CSPInstance(("u", "v"), (MEET2, SQUAG), (0, 1), ((("u", "v"), rel),))
    assert parse_csp(format_csp(inst)) == inst


def test_parse_at_file(tmp_path):
    from cigroupoids.core import format_alg

    (tmp_path / "base.alg").write_text(format_alg(SQUAG))
    text = "sorts 1\n@file base.alg\nvar v 0\ncon v\nt 2\nend\n"
    inst = parse_csp(text, base_dir=str(tmp_path))
    assert inst.sorts == (SQUAG,)
    assert solve_brute(inst) == {"v": 2}


def test_parse_accepts_comments_and_blanks():
    text = "# instance\nsorts 1\n2\n0 0\n0 1\n\nvar v 0\n"
    inst = parse_csp(text)
    assert inst.sorts == (MEET2,)
    assert inst.variables == ("v",)


def test_parse_errors():
    with pytest.raises(ValueError):
        parse_csp("var v 0\n")
    with pytest.raises(ValueError):
        parse_csp("sorts 1\n2\n0 0\n0 1\nvar v 0\ncon v\nt 0\n")
    with pytest.raises(ValueError):
        parse_csp("sorts 1\n2\n0 0\n0 1\nfrobnicate\n")
