import random

import numpy as np
import pytest

from weilrep.heisenberg import (SchrodingerModel, Submodule, dual_subgroup,
                                heis_inv, heis_mul, intertwiner,
                                op_basis_gram, standard_selfdual)
from weilrep.symplectic import SympModule


def test_group_law_associative_exhaustive():
    spec = SympModule.standard(3, 1, 1, 1)
    H = [(w, t) for w in spec.vectors() for t in range(spec.modulus)]
    for h1 in H:
        for h2 in H:
            h12 = heis_mul(spec, h1, h2)
            for h3 in H[::7]:
                assert heis_mul(spec, h12, h3) \
                    == heis_mul(spec, h1, heis_mul(spec, h2, h3))


def test_inverse():
    spec = SympModule.standard(3, 1, 0, 1)
    random.seed(0)
    vecs = list(spec.vectors())
    ident = (spec.zero(), 0)
    for _ in range(30):
        h = (random.choice(vecs), random.randrange(9))
        assert heis_mul(spec, h, heis_inv(spec, h)) == ident


def test_dual_subgroup_examples():
    spec = SympModule.standard(3, 1, 0, 1)
    zero = Submodule.from_gens(spec, [])
    assert len(dual_subgroup(zero)) == spec.size()
    whole = Submodule(spec, list(spec.vectors()))
    assert dual_subgroup(whole).elements == [spec.zero()]
    A = standard_selfdual(spec)
    assert sorted(dual_subgroup(A).elements) == A.elements


def test_standard_selfdual_sizes():
    for (p, r, l, n, size) in ((3, 1, 0, 1, 9), (3, 1, 1, 1, 3),
                               (3, 2, 1, 1, 27)):
        spec = SympModule.standard(p, r, l, n)
        A = standard_selfdual(spec)
        assert len(A) == size
        assert len(A) ** 2 == spec.size()


def test_schrodinger_dimension_and_center():
    spec = SympModule.standard(3, 1, 0, 1)
    m = SchrodingerModel(spec, standard_selfdual(spec))
    assert m.dim == 9
    for t in range(9):
        assert np.allclose(m.rho(spec.zero(), t),
                           m.psi(t) * np.eye(9), atol=1e-9)


def test_schrodinger_is_homomorphism():
    spec = SympModule.standard(3, 1, 0, 1)
    m = SchrodingerModel(spec, standard_selfdual(spec))
    random.seed(1)
    vecs = list(spec.vectors())
    for _ in range(60):
        h1 = (random.choice(vecs), random.randrange(9))
        h2 = (random.choice(vecs), random.randrange(9))
        prod_op = m.rho(*h1) @ m.rho(*h2)
        assert np.allclose(prod_op, m.rho(*heis_mul(spec, h1, h2)), atol=1e-9)


def test_irreducibility_character_norm():
    for (p, r, l, n) in ((3, 1, 0, 0), (3, 1, 1, 1)):
        spec = SympModule.standard(p, r, l, n)
        m = SchrodingerModel(spec, standard_selfdual(spec))
        assert abs(m.character_norm() - 1) < 1e-9


def test_rejects_non_selfdual():
    spec = SympModule.standard(3, 1, 0, 1)
    small = Submodule.from_box(spec, (1, 2))   # 3Z/9 x {0}: too small
    with pytest.raises(ValueError):
        SchrodingerModel(spec, small)


def test_stone_von_neumann_character_match():
    """Models induced from different self-dual subgroups agree pointwise."""
    spec = SympModule.standard(3, 1, 0, 1)
    mA = SchrodingerModel(spec, standard_selfdual(spec))
    mB = SchrodingerModel(spec, Submodule.from_box(spec, (2, 0)))
    for w in spec.vectors():
        ta = np.trace(mA.rho(w, 0))
        tb = np.trace(mB.rho(w, 0))
        assert abs(ta - tb) < 1e-9


def test_intertwiner_identity_case():
    spec = SympModule.standard(3, 1, 0, 1)
    mA = SchrodingerModel(spec, standard_selfdual(spec))
    assert np.allclose(intertwiner(mA, mA), np.eye(mA.dim), atol=1e-9)


def test_intertwiner_between_models():
    spec = SympModule.standard(3, 1, 0, 1)
    mA = SchrodingerModel(spec, standard_selfdual(spec))
    mB = SchrodingerModel(spec, Submodule.from_box(spec, (2, 0)))
    I = intertwiner(mB, mA)
    assert np.abs(I).max() > 0
    random.seed(2)
    vecs = list(spec.vectors())
    for _ in range(50):
        h = (random.choice(vecs), random.randrange(9))
        assert np.allclose(I @ mA.rho(*h), mB.rho(*h) @ I, atol=1e-8)
    # composing the two raw intertwiners is a positive scalar (Schur)
    C = intertwiner(mA, mB) @ I
    lam = C[0, 0]
    assert np.allclose(C, lam * np.eye(mA.dim), atol=1e-8)
    assert lam.real > 0 and abs(lam.imag) < 1e-9


def test_conjugated_model_intertwiner_exists():
    """For symplectic g, the model induced from g.A admits a nonzero
    intertwiner from the A-model (the covariance hook)."""
    from weilrep.symplectic import symplectic_group
    spec = SympModule.standard(3, 1, 0, 1)
    A = standard_selfdual(spec)
    mA = SchrodingerModel(spec, A)
    G = symplectic_group(spec)
    random.seed(3)
    vecs = list(spec.vectors())
    for g in random.sample(G.elements, 5):
        gA = Submodule(spec, [g.act(a) for a in A.elements])
        mg = SchrodingerModel(spec, gA)
        I = intertwiner(mg, mA)
        assert np.abs(I).max() > 1e-9
        for _ in range(10):
            h = (random.choice(vecs), random.randrange(9))
            assert np.allclose(I @ mA.rho(*h), mg.rho(*h) @ I, atol=1e-8)


def test_operator_basis_gram():
    spec = SympModule.standard(3, 1, 1, 1)
    m = SchrodingerModel(spec, standard_selfdual(spec))
    G = op_basis_gram(m)
    vecs = sorted(spec.vectors())
    for i, v in enumerate(vecs):
        assert abs(G[i, i] - m.dim) < 1e-9
        for j in range(len(vecs)):
            if i != j:
                assert abs(G[i, j]) < 1e-9
    assert np.linalg.matrix_rank(G) == spec.size()


def test_operator_basis_gram_big():
    spec = SympModule.standard(3, 1, 0, 1)
    m = SchrodingerModel(spec, standard_selfdual(spec))
    G = op_basis_gram(m)
    off = G - m.dim * np.eye(spec.size())
    assert np.abs(off).max() < 1e-9
    assert np.linalg.matrix_rank(G) == spec.size()
