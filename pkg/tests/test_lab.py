import math

import numpy as np
import pytest

import oddkit
from oddkit import DecayModel, LatticeMatrix, SingularSectionError
from oddkit.lab import corpus, report_csv_rows

from conftest import offset_grid, single_diagonal


def test_model_validation_and_aliases():
    m = DecayModel("deterministic-envelope", 2.0)
    assert m.kind == "det"
    assert DecayModel("random-phase", 1.0).kind == "phase"
    assert DecayModel("random-magnitude", 1.0).kind == "mag"
    with pytest.raises(ValueError):
        DecayModel("gauss", 1.0)
    with pytest.raises(ValueError):
        DecayModel("det", -1.0)
    with pytest.raises(ValueError):
        DecayModel("det", 1.0, amplitude=0.0)


def test_generate_det_exact_formula():
    # deterministic envelope, c=1, r=2, W=4: A(k,l) = (1+|k-l|)^{-2}
    a = oddkit.generate(DecayModel("det", 2.0), 4)
    diff = offset_grid(1, 4)[..., 0]
    want = (1.0 + np.abs(diff)) ** -2.0
    assert np.allclose(a.to_dense(), want, rtol=0, atol=0)
    assert np.array_equal(a.side_diagonal(0), np.ones(9))


def test_generate_flat_envelope():
    a = oddkit.generate(DecayModel("det", 0.0, amplitude=0.7), 8)
    assert all(np.allclose(np.abs(arr), 0.7) for _, arr in a.diagonals())


def test_generate_envelope_bound_random_kinds():
    for kind in ("phase", "mag"):
        a = oddkit.generate(DecayModel(kind, 2.5, seed=3), 8)
        offs = a.offset_array()
        _, env = a.envelope()
        bound = (1.0 + np.sqrt((offs.astype(float) ** 2).sum(axis=1))) ** -2.5
        assert (env <= bound * (1 + 1e-12)).all()
        if kind == "phase":  # phases leave the magnitude exactly on the envelope
            for off, arr in a.diagonals():
                d = math.sqrt(sum(x * x for x in off))
                assert np.allclose(np.abs(arr), (1.0 + d) ** -2.5, rtol=1e-12)


def test_generate_determinism_and_band():
    m = DecayModel("phase", 2.0, seed=7)
    assert oddkit.generate(m, 6) == oddkit.generate(m, 6)
    full = oddkit.generate(m, 6)
    assert oddkit.bandwidth(full) == 13  # band defaults to 2W
    narrow = oddkit.generate(m, 6, band=2)
    assert oddkit.bandwidth(narrow) == 3
    assert len(oddkit.generate(DecayModel("det", 2.0), 64, band=64).offsets()) == 129
    with pytest.raises(ValueError):
        oddkit.generate(m, 0)
    with pytest.raises(ValueError):
        oddkit.generate(m, 6, band=20)


def test_generate_d2():
    a = oddkit.generate(DecayModel("det", 1.5), 3, dim=2)
    assert a.dim == 2
    got = a.side_diagonal((1, 2))
    want = (1.0 + math.sqrt(5.0)) ** -1.5
    assert np.allclose(got, want)


def test_corpus():
    mats = corpus(11, 8, count=9)
    assert len(mats) == 9
    kinds = {m.window for m in mats}
    assert kinds == {8}
    again = corpus(11, 8, count=9)
    assert all(x == y for x, y in zip(mats, again))
    assert any(not np.allclose(x.to_dense(), mats[0].to_dense()) for x in mats[1:])


def test_make_invertible():
    u = single_diagonal(6, 1)  # op norm exactly 1
    b = oddkit.make_invertible(u, margin=2.0)
    assert (b - 2.0 * LatticeMatrix.identity(1, 6)).allclose(u)
    smin = np.linalg.svd(b.to_dense(), compute_uv=False)[-1]
    assert smin >= 1.0 - 1e-12
    with pytest.raises(ValueError):
        oddkit.make_invertible(LatticeMatrix.zeros(1, 6))
    with pytest.raises(ValueError):
        oddkit.make_invertible(u, margin=1.0)


def test_invert_finite_section_basics():
    eye = LatticeMatrix.identity(1, 5)
    assert oddkit.invert_finite_section(eye).allclose(eye)
    d2 = 2.0 * eye
    assert oddkit.invert_finite_section(d2).allclose(0.5 * eye)
    with pytest.raises(SingularSectionError):
        oddkit.invert_finite_section(single_diagonal(5, 1))  # nilpotent shift


def test_invert_neumann_closed_form():
    w = 8
    b = 2.0 * LatticeMatrix.identity(1, w) + single_diagonal(w, 1)
    inv = oddkit.invert_finite_section(b)
    want = {}
    for m in range(0, 2 * w + 1):
        want[(m,)] = np.full(2 * w + 1 - m, (-1.0) ** m * 2.0 ** -(m + 1))
    assert inv.allclose(LatticeMatrix(1, w, want), rtol=1e-12, atol=1e-15)


def test_decay_profile_exact_power_law():
    a = oddkit.generate(DecayModel("det", 2.0), 32)
    prof = oddkit.decay_profile(a)
    assert abs(prof.exponent - 2.0) < 0.05
    assert prof.residual < 1e-10
    assert not prof.superpolynomial
    assert prof.n_fit >= 8
    assert len(prof.distances) == len(prof.envelope)


def test_decay_profile_rejects_degenerate():
    with pytest.raises(ValueError):
        oddkit.decay_profile(LatticeMatrix.identity(1, 8))
    with pytest.raises(ValueError):
        oddkit.decay_profile(LatticeMatrix.zeros(1, 8))


def test_decay_profile_flags_superpolynomial():
    w = 64
    b = 2.0 * LatticeMatrix.identity(1, w) + single_diagonal(w, 1)
    inv = oddkit.invert_finite_section(b)
    prof = oddkit.decay_profile(inv)
    assert prof.superpolynomial
    assert prof.exponent_outer > prof.exponent_inner


def test_spectral_invariance_report_schema():
    model = DecayModel("det", 2.0, seed=1)
    with pytest.raises(ValueError):
        oddkit.spectral_invariance_report(model, (8, 16))
    rep = oddkit.spectral_invariance_report(model, (16, 24))
    assert rep.windows == (16, 24)
    assert len(rep.cells) == 2
    assert len(rep.norm_specs) == 3  # default panel
    for cell in rep.cells:
        assert set(cell.norms) == set(rep.norm_specs)
        assert cell.condition <= 3.0 + 1e-9  # margin 2 bounds the condition
        assert cell.profile_inverse.exponent > 0
    assert set(rep.stability) == set(rep.norm_specs)
    assert all(len(v) == 1 for v in rep.stability.values())
    d = rep.to_dict()
    assert d["model"]["kind"] == "det"
    assert len(d["cells"]) == 2
    assert "exponent_inverse" in d["cells"][0]
    rows = report_csv_rows(rep)
    assert rows[0] == ("window", "spec", "forward", "inverse")
    assert len(rows) == 1 + 2 * 3


def test_spectral_invariance_report_threads_agree():
    model = DecayModel("phase", 2.5, seed=2)
    one = oddkit.spectral_invariance_report(model, (16, 20), norms=("jaffard:r=2.5",))
    two = oddkit.spectral_invariance_report(
        model, (16, 20), norms=("jaffard:r=2.5",), threads=2
    )
    assert one.to_dict() == two.to_dict()
