"""Acceptance criteria 1-6, each printed as one PASS/FAIL line in the terminal summary."""

import time

import numpy as np

from conftest import record
from geo3 import cli, spaces, submersion
from geo3.calculus import oracle_discrepancy
from geo3.geometry import FrameGeometry, verify_connection_tables

N = 100

# twenty (m, l) pairs, several per classification case
BCV_PAIRS = [
    (0.0, 0.0),
    (0.25, 1.0), (1.0, 2.0), (0.5625, -1.5),
    (1.0, 0.0), (0.5, 0.0), (2.0, 0.0),
    (-1.0, 0.0), (-0.5, 0.0), (-0.25, 0.0),
    (1.0, 1.0), (0.5, -1.0), (2.0, 1.0), (0.1, 3.0),
    (-1.0, 1.0), (-0.5, 2.0), (-0.25, -1.0),
    (0.0, 1.0), (0.0, -2.0), (0.0, 0.5),
]
BERGER_EPS = [0.3, 0.7, 1.0, 1.5]


def test_criterion_1_connection_and_curvature_tables():
    assert {spaces.classify_bcv(m, l) for m, l in BCV_PAIRS} == {f"({c})" for c in "abcdefg"}
    start = time.perf_counter()
    worst = 0.0
    for m, l in BCV_PAIRS:
        space = spaces.bcv_space(m, l)
        rep = verify_connection_tables(space, space.sample(N, 11))
        worst = max(worst, *rep.max_dev.values())
    for eps in BERGER_EPS:
        space = spaces.berger_space(eps)
        rep = verify_connection_tables(space, space.sample(N, 11))
        worst = max(worst, *rep.max_dev.values())
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 5.0
    record(1, "connection/curvature tables", ok, f"max dev {worst:.1e} <= 1e-9, {elapsed:.2f}s < 5s")
    assert ok


def test_criterion_2_curvature_identities_for_every_catalog_map():
    start = time.perf_counter()
    worst = {}
    for spec in spaces.catalog():
        rep = submersion.curvature_identity_residuals(spec, spec.sample(N, 21))
        worst[spec.label] = rep.rc_max
    elapsed = time.perf_counter() - start
    top = max(worst.values())
    ok = top <= 1e-7 and elapsed < 10.0 and len(worst) >= 11
    record(2, "RC identity suite", ok, f"{len(worst)} maps, max residual {top:.1e} <= 1e-7, {elapsed:.2f}s < 10s")
    assert ok, worst


def test_criterion_3_classification_reproduction():
    cases = set()
    bcv_dev = 0.0
    all_harmonic = True
    for m in (-1.0, -0.25, 0.0, 0.25, 1.0):
        for l in (0.0, 1.0, 2.0):
            spec = spaces.bcv_projection(m, l)
            pts = spec.sample(N, 31)
            assert submersion.validate_submersion(spec, pts).passed
            all_harmonic &= submersion.is_harmonic(spec, pts)
            bcv_dev = max(bcv_dev, float(np.abs(submersion.base_gauss_curvature(spec, pts) - 4 * m).max()))
            cases.add(spaces.classify_bcv(m, l))
    hopf_kn = hopf_s2 = 0.0
    for eps in (0.5, 1.0, 2.0):
        spec = spaces.hopf_map(eps)
        pts = spec.sample(N, 32)
        assert submersion.validate_submersion(spec, pts).passed
        all_harmonic &= submersion.is_harmonic(spec, pts)
        rep = submersion.identity_report(spec, pts)
        hopf_kn = max(hopf_kn, float(np.abs(rep.kn - 4).max()))
        hopf_s2 = max(hopf_s2, float(np.abs(rep.data.sigma**2 - eps**2).max()))
    ok = all_harmonic and bcv_dev <= 1e-7 and hopf_kn <= 1e-7 and hopf_s2 <= 1e-9 and len(cases) == 7
    record(
        3,
        "classification reproduction",
        ok,
        f"15 BCV cells over {len(cases)} cases, |K-4m| {bcv_dev:.1e}; Hopf |K-4| {hopf_kn:.1e}, |s2-e2| {hopf_s2:.1e}",
    )
    assert ok


def test_criterion_4_negative_controls():
    verdicts = {}
    for builder in (spaces.example22, spaces.nil_example23, spaces.cyl_remark21a):
        spec = builder()
        verdicts[spec.label] = submersion.is_harmonic(spec, spec.sample(N, 41))
    nil = spaces.nil_example23()
    pts = nil.sample(N, 41)
    rep = submersion.identity_report(nil, pts)
    x = pts[:, 0]
    closed = np.abs(x) / (1 + x * x)
    pointwise = float(np.abs(np.abs(rep.data.kappa1) - closed).max())
    sup_gap = abs(float(np.abs(rep.data.kappa1).max()) - 0.5)
    cyl = spaces.cyl_remark21a()
    rc0 = submersion.harmonic_system_residuals(cyl, cyl.sample(N, 41)).rc0_max
    ok = not any(verdicts.values()) and sup_gap <= 3e-2 and pointwise <= 3e-2 and rc0 <= 1e-8
    record(
        4,
        "negative controls",
        ok,
        f"all three non-harmonic={not any(verdicts.values())}, Nil max|k1| gap to 1/2 {sup_gap:.1e}, "
        f"Rmk2.1a RC0 {rc0:.1e} <= 1e-8",
    )
    assert ok, verdicts


def test_criterion_5_rigidity_solver():
    values = [-12.0, -4.0, -1.0, -0.75, -0.2, 0.2, 0.5, 1.0, 3.0, 10.0]
    polar = [spaces.vertical_direction_solver(R, 0.25).polar_only for R in values]
    flat = spaces.vertical_direction_solver(0.0, 0.25)
    ok = all(polar) and not flat.rigid
    record(5, "rigidity solver", ok, f"{sum(polar)}/10 nonzero R give exactly the poles; R=0 rigid={flat.rigid}")
    assert ok


def test_criterion_6_engine_self_consistency(tmp_path):
    fd = 0.0
    sym = 0.0
    for spec in spaces.catalog():
        pts = spec.sample(N, 61)
        for _, f, where in spec.oracle_fields():
            fd = max(fd, oracle_discrepancy(f, pts if where == "total" else spec.map_values(pts)))
        sym = max(sym, *FrameGeometry(submersion.natural_frame(spec), pts).curvature.symmetry_defects().values())
    outputs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert cli.main(["check", "--map", "nil.example23", "--seed", "5", "--out", str(out)]) == 0
        outputs.append(out.read_bytes())
    same = outputs[0] == outputs[1]
    ok = fd <= 1e-5 and sym <= 1e-8 and same
    record(6, "engine self-consistency", ok, f"FD gap {fd:.1e} <= 1e-5, symmetry/Bianchi {sym:.1e} <= 1e-8, byte-identical={same}")
    assert ok
