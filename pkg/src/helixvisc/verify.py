"""Self-contained property suites behind `helix-visc verify`.

Each check returns a named measured value and a tolerance; the CLI prints one
pass/fail line per check. The randomized fields use the provided seed, so a
seeded run is reproducible.
"""

from dataclasses import dataclass

import numpy as np

from .grid import Grid3, VectorField3, vector_from_values
from .helical import (apply_S_theta, curl_structure, decompose,
                      decomposition_div_U, decomposition_helicality,
                      helicality_report, swirl)
from .mollifier import MollifierConfig, mollify, verify_symmetry_commutation
from .reduction import (lift, lift_analytic, random_poly_gauss_trace, trace,
                        norm_correspondence, zero_swirl_family, zero_swirl_trace)
from .spectral import derivative, l2_norm, leray_project, norms


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float

    @property
    def ok(self):
        return self.measured <= self.tolerance


def _parse_grid(grid_arg):
    if not grid_arg:
        return Grid3(64, 64, 32)
    nx, ny, nz = (int(p) for p in grid_arg.split(","))
    return Grid3(nx, ny, nz)


def _random_helical(grid, rng, divergence_free=False, amplitude=0.5):
    tr = random_poly_gauss_trace(rng, deg=3, sigma=1.3,
                                 divergence_free=divergence_free)
    u = lift_analytic(tr, grid)
    peak = float(np.sqrt((u.data**2).sum(0)).max())
    return VectorField3(grid, u.data * (amplitude / peak), "phys"), tr


def run_property_suites(seed=0, grid=None):
    g = _parse_grid(grid)
    rng = np.random.default_rng(seed)
    checks = []

    # group law: S_a o S_b = S_{a+b}
    p = (0.73, -1.21, 0.4)
    a, b = 0.3, 0.5
    lhs = apply_S_theta(apply_S_theta(p, b), a)
    rhs = apply_S_theta(p, a + b)
    checks.append(Check("group-law", float(np.hypot(*(np.subtract(lhs, rhs)[:2])))
                        + abs(lhs[2] - rhs[2]), 1e-12))

    v, _ = _random_helical(g, rng)
    rep = helicality_report(v)
    checks.append(Check("helicality-pde(lifted)", rep.residual_pde, 1e-8))
    checks.append(Check("helicality-group(lifted)", rep.residual_group, 1e-6))

    dec = decompose(v)
    uxi = np.abs(dec.U.data[0] * g.Y - dec.U.data[1] * g.X + dec.U.data[2]).max()
    checks.append(Check("decompose-U.xi", float(uxi), 1e-12))
    recon = dec.reconstruct()
    rel = l2_norm(g, recon.data - v.data) / l2_norm(g, v.data)
    checks.append(Check("decompose-reconstruct", rel, 1e-14))

    vdf, _ = _random_helical(g, rng, divergence_free=True)
    decdf = decompose(vdf)
    checks.append(Check("decompose-divU",
                        decomposition_div_U(decdf, vdf) / l2_norm(g, vdf.data), 1e-10))
    res_U, res_S = decomposition_helicality(decdf, vdf)
    base = helicality_report(vdf).residual_pde
    checks.append(Check("decompose-hel-U", abs(res_U - base), 1e-8))

    curl, recon_c, _ = curl_structure(v)
    rel = l2_norm(g, curl.data - recon_c.data) / l2_norm(g, curl.data)
    checks.append(Check("curl-structure", rel, 1e-10))

    # Leray projector
    w = rng.standard_normal((3,) + g.shape_phys)
    pv = leray_project(vector_from_values(g, *w))
    nr = norms(pv)
    checks.append(Check("leray-divfree", nr.div_l2 / max(nr.l2, 1e-300), 1e-12))
    pv2 = leray_project(pv)
    checks.append(Check("leray-idempotent",
                        l2_norm(g, pv2.data - pv.data) / max(nr.l2, 1e-300), 1e-13))

    # Helmholtz split
    nv = norms(vector_from_values(g, *rng.standard_normal((3,) + g.shape_phys)))
    helm = abs(nv.h1_seminorm**2 - nv.div_l2**2 - nv.curl_l2**2) / nv.h1_seminorm**2
    checks.append(Check("helmholtz-identity", helm, 1e-12))

    # mollifier
    cfg = MollifierConfig(0.3)
    const = vector_from_values(g, *(np.ones(g.shape_phys) * np.array([1.0, -2.0, 0.5])[:, None, None, None]))
    jc = mollify(const, cfg)
    checks.append(Check("mollify-constant", float(np.abs(jc.data - const.data).max()), 1e-14))
    f = v.component(0)
    a1 = mollify(derivative(f, "x"), cfg)
    a2 = derivative(mollify(f, cfg), "x")
    checks.append(Check("mollify-deriv-commute",
                        l2_norm(g, a1.data - a2.data) / max(l2_norm(g, a1.data), 1e-300), 1e-13))
    checks.append(Check("mollify-nonexpansive",
                        max(0.0, l2_norm(g, mollify(v, cfg).data) - l2_norm(g, v.data)), 1e-15))
    checks.append(Check("mollify-S-commute", verify_symmetry_commutation(v, cfg), 1e-6))

    # reduction round trip and norm correspondence
    _, basis = zero_swirl_family(2, 1.3)
    tr0 = zero_swirl_trace(2, 1.3, rng.standard_normal(basis.shape[0]))
    w2 = tr0.sample(g)
    scale = 1.0 / max(np.abs(np.concatenate([c.ravel() for c in w2.components()])).max(), 1e-300)
    w2 = type(w2)(w2.n1, w2.n2, w2.L, w2.w1 * scale, w2.w2 * scale, w2.w3 * scale)
    u_l = lift(w2, g)
    back = trace(u_l, np.pi / 4)
    num = np.sqrt(sum(np.sum((x - y)**2) for x, y in zip(back.components(), w2.components())))
    den = np.sqrt(sum(np.sum(y**2) for y in w2.components()))
    checks.append(Check("reduction-roundtrip", float(num / den), 1e-6))
    wn, un = norm_correspondence(w2, u_l, p=2)
    checks.append(Check("norm-correspondence-p2", abs(wn - un) / wn, 1e-8))
    wn4, un4 = norm_correspondence(w2, u_l, p=4)
    checks.append(Check("norm-correspondence-p4", abs(wn4 - un4) / wn4, 1e-8))

    return checks
