//! Levi-Civita curvature from metric 2-jets.
//!
//! Derivatives along the Killing coordinates (indices 0 and 1) are zero by
//! construction. Conventions: `R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}`,
//! `R_{bd} = R^a_{bad}`, and `Δ_g = −g^{ab} ∇_a ∇_b`.

use nalgebra::{Matrix3, Matrix4, SymmetricEigen};

use crate::error::{Error, Result};
use crate::jets::{Jet2, Var};
use crate::tod::{MetricJet, TwoFormJet};

pub type T2 = [[f64; 4]; 4];
pub type T3 = [[[f64; 4]; 4]; 4];
pub type T4 = [[[[f64; 4]; 4]; 4]; 4];
type JM = [[Jet2<f64>; 4]; 4];

#[derive(Clone, Debug, PartialEq)]
pub struct CurvaturePack {
    /// `Γ^a_{bc}`.
    pub christoffel: T3,
    /// `R_{abcd}`, all indices down.
    pub riemann: T4,
    pub ricci: T2,
    pub scalar: f64,
    pub weyl: T4,
    /// `√det g`.
    pub volume: f64,
    pub g: T2,
    pub ginv: T2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeylSplit {
    pub sd_matrix: [[f64; 3]; 3],
    pub asd_matrix: [[f64; 3]; 3],
    /// Ascending eigenvalues.
    pub sd_eigenvalues: [f64; 3],
    pub asd_eigenvalues: [f64; 3],
    /// Simple eigenvalue of the self-dual part; `None` when no pair is degenerate.
    pub lambda: Option<f64>,
    /// Gap of the closest eigenvalue pair relative to the largest magnitude.
    pub pair_defect: f64,
}

pub const PAIR_TOL: f64 = 1e-6;

fn d(j: &Jet2<f64>, k: usize) -> Jet2<f64> {
    match k {
        2 => j.partial(Var::First),
        3 => j.partial(Var::Second),
        _ => Jet2::constant(0.0, j.order().saturating_sub(1)),
    }
}

fn zeros(order: usize) -> JM {
    std::array::from_fn(|_| std::array::from_fn(|_| Jet2::constant(0.0, order)))
}

fn jm_mul(a: &JM, b: &JM, order: usize) -> JM {
    let mut out = zeros(order);
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = Jet2::constant(0.0, order);
            for k in 0..4 {
                acc = acc + &a[i][k] * &b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

fn to_na(m: &T2) -> Matrix4<f64> {
    Matrix4::from_fn(|a, b| m[a][b])
}

fn from_na(m: &Matrix4<f64>) -> T2 {
    std::array::from_fn(|a| std::array::from_fn(|b| m[(a, b)]))
}

/// Inverse metric as jets: `(G0 + E)^{-1} = Σ_k (−G0^{-1} E)^k G0^{-1}`.
pub fn inverse_metric_jets(metric: &MetricJet) -> Result<JM> {
    let order = metric.order();
    let g0 = metric.values();
    let inv = to_na(&g0)
        .try_inverse()
        .ok_or_else(|| Error::DegenerateMetric("metric is singular".into()))?;
    let inv0 = from_na(&inv);
    let mut x = zeros(order);
    let mut cinv = zeros(order);
    for a in 0..4 {
        for b in 0..4 {
            cinv[a][b] = Jet2::constant(inv0[a][b], order);
            let mut acc = Jet2::constant(0.0, order);
            for k in 0..4 {
                acc = acc + metric.get(k, b).with_value(0.0).mul_s(-inv0[a][k]);
            }
            x[a][b] = acc;
        }
    }
    let mut sum = zeros(order);
    let mut term = zeros(order);
    for a in 0..4 {
        sum[a][a] = Jet2::constant(1.0, order);
        term[a][a] = Jet2::constant(1.0, order);
    }
    for _ in 0..order {
        term = jm_mul(&term, &x, order);
        for a in 0..4 {
            for b in 0..4 {
                sum[a][b] = &sum[a][b] + &term[a][b];
            }
        }
    }
    Ok(jm_mul(&sum, &cinv, order))
}

/// Christoffel symbols `Γ^a_{bc}` as jets of order `metric.order() − 1`.
pub fn christoffel_jets(metric: &MetricJet, ginv: &JM) -> Vec<Vec<Vec<Jet2<f64>>>> {
    let order = metric.order() - 1;
    let dg: Vec<Vec<Vec<Jet2<f64>>>> = (0..4)
        .map(|k| (0..4).map(|a| (0..4).map(|b| d(metric.get(a, b), k)).collect()).collect())
        .collect();
    (0..4)
        .map(|a| {
            (0..4)
                .map(|b| {
                    (0..4)
                        .map(|c| {
                            let mut acc = Jet2::constant(0.0, order);
                            for e in 0..4 {
                                let s = &(&dg[b][e][c] + &dg[c][e][b]) - &dg[e][b][c];
                                acc = acc + &ginv[a][e].truncate(order) * &s;
                            }
                            acc.mul_s(0.5)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn curvature_pack(metric: &MetricJet) -> Result<CurvaturePack> {
    if metric.order() < 2 {
        return Err(Error::Precondition("curvature needs metric 2-jets".into()));
    }
    let g = metric.values();
    let det = to_na(&g).determinant();
    if !(det > 0.0) {
        return Err(Error::DegenerateMetric(format!("det g = {det:e}")));
    }
    let ginvj = inverse_metric_jets(metric)?;
    let ginv: T2 = std::array::from_fn(|a| std::array::from_fn(|b| ginvj[a][b].value()));
    let gam = christoffel_jets(metric, &ginvj);
    let gv: T3 = std::array::from_fn(|a| std::array::from_fn(|b| std::array::from_fn(|c| gam[a][b][c].value())));
    let dgam = |a: usize, b: usize, c: usize, k: usize| -> f64 {
        match k {
            2 => gam[a][b][c].get(1, 0),
            3 => gam[a][b][c].get(0, 1),
            _ => 0.0,
        }
    };
    let mut rup = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for dd in 0..4 {
                    let mut v = dgam(a, dd, b, c) - dgam(a, c, b, dd);
                    for e in 0..4 {
                        v += gv[a][c][e] * gv[e][dd][b] - gv[a][dd][e] * gv[e][c][b];
                    }
                    rup[a][b][c][dd] = v;
                }
            }
        }
    }
    let mut riem = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for dd in 0..4 {
                    riem[a][b][c][dd] = (0..4).map(|e| g[a][e] * rup[e][b][c][dd]).sum();
                }
            }
        }
    }
    let ricci: T2 = std::array::from_fn(|b| std::array::from_fn(|dd| (0..4).map(|a| rup[a][b][a][dd]).sum()));
    let scalar: f64 = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).map(|(a, b)| ginv[a][b] * ricci[a][b]).sum();
    let mut weyl = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for dd in 0..4 {
                    weyl[a][b][c][dd] = riem[a][b][c][dd]
                        - 0.5
                            * (g[a][c] * ricci[b][dd] - g[a][dd] * ricci[b][c] - g[b][c] * ricci[a][dd]
                                + g[b][dd] * ricci[a][c])
                        + scalar / 6.0 * (g[a][c] * g[b][dd] - g[a][dd] * g[b][c]);
                }
            }
        }
    }
    Ok(CurvaturePack {
        christoffel: gv,
        riemann: riem,
        ricci,
        scalar,
        weyl,
        volume: det.sqrt(),
        g,
        ginv,
    })
}

/// Orthonormal frame by Gram–Schmidt on the coordinate basis in chart order;
/// row `a` holds the coordinate components of `e_a`. A negative orientation
/// flips `e_3`.
pub fn orthonormal_frame(g: &T2, orientation: f64) -> T2 {
    let mut e = [[0.0; 4]; 4];
    let ip = |u: &[f64; 4], v: &[f64; 4]| -> f64 {
        (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).map(|(a, b)| g[a][b] * u[a] * v[b]).sum()
    };
    for k in 0..4 {
        let mut v = [0.0; 4];
        v[k] = 1.0;
        for j in 0..k {
            let p = ip(&v, &e[j]);
            for m in 0..4 {
                v[m] -= p * e[j][m];
            }
        }
        let n = ip(&v, &v).sqrt();
        for m in 0..4 {
            e[k][m] = v[m] / n;
        }
    }
    if orientation < 0.0 {
        for m in 0..4 {
            e[3][m] = -e[3][m];
        }
    }
    e
}

pub fn frame_t2(t: &T2, e: &T2) -> T2 {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut s = 0.0;
            for m in 0..4 {
                for n in 0..4 {
                    s += e[a][m] * e[b][n] * t[m][n];
                }
            }
            s
        })
    })
}

pub fn frame_t3(t: &T3, e: &T2) -> T3 {
    let mut x = *t;
    for slot in 0..3 {
        let mut y = [[[0.0; 4]; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let idx = [i, j, k];
                    let mut s = 0.0;
                    for m in 0..4 {
                        let mut id2 = idx;
                        id2[slot] = m;
                        s += e[idx[slot]][m] * x[id2[0]][id2[1]][id2[2]];
                    }
                    y[i][j][k] = s;
                }
            }
        }
        x = y;
    }
    x
}

pub fn frame_t4(t: &T4, e: &T2) -> T4 {
    let mut x = *t;
    for slot in 0..4 {
        let mut y = [[[[0.0; 4]; 4]; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let idx = [i, j, k, l];
                        let mut s = 0.0;
                        for m in 0..4 {
                            let mut id2 = idx;
                            id2[slot] = m;
                            s += e[idx[slot]][m] * x[id2[0]][id2[1]][id2[2]][id2[3]];
                        }
                        y[i][j][k][l] = s;
                    }
                }
            }
        }
        x = y;
    }
    x
}

pub fn norm_t2(t: &T2, g: &T2) -> f64 {
    let f = frame_t2(t, &orthonormal_frame(g, 1.0));
    f.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm_t3(t: &T3, g: &T2) -> f64 {
    let f = frame_t3(t, &orthonormal_frame(g, 1.0));
    f.iter().flatten().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm_t4(t: &T4, g: &T2) -> f64 {
    let f = frame_t4(t, &orthonormal_frame(g, 1.0));
    f.iter().flatten().flatten().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

impl CurvaturePack {
    pub fn riemann_norm(&self) -> f64 {
        norm_t4(&self.riemann, &self.g)
    }
    pub fn ricci_norm(&self) -> f64 {
        norm_t2(&self.ricci, &self.g)
    }
    pub fn weyl_norm(&self) -> f64 {
        norm_t4(&self.weyl, &self.g)
    }

    /// `‖Ric‖ / (‖Riem‖ + scale⁻²)`.
    pub fn ricci_ratio(&self, scale: f64) -> f64 {
        self.ricci_norm() / (self.riemann_norm() + scale.powi(-2))
    }

    /// Largest violation of the algebraic symmetries of `R_{abcd}` relative to its norm.
    pub fn symmetry_defect(&self) -> f64 {
        let r = &self.riemann;
        let mut m: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        m = m
                            .max((r[a][b][c][d] + r[b][a][c][d]).abs())
                            .max((r[a][b][c][d] + r[a][b][d][c]).abs())
                            .max((r[a][b][c][d] - r[c][d][a][b]).abs())
                            .max((r[a][b][c][d] + r[a][c][d][b] + r[a][d][b][c]).abs());
                    }
                }
            }
        }
        let scale = r.iter().flatten().flatten().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
        m / scale.max(1e-300)
    }

    /// Largest trace `g^{ac} C_{abcd}` relative to the largest Weyl component.
    pub fn weyl_trace_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for b in 0..4 {
            for d in 0..4 {
                let t: f64 = (0..4)
                    .flat_map(|a| (0..4).map(move |c| (a, c)))
                    .map(|(a, c)| self.ginv[a][c] * self.weyl[a][b][c][d])
                    .sum();
                m = m.max(t.abs());
            }
        }
        let scale = self.weyl.iter().flatten().flatten().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
        m / scale.max(1e-300)
    }
}

/// Frame components of the basis `e0∧e1 ± e2∧e3`, `e1∧e2 ± e0∧e3`, `e1∧e3 ∓ e0∧e2`.
pub fn frame_basis(sign: f64) -> [[[f64; 4]; 4]; 3] {
    let mut w = [[[0.0; 4]; 4]; 3];
    let mut put = |i: usize, a: usize, b: usize, v: f64| {
        w[i][a][b] += v;
        w[i][b][a] -= v;
    };
    put(0, 0, 1, 1.0);
    put(0, 2, 3, sign);
    put(1, 1, 2, 1.0);
    put(1, 0, 3, sign);
    put(2, 1, 3, 1.0);
    put(2, 0, 2, -sign);
    w
}

fn project(cf: &T4, basis: &[[[f64; 4]; 4]; 3]) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        for d in 0..4 {
                            s += cf[a][b][c][d] * basis[i][a][b] * basis[j][c][d];
                        }
                    }
                }
            }
            s / 8.0
        })
    })
}

fn eigen(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let mm = Matrix3::from_fn(|a, b| 0.5 * (m[a][b] + m[b][a]));
    let mut ev: Vec<f64> = SymmetricEigen::new(mm).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    [ev[0], ev[1], ev[2]]
}

fn select_lambda(ev: &[f64; 3]) -> (Option<f64>, f64) {
    let scale = ev.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return (Some(0.0), 0.0);
    }
    let (g01, g12) = (ev[1] - ev[0], ev[2] - ev[1]);
    let (gap, simple) = if g01 <= g12 { (g01, ev[2]) } else { (g12, ev[0]) };
    let defect = gap / scale;
    (if defect <= PAIR_TOL { Some(simple) } else { None }, defect)
}

pub fn weyl_split(pack: &CurvaturePack, orientation: f64) -> WeylSplit {
    let e = orthonormal_frame(&pack.g, orientation);
    let cf = frame_t4(&pack.weyl, &e);
    let sd = project(&cf, &frame_basis(1.0));
    let asd = project(&cf, &frame_basis(-1.0));
    let (sde, asde) = (eigen(&sd), eigen(&asd));
    let (lambda, pair_defect) = select_lambda(&sde);
    WeylSplit {
        sd_matrix: sd,
        asd_matrix: asd,
        sd_eigenvalues: sde,
        asd_eigenvalues: asde,
        lambda,
        pair_defect,
    }
}

/// `⟨ω̂, 𝒲 ω̂⟩` for a 2-form normalised to `|ω̂|² = 4`.
pub fn weyl_expectation(pack: &CurvaturePack, form: &T2) -> f64 {
    let e = orthonormal_frame(&pack.g, 1.0);
    let cf = frame_t4(&pack.weyl, &e);
    // frame components of a covariant 2-form use the frame vectors directly
    let wf = frame_t2(form, &e);
    let n2: f64 = wf.iter().flatten().map(|v| v * v).sum();
    let mut s = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    s += cf[a][b][c][d] * wf[a][b] * wf[c][d];
                }
            }
        }
    }
    s / 8.0 * 4.0 / n2
}

/// Hodge dual of a 2-form (values) for the given chart orientation.
pub fn hodge_star(g: &T2, orientation: f64, form: &T2) -> T2 {
    let e = orthonormal_frame(g, orientation);
    let wf = frame_t2(form, &e);
    let mut sf = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    sf[a][b] += 0.5 * levi_civita(a, b, c, d) * wf[c][d];
                }
            }
        }
    }
    // back to coordinates: ω_μν = θ^a_μ θ^b_ν ω_ab with θ the dual coframe
    let inv = to_na(&e).try_inverse().expect("frame is invertible");
    frame_t2(&sf, &from_na(&inv))
}

pub fn levi_civita(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let p = [a, b, c, d];
    for i in 0..4 {
        for j in (i + 1)..4 {
            if p[i] == p[j] {
                return 0.0;
            }
        }
    }
    let mut s = 1.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

pub fn scalar_laplacian(metric: &MetricJet, field: &Jet2<f64>) -> Result<f64> {
    if field.order() < 2 {
        return Err(Error::Precondition("field needs 2-jets".into()));
    }
    let pack = curvature_pack(metric)?;
    let df = |k: usize| match k {
        2 => field.get(1, 0),
        3 => field.get(0, 1),
        _ => 0.0,
    };
    let ddf = |a: usize, b: usize| match (a, b) {
        (2, 2) => field.get(2, 0),
        (3, 3) => field.get(0, 2),
        (2, 3) | (3, 2) => field.get(1, 1),
        _ => 0.0,
    };
    let mut s = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let mut hess = ddf(a, b);
            for c in 0..4 {
                hess -= pack.christoffel[c][a][b] * df(c);
            }
            s += pack.ginv[a][b] * hess;
        }
    }
    Ok(-s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CkyResidual {
    /// Pointwise norm of `L(Z)`.
    pub norm: f64,
    /// `‖L(Z)‖ / ‖∇Z‖`.
    pub relative: f64,
    pub grad_norm: f64,
    /// `ξ_a = (1/3) ∇^b Z_{ab}`.
    pub xi_lower: [f64; 4],
    pub xi: [f64; 4],
}

type J3 = Vec<Vec<Vec<Jet2<f64>>>>;

fn covariant_dz(metric: &MetricJet, z: &TwoFormJet) -> Result<(J3, JM, usize)> {
    let ginv = inverse_metric_jets(metric)?;
    let gam = christoffel_jets(metric, &ginv);
    let order = (z.order() - 1).min(metric.order() - 1);
    let nz: J3 = (0..4)
        .map(|a| {
            (0..4)
                .map(|b| {
                    (0..4)
                        .map(|c| {
                            let mut v = d(z.get(b, c), a).truncate(order);
                            for e in 0..4 {
                                v = v - &(&gam[e][a][b].truncate(order) * &z.get(e, c).truncate(order));
                                v = v - &(&gam[e][a][c].truncate(order) * &z.get(b, e).truncate(order));
                            }
                            v
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok((nz, ginv, order))
}

fn xi_jets(nz: &J3, ginv: &JM, order: usize) -> Vec<Jet2<f64>> {
    (0..4)
        .map(|a| {
            let mut s = Jet2::constant(0.0, order);
            for b in 0..4 {
                for dd in 0..4 {
                    s = s + &ginv[b][dd].truncate(order) * &nz[dd][a][b];
                }
            }
            s.mul_s(1.0 / 3.0)
        })
        .collect()
}

pub fn cky_residual(metric: &MetricJet, z: &TwoFormJet) -> Result<CkyResidual> {
    if z.order() < 1 || metric.order() < 2 {
        return Err(Error::Precondition("CKY operator needs Z 1-jets and metric 2-jets".into()));
    }
    let g = metric.values();
    let (nz, ginv, order) = covariant_dz(metric, z)?;
    let xi_l = xi_jets(&nz, &ginv, order);
    let xl: [f64; 4] = std::array::from_fn(|a| xi_l[a].value());
    let nzv: T3 = std::array::from_fn(|a| std::array::from_fn(|b| std::array::from_fn(|c| nz[a][b][c].value())));
    let mut l = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let anti = (nzv[a][b][c] + nzv[b][c][a] + nzv[c][a][b]) / 3.0;
                l[a][b][c] = nzv[a][b][c] - anti + g[a][b] * xl[c] - g[a][c] * xl[b];
            }
        }
    }
    let norm = norm_t3(&l, &g);
    let grad_norm = norm_t3(&nzv, &g);
    let xi: [f64; 4] = std::array::from_fn(|a| (0..4).map(|b| ginv[a][b].value() * xl[b]).sum());
    Ok(CkyResidual {
        norm,
        relative: norm / grad_norm.max(1e-300),
        grad_norm,
        xi_lower: xl,
        xi,
    })
}

/// `‖∇_(a ξ_b)‖ / ‖∇ξ‖` for the vector extracted from `Z`; needs `Z` 2-jets.
pub fn killing_defect(metric: &MetricJet, z: &TwoFormJet) -> Result<f64> {
    if z.order() < 2 {
        return Err(Error::Precondition("Killing check needs Z 2-jets".into()));
    }
    let (nz, ginv, order) = covariant_dz(metric, z)?;
    let xi = xi_jets(&nz, &ginv, order);
    let pack = curvature_pack(metric)?;
    let dxi = |a: usize, b: usize| match a {
        2 => xi[b].get(1, 0),
        3 => xi[b].get(0, 1),
        _ => 0.0,
    };
    let mut full = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            full[a][b] = dxi(a, b) - (0..4).map(|c| pack.christoffel[c][a][b] * xi[c].value()).sum::<f64>();
        }
    }
    let sym: T2 = std::array::from_fn(|a| std::array::from_fn(|b| 0.5 * (full[a][b] + full[b][a])));
    Ok(norm_t2(&sym, &pack.g) / norm_t2(&full, &pack.g).max(1e-300))
}

/// Full contraction `Z_{ab} Z^{ab}`.
pub fn form_norm2(g: &T2, z: &T2) -> f64 {
    let f = frame_t2(z, &orthonormal_frame(g, 1.0));
    f.iter().flatten().map(|v| v * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tod::eh_closed_form;

    /// Flat metric in spherical-type coordinates: dr² + r²dθ² + (r sinθ)²(dφ² + ...)
    /// written as a 4D metric with Killing coordinates (u, φ):
    /// g = du² + r² sin²θ dφ² + dr² + r² dθ².
    fn flat_r3_times_line(r: f64, th: f64) -> MetricJet {
        let o = 2;
        let rj = Jet2::seed(Var::First, r, o);
        let tj = Jet2::seed(Var::Second, th, o);
        let z = Jet2::constant(0.0, o);
        let st = tj.sin();
        let g = [
            [Jet2::constant(1.0, o), z.clone(), z.clone(), z.clone()],
            [z.clone(), &(&rj * &rj) * &(&st * &st), z.clone(), z.clone()],
            [z.clone(), z.clone(), Jet2::constant(1.0, o), z.clone()],
            [z.clone(), z.clone(), z.clone(), &rj * &rj],
        ];
        MetricJet::from_upper(["u", "phi", "r", "theta"], (r, th), g)
    }

    /// Round S² of radius r times a flat plane: scalar curvature 2/r².
    fn sphere_times_plane(r: f64, th: f64) -> MetricJet {
        let o = 2;
        let tj = Jet2::seed(Var::Second, th, o);
        let z = Jet2::constant(0.0, o);
        let st = tj.sin();
        let g = [
            [Jet2::constant(1.0, o), z.clone(), z.clone(), z.clone()],
            [z.clone(), (&st * &st).mul_s(r * r), z.clone(), z.clone()],
            [z.clone(), z.clone(), Jet2::constant(1.0, o), z.clone()],
            [z.clone(), z.clone(), z.clone(), Jet2::constant(r * r, o)],
        ];
        MetricJet::from_upper(["u", "phi", "x", "theta"], (0.0, th), g)
    }

    #[test]
    fn flat_space_has_no_curvature() {
        let p = curvature_pack(&flat_r3_times_line(1.3, 0.7)).unwrap();
        assert!(p.riemann.iter().flatten().flatten().flatten().all(|v| v.abs() < 1e-12));
        let w = weyl_split(&p, 1.0);
        assert!(w.sd_eigenvalues.iter().chain(&w.asd_eigenvalues).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn sphere_scalar_curvature() {
        let p = curvature_pack(&sphere_times_plane(2.0, 1.1)).unwrap();
        assert!((p.scalar - 2.0 / 4.0).abs() < 1e-12);
        assert!(p.symmetry_defect() < 1e-10);
        assert!(p.weyl_trace_defect() < 1e-10);
    }

    #[test]
    fn eguchi_hanson_closed_form_is_ricci_flat() {
        for &(r, th) in &[(1.3, 0.7), (2.5, 2.0), (1.01, 1.5)] {
            let p = curvature_pack(&eh_closed_form(1.0, r, th).unwrap()).unwrap();
            assert!(p.riemann_norm() > 1e-3);
            assert!(p.ricci_norm() < 1e-8 * p.riemann_norm());
            assert!(p.symmetry_defect() < 1e-10);
            assert!(p.weyl_trace_defect() < 1e-10);
            let w = weyl_split(&p, 1.0);
            let tr: f64 = (0..3).map(|i| w.sd_matrix[i][i]).sum();
            assert!(tr.abs() < 1e-10 * p.riemann_norm());
        }
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let m = eh_closed_form(1.0, 1.4, 0.8).unwrap();
        assert_eq!(scalar_laplacian(&m, &Jet2::constant(3.0, 2)).unwrap(), 0.0);
    }

    #[test]
    fn laplacian_matches_divergence_form() {
        // Δf = −|g|^{-1/2} ∂_a(|g|^{1/2} g^{ab} ∂_b f) for f = r² cos θ on flat space.
        let (r, th) = (1.3, 0.7);
        let m = flat_r3_times_line(r, th);
        let rj = Jet2::seed(Var::First, r, 2);
        let tj = Jet2::seed(Var::Second, th, 2);
        let f = &(&rj * &rj) * &tj.cos();
        let lap = scalar_laplacian(&m, &f).unwrap();
        // f = r² cos θ = r·z in R³: Δ_flat(r z) = 4z/r = 4 cos θ
        assert!((lap + 4.0 * th.cos()).abs() < 1e-12);
    }

    #[test]
    fn hodge_star_is_an_involution() {
        let m = eh_closed_form(1.0, 1.4, 0.8).unwrap();
        let g = m.values();
        let mut w = [[0.0; 4]; 4];
        let vals = [0.3, -1.2, 0.5, 2.0, 0.1, -0.7];
        let mut k = 0;
        for a in 0..4 {
            for b in (a + 1)..4 {
                w[a][b] = vals[k];
                w[b][a] = -vals[k];
                k += 1;
            }
        }
        let s = hodge_star(&g, 1.0, &hodge_star(&g, 1.0, &w));
        for a in 0..4 {
            for b in 0..4 {
                assert!((s[a][b] - w[a][b]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn random_two_form_fails_cky() {
        let m = eh_closed_form(1.0, 1.4, 0.8).unwrap();
        let mut z = TwoFormJet::zero(2);
        let x = Jet2::seed(Var::First, 1.4, 2);
        let y = Jet2::seed(Var::Second, 0.8, 2);
        z.set(0, 2, &x * &y);
        z.set(1, 3, y.sin());
        z.set(2, 3, &x * &x);
        z.set(0, 1, x.exp());
        let r = cky_residual(&m, &z).unwrap();
        assert!(r.relative > 0.1, "{}", r.relative);
    }

    mod tod_checks {
        use super::super::*;
        use crate::harmonic::RodData;
        use crate::tod::{tod_fields, tod_metric, tod_orientation};

        #[test]
        fn eguchi_hanson_lambda_at_worked_point() {
            let rods = RodData::eguchi_hanson(1.0);
            let (rho, zeta) = (3f64.sqrt() / 4.0, 0.0);
            let m = tod_metric(&rods, rho, zeta).unwrap();
            let p = curvature_pack(&m).unwrap();
            let o = tod_orientation(&rods, rho, zeta).unwrap();
            let w = weyl_split(&p, o);
            let lam = w.lambda.unwrap();
            assert!((lam - 1.0).abs() < 1e-8, "{lam}");
            assert!(w.asd_eigenvalues.iter().all(|v| v.abs() < 1e-8));
        }

        #[test]
        fn conformal_factor_laplacian_at_worked_point() {
            let rods = RodData::eguchi_hanson(1.0);
            let (rho, zeta) = (3f64.sqrt() / 4.0, 0.0);
            let m = tod_metric(&rods, rho, zeta).unwrap();
            let z = tod_fields(&rods, rho, zeta, 2).unwrap().z;
            let omega = z.recip();
            assert!((omega.value() - 2.0).abs() < 1e-12);
            let lap = scalar_laplacian(&m, &omega).unwrap();
            assert!((lap - 2.0).abs() < 1e-10, "{lap}");
        }

        #[test]
        fn z_omega_is_cky_with_killing_xi() {
            let rods = RodData::eguchi_hanson(1.0);
            for &(rho, zeta) in &[(3f64.sqrt() / 4.0, 0.0), (0.4, 0.3), (1.2, -0.7)] {
                let m = tod_metric(&rods, rho, zeta).unwrap();
                let fields = tod_fields(&rods, rho, zeta, 3).unwrap();
                let om = crate::tod::form_with_order(&rods, rho, zeta, 2).unwrap();
                let zw = om.scale_by(&fields.z.truncate(2));
                let r = cky_residual(&m, &zw).unwrap();
                assert!(r.relative < 1e-8, "{}", r.relative);
                let kd = killing_defect(&m, &zw).unwrap();
                assert!(kd < 1e-8, "{kd}");
                assert!((r.xi[0] - 1.0).abs() < 1e-8 && r.xi[1].abs() < 1e-8);
            }
        }
    }
}
