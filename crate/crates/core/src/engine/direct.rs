//! The first-order PDE systems written out term by term on the grid. Shares
//! nothing with the operator and gradient code beyond the stencils.

use crate::catalog::{Family, ModelId, ModelSpec};
use crate::error::Result;
use crate::grid::Grid;
use crate::state::FieldName::*;
use crate::state::State;

fn d1(g: &Grid, u: &[f64]) -> Vec<f64> {
    let n = g.n();
    (0..n)
        .map(|i| (u[(i + 1) % n] - u[(i + n - 1) % n]) / (2.0 * g.dx()))
        .collect()
}

fn d2(g: &Grid, u: &[f64]) -> Vec<f64> {
    let n = g.n();
    (0..n)
        .map(|i| (u[(i + 1) % n] - 2.0 * u[i] + u[(i + n - 1) % n]) / (g.dx() * g.dx()))
        .collect()
}

/// `∫ (u_x)²` with the forward difference.
fn grad_sq(g: &Grid, u: &[f64]) -> f64 {
    let n = g.n();
    g.dx()
        * (0..n)
            .map(|i| ((u[(i + 1) % n] - u[i]) / g.dx()).powi(2))
            .sum::<f64>()
}

fn sq(g: &Grid, u: &[f64]) -> f64 {
    g.dx() * u.iter().map(|v| v * v).sum::<f64>()
}

pub fn direct_rhs(model: &ModelSpec, z: &State) -> Result<State> {
    model.check_layout(z)?;
    let g = model.grid();
    let c = model.params();
    let n = g.n();
    let id = model.id();
    let mut out = State::zeros(model.layout());

    let phi = z.field(Phi)?;
    let psi = z.field(Psi)?;
    let p = z.field(P)?;
    let q = z.field(Q)?;
    let psi_xx = d2(g, psi);
    let phi_x = d1(g, phi);

    let mut p_t = vec![0.0; n];
    let mut q_t = vec![0.0; n];
    let mut e_t = 0.0;

    match id.family() {
        Family::Timoshenko => {
            let shear: Vec<f64> = (0..n).map(|i| phi_x[i] + psi[i]).collect();
            let shear_x = d1(g, &shear);
            for i in 0..n {
                p_t[i] = c.k * shear_x[i];
                q_t[i] = c.b * psi_xx[i] - c.k * shear[i];
            }
            match id {
                ModelId::TimoshenkoFrictional => {
                    for i in 0..n {
                        p_t[i] -= c.delta1 * p[i];
                        q_t[i] -= c.delta2 * q[i];
                    }
                    e_t = c.delta1 * sq(g, p) + c.delta2 * sq(g, q);
                }
                ModelId::TimoshenkoHeatI => {
                    let theta = z.field(Theta)?;
                    let (theta_x, theta_xx, q_x) = (d1(g, theta), d2(g, theta), d1(g, q));
                    let th = out.field_mut(Theta)?;
                    for i in 0..n {
                        q_t[i] -= c.gamma * theta_x[i];
                        th[i] = c.kappa * theta_xx[i] - c.gamma * q_x[i];
                    }
                    e_t = c.kappa * grad_sq(g, theta);
                }
                ModelId::TimoshenkoHeatII => {
                    let theta = z.field(Theta)?;
                    let s = z.field(S)?;
                    let (theta_x, s_x, q_x) = (d1(g, theta), d1(g, s), d1(g, q));
                    for i in 0..n {
                        q_t[i] -= c.gamma * theta_x[i];
                    }
                    let th = out.field_mut(Theta)?;
                    for i in 0..n {
                        th[i] = -s_x[i] - c.gamma * q_x[i];
                    }
                    let st = out.field_mut(S)?;
                    for i in 0..n {
                        st[i] = -theta_x[i] - c.beta * s[i];
                    }
                    e_t = c.beta * sq(g, s);
                }
                ModelId::TimoshenkoHeatIII => {
                    let theta = z.field(Theta)?;
                    let w = z.field(W)?;
                    let (theta_xx, w_x, w_xx, q_x) = (d2(g, theta), d1(g, w), d2(g, w), d1(g, q));
                    for i in 0..n {
                        q_t[i] -= c.gamma * w_x[i];
                    }
                    out.set_field(Theta, w)?;
                    let wt = out.field_mut(W)?;
                    for i in 0..n {
                        wt[i] = c.delta * theta_xx[i] - c.gamma * q_x[i] + c.big_k * w_xx[i];
                    }
                    e_t = c.big_k * grad_sq(g, w);
                }
                ModelId::TimoshenkoNew => {
                    let theta = z.field(Theta)?;
                    let (theta_x, theta_xx, q_x) = (d1(g, theta), d2(g, theta), d1(g, q));
                    let th = out.field_mut(Theta)?;
                    for i in 0..n {
                        q_t[i] += c.gamma * theta_x[i];
                        th[i] = c.delta * theta_xx[i] + c.gamma * theta[i] * q_x[i];
                    }
                }
                _ => {}
            }
        }
        Family::Bresse => {
            let chi = z.field(Chi)?;
            let w = z.field(W)?;
            let chi_x = d1(g, chi);
            let s1: Vec<f64> = (0..n).map(|i| phi_x[i] + psi[i] + c.l * chi[i]).collect();
            let s2: Vec<f64> = (0..n).map(|i| chi_x[i] - c.l * phi[i]).collect();
            let (s1_x, s2_x) = (d1(g, &s1), d1(g, &s2));
            let mut w_t = vec![0.0; n];
            for i in 0..n {
                p_t[i] = c.k * s1_x[i] + c.k0 * c.l * s2[i];
                q_t[i] = c.b * psi_xx[i] - c.k * s1[i];
                w_t[i] = c.k0 * s2_x[i] - c.k * c.l * s1[i];
            }
            match id {
                ModelId::BresseFrictional => {
                    for i in 0..n {
                        p_t[i] -= c.gamma1 * p[i];
                        q_t[i] -= c.gamma2 * q[i];
                        w_t[i] -= c.gamma3 * w[i];
                    }
                    e_t = c.gamma1 * sq(g, p) + c.gamma2 * sq(g, q) + c.gamma3 * sq(g, w);
                }
                ModelId::BresseHeatI => {
                    let theta = z.field(Theta)?;
                    let (theta_x, theta_xx, q_x) = (d1(g, theta), d2(g, theta), d1(g, q));
                    let th = out.field_mut(Theta)?;
                    for i in 0..n {
                        q_t[i] -= c.gamma * theta_x[i];
                        th[i] = c.kappa * theta_xx[i] - c.gamma * q_x[i];
                    }
                    e_t = c.kappa * grad_sq(g, theta);
                }
                ModelId::BresseHeatII => {
                    let theta = z.field(Theta)?;
                    let eta = z.field(Eta)?;
                    let (theta_x, theta_xx, q_x) = (d1(g, theta), d2(g, theta), d1(g, q));
                    let (eta_x, eta_xx, w_x) = (d1(g, eta), d2(g, eta), d1(g, w));
                    for i in 0..n {
                        p_t[i] -= c.gamma * c.l * eta[i];
                        q_t[i] -= c.delta * theta_x[i];
                        w_t[i] -= c.gamma * eta_x[i];
                    }
                    let th = out.field_mut(Theta)?;
                    for i in 0..n {
                        th[i] = c.kappa1 * theta_xx[i] - c.delta * q_x[i];
                    }
                    let et = out.field_mut(Eta)?;
                    for i in 0..n {
                        et[i] = c.kappa2 * eta_xx[i] - c.gamma * (w_x[i] - c.l * p[i]);
                    }
                    e_t = c.kappa1 * grad_sq(g, theta) + c.kappa2 * grad_sq(g, eta);
                }
                _ => {}
            }
            out.set_field(Chi, w)?;
            out.set_field(W, &w_t)?;
        }
    }

    out.set_field(Phi, p)?;
    out.set_field(Psi, q)?;
    out.set_field(P, &p_t)?;
    out.set_field(Q, &q_t)?;
    if model.layout().has_reservoir() {
        out.set_reservoir(e_t)?;
    }
    Ok(out)
}
