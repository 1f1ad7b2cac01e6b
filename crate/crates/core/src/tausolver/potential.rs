//! Genus-0 potentials on the small phase space, their coordinate forms, and
//! the WDVV and quasi-homogeneity checks.

use crate::error::{Error, Result};
use crate::linalg;
use crate::numfield::{rat, sqrt_of_integer, CycScalar};
use crate::poly::Poly;
use crate::rootdata::{Family, RootDatum};

use super::LogSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialForm {
    /// v^i = t^{i,0} as produced by the solver.
    Native,
    /// v¹ ↦ c⁻¹v¹, v⁴ ↦ cv⁴ with c² = 18√2, rescaled to unit (v¹)²v⁴/2.
    Dubrovin,
    /// The (t_1, t_X, t_Y, t_{X²}) coordinates, F ↦ F/6.
    Fjrw,
}

impl PotentialForm {
    pub fn name(self) -> &'static str {
        match self {
            PotentialForm::Native => "paper",
            PotentialForm::Dubrovin => "dubrovin",
            PotentialForm::Fjrw => "fjrw",
        }
    }

    /// Display names of the coordinates in this form.
    pub fn variable_names(self, rank: usize) -> Vec<String> {
        match self {
            PotentialForm::Fjrw => vec!["t_1".into(), "t_X".into(), "t_Y".into(), "t_X2".into()],
            _ => (1..=rank).map(|k| format!("v{k}")).collect(),
        }
    }
}

impl std::str::FromStr for PotentialForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" => Ok(PotentialForm::Native),
            "dubrovin" => Ok(PotentialForm::Dubrovin),
            "fjrw" => Ok(PotentialForm::Fjrw),
            _ => Err(Error::Parse(format!("unknown potential form `{s}`"))),
        }
    }
}

/// Genus-0 part of log τ restricted to t^{i,p} = 0 for p ≥ 1, with v^i = t^{i,0}.
pub fn frobenius_potential(datum: &RootDatum, log: &LogSeries) -> Poly {
    let l = datum.rank();
    let mut f = Poly::zero(l);
    for (m, (c, g)) in &log.coeffs {
        if *g != 0 || m.iter().any(|&(_, p)| p != 0) {
            continue;
        }
        let mut e = vec![0u32; l];
        for &(i, _) in m {
            e[i as usize] += 1;
        }
        f.add_term(e, c.clone());
    }
    f
}

fn require_d4(datum: &RootDatum, what: &str) -> Result<()> {
    if datum.kind.family == Family::D && datum.kind.rank == 4 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("the {what} form is defined for D4 only")))
    }
}

/// Rewrites a D4 potential in one of the coordinate systems of the literature.
pub fn transform_potential(datum: &RootDatum, f: &Poly, form: PotentialForm) -> Result<Poly> {
    let n = datum.conductor;
    match form {
        PotentialForm::Native => Ok(f.clone()),
        PotentialForm::Dubrovin => {
            require_d4(datum, "Dubrovin")?;
            // c² = 18√2; every monomial picks up c^{1 - a + d}, which is even
            // for a quasi-homogeneous potential, so only powers of c² occur
            let c2 = &sqrt_of_integer(2, n)? * &CycScalar::from_int(18);
            let c2_inv = c2.inv()?;
            let mut out = Poly::zero(4);
            for (e, coef) in f.terms() {
                let k = 1 - e[0] as i64 + e[3] as i64;
                if k % 2 != 0 {
                    return Err(Error::Unsupported(format!(
                        "monomial {:?} needs an odd power of c, outside the working field",
                        e
                    )));
                }
                let base = if k >= 0 { &c2 } else { &c2_inv };
                out.add_term(e.clone(), coef * &base.pow((k.unsigned_abs() / 2) as u32));
            }
            Ok(out)
        }
        PotentialForm::Fjrw => {
            require_d4(datum, "FJRW")?;
            let s2_inv = sqrt_of_integer(2, n)?.inv()?;
            let s3 = sqrt_of_integer(3, n)?;
            let t = |k| Poly::var(4, k);
            let v2 = t(1).sub(&t(2).scale(&s3)).scale(&(-&s2_inv));
            let v3 = t(1).add(&t(2).scale(&s3)).scale(&(-&s2_inv));
            let g = f.substitute(&[t(0), v2, v3, t(3)]);
            Ok(g.scale_rational(&rat(1, 6)))
        }
    }
}

/// The published D4 potential in the requested form.
pub fn d4_reference(datum: &RootDatum, form: PotentialForm) -> Result<Poly> {
    require_d4(datum, "reference")?;
    let n = datum.conductor;
    let q = |p, r| CycScalar::from_rational(&rat(p, r));
    let mono = |e: [u32; 4], c: CycScalar| Poly::monomial(e.to_vec(), c);
    let sum = |terms: Vec<Poly>| terms.iter().fold(Poly::zero(4), |a, t| a.add(t));
    Ok(match form {
        PotentialForm::Native => {
            let k = (&sqrt_of_integer(2, n)? * &CycScalar::from_int(18)).inv()?;
            sum(vec![
                mono([2, 0, 0, 1], q(1, 2)),
                mono([1, 1, 1, 0], q(1, 1)),
                mono([0, 3, 0, 1], k.clone()),
                mono([0, 0, 3, 1], k),
                mono([0, 1, 1, 3], q(1, 108)),
                mono([0, 0, 0, 7], q(1, 272160)),
            ])
        }
        PotentialForm::Dubrovin => sum(vec![
            mono([2, 0, 0, 1], q(1, 2)),
            mono([1, 1, 1, 0], q(1, 1)),
            mono([0, 3, 0, 1], q(1, 1)),
            mono([0, 1, 1, 3], q(6, 1)),
            mono([0, 0, 3, 1], q(1, 1)),
            mono([0, 0, 0, 7], q(54, 35)),
        ]),
        PotentialForm::Fjrw => sum(vec![
            mono([1, 2, 0, 0], q(1, 12)),
            mono([1, 0, 2, 0], q(-1, 4)),
            mono([2, 0, 0, 1], q(1, 12)),
            mono([0, 3, 0, 1], q(-1, 216)),
            mono([0, 1, 2, 1], q(-1, 24)),
            mono([0, 2, 0, 3], q(1, 1296)),
            mono([0, 0, 2, 3], q(-1, 432)),
            mono([0, 0, 0, 7], q(1, 1632960)),
        ]),
    })
}

/// Associativity of the product c_{ab}^c = η^{cd}∂_a∂_b∂_d F, where the
/// metric η_{ab} = ∂_1∂_a∂_b F must be constant and nondegenerate.
pub fn wdvv_check(f: &Poly) -> Result<bool> {
    let n = f.nvars();
    let d1: Vec<Poly> = (0..n).map(|a| f.derivative(a)).collect();
    let d2: Vec<Vec<Poly>> = d1.iter().map(|p| (0..n).map(|b| p.derivative(b)).collect()).collect();
    let d3: Vec<Vec<Vec<Poly>>> =
        d2.iter().map(|row| row.iter().map(|p| (0..n).map(|c| p.derivative(c)).collect()).collect()).collect();
    let mut eta = vec![vec![CycScalar::zero(); n]; n];
    for a in 0..n {
        for b in 0..n {
            eta[a][b] = d3[0][a][b].as_constant().ok_or(Error::DegenerateMetric)?;
        }
    }
    let eta_inv = linalg::inverse(&eta).map_err(|_| Error::DegenerateMetric)?;
    // G_{ab}^f = Σ_e F_abe η^{ef}
    let mut g: Vec<Vec<Vec<Poly>>> = vec![vec![vec![Poly::zero(n); n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for fi in 0..n {
                let mut acc = Poly::zero(n);
                for e in 0..n {
                    if !eta_inv[e][fi].is_zero() {
                        acc = acc.add(&d3[a][b][e].scale(&eta_inv[e][fi]));
                    }
                }
                g[a][b][fi] = acc;
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut lhs = Poly::zero(n);
                    let mut rhs = Poly::zero(n);
                    for fi in 0..n {
                        lhs = lhs.add(&g[a][b][fi].mul(&d3[fi][c][d]));
                        rhs = rhs.add(&g[b][c][fi].mul(&d3[fi][a][d]));
                    }
                    if lhs != rhs {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Every monomial has weighted degree 2(h+1) for the weights h + 1 − m_i.
pub fn quasi_homogeneous(datum: &RootDatum, f: &Poly) -> bool {
    let w: Vec<u32> = datum.exponents.iter().map(|m| datum.h + 1 - m).collect();
    f.terms().all(|(e, _)| e.iter().zip(&w).map(|(a, b)| a * b).sum::<u32>() == 2 * (datum.h + 1))
}
