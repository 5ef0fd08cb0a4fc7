//! Index bookkeeping for geodesic flows on the compact rank-one symmetric
//! space models.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Sphere,
    RealProjective,
    ComplexProjective,
    QuaternionicProjective,
    CayleyPlane,
}

impl Model {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "s" | "sphere" => Model::Sphere,
            "rp" | "realprojective" => Model::RealProjective,
            "cp" | "complexprojective" => Model::ComplexProjective,
            "hp" | "quaternionicprojective" => Model::QuaternionicProjective,
            "cap" | "cayleyplane" | "cap2" => Model::CayleyPlane,
            _ => return invalid(format!("unknown model {s:?} (use s, rp, cp, hp, cap)")),
        })
    }

    pub const ALL: [Model; 5] = [
        Model::Sphere,
        Model::RealProjective,
        Model::ComplexProjective,
        Model::QuaternionicProjective,
        Model::CayleyPlane,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossModel {
    pub model: Model,
    /// Real dimension.
    pub n: u32,
    /// Minimal index of a positive-energy critical manifold.
    pub i: u32,
    /// Simply connected and spin; `false` for `ℂP^{n/2}` with `n/2` even and
    /// for `ℝPⁿ`.
    pub spin: bool,
    pub simply_connected: bool,
}

impl CrossModel {
    pub fn new(model: Model, n: u32) -> Result<Self> {
        if n < 2 {
            return invalid("dimension must be at least 2");
        }
        let i = match model {
            Model::Sphere => n - 1,
            // Shortest closed geodesics are non-contractible and minimize
            // length in their free homotopy class.
            Model::RealProjective => 0,
            Model::ComplexProjective => {
                if n % 2 != 0 {
                    return invalid("CP^{n/2} needs n even");
                }
                1
            }
            Model::QuaternionicProjective => {
                if n % 4 != 0 {
                    return invalid("HP^{n/4} needs n divisible by 4");
                }
                3
            }
            Model::CayleyPlane => {
                if n != 16 {
                    return invalid("CaP^2 has dimension 16");
                }
                7
            }
        };
        let simply_connected = model != Model::RealProjective;
        let spin = simply_connected && !(model == Model::ComplexProjective && (n / 2) % 2 == 0);
        Ok(CrossModel {
            model,
            n,
            i,
            spin,
            simply_connected,
        })
    }

    pub fn name(&self) -> String {
        match self.model {
            Model::Sphere => format!("S^{}", self.n),
            Model::RealProjective => format!("RP^{}", self.n),
            Model::ComplexProjective => format!("CP^{}", self.n / 2),
            Model::QuaternionicProjective => format!("HP^{}", self.n / 4),
            Model::CayleyPlane => "CaP^2".into(),
        }
    }

    /// Caveats on applying the spectral characterization to this model.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.simply_connected {
            w.push(format!("{} is not simply connected; its index is the non-contractible one", self.name()));
        }
        if self.simply_connected && !self.spin {
            w.push(format!("{} is not spin", self.name()));
        }
        w
    }
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 {
        return invalid("iterate m must be at least 1");
    }
    Ok(())
}

/// `(ind, nul)` of the `m`-th iterate critical manifold.
pub fn bott_indices(model: &CrossModel, m: u32) -> Result<(u64, u64)> {
    check_m(m)?;
    let (m, n, i) = (m as u64, model.n as u64, model.i as u64);
    Ok((m * i + (m - 1) * (n - 1), 2 * n - 1))
}

/// `(deg α_m, deg β_m)`; `β_m` is `α_m` cupped with `e^{n−1}`.
pub fn class_degrees(model: &CrossModel, m: u32) -> Result<(u64, u64)> {
    let (ind, _) = bott_indices(model, m)?;
    Ok((ind, ind + 2 * (model.n as u64 - 1)))
}

/// `(c(α_m), c(β_m)) = (mℓ, mℓ)` for `m = 1..=m_max`.
pub fn zoll_spectral_values(ell: f64, m_max: u32) -> Result<Vec<(f64, f64)>> {
    if !(ell > 0.0) {
        return invalid("minimal period must be positive");
    }
    Ok((1..=m_max).map(|m| (m as f64 * ell, m as f64 * ell)).collect())
}

/// Betti numbers of `SM/S¹` for the round `Sⁿ`: the oriented Grassmannian of
/// 2-planes in `ℝ^{n+1}`, a complex quadric of complex dimension `n − 1`.
pub fn sphere_quotient_betti(n: u32) -> Vec<u64> {
    let d = (n - 1) as usize;
    let mut b = vec![0; 2 * d + 1];
    for k in 0..=d {
        b[2 * k] = 1;
    }
    if d % 2 == 0 && d > 0 {
        b[d] += 1;
    }
    b
}

/// Rank of `H^d_{S¹}(ΛM, M; ℚ)`: `Σ_{m≥1} b_{d − ind(𝒦^m)}`.
pub fn cohomology_rank(model: &CrossModel, degree: u64, quotient_betti: &[u64]) -> Result<u64> {
    let mut rank = 0;
    let mut m = 1;
    loop {
        let (ind, _) = bott_indices(model, m)?;
        if ind > degree {
            break;
        }
        rank += quotient_betti.get((degree - ind) as usize).copied().unwrap_or(0);
        m += 1;
    }
    Ok(rank)
}

#[derive(Clone, Debug, Serialize)]
pub struct BottRow {
    pub m: u32,
    pub ind: u64,
    pub nul: u64,
    pub deg_alpha: u64,
    pub deg_beta: u64,
    pub value: f64,
}

pub fn table(model: &CrossModel, ell: f64, m_max: u32) -> Result<Vec<BottRow>> {
    let values = zoll_spectral_values(ell, m_max)?;
    (1..=m_max)
        .map(|m| {
            let (ind, nul) = bott_indices(model, m)?;
            let (deg_alpha, deg_beta) = class_degrees(model, m)?;
            Ok(BottRow {
                m,
                ind,
                nul,
                deg_alpha,
                deg_beta,
                value: values[m as usize - 1].0,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: u32) -> CrossModel {
        CrossModel::new(Model::Sphere, n).unwrap()
    }

    #[test]
    fn sphere_iterates() {
        let s2 = s(2);
        assert_eq!(bott_indices(&s2, 1).unwrap(), (1, 3));
        assert_eq!(bott_indices(&s2, 2).unwrap(), (3, 3));
        assert_eq!(bott_indices(&s2, 3).unwrap(), (5, 3));
        assert_eq!(class_degrees(&s2, 1).unwrap(), (1, 3));
        assert_eq!(class_degrees(&s2, 2).unwrap(), (3, 5));
        for n in 2..12 {
            assert_eq!(class_degrees(&s(n), 1).unwrap(), (n as u64 - 1, 3 * (n as u64 - 1)));
        }
        assert!(bott_indices(&s2, 0).is_err());
    }

    #[test]
    fn projective_models() {
        let cp2 = CrossModel::new(Model::ComplexProjective, 4).unwrap();
        assert_eq!(bott_indices(&cp2, 1).unwrap(), (1, 7));
        assert!(!cp2.spin);
        assert!(CrossModel::new(Model::ComplexProjective, 6).unwrap().spin);
        assert!(CrossModel::new(Model::ComplexProjective, 5).is_err());
        assert!(CrossModel::new(Model::QuaternionicProjective, 6).is_err());
        assert_eq!(CrossModel::new(Model::QuaternionicProjective, 8).unwrap().i, 3);
        assert!(CrossModel::new(Model::CayleyPlane, 8).is_err());
        assert_eq!(CrossModel::new(Model::CayleyPlane, 16).unwrap().i, 7);
        let rp = CrossModel::new(Model::RealProjective, 3).unwrap();
        assert_eq!(rp.i, 0);
        assert!(!rp.warnings().is_empty());
    }

    #[test]
    fn index_gap_and_degree_gap() {
        for model in Model::ALL {
            let n = match model {
                Model::CayleyPlane => 16,
                _ => 8,
            };
            let c = CrossModel::new(model, n).unwrap();
            for m in 1..10 {
                let a = bott_indices(&c, m).unwrap().0;
                let b = bott_indices(&c, m + 1).unwrap().0;
                assert_eq!(b - a, (c.i + n - 1) as u64);
                let (da, db) = class_degrees(&c, m).unwrap();
                assert_eq!(db - da, 2 * (n as u64 - 1));
            }
        }
    }

    #[test]
    fn quotient_betti_tables() {
        assert_eq!(sphere_quotient_betti(2), vec![1, 0, 1]);
        assert_eq!(sphere_quotient_betti(3), vec![1, 0, 2, 0, 1]);
        // Euler characteristic of a quadric of complex dimension d.
        for n in 2..10u32 {
            let d = (n - 1) as u64;
            let chi: u64 = sphere_quotient_betti(n).iter().sum();
            assert_eq!(chi, if d % 2 == 0 { d + 2 } else { d + 1 });
        }
    }

    #[test]
    fn sphere_ranks() {
        let s2 = s(2);
        let b = sphere_quotient_betti(2);
        assert_eq!(cohomology_rank(&s2, 1, &b).unwrap(), 1);
        assert_eq!(cohomology_rank(&s2, 0, &b).unwrap(), 0);
        // m = 1 contributes b₂, m = 2 contributes b₀.
        assert_eq!(cohomology_rank(&s2, 3, &b).unwrap(), 2);
        assert_eq!(cohomology_rank(&s2, 2, &b).unwrap(), 0);
    }

    #[test]
    fn spectral_values() {
        let v = zoll_spectral_values(2.0 * std::f64::consts::PI, 3).unwrap();
        assert_eq!(v.len(), 3);
        for (m, (a, b)) in v.iter().enumerate() {
            assert_eq!(a, b);
            assert!((a - 2.0 * std::f64::consts::PI * (m + 1) as f64).abs() < 1e-12);
        }
        let scaled = zoll_spectral_values(3.0 * 2.0 * std::f64::consts::PI, 3).unwrap();
        for (x, y) in v.iter().zip(&scaled) {
            assert!((3.0 * x.0 - y.0).abs() < 1e-12);
        }
        assert!(zoll_spectral_values(0.0, 3).is_err());
    }
}
