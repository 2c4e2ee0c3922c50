//! Ray-based channel realizations for the UE-BS, UE-RIS and RIS-BS links.
//!
//! Geometry: the BS sits at the origin and the RIS at `(d_br, 0)`. Users are
//! uniform over the disk of radius `cell_radius` around the BS, outside the
//! exclusion disks of both the BS and the RIS.
//!
//! Each user channel is a Ricean mix of one LOS steering vector and
//! `C * S` scattered subrays with equal power split. LOS angles are drawn
//! independently of the user positions.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{ricean_split, AngleSpread, SystemConfig};
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector};
use crate::phases::PhaseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    Bs,
    Ris,
}

/// Steering vector of a vertical uniform rectangular array in the y-z plane.
///
/// The result is `a_y ⊗ a_z`: entry `iy * n_z + iz` carries the phase
/// `2*pi*d*(iy*sin(theta)*sin(phi) + iz*cos(theta))`.
pub fn ura_steering(ny: usize, nz: usize, spacing: f64, theta: f64, phi: f64) -> CVector {
    let ky = TAU * spacing * theta.sin() * phi.sin();
    let kz = TAU * spacing * theta.cos();
    let mut v = CVector::zeros(ny * nz);
    for iy in 0..ny {
        for iz in 0..nz {
            v[iy * nz + iz] = Complex64::from_polar(1.0, ky * iy as f64 + kz * iz as f64);
        }
    }
    v
}

pub fn steering_vector(kind: ArrayKind, theta: f64, phi: f64, cfg: &SystemConfig) -> CVector {
    match kind {
        ArrayKind::Bs => ura_steering(cfg.m_y, cfg.m_z, cfg.d_b, theta, phi),
        ArrayKind::Ris => ura_steering(cfg.n_y, cfg.n_z, cfg.d_r, theta, phi),
    }
}

/// Sample from a zero-mean Laplacian with standard deviation `std`.
pub fn laplacian<R: Rng + ?Sized>(rng: &mut R, std: f64) -> f64 {
    let u: f64 = rng.random_range(-0.5..0.5);
    let scale = std / std::f64::consts::SQRT_2;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserDrop {
    pub positions: Vec<[f64; 2]>,
    /// UE-BS distances, metres.
    pub d_d: Vec<f64>,
    /// UE-RIS distances, metres.
    pub d_ru: Vec<f64>,
}

pub fn drop_users<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> UserDrop {
    let ris = [cfg.d_br, 0.0];
    let mut positions = Vec::with_capacity(cfg.k);
    let mut d_d = Vec::with_capacity(cfg.k);
    let mut d_ru = Vec::with_capacity(cfg.k);
    while positions.len() < cfg.k {
        let r = cfg.cell_radius * rng.random::<f64>().sqrt();
        let a = rng.random_range(0.0..TAU);
        let p = [r * a.cos(), r * a.sin()];
        let to_bs = r;
        let to_ris = ((p[0] - ris[0]).powi(2) + (p[1] - ris[1]).powi(2)).sqrt();
        if to_bs < cfg.exclusion_radius || to_ris < cfg.exclusion_radius {
            continue;
        }
        positions.push(p);
        d_d.push(to_bs);
        d_ru.push(to_ris);
    }
    UserDrop {
        positions,
        d_d,
        d_ru,
    }
}

/// Distance-dependent path gain `P * d^-gamma`.
pub fn path_gain(p_ref: f64, distance: f64, exponent: f64) -> f64 {
    p_ref * distance.powf(-exponent)
}

fn deg(x: f64) -> f64 {
    x.to_radians()
}

/// Ray angles of one cluster: centre elevation around `theta0`, centre
/// azimuth Normal around `phi0 + mu`, then Laplacian subray deviations.
struct ClusterSampler {
    spread: AngleSpread,
    azimuth_centre: Normal<f64>,
}

impl ClusterSampler {
    fn new(spread: AngleSpread) -> Self {
        let azimuth_centre = Normal::new(deg(spread.mu), deg(spread.sigma_c))
            .expect("angle spread validated as finite and non-negative");
        ClusterSampler {
            spread,
            azimuth_centre,
        }
    }

    fn centre<R: Rng + ?Sized>(&self, rng: &mut R, theta0: f64, phi0: f64) -> (f64, f64) {
        let theta = theta0 + laplacian(rng, deg(self.spread.sigmahat_c));
        let phi = phi0 + self.azimuth_centre.sample(rng);
        (theta, phi)
    }

    fn subray<R: Rng + ?Sized>(&self, rng: &mut R, centre: (f64, f64)) -> (f64, f64) {
        (
            centre.0 + laplacian(rng, deg(self.spread.sigmahat_s)),
            centre.1 + laplacian(rng, deg(self.spread.sigma_s)),
        )
    }
}

/// One user-side channel column: LOS steering vector plus scattered rays.
#[allow(clippy::too_many_arguments)]
fn user_column<R: Rng + ?Sized>(
    rng: &mut R,
    steer: &dyn Fn(f64, f64) -> CVector,
    gain: f64,
    kappa: f64,
    clusters: usize,
    subrays: usize,
    sampler: &ClusterSampler,
) -> CVector {
    let (eta, zeta) = ricean_split(kappa);
    let theta_los = rng.random_range(0.0..=PI);
    let phi_los = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);
    let mut col = steer(theta_los, phi_los).scale(eta * gain.sqrt());
    if zeta > 0.0 {
        let ray_amp = (gain / (clusters * subrays) as f64).sqrt();
        for _ in 0..clusters {
            let centre = sampler.centre(rng, FRAC_PI_2, 0.0);
            for _ in 0..subrays {
                let (theta, phi) = sampler.subray(rng, centre);
                let psi = rng.random_range(0.0..TAU);
                let coef = Complex64::from_polar(zeta * ray_amp, psi);
                col.axpy(coef, &steer(theta, phi), Complex64::new(1.0, 0.0));
            }
        }
    }
    col
}

/// UE-BS (`M x K`) and UE-RIS (`N x K`) channels for one user drop.
pub fn gen_user_channels<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    drop: &UserDrop,
    rng: &mut R,
) -> (CMatrix, CMatrix) {
    let p_ref = cfg.p_ref();
    let sampler_d = ClusterSampler::new(cfg.spread_d());
    let sampler_ru = ClusterSampler::new(cfg.spread_ru());
    let steer_b = |t: f64, p: f64| steering_vector(ArrayKind::Bs, t, p, cfg);
    let steer_r = |t: f64, p: f64| steering_vector(ArrayKind::Ris, t, p, cfg);
    let mut h_d = CMatrix::zeros(cfg.m(), cfg.k);
    let mut h_ru = CMatrix::zeros(cfg.n(), cfg.k);
    for k in 0..cfg.k {
        let g_d = path_gain(p_ref, drop.d_d[k], cfg.gamma_d);
        let col = user_column(
            rng,
            &steer_b,
            g_d,
            cfg.kappa_d,
            cfg.c_d,
            cfg.s_d,
            &sampler_d,
        );
        h_d.set_column(k, &col);
        let g_ru = path_gain(p_ref, drop.d_ru[k], cfg.gamma_ru);
        let col = user_column(
            rng,
            &steer_r,
            g_ru,
            cfg.kappa_ru,
            cfg.c_ru,
            cfg.s_ru,
            &sampler_ru,
        );
        h_ru.set_column(k, &col);
    }
    (h_d, h_ru)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RisBsChannel {
    pub h_br: CMatrix,
    /// Arrival steering vector at the BS.
    pub a_b: CVector,
    /// Departure steering vector at the RIS.
    pub a_r: CVector,
    pub beta_br: f64,
    pub eta_br: f64,
    pub pure_los: bool,
}

/// RIS-BS channel: pure LOS when `kappa_br` is infinite, dominant LOS otherwise.
pub fn gen_ris_bs_channel<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<RisBsChannel> {
    if !(cfg.kappa_br > 0.0) {
        return Err(Error::validation(
            "kappa_br must be positive: the RIS-BS link needs a LOS component",
        ));
    }
    let theta_d = rng.random_range(deg(70.0)..=deg(90.0));
    let phi_d = rng.random_range(deg(-30.0)..=deg(30.0));
    let theta_a = PI - theta_d;
    let phi_a = rng.random_range(deg(-30.0)..=deg(30.0));
    let a_b = steering_vector(ArrayKind::Bs, theta_a, phi_a, cfg);
    let a_r = steering_vector(ArrayKind::Ris, theta_d, phi_d, cfg);
    let los = &a_b * a_r.adjoint();
    let free_space = cfg.d_br.powi(-2);

    if cfg.kappa_br.is_infinite() {
        return Ok(RisBsChannel {
            h_br: los.scale(free_space.sqrt()),
            a_b,
            a_r,
            beta_br: free_space,
            eta_br: 1.0,
            pure_los: true,
        });
    }

    let (eta, zeta) = ricean_split(cfg.kappa_br);
    let beta_br = free_space / (eta * eta);
    let mut h_br = los.scale(eta * beta_br.sqrt());
    let sampler = ClusterSampler::new(cfg.spread_br());
    let ray_amp = (beta_br / (cfg.c_br * cfg.s_br) as f64).sqrt();
    for _ in 0..cfg.c_br {
        let arrival = sampler.centre(rng, theta_a, phi_a);
        let departure = sampler.centre(rng, theta_d, phi_d);
        for _ in 0..cfg.s_br {
            let (ta, pa) = sampler.subray(rng, arrival);
            let (td, pd) = sampler.subray(rng, departure);
            let psi = rng.random_range(0.0..TAU);
            let coef = Complex64::from_polar(zeta * ray_amp, psi);
            let ab = steering_vector(ArrayKind::Bs, ta, pa, cfg);
            let ar = steering_vector(ArrayKind::Ris, td, pd, cfg);
            h_br += (ab * ar.adjoint()) * coef;
        }
    }
    Ok(RisBsChannel {
        h_br,
        a_b,
        a_r,
        beta_br,
        eta_br: eta,
        pure_los: false,
    })
}

/// One drop's complete set of channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_d: CMatrix,
    pub h_ru: CMatrix,
    pub h_br: CMatrix,
    pub a_b: CVector,
    pub a_r: CVector,
    pub beta_br: f64,
    /// LOS amplitude weight of `h_br` (1 for pure LOS).
    pub eta_br: f64,
    pub pure_los: bool,
    pub drop: UserDrop,
}

impl ChannelRealization {
    pub fn m(&self) -> usize {
        self.h_d.nrows()
    }

    pub fn n(&self) -> usize {
        self.h_ru.nrows()
    }

    pub fn k(&self) -> usize {
        self.h_d.ncols()
    }

    /// Power gain of the LOS part of `h_br`: `eta_br^2 * beta_br`.
    pub fn los_gain(&self) -> f64 {
        self.eta_br * self.eta_br * self.beta_br
    }

    /// The LOS part `eta_br * sqrt(beta_br) * a_b a_r^H`.
    pub fn los_part(&self) -> CMatrix {
        (&self.a_b * self.a_r.adjoint()).scale(self.los_gain().sqrt())
    }

    /// Order-sensitive fingerprint of every channel entry.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for m in [&self.h_d, &self.h_ru, &self.h_br] {
            m.shape().hash(&mut h);
            for z in m.iter() {
                z.re.to_bits().hash(&mut h);
                z.im.to_bits().hash(&mut h);
            }
        }
        h.finish()
    }
}

/// Draws users, user channels and the RIS-BS channel, in that order.
pub fn realize<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<ChannelRealization> {
    cfg.validate()?;
    let drop = drop_users(cfg, rng);
    let (h_d, h_ru) = gen_user_channels(cfg, &drop, rng);
    let br = gen_ris_bs_channel(cfg, rng)?;
    Ok(ChannelRealization {
        h_d,
        h_ru,
        h_br: br.h_br,
        a_b: br.a_b,
        a_r: br.a_r,
        beta_br: br.beta_br,
        eta_br: br.eta_br,
        pure_los: br.pure_los,
        drop,
    })
}

/// `H_d + H_br * diag(coefficients) * H_ru`.
pub fn cascade(
    h_d: &CMatrix,
    h_br: &CMatrix,
    coefficients: &CVector,
    h_ru: &CMatrix,
) -> Result<CMatrix> {
    let n = coefficients.len();
    if h_br.ncols() != n || h_ru.nrows() != n {
        return Err(Error::validation(format!(
            "phase vector of length {n} does not match H_br ({}x{}) / H_ru ({}x{})",
            h_br.nrows(),
            h_br.ncols(),
            h_ru.nrows(),
            h_ru.ncols()
        )));
    }
    if h_d.nrows() != h_br.nrows() || h_d.ncols() != h_ru.ncols() {
        return Err(Error::validation(
            "H_d shape does not match the cascaded link",
        ));
    }
    let mut scaled = h_ru.clone();
    for (mut row, coef) in scaled.row_iter_mut().zip(coefficients.iter()) {
        row *= *coef;
    }
    Ok(h_d + h_br * scaled)
}

/// Global uplink channel `H = H_d + H_br * diag(exp(j*phi)) * H_ru`.
pub fn global_channel(real: &ChannelRealization, phi: &PhaseVector) -> Result<CMatrix> {
    cascade(&real.h_d, &real.h_br, &phi.coefficients(), &real.h_ru)
}

/// Convenience for tests and the FFI layer: a dense matrix from row-major data.
pub fn matrix_from_rows(rows: usize, cols: usize, data: &[Complex64]) -> CMatrix {
    DMatrix::from_row_slice(rows, cols, data)
}
