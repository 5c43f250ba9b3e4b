//! Photometry and colour-space helpers.
//!
//! Photon energy, photon rate and flux, luminous intensity and flux from a
//! spectral distribution, luminance and point-source illuminance, the visible
//! band table, and the R'G'B' <-> Y'Cb'Cr' transform with HLG/BT.2020 weights.
//!
//! Everything here is a pure function of its inputs.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Planck's constant in J·s.
pub const PLANCK: f64 = 6.626e-34;
/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 3e8;
/// Electron-volts per joule.
pub const EV_PER_JOULE: f64 = 6.242e18;
/// Maximum luminous efficacy in lm/W.
pub const LUMINOUS_EFFICACY: f64 = 683.0;

/// Visible range accepted by [`luminous_quantities`], in nm.
pub const VISIBLE_MIN_NM: f64 = 380.0;
pub const VISIBLE_MAX_NM: f64 = 750.0;

pub const KR: f64 = 0.2627;
pub const KG: f64 = 0.6780;
pub const KB: f64 = 0.0593;
pub const CB_DIVISOR: f64 = 1.8814;
pub const CR_DIVISOR: f64 = 1.4746;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonSpec {
    pub wavelength_nm: f64,
    pub energy_j: f64,
    pub energy_ev: f64,
}

/// Energy of a single photon of the given wavelength.
pub fn photon_energy(wavelength_nm: f64) -> Result<PhotonSpec> {
    if !(wavelength_nm > 0.0) || !wavelength_nm.is_finite() {
        return Err(Error::Domain(format!(
            "wavelength must be positive, got {wavelength_nm} nm"
        )));
    }
    let energy_j = PLANCK * SPEED_OF_LIGHT / (wavelength_nm * 1e-9);
    Ok(PhotonSpec {
        wavelength_nm,
        energy_j,
        energy_ev: energy_j * EV_PER_JOULE,
    })
}

/// Physical description of a light source.
///
/// Not every operation uses every field; unused fields may hold any positive
/// placeholder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightSource {
    /// Emitted energy per second, J.
    pub source_energy_j: f64,
    /// Emitting area, m².
    pub area_m2: f64,
    /// Radiant intensity, W/sr.
    pub radiant_intensity_w_sr: f64,
    pub refraction_index: f64,
    /// Etendue of the ray bundle.
    pub etendue: f64,
    /// Source strength, W.
    pub strength_w: f64,
    /// Distance from the source, m.
    pub distance_m: f64,
}

impl Default for LightSource {
    fn default() -> Self {
        LightSource {
            source_energy_j: 1.0,
            area_m2: 1.0,
            radiant_intensity_w_sr: 1.0,
            refraction_index: 1.0,
            etendue: 1.0,
            strength_w: 1.0,
            distance_m: 1.0,
        }
    }
}

impl LightSource {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("source_energy_j", self.source_energy_j),
            ("area_m2", self.area_m2),
            ("radiant_intensity_w_sr", self.radiant_intensity_w_sr),
            ("refraction_index", self.refraction_index),
            ("etendue", self.etendue),
            ("strength_w", self.strength_w),
            ("distance_m", self.distance_m),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Photons emitted per second (`L / E`) and photon flux per unit area.
pub fn photon_rate_and_flux(source: &LightSource, photon: &PhotonSpec) -> Result<(f64, f64)> {
    if !(photon.energy_j > 0.0) {
        return Err(Error::Domain("photon energy must be positive".into()));
    }
    if !(source.area_m2 > 0.0) {
        return Err(Error::Domain("emitting area must be positive".into()));
    }
    let rate = source.source_energy_j / photon.energy_j;
    Ok((rate, rate / source.area_m2))
}

/// Default luminous efficiency curve: a unit-peak Gaussian centred on 555 nm.
pub fn gaussian_efficiency(wavelength_nm: f64) -> f64 {
    const PEAK: f64 = 555.0;
    const SIGMA: f64 = 45.0;
    let d = (wavelength_nm - PEAK) / SIGMA;
    (-0.5 * d * d).exp()
}

/// Luminous intensity (cd) and luminous flux (lm).
///
/// Intensity weights the source's radiant intensity by the efficiency at the
/// grid sample where the efficiency peaks. Flux integrates
/// `683 · V(λ) · Φe(λ)` over the grid with the trapezoidal rule.
pub fn luminous_quantities<S, V>(
    source: &LightSource,
    spectral_flux: S,
    grid: &[f64],
    efficiency: V,
) -> Result<(f64, f64)>
where
    S: Fn(f64) -> f64,
    V: Fn(f64) -> f64,
{
    if grid.is_empty() {
        return Err(Error::Domain("wavelength grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain(
            "wavelength grid must be strictly increasing".into(),
        ));
    }
    if grid[0] < VISIBLE_MIN_NM || grid[grid.len() - 1] > VISIBLE_MAX_NM {
        return Err(Error::Domain(format!(
            "wavelength grid must lie within [{VISIBLE_MIN_NM}, {VISIBLE_MAX_NM}] nm"
        )));
    }

    let weights: Vec<f64> = grid.iter().map(|&l| efficiency(l)).collect();
    let peak = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let intensity = LUMINOUS_EFFICACY * peak * source.radiant_intensity_w_sr;

    let integrand: Vec<f64> = grid
        .iter()
        .zip(&weights)
        .map(|(&l, &v)| v * spectral_flux(l))
        .collect();
    let integral: f64 = grid
        .windows(2)
        .zip(integrand.windows(2))
        .map(|(l, f)| 0.5 * (f[0] + f[1]) * (l[1] - l[0]))
        .sum();
    Ok((intensity, LUMINOUS_EFFICACY * integral))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Illumination {
    /// cd/m².
    pub luminance: f64,
    /// Sphere area `4πr²`.
    pub sphere_area: f64,
    /// Pointance `S / A`.
    pub pointance: f64,
    /// `T / r²`.
    pub illuminance: f64,
}

/// Luminance within a ray bundle and point-source illuminance.
///
/// The illuminance is evaluated exactly as `T / r²` with `T = S / (4πr²)`,
/// so it falls off with the fourth power of distance.
pub fn luminance_and_illuminance(source: &LightSource, d_flux_lm: f64) -> Result<Illumination> {
    if !(source.etendue > 0.0) {
        return Err(Error::Domain("etendue must be positive".into()));
    }
    if !(source.distance_m > 0.0) {
        return Err(Error::Domain("distance must be positive".into()));
    }
    let n = source.refraction_index;
    let r = source.distance_m;
    let sphere_area = 4.0 * PI * r * r;
    let pointance = source.strength_w / sphere_area;
    Ok(Illumination {
        luminance: n * n * d_flux_lm / source.etendue,
        sphere_area,
        pointance,
        illuminance: pointance / (r * r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorBand {
    Violet,
    Blue,
    Green,
    Yellow,
    Orange,
    Red,
    NonVisible,
}

/// Visible bands as half-open `[low, high)` nm intervals.
pub const BANDS: [(ColorBand, f64, f64); 6] = [
    (ColorBand::Violet, 380.0, 450.0),
    (ColorBand::Blue, 450.0, 495.0),
    (ColorBand::Green, 495.0, 570.0),
    (ColorBand::Yellow, 570.0, 590.0),
    (ColorBand::Orange, 590.0, 620.0),
    (ColorBand::Red, 620.0, 750.0),
];

pub fn classify_wavelength(wavelength_nm: f64) -> ColorBand {
    BANDS
        .iter()
        .find(|(_, lo, hi)| wavelength_nm >= *lo && wavelength_nm < *hi)
        .map_or(ColorBand::NonVisible, |(band, _, _)| *band)
}

/// Gamma-corrected R'G'B' with normalized channels in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorTriplet {
    pub r: f64,
    pub g: f64,
    pub b: f64,
    pub bit_depth: u32,
}

impl ColorTriplet {
    pub fn new(r: f64, g: f64, b: f64) -> Self {
        ColorTriplet {
            r,
            g,
            b,
            bit_depth: 8,
        }
    }

    pub fn from_integer(r: u32, g: u32, b: u32, bit_depth: u32) -> Result<Self> {
        let max = max_code(bit_depth)?;
        if r > max || g > max || b > max {
            return Err(Error::Domain(format!(
                "sample out of range for {bit_depth}-bit triplet"
            )));
        }
        let m = max as f64;
        Ok(ColorTriplet {
            r: r as f64 / m,
            g: g as f64 / m,
            b: b as f64 / m,
            bit_depth,
        })
    }

    /// Nearest integer codes on the `[0, 2^t − 1]` grid. Channels outside
    /// `[0, 1]` are clamped first.
    pub fn to_integer(&self) -> Result<[u32; 3]> {
        let m = max_code(self.bit_depth)? as f64;
        let q = |v: f64| (v.clamp(0.0, 1.0) * m).round() as u32;
        Ok([q(self.r), q(self.g), q(self.b)])
    }
}

fn max_code(bit_depth: u32) -> Result<u32> {
    if !(1..=16).contains(&bit_depth) {
        return Err(Error::Domain(format!("unsupported bit depth {bit_depth}")));
    }
    Ok((1u32 << bit_depth) - 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YCbCr {
    pub y: f64,
    pub cb: f64,
    pub cr: f64,
}

pub fn ycbcr_from_rgb(c: &ColorTriplet) -> YCbCr {
    let y = KR * c.r + KG * c.g + KB * c.b;
    YCbCr {
        y,
        cb: (c.b - y) / CB_DIVISOR,
        cr: (c.r - y) / CR_DIVISOR,
    }
}

/// Inverse of [`ycbcr_from_rgb`]. No clamping is applied; out-of-gamut
/// inputs produce channels outside `[0, 1]`.
pub fn rgb_from_ycbcr(v: &YCbCr, bit_depth: u32) -> ColorTriplet {
    let r = v.cr * CR_DIVISOR + v.y;
    let b = v.cb * CB_DIVISOR + v.y;
    let g = (v.y - KR * r - KB * b) / KG;
    ColorTriplet { r, g, b, bit_depth }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    #[test]
    fn red_photon_energy() {
        let p = photon_energy(700.0).unwrap();
        assert!((p.energy_ev - 1.8).abs() / 1.8 < 0.02, "{}", p.energy_ev);
        assert!((p.energy_j - 2.8e-19).abs() / 2.8e-19 < 0.02);
    }

    #[test]
    fn green_photon_energy() {
        let p = photon_energy(555.0).unwrap();
        assert_relative_eq!(p.energy_j, 3.581e-19, max_relative = 1e-3);
        assert_relative_eq!(p.energy_ev, 2.235, max_relative = 1e-3);
    }

    #[test]
    fn photon_energy_rejects_nonpositive() {
        assert!(photon_energy(0.0).is_err());
        assert!(photon_energy(-5.0).is_err());
        assert!(photon_energy(f64::NAN).is_err());
    }

    #[test]
    fn photon_energy_halves_with_double_wavelength() {
        let a = photon_energy(400.0).unwrap();
        let b = photon_energy(800.0).unwrap();
        assert_relative_eq!(a.energy_j, 2.0 * b.energy_j, max_relative = 1e-12);
    }

    #[test]
    fn band_table_energies_bracket() {
        let ev = [
            (ColorBand::Violet, 2.75, 3.26),
            (ColorBand::Blue, 2.50, 2.75),
            (ColorBand::Green, 2.17, 2.50),
            (ColorBand::Yellow, 2.10, 2.17),
            (ColorBand::Orange, 2.00, 2.10),
            (ColorBand::Red, 1.65, 2.00),
        ];
        for ((band, lo, hi), (eband, elo, ehi)) in BANDS.iter().zip(ev) {
            assert_eq!(*band, eband);
            let e_hi = photon_energy(*lo).unwrap().energy_ev;
            let e_lo = photon_energy(*hi).unwrap().energy_ev;
            assert!((e_hi - ehi).abs() / ehi < 0.02, "{band:?} {e_hi} vs {ehi}");
            assert!((e_lo - elo).abs() / elo < 0.02, "{band:?} {e_lo} vs {elo}");
        }
    }

    #[test]
    fn photon_rate_examples() {
        let photon = photon_energy(700.0).unwrap();
        let src = LightSource {
            source_energy_j: photon.energy_j,
            ..Default::default()
        };
        let (rate, _) = photon_rate_and_flux(&src, &photon).unwrap();
        assert_relative_eq!(rate, 1.0, max_relative = 1e-12);

        let fixed = PhotonSpec {
            wavelength_nm: 700.0,
            energy_j: 2.8e-19,
            energy_ev: 0.0,
        };
        let (rate, flux) = photon_rate_and_flux(&LightSource::default(), &fixed).unwrap();
        assert_relative_eq!(rate, 3.571e18, max_relative = 1e-3);
        assert_eq!(rate, flux);

        let wide = LightSource {
            area_m2: 2.0,
            ..Default::default()
        };
        let (rate2, flux2) = photon_rate_and_flux(&wide, &fixed).unwrap();
        assert_eq!(rate2, rate);
        assert_relative_eq!(flux2, flux / 2.0);

        let zero_area = LightSource {
            area_m2: 0.0,
            ..Default::default()
        };
        assert!(photon_rate_and_flux(&zero_area, &fixed).is_err());
    }

    #[test]
    fn luminous_examples() {
        let src = LightSource::default();
        let grid: Vec<f64> = (0..=37).map(|i| 380.0 + 10.0 * i as f64).collect();
        let (_, flux) = luminous_quantities(&src, |_| 1.0, &grid, |_| 0.0).unwrap();
        assert_eq!(flux, 0.0);

        let (iv, _) = luminous_quantities(&src, |_| 1.0, &[555.0], gaussian_efficiency).unwrap();
        assert_relative_eq!(iv, 683.0, max_relative = 1e-12);

        let (_, f1) = luminous_quantities(&src, |l| l / 500.0, &grid, gaussian_efficiency).unwrap();
        let (_, f3) =
            luminous_quantities(&src, |l| 3.0 * l / 500.0, &grid, gaussian_efficiency).unwrap();
        assert_relative_eq!(f3, 3.0 * f1, max_relative = 1e-12);

        assert!(luminous_quantities(&src, |_| 1.0, &[], gaussian_efficiency).is_err());
        assert!(luminous_quantities(&src, |_| 1.0, &[500.0, 400.0], gaussian_efficiency).is_err());
        assert!(luminous_quantities(&src, |_| 1.0, &[300.0], gaussian_efficiency).is_err());
    }

    #[test]
    fn trapezoid_matches_closed_form_for_linear_integrand() {
        // V = 1, Φe = λ: ∫ λ dλ over [400, 600] = (600² − 400²) / 2, exact for trapezoids.
        let grid: Vec<f64> = (0..=20).map(|i| 400.0 + 10.0 * i as f64).collect();
        let (_, flux) =
            luminous_quantities(&LightSource::default(), |l| l, &grid, |_| 1.0).unwrap();
        assert_relative_eq!(flux, 683.0 * 100_000.0, max_relative = 1e-12);
    }

    #[test]
    fn illumination_examples() {
        let src = LightSource {
            etendue: 2.5,
            ..Default::default()
        };
        let ill = luminance_and_illuminance(&src, 2.5).unwrap();
        assert_relative_eq!(ill.luminance, 1.0);

        let far = LightSource {
            strength_w: 100.0,
            distance_m: 2.0,
            ..Default::default()
        };
        let ill = luminance_and_illuminance(&far, 1.0).unwrap();
        assert_relative_eq!(ill.sphere_area, 50.265, max_relative = 1e-4);
        assert_relative_eq!(ill.pointance, 1.9894, max_relative = 1e-4);
        assert_relative_eq!(ill.illuminance, 0.4974, max_relative = 1e-3);

        let dense = LightSource {
            refraction_index: 2.0,
            ..Default::default()
        };
        let base = luminance_and_illuminance(&LightSource::default(), 1.0).unwrap();
        let quad = luminance_and_illuminance(&dense, 1.0).unwrap();
        assert_relative_eq!(quad.luminance, 4.0 * base.luminance);

        let bad = LightSource {
            etendue: 0.0,
            ..Default::default()
        };
        assert!(luminance_and_illuminance(&bad, 1.0).is_err());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_wavelength(500.0), ColorBand::Green);
        assert_eq!(classify_wavelength(380.0), ColorBand::Violet);
        assert_eq!(classify_wavelength(495.0), ColorBand::Green);
        assert_eq!(classify_wavelength(749.9), ColorBand::Red);
        assert_eq!(classify_wavelength(750.0), ColorBand::NonVisible);
        assert_eq!(classify_wavelength(200.0), ColorBand::NonVisible);
    }

    #[test]
    fn ycbcr_examples() {
        let w = ycbcr_from_rgb(&ColorTriplet::new(1.0, 1.0, 1.0));
        assert_relative_eq!(w.y, 1.0, epsilon = 1e-12);
        assert!(w.cb.abs() < 1e-12 && w.cr.abs() < 1e-12);

        let r = ycbcr_from_rgb(&ColorTriplet::new(1.0, 0.0, 0.0));
        assert_relative_eq!(r.y, 0.2627);
        assert_relative_eq!(r.cr, (1.0 - 0.2627) / 1.4746);
        assert!((r.cr - 0.5).abs() < 1e-4);

        let b = ycbcr_from_rgb(&ColorTriplet::new(0.0, 0.0, 1.0));
        assert!((b.cb - 0.5).abs() < 1e-4);
    }

    #[test]
    fn integer_triplet_conversion() {
        let c = ColorTriplet::from_integer(0, 512, 1023, 10).unwrap();
        assert_eq!(c.to_integer().unwrap(), [0, 512, 1023]);
        assert!(ColorTriplet::from_integer(256, 0, 0, 8).is_err());
    }
}
