//! Market primitives: quality metrics, utility, inverse demands, the Shannon
//! production function, costs and profits.
//!
//! Conventions:
//! - `gamma = -ln P_FA`, so the detection probability at zero sensing power
//!   is exactly the false-alarm probability `e^{-gamma}`.
//! - The communication metric uses the natural log, the rate uses base 2.
//! - The sensing inverse demand evaluates both Marcum functions at threshold
//!   `sqrt(2 gamma)`, the value that makes it the derivative of the detection
//!   probability. A threshold of `2 gamma` in the first-order condition would
//!   not be consistent with the detection probability itself.

use std::f64::consts::LN_2;
use std::fmt;

use thiserror::Error;

use crate::specfun::{self, MarcumOrder, SpecFunError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{name}` must be a finite positive number, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("`{quantity}` = {value} is outside the domain of {function}")]
    Domain {
        function: &'static str,
        quantity: &'static str,
        value: f64,
    },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

fn domain(function: &'static str, quantity: &'static str, value: f64) -> ModelError {
    ModelError::Domain {
        function,
        quantity,
        value,
    }
}

fn require_non_negative(
    function: &'static str,
    quantity: &'static str,
    value: f64,
) -> Result<(), ModelError> {
    if value >= 0.0 {
        Ok(())
    } else {
        Err(domain(function, quantity, value))
    }
}

fn require_positive(
    function: &'static str,
    quantity: &'static str,
    value: f64,
) -> Result<(), ModelError> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(domain(function, quantity, value))
    }
}

/// Names of the exogenous model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parameter {
    Gamma,
    GammaT,
    GammaC,
    Alpha,
    Beta,
    PowerPrice,
    BandwidthPrice,
}

impl Parameter {
    pub const ALL: [Parameter; 7] = [
        Parameter::Gamma,
        Parameter::GammaT,
        Parameter::GammaC,
        Parameter::Alpha,
        Parameter::Beta,
        Parameter::PowerPrice,
        Parameter::BandwidthPrice,
    ];

    /// Key used in configuration files and CSV output.
    pub fn name(self) -> &'static str {
        match self {
            Parameter::Gamma => "gamma",
            Parameter::GammaT => "gamma_T",
            Parameter::GammaC => "gamma_C",
            Parameter::Alpha => "alpha",
            Parameter::Beta => "beta",
            Parameter::PowerPrice => "w_p",
            Parameter::BandwidthPrice => "w_w",
        }
    }

    pub fn from_name(name: &str) -> Option<Parameter> {
        Parameter::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exogenous parameters of the market. Every field is strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    gamma: f64,
    gamma_t: f64,
    gamma_c: f64,
    alpha: f64,
    beta: f64,
    w_p: f64,
    w_w: f64,
}

impl Default for ModelParams {
    /// γ = 5, γ_T = 1, γ̃_C = 1, α = β = 1, w_p = w_w = 0.01.
    fn default() -> Self {
        ModelParams {
            gamma: 5.0,
            gamma_t: 1.0,
            gamma_c: 1.0,
            alpha: 1.0,
            beta: 1.0,
            w_p: 0.01,
            w_w: 0.01,
        }
    }
}

impl ModelParams {
    pub fn new(
        gamma: f64,
        gamma_t: f64,
        gamma_c: f64,
        alpha: f64,
        beta: f64,
        w_p: f64,
        w_w: f64,
    ) -> Result<Self, ModelError> {
        let mut params = ModelParams::default();
        for (p, v) in Parameter::ALL
            .into_iter()
            .zip([gamma, gamma_t, gamma_c, alpha, beta, w_p, w_w])
        {
            params = params.with(p, v)?;
        }
        Ok(params)
    }

    /// Copy with one parameter replaced.
    pub fn with(mut self, parameter: Parameter, value: f64) -> Result<Self, ModelError> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: parameter.name(),
                value,
            });
        }
        *self.slot(parameter) = value;
        Ok(self)
    }

    pub fn get(&self, parameter: Parameter) -> f64 {
        match parameter {
            Parameter::Gamma => self.gamma,
            Parameter::GammaT => self.gamma_t,
            Parameter::GammaC => self.gamma_c,
            Parameter::Alpha => self.alpha,
            Parameter::Beta => self.beta,
            Parameter::PowerPrice => self.w_p,
            Parameter::BandwidthPrice => self.w_w,
        }
    }

    fn slot(&mut self, parameter: Parameter) -> &mut f64 {
        match parameter {
            Parameter::Gamma => &mut self.gamma,
            Parameter::GammaT => &mut self.gamma_t,
            Parameter::GammaC => &mut self.gamma_c,
            Parameter::Alpha => &mut self.alpha,
            Parameter::Beta => &mut self.beta,
            Parameter::PowerPrice => &mut self.w_p,
            Parameter::BandwidthPrice => &mut self.w_w,
        }
    }

    /// False-alarm exponent `-ln P_FA`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Aggregate sensing channel gain per unit power.
    pub fn gamma_t(&self) -> f64 {
        self.gamma_t
    }

    /// Aggregate communication gain (bandwidth per unit power).
    pub fn gamma_c(&self) -> f64 {
        self.gamma_c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Unit price of transmit power.
    pub fn w_p(&self) -> f64 {
        self.w_p
    }

    /// Unit price of bandwidth.
    pub fn w_w(&self) -> f64 {
        self.w_w
    }

    /// Marcum threshold `sqrt(2 gamma)`.
    pub fn detection_threshold(&self) -> f64 {
        (2.0 * self.gamma).sqrt()
    }

    fn sensing_amplitude(&self, p_r: f64) -> f64 {
        (2.0 * p_r * self.gamma_t).sqrt()
    }
}

/// Quantities of the three input factors bought by the operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub p_r: f64,
    pub p_c: f64,
    pub w_c: f64,
}

impl Allocation {
    pub fn new(p_r: f64, p_c: f64, w_c: f64) -> Result<Self, ModelError> {
        require_non_negative("Allocation", "P_r", p_r)?;
        require_non_negative("Allocation", "P_c", p_c)?;
        require_non_negative("Allocation", "W_c", w_c)?;
        Ok(Allocation { p_r, p_c, w_c })
    }
}

/// Unit prices of the two commodities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceQuote {
    pub p1: f64,
    pub p2: f64,
}

/// Radar detection probability `Q_1(sqrt(2 P_r γ_T), sqrt(2γ))`; this is also
/// the sensing quality metric θ.
pub fn detection_probability(p_r: f64, params: &ModelParams) -> Result<f64, ModelError> {
    require_non_negative("detection_probability", "P_r", p_r)?;
    Ok(specfun::marcum_q(
        MarcumOrder::FIRST,
        params.sensing_amplitude(p_r),
        params.detection_threshold(),
    )?)
}

/// Miss probability `1 - θ(P_r)`, accurate where θ is close to one.
pub fn miss_probability(p_r: f64, params: &ModelParams) -> Result<f64, ModelError> {
    require_non_negative("miss_probability", "P_r", p_r)?;
    Ok(specfun::marcum_q_complement(
        MarcumOrder::FIRST,
        params.sensing_amplitude(p_r),
        params.detection_threshold(),
    )?)
}

/// Shannon production function `W_c log2(1 + P_c γ̃_C / W_c)`; zero at
/// `W_c = 0` by continuity.
pub fn comm_rate(p_c: f64, w_c: f64, params: &ModelParams) -> Result<f64, ModelError> {
    require_non_negative("comm_rate", "P_c", p_c)?;
    require_non_negative("comm_rate", "W_c", w_c)?;
    if p_c == 0.0 || w_c == 0.0 {
        return Ok(0.0);
    }
    if w_c.is_infinite() {
        return Ok(p_c * params.gamma_c / LN_2);
    }
    Ok(w_c * (p_c * params.gamma_c / w_c).ln_1p() / LN_2)
}

/// Partial derivatives `(∂ρ/∂P_c, ∂ρ/∂W_c)` of the production function.
pub fn comm_rate_gradient(
    p_c: f64,
    w_c: f64,
    params: &ModelParams,
) -> Result<(f64, f64), ModelError> {
    require_non_negative("comm_rate_gradient", "P_c", p_c)?;
    require_positive("comm_rate_gradient", "W_c", w_c)?;
    let snr = p_c * params.gamma_c / w_c;
    let d_power = params.gamma_c / (LN_2 * (1.0 + snr));
    let d_bandwidth = snr.ln_1p() / LN_2 - snr / (LN_2 * (1.0 + snr));
    Ok((d_power, d_bandwidth))
}

/// Communication quality `η(R_c) = ln(1 + R_c)`.
pub fn comm_utility(r_c: f64) -> Result<f64, ModelError> {
    require_non_negative("comm_utility", "R_c", r_c)?;
    Ok(r_c.ln_1p())
}

/// Quasilinear utility of the representative user.
pub fn user_utility(
    (p_r, r_c): (f64, f64),
    prices: PriceQuote,
    params: &ModelParams,
) -> Result<f64, ModelError> {
    let sensing = params.alpha * detection_probability(p_r, params)? - prices.p1 * p_r;
    let comm = params.beta * comm_utility(r_c)? - prices.p2 * r_c;
    Ok(sensing + comm)
}

/// Inverse demand for rate, `β / (1 + R_c)`.
pub fn inverse_demand_p2(r_c: f64, params: &ModelParams) -> Result<f64, ModelError> {
    require_non_negative("inverse_demand_p2", "R_c", r_c)?;
    Ok(params.beta / (1.0 + r_c))
}

/// Rate demanded at unit price `p2`, `β / p2 - 1`.
pub fn demand_rc(p2: f64, params: &ModelParams) -> Result<f64, ModelError> {
    if !(p2 > 0.0 && p2 <= params.beta) {
        return Err(domain("demand_rc", "p2", p2));
    }
    Ok(params.beta / p2 - 1.0)
}

/// Inverse demand for sensing power: the marginal sensing utility
/// `α γ_T [Q_2 - Q_1](sqrt(2 P_r γ_T), sqrt(2γ))`.
pub fn inverse_demand_p1(p_r: f64, params: &ModelParams) -> Result<f64, ModelError> {
    require_positive("inverse_demand_p1", "P_r", p_r)?;
    let kernel =
        specfun::marcum_q_difference(params.sensing_amplitude(p_r), params.detection_threshold())?;
    Ok(params.alpha * params.gamma_t * kernel)
}

/// `lim_{P_r -> 0+} p1(P_r) = α γ_T γ e^{-γ}`, the price at which sensing
/// demand vanishes.
pub fn sensing_choke_price(params: &ModelParams) -> f64 {
    params.alpha * params.gamma_t * params.gamma * (-params.gamma).exp()
}

pub fn costs(alloc: &Allocation, params: &ModelParams) -> f64 {
    params.w_p * (alloc.p_r + alloc.p_c) + params.w_w * alloc.w_c
}

/// Sensing profit `p1(P_r) P_r - w_p P_r`.
pub fn profit_r(p_r: f64, params: &ModelParams) -> Result<f64, ModelError> {
    Ok(inverse_demand_p1(p_r, params)? * p_r - params.w_p * p_r)
}

/// Communication revenue `p2(ρ) ρ = β ρ / (1 + ρ)`, bounded above by β.
pub fn comm_revenue(rate: f64, params: &ModelParams) -> Result<f64, ModelError> {
    Ok(inverse_demand_p2(rate, params)? * rate)
}

/// Communication profit `p2(ρ) ρ - w_p P_c - w_w W_c` with `ρ = ρ(P_c, W_c)`.
pub fn profit_c(p_c: f64, w_c: f64, params: &ModelParams) -> Result<f64, ModelError> {
    require_positive("profit_c", "W_c", w_c)?;
    let rate = comm_rate(p_c, w_c, params)?;
    Ok(comm_revenue(rate, params)? - params.w_p * p_c - params.w_w * w_c)
}

/// Total profit: revenue from both commodities less input-factor costs.
pub fn profit_total(alloc: &Allocation, params: &ModelParams) -> Result<f64, ModelError> {
    require_positive("profit_total", "W_c", alloc.w_c)?;
    let p1 = inverse_demand_p1(alloc.p_r, params)?;
    let rate = comm_rate(alloc.p_c, alloc.w_c, params)?;
    let p2 = inverse_demand_p2(rate, params)?;
    Ok(p1 * alloc.p_r + p2 * rate - costs(alloc, params))
}
