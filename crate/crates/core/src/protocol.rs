//! Heisenberg-picture propagation of the broadcast protocol.
//!
//! A [`SymbolicState`] holds the four tracked quadratures (target X̂, Ŷ and
//! source q̂, p̂) as polynomials over the registered Gaussian input variables.
//! Gates rewrite those polynomials exactly:
//!
//! * `A_qy(g)`:  X ← X + g·q,  p ← p − g·Y
//! * `A_px(g)`:  Y ← Y − g·p,  q ← q + g·X
//! * `N(γ)`:     p ← p − γ·V′(q)  with V(x) = xⁿ/n
//!
//! and the composite protocol is A_qy(g₄)·A_px(g₃)·N·A_px(g₂)·A_qy(g₁).
//!
//! Each ideal gate can be replaced by its hybrid-channel realisation: the
//! writer imprints on a travelling mediator mode, the mediator suffers pure
//! loss, the receiver couples to what arrives, and the mediator readout is
//! measured and fed forward onto the writer's momentum.  Mechanical heating
//! and uniform amplitude damping are applied per pulse.

use alloc::format;
use alloc::vec;
use core::fmt;

use crate::gaussian::GaussianEnsemble;
use crate::poly::{PolyError, QuadPoly, Role, DEFAULT_DEGREE_CAP};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GateType {
    /// Writes source q onto target X; backaction kicks source p with Y.
    Qy,
    /// Writes target X onto source q; backaction kicks target Y with p.
    Px,
}

/// Named gain assignments (g₁, g₂, g₃, g₄) for the four-gate sequence.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Regime {
    /// (−1/g, g, −g, 1/g): the source returns to its input state and the
    /// target picks up Y ← Y − γgⁿ·Xⁿ⁻¹ exactly.
    FullBroadcast { g: f64 },
    /// (0, g, −g, 0): two-gate variant; the broadcast inherits source noise.
    Simplified { g: f64 },
    /// (g₁, g − 1/g₁, −g, 1/g): trades an X-quadrature rescaling for a
    /// momentum-squeezed noise floor Var(p)/g₁² in the broadcast.
    SqueezingGeneration { g: f64, g1: f64 },
    Custom { gains: [f64; 4] },
}

impl Regime {
    pub fn gains(&self) -> Result<[f64; 4], ProtocolError> {
        let gains = match *self {
            Regime::FullBroadcast { g } => {
                if g == 0.0 {
                    return Err(ProtocolError::InvalidParameter(
                        "full-broadcast regime needs g != 0",
                    ));
                }
                [-1.0 / g, g, -g, 1.0 / g]
            }
            Regime::Simplified { g } => [0.0, g, -g, 0.0],
            Regime::SqueezingGeneration { g, g1 } => {
                if g == 0.0 || g1 == 0.0 {
                    return Err(ProtocolError::InvalidParameter(
                        "squeezing-generation regime needs g != 0 and g1 != 0",
                    ));
                }
                [g1, g - 1.0 / g1, -g, 1.0 / g]
            }
            Regime::Custom { gains } => gains,
        };
        if gains.iter().any(|g| !g.is_finite()) {
            return Err(ProtocolError::InvalidParameter("gains must be finite"));
        }
        Ok(gains)
    }

    /// Coupling λ* = γ·gⁿ delivered to the target, where the broadcast term
    /// is −λ*·Xⁿ⁻¹ (exactly for the full-broadcast and squeezing-generation
    /// regimes, up to source contamination for the simplified one).
    pub fn delivered_coupling(&self, gamma: f64, order: u32) -> Option<f64> {
        let g = match *self {
            Regime::FullBroadcast { g } => g,
            Regime::Simplified { g } => g,
            Regime::SqueezingGeneration { g, .. } => g,
            Regime::Custom { .. } => return None,
        };
        let mut gn = 1.0;
        for _ in 0..order {
            gn *= g;
        }
        Some(gamma * gn)
    }
}

/// Gaussian initial state of one oscillator mode.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum ModeState {
    Vacuum,
    /// Position-squeezed for r > 0: Var(pos) = e^{−2r}, Var(mom) = e^{2r}.
    Squeezed { r: f64 },
    Thermal { nbar: f64 },
    /// Var(pos) = (2n̄+1)·s, Var(mom) = (2n̄+1)/s.
    SqueezedThermal { nbar: f64, s: f64 },
}

impl ModeState {
    /// (position variance, momentum variance); vacuum is (1, 1).
    pub fn variances(&self) -> Result<(f64, f64), ProtocolError> {
        match *self {
            ModeState::Vacuum => Ok((1.0, 1.0)),
            ModeState::Squeezed { r } => {
                if !r.is_finite() {
                    return Err(ProtocolError::InvalidParameter("squeezing must be finite"));
                }
                Ok((libm::exp(-2.0 * r), libm::exp(2.0 * r)))
            }
            ModeState::Thermal { nbar } => {
                if !(nbar >= 0.0) {
                    return Err(ProtocolError::InvalidParameter("nbar must be >= 0"));
                }
                Ok((2.0 * nbar + 1.0, 2.0 * nbar + 1.0))
            }
            ModeState::SqueezedThermal { nbar, s } => {
                if !(nbar >= 0.0) {
                    return Err(ProtocolError::InvalidParameter("nbar must be >= 0"));
                }
                if !(s > 0.0) {
                    return Err(ProtocolError::InvalidParameter("s must be > 0"));
                }
                let v = 2.0 * nbar + 1.0;
                Ok((v * s, v / s))
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum ProtocolError {
    Degree(PolyError),
    InvalidParameter(&'static str),
}

impl fmt::Display for ProtocolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolError::Degree(e) => write!(f, "{e}"),
            ProtocolError::InvalidParameter(msg) => write!(f, "{msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ProtocolError {}

impl From<PolyError> for ProtocolError {
    fn from(e: PolyError) -> Self {
        ProtocolError::Degree(e)
    }
}

/// Feedforward gain rule for the hybrid channel.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FeedforwardPolicy {
    /// K = g_w·√η: the backaction gain equals the delivered gain, so the
    /// effective gate is the ideal one plus additive noise.
    GainSymmetric,
    /// K = g_w/√η: the mediator readout cancels exactly from the writer's
    /// momentum, at the price of a backaction gain inflated to g/η.
    CancelMediator,
}

/// One hybrid gate, fully parametrised.
///
/// Writer coupling `g_writer` imprints the writer position on the mediator
/// signal; after transmission `eta`, receiver coupling `g_receiver` maps the
/// arriving signal into the receiver position; the mediator readout (variance
/// `1/mediator_s`) is measured and added to the writer momentum with gain
/// `ff_gain`.  `heating` is the classical variance added to each mechanical
/// quadrature per pulse (2Γ_m·τ) and `damping` the uniform amplitude-damping
/// factor applied to both systems after the pulse.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct HybridChannelParams {
    pub g_writer: f64,
    pub g_receiver: f64,
    pub eta: f64,
    pub mediator_s: f64,
    pub ff_gain: f64,
    pub heating: f64,
    pub damping: f64,
}

impl HybridChannelParams {
    fn validate(&self) -> Result<(), ProtocolError> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(ProtocolError::InvalidParameter("eta must be in (0, 1]"));
        }
        if !(self.mediator_s > 0.0) {
            return Err(ProtocolError::InvalidParameter("mediator_s must be > 0"));
        }
        if !(self.heating >= 0.0) {
            return Err(ProtocolError::InvalidParameter("heating must be >= 0"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(ProtocolError::InvalidParameter("damping must be in (0, 1]"));
        }
        if ![self.g_writer, self.g_receiver, self.ff_gain]
            .iter()
            .all(|g| g.is_finite())
        {
            return Err(ProtocolError::InvalidParameter("gains must be finite"));
        }
        Ok(())
    }

    /// (gain delivered to the receiver position, backaction gain on the
    /// writer momentum): (g_w·g_r·√η, K·g_r).
    pub fn effective_gains(&self) -> (f64, f64) {
        (
            self.g_writer * self.g_receiver * libm::sqrt(self.eta),
            self.ff_gain * self.g_receiver,
        )
    }

    /// Coefficient K·√η − g_w of the initial mediator readout left in the
    /// writer momentum; zero under [`FeedforwardPolicy::CancelMediator`].
    pub fn readout_coefficient(&self) -> f64 {
        self.ff_gain * libm::sqrt(self.eta) - self.g_writer
    }

    /// Coefficient g_r·√η of the initial mediator signal entering the
    /// receiver position.  It is proportional to the delivered gain and can
    /// never be tuned away: the same coupling that carries the gate carries
    /// the mediator's own fluctuations.
    pub fn signal_coefficient(&self) -> f64 {
        self.g_receiver * libm::sqrt(self.eta)
    }
}

/// Channel settings shared by all four gates of a noisy protocol run.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct NoiseModel {
    pub eta: f64,
    pub mediator_s: f64,
    pub policy: FeedforwardPolicy,
    pub heating: f64,
    pub damping: f64,
}

impl NoiseModel {
    pub fn lossless() -> Self {
        NoiseModel {
            eta: 1.0,
            mediator_s: 1.0,
            policy: FeedforwardPolicy::GainSymmetric,
            heating: 0.0,
            damping: 1.0,
        }
    }

    /// Equal-split couplings realising effective gain `g`:
    /// g_w·g_r·√η = g with |g_w| = |g_r|, plus the policy's feedforward K.
    pub fn params_for(&self, g: f64) -> HybridChannelParams {
        let root_eta = libm::sqrt(self.eta);
        let c = libm::sqrt(g.abs() / root_eta);
        let g_writer = if g < 0.0 { -c } else { c };
        let ff_gain = match self.policy {
            FeedforwardPolicy::GainSymmetric => g_writer * root_eta,
            FeedforwardPolicy::CancelMediator => g_writer / root_eta,
        };
        HybridChannelParams {
            g_writer,
            g_receiver: c,
            eta: self.eta,
            mediator_s: self.mediator_s,
            ff_gain,
            heating: self.heating,
            damping: self.damping,
        }
    }
}

/// Symmetric-ordered means and covariances of the four tracked quadratures,
/// in the order (X, Y, q, p).
#[derive(Clone, Copy, Debug)]
pub struct QuadMoments {
    pub mean: [f64; 4],
    pub cov: [[f64; 4]; 4],
}

/// The protocol state: four quadrature expressions over a growing registry
/// of Gaussian input variables.
#[derive(Clone, Debug)]
pub struct SymbolicState {
    pub ensemble: GaussianEnsemble,
    /// Target position-like quadrature X̂.
    pub x: QuadPoly,
    /// Target momentum-like quadrature Ŷ.
    pub y: QuadPoly,
    /// Source position q̂.
    pub q: QuadPoly,
    /// Source momentum p̂.
    pub p: QuadPoly,
    /// Nonlinearity order n in V(x) = xⁿ/n; 3 is the cubic gate.
    pub order: u32,
    pub degree_cap: u32,
    gate_count: u32,
}

impl SymbolicState {
    pub fn new(
        target: ModeState,
        source: ModeState,
        order: u32,
    ) -> Result<Self, ProtocolError> {
        if order < 2 {
            return Err(ProtocolError::InvalidParameter(
                "nonlinearity order must be >= 2",
            ));
        }
        let mut ensemble = GaussianEnsemble::new();
        let (x, y) = ensemble.add_pair("atom_x", "atom_y", Role::AtomX, Role::AtomY);
        let (q, p) = ensemble.add_pair("mech_q", "mech_p", Role::MechQ, Role::MechP);
        let (tx, ty) = target.variances()?;
        ensemble.set_var(x, tx);
        ensemble.set_var(y, ty);
        let (sq, sp) = source.variances()?;
        ensemble.set_var(q, sq);
        ensemble.set_var(p, sp);
        Ok(SymbolicState {
            ensemble,
            x: QuadPoly::var(x),
            y: QuadPoly::var(y),
            q: QuadPoly::var(q),
            p: QuadPoly::var(p),
            order,
            degree_cap: DEFAULT_DEGREE_CAP.max(order - 1),
            gate_count: 0,
        })
    }

    /// X ← X + g·q, p ← p − g·Y.
    pub fn apply_qnd_qy(&mut self, g: f64) {
        self.x = self.x.add_scaled(&self.q, g);
        self.p = self.p.add_scaled(&self.y, -g);
    }

    /// Y ← Y − g·p, q ← q + g·X.
    pub fn apply_qnd_px(&mut self, g: f64) {
        self.y = self.y.add_scaled(&self.p, -g);
        self.q = self.q.add_scaled(&self.x, g);
    }

    /// p ← p − γ·V′(q) with V′(q) = qⁿ⁻¹.
    pub fn apply_nonlinearity(&mut self, gamma: f64) -> Result<(), ProtocolError> {
        let vprime = self.q.pow_capped(self.order - 1, self.degree_cap)?;
        self.p = self.p.add_scaled(&vprime, -gamma);
        Ok(())
    }

    /// One hybrid gate.  `Qy` writes from the source, `Px` from the target.
    pub fn apply_hybrid_qnd(
        &mut self,
        params: &HybridChannelParams,
        gate: GateType,
    ) -> Result<(), ProtocolError> {
        params.validate()?;
        let tag = self.gate_count;
        self.gate_count += 1;

        let (xl, pl) = self.ensemble.add_pair(
            &format!("mediator{tag}_x"),
            &format!("mediator{tag}_p"),
            Role::MediatorX,
            Role::MediatorY,
        );
        self.ensemble.set_var(xl, params.mediator_s);
        self.ensemble.set_var(pl, 1.0 / params.mediator_s);

        let (pos_w, mom_w, pos_r, mom_r) = match gate {
            GateType::Qy => (&self.q, &self.p, &self.x, &self.y),
            GateType::Px => (&self.x, &self.y, &self.q, &self.p),
        };

        // Writer QND: X_L ← X_L + g_w·pos_w, mom_w ← mom_w − g_w·P_L.
        let xl_after_write = QuadPoly::var(xl).add_scaled(pos_w, params.g_writer);
        let mom_w_new = mom_w.add_scaled(&QuadPoly::var(pl), -params.g_writer);

        // Pure loss on the mediator while it travels.
        let (xl_arrived, pl_arrived) = if params.eta < 1.0 {
            let (vx, vp) = self.ensemble.add_pair(
                &format!("loss{tag}_x"),
                &format!("loss{tag}_p"),
                Role::Vacuum,
                Role::Vacuum,
            );
            let t = libm::sqrt(params.eta);
            let r = libm::sqrt(1.0 - params.eta);
            (
                xl_after_write.scale(t).add_scaled(&QuadPoly::var(vx), r),
                QuadPoly::var(pl).scale(t).add_scaled(&QuadPoly::var(vp), r),
            )
        } else {
            (xl_after_write, QuadPoly::var(pl))
        };

        // Receiver QND: pos_r ← pos_r + g_r·X_L, P_L ← P_L − g_r·mom_r.
        let pos_r_new = pos_r.add_scaled(&xl_arrived, params.g_receiver);
        let pl_readout = pl_arrived.add_scaled(mom_r, -params.g_receiver);

        // Homodyne the readout and feed it forward onto the writer momentum.
        let mom_w_new = mom_w_new.add_scaled(&pl_readout, params.ff_gain);

        match gate {
            GateType::Qy => {
                self.p = mom_w_new;
                self.x = pos_r_new;
            }
            GateType::Px => {
                self.y = mom_w_new;
                self.q = pos_r_new;
            }
        }

        if params.heating > 0.0 {
            let hq = self.ensemble.add_classical(
                &format!("heat{tag}_q"),
                Role::Thermal,
                0.0,
                params.heating,
            );
            let hp = self.ensemble.add_classical(
                &format!("heat{tag}_p"),
                Role::Thermal,
                0.0,
                params.heating,
            );
            self.q = self.q.add_scaled(&QuadPoly::var(hq), 1.0);
            self.p = self.p.add_scaled(&QuadPoly::var(hp), 1.0);
        }

        if params.damping < 1.0 {
            let d = params.damping;
            let r = libm::sqrt(1.0 - d * d);
            let (ax, ay) = self.ensemble.add_pair(
                &format!("damp{tag}_ax"),
                &format!("damp{tag}_ay"),
                Role::Vacuum,
                Role::Vacuum,
            );
            self.x = self.x.scale(d).add_scaled(&QuadPoly::var(ax), r);
            self.y = self.y.scale(d).add_scaled(&QuadPoly::var(ay), r);
            let (mq, mp) = self.ensemble.add_pair(
                &format!("damp{tag}_mq"),
                &format!("damp{tag}_mp"),
                Role::Vacuum,
                Role::Vacuum,
            );
            self.q = self.q.scale(d).add_scaled(&QuadPoly::var(mq), r);
            self.p = self.p.scale(d).add_scaled(&QuadPoly::var(mp), r);
        }
        Ok(())
    }

    /// A_qy(g₄)·A_px(g₃)·N(γ)·A_px(g₂)·A_qy(g₁) with ideal gates.
    pub fn run_unitary_protocol(
        &mut self,
        regime: &Regime,
        gamma: f64,
    ) -> Result<(), ProtocolError> {
        let [g1, g2, g3, g4] = regime.gains()?;
        self.apply_qnd_qy(g1);
        self.apply_qnd_px(g2);
        self.apply_nonlinearity(gamma)?;
        self.apply_qnd_px(g3);
        self.apply_qnd_qy(g4);
        Ok(())
    }

    /// The same sequence with every gate realised by the hybrid channel.
    /// Zero-gain gates mean no pulse is sent and are skipped entirely.
    pub fn run_noisy_protocol(
        &mut self,
        regime: &Regime,
        gamma: f64,
        noise: &NoiseModel,
    ) -> Result<(), ProtocolError> {
        let [g1, g2, g3, g4] = regime.gains()?;
        for (g, gate) in [(g1, GateType::Qy), (g2, GateType::Px)] {
            if g != 0.0 {
                self.apply_hybrid_qnd(&noise.params_for(g), gate)?;
            }
        }
        self.apply_nonlinearity(gamma)?;
        for (g, gate) in [(g3, GateType::Px), (g4, GateType::Qy)] {
            if g != 0.0 {
                self.apply_hybrid_qnd(&noise.params_for(g), gate)?;
            }
        }
        Ok(())
    }

    /// Means and symmetric covariances of (X, Y, q, p).
    pub fn quad_moments(&self) -> QuadMoments {
        let exprs = [&self.x, &self.y, &self.q, &self.p];
        let mut mean = [0.0; 4];
        for (i, e) in exprs.iter().enumerate() {
            mean[i] = self.ensemble.expectation(e);
        }
        let mut cov = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..=i {
                let c = self.ensemble.covariance(exprs[i], exprs[j]);
                cov[i][j] = c;
                cov[j][i] = c;
            }
        }
        QuadMoments { mean, cov }
    }

    /// Commutators of the linear parts of (X, Y, q, p), in units of 2i.
    ///
    /// Gates, loss, feedforward, heating and damping are linear, and the
    /// nonlinearity adds a polynomial with no linear part, so the linear
    /// parts evolve exactly under the composed symplectic network; a
    /// canonical result ([[0,1],[−1,0]] blocks) certifies that the network
    /// conserves the canonical commutation relations.
    pub fn commutation_matrix(&self) -> [[f64; 4]; 4] {
        let exprs = [&self.x, &self.y, &self.q, &self.p];
        let n = self.ensemble.len();
        let mut lin = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (i, e) in exprs.iter().enumerate() {
            for v in e.vars() {
                lin[i][v.0 as usize] = e.linear_coeff(v);
            }
        }
        let mut c = [[0.0; 4]; 4];
        for &(a, b) in self.ensemble.pairs() {
            let (a, b) = (a.0 as usize, b.0 as usize);
            for i in 0..4 {
                for j in 0..4 {
                    c[i][j] += lin[i][a] * lin[j][b] - lin[i][b] * lin[j][a];
                }
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::VarId;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const CANONICAL: [[f64; 4]; 4] = [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ];

    fn max_coeff(p: &QuadPoly) -> f64 {
        p.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max)
    }

    fn vacuum_state() -> SymbolicState {
        SymbolicState::new(ModeState::Vacuum, ModeState::Vacuum, 3).unwrap()
    }

    /// 4×4 linear action of one gate on (X, Y, q, p).
    fn gate_matrix(gate: GateType, g: f64) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            m[i][i] = 1.0;
        }
        match gate {
            GateType::Qy => {
                m[0][2] = g;
                m[3][1] = -g;
            }
            GateType::Px => {
                m[1][3] = -g;
                m[2][0] = g;
            }
        }
        m
    }

    fn matmul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    fn linear_matrix(state: &SymbolicState) -> [[f64; 4]; 4] {
        let ids: [VarId; 4] = [VarId(0), VarId(1), VarId(2), VarId(3)];
        let exprs = [&state.x, &state.y, &state.q, &state.p];
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = exprs[i].linear_coeff(ids[j]);
            }
        }
        m
    }

    #[test]
    fn broadcast_regime_is_exact() {
        for (g, gamma) in [(1.26, 0.15), (-0.7, 0.4), (2.2, 0.02)] {
            let mut st = vacuum_state();
            st.run_unitary_protocol(&Regime::FullBroadcast { g }, gamma).unwrap();
            let (x0, y0, q0, p0) = (VarId(0), VarId(1), VarId(2), VarId(3));
            // X, q, p return to their inputs exactly.
            assert!(max_coeff(&st.x.sub(&QuadPoly::var(x0))) < 1e-12);
            assert!(max_coeff(&st.q.sub(&QuadPoly::var(q0))) < 1e-12);
            assert!(max_coeff(&st.p.sub(&QuadPoly::var(p0))) < 1e-12);
            // Y picks up exactly −γg³·X².
            let want = QuadPoly::var(y0).add_scaled(
                &QuadPoly::var(x0).pow_capped(2, 4).unwrap(),
                -gamma * g * g * g,
            );
            assert!(max_coeff(&st.y.sub(&want)) < 1e-12, "{}", st.y);
        }
    }

    #[test]
    fn general_gains_match_closed_form() {
        let (g1, g2, g3, g4) = (0.8, -1.3, 0.5, 1.7);
        let gamma = 0.21;
        let mut st = vacuum_state();
        st.run_unitary_protocol(&Regime::Custom { gains: [g1, g2, g3, g4] }, gamma)
            .unwrap();
        let (x0, y0, q0, p0) = (VarId(0), VarId(1), VarId(2), VarId(3));
        let s = g2 + g3;
        let want_x = QuadPoly::linear(
            0.0,
            &[(x0, 1.0 + g4 * s), (q0, g4 + g1 * (1.0 + g4 * s))],
        );
        assert!(max_coeff(&st.x.sub(&want_x)) < 1e-12);
        // Y_f = (1+g1·s)·Y − s·p + g3·γ·((1+g1g2)q + g2X)².
        let w = QuadPoly::linear(0.0, &[(q0, 1.0 + g1 * g2), (x0, g2)]);
        let want_y = QuadPoly::linear(0.0, &[(y0, 1.0 + g1 * s), (p0, -s)])
            .add_scaled(&w.pow_capped(2, 4).unwrap(), g3 * gamma);
        assert!(max_coeff(&st.y.sub(&want_y)) < 1e-12, "{}", st.y);
    }

    #[test]
    fn squeezing_generation_coefficients() {
        let (g, g1) = (1.26, 1.2);
        let gamma = 0.15;
        let mut st = vacuum_state();
        st.run_unitary_protocol(&Regime::SqueezingGeneration { g, g1 }, gamma)
            .unwrap();
        let (x0, y0, q0, p0) = (VarId(0), VarId(1), VarId(2), VarId(3));
        let want_x = QuadPoly::linear(0.0, &[(x0, 1.0 - 1.0 / (g * g1)), (q0, g1)]);
        assert!(max_coeff(&st.x.sub(&want_x)) < 1e-12);
        // Y_f = p/g₁ − gγ·(g·X_f)² with no residual Y or displacement.
        assert_relative_eq!(st.y.linear_coeff(y0), 0.0, epsilon = 1e-12);
        assert_relative_eq!(st.y.linear_coeff(p0), 1.0 / g1, epsilon = 1e-12);
        let want_y = QuadPoly::linear(0.0, &[(p0, 1.0 / g1)])
            .add_scaled(&want_x.scale(g).pow_capped(2, 4).unwrap(), -g * gamma);
        assert!(max_coeff(&st.y.sub(&want_y)) < 1e-12);
    }

    #[test]
    fn lossless_hybrid_matches_ideal_gate_coefficients() {
        let noise = NoiseModel::lossless();
        for regime in [
            Regime::FullBroadcast { g: 1.26 },
            Regime::Simplified { g: 0.9 },
            Regime::SqueezingGeneration { g: 1.26, g1: 1.2 },
        ] {
            let mut ideal = vacuum_state();
            ideal.run_unitary_protocol(&regime, 0.15).unwrap();
            let mut noisy = vacuum_state();
            noisy.run_noisy_protocol(&regime, 0.15, &noise).unwrap();
            // Coefficients on the original four variables agree exactly.
            let mi = linear_matrix(&ideal);
            let mn = linear_matrix(&noisy);
            for i in 0..4 {
                for j in 0..4 {
                    assert!((mi[i][j] - mn[i][j]).abs() < 1e-12, "({i},{j})");
                }
            }
            // The measured mediator readout cancels from every quadrature;
            // only its signal quadrature survives, riding on the delivered
            // gain into each receiver position.
            for id in 0..noisy.ensemble.len() as u32 {
                let id = VarId(id);
                if noisy.ensemble.role(id) == Role::MediatorY {
                    for e in [&noisy.x, &noisy.y, &noisy.q, &noisy.p] {
                        assert!(e.linear_coeff(id).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn hybrid_effective_gains_follow_policy() {
        let g = -0.8;
        for eta in [1.0, 0.9, 0.6] {
            let sym = NoiseModel { eta, ..NoiseModel::lossless() };
            let p = sym.params_for(g);
            let (recv, back) = p.effective_gains();
            assert_relative_eq!(recv, g, epsilon = 1e-12);
            assert_relative_eq!(back, g, epsilon = 1e-12);

            let canc = NoiseModel {
                eta,
                policy: FeedforwardPolicy::CancelMediator,
                ..NoiseModel::lossless()
            };
            let p = canc.params_for(g);
            let (recv, back) = p.effective_gains();
            assert_relative_eq!(recv, g, epsilon = 1e-12);
            assert_relative_eq!(back, g / eta, epsilon = 1e-12);
            assert_relative_eq!(p.readout_coefficient(), 0.0, epsilon = 1e-12);
            assert!(p.signal_coefficient().abs() > 0.0);
        }
    }

    #[test]
    fn heating_adds_variance_only_to_source() {
        let mut st = vacuum_state();
        let base = st.quad_moments();
        let noise = NoiseModel { heating: 0.3, ..NoiseModel::lossless() };
        st.apply_hybrid_qnd(&noise.params_for(1.0), GateType::Qy).unwrap();
        let after = st.quad_moments();
        // q was not touched by a Qy gate apart from heating.
        assert_relative_eq!(after.cov[2][2], base.cov[2][2] + 0.3, epsilon = 1e-12);
        // p gains the heating plus backaction/readout noise.
        assert!(after.cov[3][3] > base.cov[3][3] + 0.3);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Regime::FullBroadcast { g: 0.0 }.gains().is_err());
        assert!(Regime::SqueezingGeneration { g: 1.0, g1: 0.0 }.gains().is_err());
        assert!(ModeState::Thermal { nbar: -1.0 }.variances().is_err());
        assert!(ModeState::SqueezedThermal { nbar: 1.0, s: 0.0 }.variances().is_err());
        assert!(SymbolicState::new(ModeState::Vacuum, ModeState::Vacuum, 1).is_err());
        let mut st = vacuum_state();
        let mut params = NoiseModel::lossless().params_for(1.0);
        params.eta = 1.5;
        assert!(st.apply_hybrid_qnd(&params, GateType::Qy).is_err());
    }

    #[test]
    fn delivered_coupling_is_gamma_g_to_the_order() {
        let r = Regime::FullBroadcast { g: 1.26 };
        assert_relative_eq!(
            r.delivered_coupling(0.15, 3).unwrap(),
            0.15 * 1.26f64.powi(3),
            epsilon = 1e-15
        );
        assert!(Regime::Custom { gains: [0.0; 4] }.delivered_coupling(0.1, 3).is_none());
    }

    proptest! {
        // The linear part of the protocol equals the 4×4 gate-matrix product
        // even with the nonlinearity in between (it adds no linear terms).
        #[test]
        fn linear_part_matches_matrix_product(
            g1 in -2.0f64..2.0,
            g2 in -2.0f64..2.0,
            g3 in -2.0f64..2.0,
            g4 in -2.0f64..2.0,
            gamma in 0.0f64..0.5,
        ) {
            let mut st = vacuum_state();
            st.run_unitary_protocol(&Regime::Custom { gains: [g1, g2, g3, g4] }, gamma)
                .unwrap();
            let mut want = gate_matrix(GateType::Qy, g1);
            want = matmul(&gate_matrix(GateType::Px, g2), &want);
            want = matmul(&gate_matrix(GateType::Px, g3), &want);
            want = matmul(&gate_matrix(GateType::Qy, g4), &want);
            let got = linear_matrix(&st);
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert!((got[i][j] - want[i][j]).abs() < 1e-10);
                }
            }
        }

        // Any hybrid protocol is a symplectic network on the linear parts.
        #[test]
        fn noisy_protocol_preserves_commutators(
            g in 0.3f64..2.0,
            g1 in 0.5f64..1.5,
            eta in 0.5f64..1.0,
            s in 1.0f64..3.0,
            heating in 0.0f64..0.3,
            damping in 0.7f64..1.0,
            cancel in proptest::bool::ANY,
        ) {
            let noise = NoiseModel {
                eta,
                mediator_s: s,
                policy: if cancel {
                    FeedforwardPolicy::CancelMediator
                } else {
                    FeedforwardPolicy::GainSymmetric
                },
                heating,
                damping,
            };
            let mut st = vacuum_state();
            st.run_noisy_protocol(
                &Regime::SqueezingGeneration { g, g1 },
                0.15,
                &noise,
            ).unwrap();
            let c = st.commutation_matrix();
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert!((c[i][j] - CANONICAL[i][j]).abs() < 1e-9,
                        "commutator ({i},{j}) = {}", c[i][j]);
                }
            }
        }
    }
}
