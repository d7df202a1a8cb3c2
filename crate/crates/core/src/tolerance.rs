/// Numerical thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// `max ||phi| - 1|` below which a line connection counts as unitary.
    pub unitary: f64,
    /// `|det(phi) - 1|` allowed for SL₂ transports.
    pub sl2_det: f64,
    /// Relative pivot size (against the largest entry) treated as an exact zero.
    pub pivot: f64,
    /// Condition estimate above which a solve is refused.
    pub condition: f64,
    /// Allowed `M_ij - adj(M_ji)` deviation for self-dual block matrices.
    pub self_dual: f64,
    /// Allowed `||M + Mᵀ||` for Pfaffian input.
    pub antisymmetry: f64,
    /// Relative coefficient mismatch allowed when testing reciprocity.
    pub reciprocal: f64,
    /// Relative imaginary part below which a polynomial root counts as real.
    pub real_root: f64,
    /// Slack on conditional kernel diagonals before clamping into [0, 1].
    pub kernel_clamp: f64,
    /// Kernel diagonal excursion that aborts a sampling run.
    pub kernel_fail: f64,
    /// Backward error ‖ΔG − I‖∞ / (‖Δ‖∞ ‖G‖∞) accepted from a Green's function solve.
    pub green_residual: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        unitary: 1e-12,
        sl2_det: 1e-10,
        pivot: 1e-13,
        condition: 1e12,
        self_dual: 1e-10,
        antisymmetry: 1e-10,
        reciprocal: 1e-9,
        real_root: 1e-7,
        kernel_clamp: 1e-9,
        kernel_fail: 1e-6,
        green_residual: 1e-8,
    };

    /// Overrides one field by name; used by the CLI `--tol key=value` flag.
    pub fn set(&mut self, key: &str, value: f64) -> crate::Result<()> {
        let slot = match key {
            "unitary" => &mut self.unitary,
            "sl2_det" => &mut self.sl2_det,
            "pivot" => &mut self.pivot,
            "condition" => &mut self.condition,
            "self_dual" => &mut self.self_dual,
            "antisymmetry" => &mut self.antisymmetry,
            "reciprocal" => &mut self.reciprocal,
            "real_root" => &mut self.real_root,
            "kernel_clamp" => &mut self.kernel_clamp,
            "kernel_fail" => &mut self.kernel_fail,
            "green_residual" => &mut self.green_residual,
            _ => return Err(crate::Error::invalid(format!("unknown tolerance `{key}`"))),
        };
        if !(value.is_finite() && value > 0.0) {
            return Err(crate::Error::invalid(format!(
                "tolerance `{key}` must be positive"
            )));
        }
        *slot = value;
        Ok(())
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
