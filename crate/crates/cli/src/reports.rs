//! Report structs shared by the text and `--json` output paths.

use serde::Serialize;

#[derive(Serialize)]
pub struct SolveReport {
    pub n: usize,
    pub coincidence: f64,
    pub gradient_norm: f64,
    pub extremality_residual: f64,
    pub trace_v: f64,
    pub trace_w: f64,
    pub discrimination_a: bool,
    pub discrimination_b: bool,
    pub corollary_local_max: bool,
    pub classification: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_max: Option<f64>,
    pub converged: bool,
    pub restarts: usize,
    pub converged_restarts: usize,
}

impl SolveReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("coincidence rate C({}) = {:.12}\n", self.n, self.coincidence));
        out.push_str(&format!("gradient norm        = {:.3e}\n", self.gradient_norm));
        out.push_str(&format!("extremality residual = {:.3e}\n", self.extremality_residual));
        out.push_str(&format!(
            "multiplier traces    = {:.12} / {:.12}\n",
            self.trace_v, self.trace_w
        ));
        out.push_str(&format!(
            "discrimination (V, W) satisfied = {} / {}\n",
            self.discrimination_a, self.discrimination_b
        ));
        out.push_str(&format!("corollary local max  = {}\n", self.corollary_local_max));
        out.push_str(&format!("classification       = {}\n", self.classification));
        if let (Some(lo), Some(hi)) = (self.hessian_min, self.hessian_max) {
            out.push_str(&format!("hessian extremes     = [{lo:.6e}, {hi:.6e}]\n"));
        }
        out.push_str(&format!(
            "converged = {} ({}/{} restarts)\n",
            self.converged, self.converged_restarts, self.restarts
        ));
        out
    }
}

#[derive(Serialize)]
pub struct CheckReport {
    pub coincidence: f64,
    pub extremality_residual: f64,
    pub extremal: bool,
    pub trace_v: f64,
    pub trace_w: f64,
    pub discrimination_a: bool,
    pub discrimination_b: bool,
    pub classification: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_max: Option<f64>,
}

impl CheckReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("coincidence rate     = {:.12}\n", self.coincidence));
        out.push_str(&format!(
            "extremality residual = {:.3e} (extremal: {})\n",
            self.extremality_residual, self.extremal
        ));
        out.push_str(&format!(
            "multiplier traces    = {:.12} / {:.12}\n",
            self.trace_v, self.trace_w
        ));
        out.push_str(&format!(
            "discrimination (V, W) satisfied = {} / {}\n",
            self.discrimination_a, self.discrimination_b
        ));
        out.push_str(&format!("classification       = {}\n", self.classification));
        if let (Some(lo), Some(hi)) = (self.hessian_min, self.hessian_max) {
            out.push_str(&format!("hessian extremes     = [{lo:.6e}, {hi:.6e}]\n"));
        }
        out
    }
}
