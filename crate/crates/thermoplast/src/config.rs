//! Plain-text configuration: `section.key = value` lines with `#` comments.
//! Every key has a default, so the empty file is a runnable configuration;
//! a `scenario = <name>` line applies a named preset first and explicit keys
//! override it. Parsing reports the offending key and line number for every
//! violation; serialization is canonical so parse -> serialize -> parse is
//! the identity.

use crate::error::SimError;
use crate::lift::FluxSpec;
use crate::model::{BodyForceSpec, InitialThetaSpec, ModelConfig, ThermalStressKind};

/// File-output controls, parsed from the `output` section.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: String,
    /// Snapshot cadence in steps; the initial and final states are always
    /// written.
    pub snapshot_every: usize,
    /// Also dump the boundary-lift trajectory as CSV.
    pub dump_lift: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            snapshot_every: 10,
            dump_lift: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub model: ModelConfig,
    pub output: OutputConfig,
    pub scenario: Option<String>,
}

/// Built-in scenarios anchoring the regression baselines.
pub fn scenario_preset(name: &str) -> Option<ModelConfig> {
    let base = ModelConfig::default();
    match name {
        // ramped shear body force plus a steady boundary heat influx: drives
        // |P T| through the yield limit and the temperature through the
        // lowest truncation shells
        "shear_ramp" => Some(ModelConfig {
            body_force: BodyForceSpec::ShearRamp {
                amplitude: 25.0,
                ramp_time: 0.25,
            },
            flux: FluxSpec::Constant(1.0),
            ..base
        }),
        // hot Gaussian spot relaxing by diffusion, mechanics driven only by
        // thermal stress; stays elastic
        "thermal_bump" => Some(ModelConfig {
            body_force: BodyForceSpec::Zero,
            flux: FluxSpec::Zero,
            theta0: InitialThetaSpec::Bump {
                amplitude: 2.0,
                width: 0.2,
            },
            ..base
        }),
        // weak shear staying strictly inside the admissible set
        "elastic_only" => Some(ModelConfig {
            body_force: BodyForceSpec::ShearRamp {
                amplitude: 2.0,
                ramp_time: 0.25,
            },
            flux: FluxSpec::Zero,
            theta0: InitialThetaSpec::Constant(0.2),
            ..base
        }),
        _ => None,
    }
}

pub fn scenario_names() -> &'static [&'static str] {
    &["shear_ramp", "thermal_bump", "elastic_only"]
}

fn bad(key: &str, line: usize, msg: impl Into<String>) -> SimError {
    SimError::config_at(msg, key, line)
}

fn parse_f64(key: &str, line: usize, raw: &str) -> Result<f64, SimError> {
    raw.parse::<f64>()
        .map_err(|_| bad(key, line, format!("expected a number, got `{raw}`")))
}

fn parse_usize(key: &str, line: usize, raw: &str) -> Result<usize, SimError> {
    raw.parse::<usize>()
        .map_err(|_| bad(key, line, format!("expected a nonnegative integer, got `{raw}`")))
}

fn parse_bool(key: &str, line: usize, raw: &str) -> Result<bool, SimError> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad(key, line, format!("expected true or false, got `{raw}`"))),
    }
}

/// Parse a configuration text into a validated model + output description.
pub fn parse_config(text: &str) -> Result<ParsedConfig, SimError> {
    // first pass: tokenize and locate the scenario line
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    let mut scenario: Option<(usize, String)> = None;
    let mut seen: Vec<String> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            SimError::config_at("expected `key = value`", line, line_no)
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if seen.contains(&key) {
            return Err(bad(&key, line_no, "duplicate key"));
        }
        seen.push(key.clone());
        if key == "scenario" {
            scenario = Some((line_no, value));
        } else {
            entries.push((line_no, key, value));
        }
    }

    let mut model = match &scenario {
        Some((line, name)) => scenario_preset(name).ok_or_else(|| {
            bad(
                "scenario",
                *line,
                format!(
                    "unknown scenario `{name}`; available: {}",
                    scenario_names().join(", ")
                ),
            )
        })?,
        None => ModelConfig::default(),
    };
    let mut output = OutputConfig::default();
    let mut f_a_explicit = false;

    for (line, key, raw) in &entries {
        let line = *line;
        let raw = raw.as_str();
        match key.as_str() {
            "grid.nx" => model.nx = parse_usize(key, line, raw)?,
            "grid.ny" => model.ny = parse_usize(key, line, raw)?,
            "grid.lx" => model.lx = parse_f64(key, line, raw)?,
            "grid.ly" => model.ly = parse_f64(key, line, raw)?,
            "material.lame_first" => model.lame_first = parse_f64(key, line, raw)?,
            "material.lame_second" => model.lame_second = parse_f64(key, line, raw)?,
            "flow.k" => {
                model.yield_k = parse_f64(key, line, raw)?;
                if !(model.yield_k > 0.0) {
                    return Err(bad(key, line, "yield limit must be positive"));
                }
            }
            "flow.lambda" => {
                model.lambda = parse_f64(key, line, raw)?;
                if !(model.lambda > 0.0) {
                    return Err(bad(
                        key,
                        line,
                        "regularization parameter must be positive (the flow scales with 1/(2 lambda))",
                    ));
                }
            }
            "flow.f" => {
                model.f_spec.kind = match raw {
                    "piecewise_power" => ThermalStressKind::PiecewisePower,
                    "zero" => ThermalStressKind::Zero,
                    _ => {
                        return Err(bad(
                            key,
                            line,
                            format!("unknown thermal stress variant `{raw}` (piecewise_power | zero)"),
                        ))
                    }
                }
            }
            "flow.m" => {
                model.f_spec.m = parse_f64(key, line, raw)?;
                if !f_a_explicit {
                    model.f_spec.a = model.f_spec.m;
                }
            }
            "flow.alpha" => {
                model.f_spec.alpha = parse_f64(key, line, raw)?;
                if !(model.f_spec.alpha > 0.5 && model.f_spec.alpha < 5.0 / 6.0) {
                    return Err(bad(
                        key,
                        line,
                        format!(
                            "growth exponent must lie in the open interval (1/2, 5/6), got {}",
                            model.f_spec.alpha
                        ),
                    ));
                }
            }
            "flow.c_neg" => model.f_spec.c_neg = parse_f64(key, line, raw)?,
            "flow.a" => {
                model.f_spec.a = parse_f64(key, line, raw)?;
                f_a_explicit = true;
            }
            "thermal.theta0" => {
                model.theta0 = match raw {
                    "constant" => InitialThetaSpec::Constant(match model.theta0 {
                        InitialThetaSpec::Constant(c) => c,
                        _ => 0.0,
                    }),
                    "bump" => InitialThetaSpec::Bump {
                        amplitude: 1.0,
                        width: 0.2,
                    },
                    _ => {
                        return Err(bad(
                            key,
                            line,
                            format!("unknown initial temperature `{raw}` (constant | bump)"),
                        ))
                    }
                }
            }
            "thermal.theta0_value" => {
                let v = parse_f64(key, line, raw)?;
                model.theta0 = match model.theta0 {
                    InitialThetaSpec::Constant(_) => InitialThetaSpec::Constant(v),
                    InitialThetaSpec::Bump { width, .. } => InitialThetaSpec::Bump {
                        amplitude: v,
                        width,
                    },
                };
            }
            "thermal.theta0_width" => {
                let v = parse_f64(key, line, raw)?;
                if !(v > 0.0) {
                    return Err(bad(key, line, "bump width must be positive"));
                }
                model.theta0 = match model.theta0 {
                    InitialThetaSpec::Bump { amplitude, .. } => InitialThetaSpec::Bump {
                        amplitude,
                        width: v,
                    },
                    other => other,
                };
            }
            "thermal.g" => {
                model.flux = match raw {
                    "zero" => FluxSpec::Zero,
                    "constant" => FluxSpec::Constant(0.0),
                    "sin_t" => FluxSpec::SinT {
                        value: 0.0,
                        freq: 1.0,
                    },
                    "linear_x" => FluxSpec::LinearX { value: 0.0 },
                    _ => {
                        return Err(bad(
                            key,
                            line,
                            format!(
                                "unknown boundary flux `{raw}` (zero | constant | sin_t | linear_x)"
                            ),
                        ))
                    }
                }
            }
            "thermal.g_value" => {
                let v = parse_f64(key, line, raw)?;
                model.flux = match model.flux {
                    FluxSpec::Zero => FluxSpec::Constant(v),
                    FluxSpec::Constant(_) => FluxSpec::Constant(v),
                    FluxSpec::SinT { freq, .. } => FluxSpec::SinT { value: v, freq },
                    FluxSpec::LinearX { .. } => FluxSpec::LinearX { value: v },
                };
            }
            "thermal.g_freq" => {
                let v = parse_f64(key, line, raw)?;
                model.flux = match model.flux {
                    FluxSpec::SinT { value, .. } => FluxSpec::SinT { value, freq: v },
                    other => other,
                };
            }
            "loads.f" => {
                model.body_force = match raw {
                    "zero" => BodyForceSpec::Zero,
                    "constant" => BodyForceSpec::Constant { fx: 0.0, fy: 0.0 },
                    "shear_ramp" => BodyForceSpec::ShearRamp {
                        amplitude: 1.0,
                        ramp_time: 0.25,
                    },
                    "bump" => BodyForceSpec::Bump {
                        amplitude: 1.0,
                        width: 0.2,
                    },
                    _ => {
                        return Err(bad(
                            key,
                            line,
                            format!(
                                "unknown body force `{raw}` (zero | constant | shear_ramp | bump)"
                            ),
                        ))
                    }
                }
            }
            "loads.amplitude" => {
                let v = parse_f64(key, line, raw)?;
                model.body_force = match model.body_force {
                    BodyForceSpec::ShearRamp { ramp_time, .. } => BodyForceSpec::ShearRamp {
                        amplitude: v,
                        ramp_time,
                    },
                    BodyForceSpec::Bump { width, .. } => BodyForceSpec::Bump {
                        amplitude: v,
                        width,
                    },
                    other => other,
                };
            }
            "loads.ramp_time" => {
                let v = parse_f64(key, line, raw)?;
                model.body_force = match model.body_force {
                    BodyForceSpec::ShearRamp { amplitude, .. } => BodyForceSpec::ShearRamp {
                        amplitude,
                        ramp_time: v,
                    },
                    other => other,
                };
            }
            "loads.width" => {
                let v = parse_f64(key, line, raw)?;
                model.body_force = match model.body_force {
                    BodyForceSpec::Bump { amplitude, .. } => BodyForceSpec::Bump {
                        amplitude,
                        width: v,
                    },
                    other => other,
                };
            }
            "loads.fx" => {
                let v = parse_f64(key, line, raw)?;
                model.body_force = match model.body_force {
                    BodyForceSpec::Constant { fy, .. } => BodyForceSpec::Constant { fx: v, fy },
                    other => other,
                };
            }
            "loads.fy" => {
                let v = parse_f64(key, line, raw)?;
                model.body_force = match model.body_force {
                    BodyForceSpec::Constant { fx, .. } => BodyForceSpec::Constant { fx, fy: v },
                    other => other,
                };
            }
            "time.dt" => {
                model.dt = parse_f64(key, line, raw)?;
                if !(model.dt > 0.0) {
                    return Err(bad(key, line, "time step must be positive"));
                }
            }
            "time.t_end" => model.t_end = parse_f64(key, line, raw)?,
            "time.allow_dt_above_lambda" => {
                model.allow_dt_above_lambda = parse_bool(key, line, raw)?
            }
            "solver.cg_tol" => model.cg.tol = parse_f64(key, line, raw)?,
            "solver.cg_maxit" => model.cg.maxit = parse_usize(key, line, raw)?,
            "solver.jacobi" => model.cg.jacobi = parse_bool(key, line, raw)?,
            "solver.picard_tol" => model.picard_tol = parse_f64(key, line, raw)?,
            "solver.picard_max" => model.picard_max = parse_usize(key, line, raw)?,
            "solver.picard_damping" => model.picard_damping = parse_f64(key, line, raw)?,
            "solver.picard_exponent" => model.picard_exponent = parse_f64(key, line, raw)?,
            "solver.mech_tol" => model.mech_tol = parse_f64(key, line, raw)?,
            "solver.mech_max" => model.mech_max = parse_usize(key, line, raw)?,
            "output.dir" => output.dir = raw.to_string(),
            "output.snapshot_every" => output.snapshot_every = parse_usize(key, line, raw)?,
            "output.dump_lift" => output.dump_lift = parse_bool(key, line, raw)?,
            "output.diag_trunc_k" => model.diag_trunc_k = parse_f64(key, line, raw)?,
            "output.boccardo_q" => model.boccardo_q = parse_f64(key, line, raw)?,
            _ => return Err(bad(key, line, "unknown key")),
        }
    }

    model.validate()?;
    Ok(ParsedConfig {
        model,
        output,
        scenario: scenario.map(|(_, name)| name),
    })
}

fn fmt_f(v: f64) -> String {
    // shortest round-trip representation
    format!("{v}")
}

/// Canonical serialization; all keys explicit, fixed order.
pub fn serialize_config(cfg: &ParsedConfig) -> String {
    let m = &cfg.model;
    let mut out = String::new();
    let mut push = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    push("grid.nx", m.nx.to_string());
    push("grid.ny", m.ny.to_string());
    push("grid.lx", fmt_f(m.lx));
    push("grid.ly", fmt_f(m.ly));
    push("material.lame_first", fmt_f(m.lame_first));
    push("material.lame_second", fmt_f(m.lame_second));
    push("flow.k", fmt_f(m.yield_k));
    push("flow.lambda", fmt_f(m.lambda));
    push(
        "flow.f",
        match m.f_spec.kind {
            ThermalStressKind::PiecewisePower => "piecewise_power".into(),
            ThermalStressKind::Zero => "zero".into(),
        },
    );
    push("flow.m", fmt_f(m.f_spec.m));
    push("flow.alpha", fmt_f(m.f_spec.alpha));
    push("flow.c_neg", fmt_f(m.f_spec.c_neg));
    push("flow.a", fmt_f(m.f_spec.a));
    match m.theta0 {
        InitialThetaSpec::Constant(c) => {
            push("thermal.theta0", "constant".into());
            push("thermal.theta0_value", fmt_f(c));
        }
        InitialThetaSpec::Bump { amplitude, width } => {
            push("thermal.theta0", "bump".into());
            push("thermal.theta0_value", fmt_f(amplitude));
            push("thermal.theta0_width", fmt_f(width));
        }
    }
    match m.flux {
        FluxSpec::Zero => push("thermal.g", "zero".into()),
        FluxSpec::Constant(v) => {
            push("thermal.g", "constant".into());
            push("thermal.g_value", fmt_f(v));
        }
        FluxSpec::SinT { value, freq } => {
            push("thermal.g", "sin_t".into());
            push("thermal.g_value", fmt_f(value));
            push("thermal.g_freq", fmt_f(freq));
        }
        FluxSpec::LinearX { value } => {
            push("thermal.g", "linear_x".into());
            push("thermal.g_value", fmt_f(value));
        }
    }
    match m.body_force {
        BodyForceSpec::Zero => push("loads.f", "zero".into()),
        BodyForceSpec::Constant { fx, fy } => {
            push("loads.f", "constant".into());
            push("loads.fx", fmt_f(fx));
            push("loads.fy", fmt_f(fy));
        }
        BodyForceSpec::ShearRamp {
            amplitude,
            ramp_time,
        } => {
            push("loads.f", "shear_ramp".into());
            push("loads.amplitude", fmt_f(amplitude));
            push("loads.ramp_time", fmt_f(ramp_time));
        }
        BodyForceSpec::Bump { amplitude, width } => {
            push("loads.f", "bump".into());
            push("loads.amplitude", fmt_f(amplitude));
            push("loads.width", fmt_f(width));
        }
    }
    push("time.dt", fmt_f(m.dt));
    push("time.t_end", fmt_f(m.t_end));
    push(
        "time.allow_dt_above_lambda",
        m.allow_dt_above_lambda.to_string(),
    );
    push("solver.cg_tol", fmt_f(m.cg.tol));
    push("solver.cg_maxit", m.cg.maxit.to_string());
    push("solver.jacobi", m.cg.jacobi.to_string());
    push("solver.picard_tol", fmt_f(m.picard_tol));
    push("solver.picard_max", m.picard_max.to_string());
    push("solver.picard_damping", fmt_f(m.picard_damping));
    push("solver.picard_exponent", fmt_f(m.picard_exponent));
    push("solver.mech_tol", fmt_f(m.mech_tol));
    push("solver.mech_max", m.mech_max.to_string());
    push("output.dir", cfg.output.dir.clone());
    push("output.snapshot_every", cfg.output.snapshot_every.to_string());
    push("output.dump_lift", cfg.output.dump_lift.to_string());
    push("output.diag_trunc_k", fmt_f(m.diag_trunc_k));
    push("output.boccardo_q", fmt_f(m.boccardo_q));
    out
}
