//! A small trial-only sweep driven by an inline TOML config, followed by an
//! envelope fit of the residuals.
use flatdisc::experiment::{
    fit_remainder, residual_points, run_sweep, RemainderModel, SweepConfig,
};

fn main() -> flatdisc::Result<()> {
    let out = std::env::temp_dir().join("flatdisc-sweep-example");
    let cfg = SweepConfig::from_toml(&format!(
        r#"
regime = "fixed"
omega = 4.0
eps_list = [0.1, 0.07, 0.05]
nr = 128
ntheta = 256
mode = "trial_only"
out_dir = "{}"
"#,
        out.display()
    ))?;
    let outcome = run_sweep(&cfg)?;
    print!("{}", std::fs::read_to_string(&outcome.csv_path)?);
    let pts = residual_points(&outcome.records, false);
    let fit = fit_remainder(&pts, RemainderModel::EpsLogEps)?;
    println!("K = {:.3}, goodness {:.3}", fit.k, fit.goodness);
    println!("records in {}", out.display());
    Ok(())
}
