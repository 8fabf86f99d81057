use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fde_toeplitz::experiments::{
    coeff_csv, coeff_table, cn_csv, cn_table, extremes, extremes_csv, mgm_csv, mgm_table, mineig_csv, mineig_table,
    outlier_csv, outlier_table, parse_sizes, pcg_csv, pcg_table, preconditioned_spectra, standard_cases, BoundsReport,
    MgmConfig, PcgConfig, RhsKind,
};
use fde_toeplitz::multigrid::{MgmCase, MgmTag, TauVariant};
use fde_toeplitz::preconditioners::PrecKind;
use fde_toeplitz::toeplitz::CoeffOptions;

#[derive(Parser, Debug)]
#[command(name = "fde-toeplitz", version, about = "Spectral bounds and solver experiments for distributed-order FDE Toeplitz matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// k1, k2 and c_infinity with error estimates
    Bounds,
    /// (n, c_n) pairs
    Cn,
    /// (n, n·λ1(A_n), k2, k1) rows
    Mineig,
    /// Fourier coefficients of A_n
    Coeffs,
    /// PCG iteration counts
    Pcg,
    /// Extreme eigenvalues of preconditioned matrices
    Spectrum,
    /// Outlier counts around 1
    Outliers,
    /// Two-grid and V-cycle iteration counts
    Mgm,
    /// Every table into the --out directory
    All,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Options {
    /// `a..b` (doubling) or a comma list
    #[arg(long, global = true)]
    sizes: Option<String>,
    /// Comma list of I, CS, CF, TN, TF, L, or `all`
    #[arg(long, global = true)]
    precs: Option<String>,
    /// Comma list of outlier half-widths
    #[arg(long, global = true, default_value = "0.1,0.01")]
    eps: String,
    /// Multigrid case: alpha, beta, gamma, delta, finest, or `all`
    #[arg(long, global = true, default_value = "all")]
    case: String,
    /// Presmoothing steps for case gamma
    #[arg(long, global = true, default_value_t = 1)]
    nu_pre: usize,
    /// Tau smoother on the finest level
    #[arg(long, global = true, default_value = "frobenius")]
    tau: String,
    /// Scaled-residual tolerance
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol: f64,
    /// Absolute tolerance of the quadratures
    #[arg(long, global = true, default_value_t = 1e-10)]
    quad_tol: f64,
    /// Seed for the random-solution right-hand side
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Right-hand side: ones or random-solution
    #[arg(long, global = true, default_value = "ones")]
    rhs: String,
    /// Output file, or directory for `all`
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn default_sizes(cmd: Command) -> &'static str {
    match cmd {
        Command::Cn => "8..4096",
        Command::Mineig => "16..2048",
        Command::Coeffs => "32",
        Command::Mgm => "31..2047",
        _ => "32..2048",
    }
}

fn default_precs(cmd: Command) -> &'static str {
    match cmd {
        Command::Spectrum => "CS,CF,TN,TF,L",
        Command::Outliers => "TN,TF",
        _ => "all",
    }
}

fn parse_precs(s: &str) -> Result<Vec<PrecKind>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(PrecKind::ALL.to_vec());
    }
    Ok(s.split(',').map(|p| p.trim().parse()).collect::<fde_toeplitz::Result<_>>()?)
}

fn parse_eps(s: &str) -> Result<Vec<f64>> {
    let eps = s
        .split(',')
        .map(|e| e.trim().parse::<f64>().with_context(|| format!("invalid eps '{e}'")))
        .collect::<Result<Vec<_>>>()?;
    if !eps.iter().all(|e| *e > 0.0) {
        bail!("eps values must be positive");
    }
    Ok(eps)
}

fn parse_cases(s: &str, nu_pre: usize) -> Result<Vec<MgmCase>> {
    let mut cases = if s.eq_ignore_ascii_case("all") {
        standard_cases()
    } else {
        s.split(',')
            .map(|t| Ok(MgmCase::standard(t.trim().parse::<MgmTag>()?)))
            .collect::<Result<Vec<_>>>()?
    };
    for c in &mut cases {
        if c.tag == MgmTag::Gamma {
            *c = MgmCase::new(MgmTag::Gamma, nu_pre, c.nu_post)?;
        }
    }
    Ok(cases)
}

fn check_sizes(cmd: Command, sizes: &[usize]) -> Result<()> {
    for &n in sizes {
        let ok = match cmd {
            Command::Mgm => n >= 3 && (n + 1).is_power_of_two(),
            Command::Mineig => n >= 4,
            Command::Cn | Command::Coeffs | Command::Pcg | Command::Spectrum | Command::Outliers => n >= 2,
            Command::Bounds | Command::All => true,
        };
        if !ok {
            bail!("size {n} is not valid for this command");
        }
    }
    Ok(())
}

struct Emitted {
    csv: String,
    json: String,
}

fn emitted<T: Serialize + ?Sized>(csv: String, value: &T) -> Result<Emitted> {
    Ok(Emitted {
        csv,
        json: serde_json::to_string_pretty(value)? + "\n",
    })
}

struct Runner {
    opts: Options,
    coeffs: CoeffOptions,
}

impl Runner {
    fn sizes(&self, cmd: Command) -> Result<Vec<usize>> {
        let spec = match (&self.opts.sizes, cmd) {
            (Some(s), c) if c != Command::All => s.clone(),
            _ => default_sizes(cmd).to_string(),
        };
        let sizes = parse_sizes(&spec)?;
        check_sizes(cmd, &sizes)?;
        Ok(sizes)
    }

    fn precs(&self, cmd: Command) -> Result<Vec<PrecKind>> {
        match (&self.opts.precs, cmd) {
            (Some(s), c) if c != Command::All => parse_precs(s),
            _ => parse_precs(default_precs(cmd)),
        }
    }

    fn rhs(&self) -> Result<RhsKind> {
        Ok(self.opts.rhs.parse()?)
    }

    fn run(&self, cmd: Command) -> Result<Emitted> {
        let o = &self.opts;
        match cmd {
            Command::Bounds => {
                let b = BoundsReport::compute(o.quad_tol)?;
                emitted(b.to_csv(), &b)
            }
            Command::Cn => {
                let rows = cn_table(&self.sizes(cmd)?, o.quad_tol)?;
                emitted(cn_csv(&rows), &rows)
            }
            Command::Mineig => {
                let b = BoundsReport::compute(o.quad_tol)?;
                let rows = mineig_table(&self.sizes(cmd)?, &self.coeffs, b.k1, b.k2)?;
                emitted(mineig_csv(&rows), &rows)
            }
            Command::Coeffs => {
                let rows = coeff_table(&self.sizes(cmd)?, &self.coeffs)?;
                emitted(coeff_csv(&rows), &rows)
            }
            Command::Pcg => {
                let cfg = PcgConfig {
                    tol: o.tol,
                    rhs: self.rhs()?,
                    seed: o.seed,
                };
                let runs = pcg_table(&self.sizes(cmd)?, &self.precs(cmd)?, &cfg, &self.coeffs)?;
                emitted(pcg_csv(&runs), &runs)
            }
            Command::Spectrum => {
                let spectra = preconditioned_spectra(&self.sizes(cmd)?, &self.precs(cmd)?, &self.coeffs)?;
                let rows = extremes(&spectra);
                emitted(extremes_csv(&rows), &rows)
            }
            Command::Outliers => {
                let spectra = preconditioned_spectra(&self.sizes(cmd)?, &self.precs(cmd)?, &self.coeffs)?;
                let rows = outlier_table(&spectra, &parse_eps(&o.eps)?)?;
                emitted(outlier_csv(&rows), &rows)
            }
            Command::Mgm => {
                let cfg = MgmConfig {
                    tol: o.tol,
                    rhs: self.rhs()?,
                    seed: o.seed,
                    tau: o.tau.parse::<TauVariant>()?,
                    ..MgmConfig::default()
                };
                let rows = mgm_table(&self.sizes(cmd)?, &parse_cases(&o.case, o.nu_pre)?, &cfg, &self.coeffs)?;
                emitted(mgm_csv(&rows), &rows)
            }
            Command::All => unreachable!("handled by run_all"),
        }
    }

    fn run_all(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let ext = match self.opts.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let pick = |e: &Emitted| match self.opts.format {
            Format::Csv => e.csv.clone(),
            Format::Json => e.json.clone(),
        };
        for (name, cmd) in [
            ("bounds", Command::Bounds),
            ("cn", Command::Cn),
            ("mineig", Command::Mineig),
            ("coeffs", Command::Coeffs),
            ("pcg", Command::Pcg),
            ("mgm", Command::Mgm),
        ] {
            let e = self.run(cmd).with_context(|| format!("running {name}"))?;
            write_file(&dir.join(format!("{name}.{ext}")), &pick(&e))?;
        }
        // one set of spectra feeds both the extreme-eigenvalue and outlier tables
        let sizes = parse_sizes(default_sizes(Command::Spectrum))?;
        let spectra = preconditioned_spectra(&sizes, &parse_precs(default_precs(Command::Spectrum))?, &self.coeffs)?;
        let rows = extremes(&spectra);
        write_file(&dir.join(format!("spectrum.{ext}")), &pick(&emitted(extremes_csv(&rows), &rows)?))?;
        let tau: Vec<_> = spectra
            .into_iter()
            .filter(|s| matches!(s.preconditioner, PrecKind::NaturalTau | PrecKind::FrobeniusTau))
            .collect();
        let rows = outlier_table(&tau, &parse_eps(&self.opts.eps)?)?;
        write_file(&dir.join(format!("outliers.{ext}")), &pick(&emitted(outlier_csv(&rows), &rows)?))?;
        Ok(())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let runner = Runner {
        opts: cli.opts,
        coeffs: CoeffOptions::default(),
    };
    if cli.command == Command::All {
        let dir = runner.opts.out.clone().unwrap_or_else(|| PathBuf::from("results"));
        return runner.run_all(&dir);
    }
    let e = runner.run(cli.command)?;
    let text = match runner.opts.format {
        Format::Csv => e.csv,
        Format::Json => e.json,
    };
    match &runner.opts.out {
        Some(path) => write_file(path, &text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
