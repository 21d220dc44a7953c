//! Command-line front end.
//!
//! Exit codes: 0 success, 1 semantic failure (verification, decoding or an
//! oracle mismatch), 2 usage or parse error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::codec::{self, ChannelOutput, CodecError, PatternSource};
use crate::format::{
    parse_family, parse_inline_matrix, parse_vector, render_family, render_vector,
};
use crate::gf::Field;
use crate::linalg::FieldMatrix;
use crate::udm::{
    self, construct, construct_by_oracle, exhaustive_search, lucas_entry, pascal_inverse_check,
    refute_bound, ErasureTuple, UdmError, UdmFamily, VerifyOptions, DEFAULT_SEARCH_BUDGET,
};

#[derive(Parser, Debug)]
#[command(
    name = "udm",
    version,
    about = "Universally decodable matrices over GF(q)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the (L, n, q) family built from Pascal matrices.
    Generate {
        /// Field order, a prime power.
        #[arg(long)]
        q: u64,
        /// Number of channels.
        #[arg(long = "L")]
        channels: usize,
        /// Block length.
        #[arg(long)]
        n: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the rank condition for every tuple with sum k = n.
    Verify {
        /// Family file, `-` for stdin.
        #[arg(long = "in")]
        input: PathBuf,
        /// Check every tuple with sum k >= n instead.
        #[arg(long)]
        superset: bool,
        /// Spread the tuples over worker threads (RAYON_NUM_THREADS sets the count).
        #[arg(long)]
        parallel: bool,
    },
    /// Apply a UDM-preserving transformation.
    Transform(TransformArgs),
    /// Encode, decode or round-trip information vectors.
    Codec {
        #[command(subcommand)]
        action: CodecAction,
    },
    /// Random erasure patterns against a family.
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = Pattern::Box)]
        pattern: Pattern,
        /// Per-symbol erasure probability for `--pattern geometric`.
        #[arg(long, default_value_t = 0.5)]
        erasure_prob: f64,
        /// Tuple for `--pattern fixed`, e.g. "0 0 1 2".
        #[arg(long)]
        k: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Independent cross-checks of the construction.
    Oracle {
        #[command(subcommand)]
        check: OracleCheck,
    },
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    op: Op,
    /// Tensor exponent for `tensor`.
    #[arg(long)]
    m: Option<usize>,
    /// Channel index for `left-tri`.
    #[arg(long)]
    index: Option<usize>,
    /// Matrix for `right-mul` and `left-tri`, rows separated by `;`.
    #[arg(long)]
    matrix: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Verify the result; a failure gives exit code 1.
    #[arg(long)]
    then_verify: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Op {
    Tensor,
    Reduce,
    ReversePairs,
    RightMul,
    LeftTri,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Pattern {
    /// Each k_l uniform on [0, n].
    Box,
    /// Uniform over tuples with sum k = n.
    Exact,
    /// Prefix up to the first erased symbol.
    Geometric,
    /// The tuple given by --k.
    Fixed,
}

#[derive(Subcommand, Debug)]
enum CodecAction {
    /// Print the channel observations for u, truncated to --k.
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
        /// Information vector, e.g. "1 0 0".
        #[arg(long)]
        u: String,
        /// Prefix lengths; every channel complete when omitted.
        #[arg(long)]
        k: Option<String>,
        /// Show erased positions as `?`.
        #[arg(long)]
        show_erasures: bool,
    },
    /// Recover u from observation lines `k=<k>: s0 s1 ...`.
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        /// Observation file, `-` for stdin.
        #[arg(long)]
        obs: PathBuf,
    },
    /// Encode, erase to --k and decode; PASS when u comes back.
    Roundtrip {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        u: String,
        #[arg(long)]
        k: String,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCheck {
    /// Entrywise comparison against Hasse derivatives of L^t.
    Hasse {
        #[arg(long)]
        q: u64,
        #[arg(long = "L")]
        channels: usize,
        #[arg(long)]
        n: usize,
    },
    /// Entrywise comparison against the radix-p digit factorization.
    Lucas {
        #[arg(long)]
        q: u64,
        #[arg(long = "L")]
        channels: usize,
        #[arg(long)]
        n: usize,
    },
    /// A_2 times Delta_0 ... Delta_{n-1} is the identity.
    Delta {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
    },
    /// Exhaustive search for families with A_0 = I, A_1 = J.
    Bound {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
        /// Channels to search; q + 2 when omitted.
        #[arg(long = "L")]
        channels: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u128,
    },
}

/// A failed command: the exit code and the message for stderr.
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn semantic(message: impl ToString) -> Failure {
    Failure {
        code: 1,
        message: message.to_string(),
    }
}

type Outcome = Result<(), Failure>;

/// Runs the CLI with explicit streams; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut ctx = Ctx { out: stdout };
    let result = match cli.command {
        Command::Generate {
            q,
            channels,
            n,
            out,
        } => ctx.generate(q, channels, n, out.as_deref()),
        Command::Verify {
            input,
            superset,
            parallel,
        } => ctx.verify(&input, VerifyOptions { superset, parallel }),
        Command::Transform(args) => ctx.transform(args),
        Command::Codec { action } => ctx.codec(action),
        Command::Simulate {
            input,
            trials,
            pattern,
            erasure_prob,
            k,
            seed,
        } => ctx.simulate(&input, trials, pattern, erasure_prob, k.as_deref(), seed),
        Command::Oracle { check } => ctx.oracle(check),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
}

macro_rules! say {
    ($ctx:expr, $($arg:tt)*) => {
        writeln!($ctx.out, $($arg)*).map_err(|e| usage(format!("write failed: {e}")))?
    };
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| usage(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
    }
}

fn load_family(path: &Path) -> Result<UdmFamily, Failure> {
    let text = read_input(path)?;
    parse_family(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn field_of_order(q: u64) -> Result<Field, Failure> {
    Field::from_order(q).map_err(usage)
}

fn parse_tuple(text: &str, family: &UdmFamily) -> Result<ErasureTuple, Failure> {
    let ks: Vec<usize> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| usage(format!("bad prefix length {t:?}")))
        })
        .collect::<Result<_, _>>()?;
    if ks.len() != family.num_channels() {
        return Err(usage(format!(
            "--k has {} entries, family has {} channels",
            ks.len(),
            family.num_channels()
        )));
    }
    ErasureTuple::new(ks, family.block_len()).map_err(usage)
}

fn codec_failure(e: CodecError) -> Failure {
    match e {
        CodecError::Parse(_) | CodecError::DimensionMismatch(_) => usage(e),
        _ => semantic(e),
    }
}

impl Ctx<'_> {
    /// Writes a family to `out` or stdout. Summary lines go to stdout only
    /// when the family itself went to a file.
    fn emit_family(&mut self, family: &UdmFamily, out: Option<&Path>) -> Result<bool, Failure> {
        let text = render_family(family);
        match out {
            Some(path) => {
                fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                Ok(true)
            }
            None => {
                self.out
                    .write_all(text.as_bytes())
                    .map_err(|e| usage(format!("write failed: {e}")))?;
                Ok(false)
            }
        }
    }

    fn generate(&mut self, q: u64, channels: usize, n: usize, out: Option<&Path>) -> Outcome {
        let field = field_of_order(q)?;
        let start = Instant::now();
        let family = construct(&field, channels, n).map_err(usage)?;
        let elapsed = start.elapsed();
        if self.emit_family(&family, out)? {
            say!(self, "generated ({channels},{n},{q})-UDMs over {field}");
            if let Some(a) = family.alpha() {
                say!(self, "alpha = {a}");
            }
            say!(
                self,
                "construction time: {:.3} ms",
                elapsed.as_secs_f64() * 1e3
            );
        }
        Ok(())
    }

    fn report_verify(&mut self, family: &UdmFamily, options: VerifyOptions) -> Outcome {
        let report = udm::verify_with(family, options);
        if report.passed {
            say!(self, "PASS ({} tuples)", report.tuples_checked);
            return Ok(());
        }
        let w = report.witness.expect("failed reports carry a witness");
        say!(
            self,
            "FAIL at k={}: rank {} < {}",
            w.tuple,
            w.rank,
            family.block_len()
        );
        write!(self.out, "{}", w.matrix).map_err(|e| usage(format!("write failed: {e}")))?;
        if w.matrix.rows() > 0 && !w.matrix.to_string().ends_with('\n') {
            say!(self, "");
        }
        Err(semantic(format!(
            "not UDMs: tuple {} is rank deficient",
            w.tuple
        )))
    }

    fn verify(&mut self, input: &Path, options: VerifyOptions) -> Outcome {
        let family = load_family(input)?;
        self.report_verify(&family, options)
    }

    fn transform(&mut self, args: TransformArgs) -> Outcome {
        let family = load_family(&args.input)?;
        let field = family.field().clone();
        let matrix = |arg: &Option<String>| -> Result<FieldMatrix, Failure> {
            let text = arg
                .as_deref()
                .ok_or_else(|| usage("this operation needs --matrix"))?;
            parse_inline_matrix(&field, text).map_err(usage)
        };
        let result: Result<UdmFamily, UdmError> = match args.op {
            Op::Tensor => udm::tensor_power(
                &family,
                args.m.ok_or_else(|| usage("--op tensor needs --m"))?,
            ),
            Op::Reduce => udm::reduce(&family),
            Op::ReversePairs => udm::reverse_pairs(&family),
            Op::RightMul => udm::right_multiply(&family, &matrix(&args.matrix)?),
            Op::LeftTri => {
                let l = args
                    .index
                    .ok_or_else(|| usage("--op left-tri needs --index"))?;
                udm::left_transform(&family, l, &matrix(&args.matrix)?)
            }
        };
        let result = result.map_err(usage)?;
        let to_file = self.emit_family(&result, args.out.as_deref())?;
        if to_file {
            say!(
                self,
                "wrote ({},{},{})-family",
                result.num_channels(),
                result.block_len(),
                result.field().order()
            );
        }
        if args.then_verify {
            if to_file {
                self.report_verify(
                    &result,
                    VerifyOptions {
                        parallel: true,
                        ..Default::default()
                    },
                )?;
            } else {
                let report = udm::verify_with(
                    &result,
                    VerifyOptions {
                        parallel: true,
                        ..Default::default()
                    },
                );
                if !report.passed {
                    let w = report.witness.expect("failed reports carry a witness");
                    return Err(semantic(format!(
                        "not UDMs: tuple {} has rank {}",
                        w.tuple, w.rank
                    )));
                }
            }
        }
        Ok(())
    }

    fn codec(&mut self, action: CodecAction) -> Outcome {
        match action {
            CodecAction::Encode {
                input,
                u,
                k,
                show_erasures,
            } => {
                let family = load_family(&input)?;
                let u = parse_vector(family.field(), &u).map_err(usage)?;
                let n = family.block_len();
                let k = match k {
                    Some(text) => parse_tuple(&text, &family)?,
                    None => ErasureTuple::new(vec![n; family.num_channels()], n).map_err(usage)?,
                };
                let x = codec::encode(&family, &u).map_err(codec_failure)?;
                let obs = codec::erase(&x, &k).map_err(codec_failure)?;
                let text = if show_erasures {
                    obs.render_with_erasures(n)
                } else {
                    obs.render()
                };
                self.out
                    .write_all(text.as_bytes())
                    .map_err(|e| usage(format!("write failed: {e}")))?;
            }
            CodecAction::Decode { input, obs } => {
                let family = load_family(&input)?;
                let text = read_input(&obs)?;
                let obs = ChannelOutput::parse(&text, family.field()).map_err(usage)?;
                let u = codec::decode(&family, &obs).map_err(codec_failure)?;
                say!(self, "{}", render_vector(&u));
            }
            CodecAction::Roundtrip { input, u, k } => {
                let family = load_family(&input)?;
                let u = parse_vector(family.field(), &u).map_err(usage)?;
                let k = parse_tuple(&k, &family)?;
                let x = codec::encode(&family, &u).map_err(codec_failure)?;
                let obs = codec::erase(&x, &k).map_err(codec_failure)?;
                match codec::decode(&family, &obs) {
                    Ok(d) if d == u => say!(self, "PASS k={k} u={}", render_vector(&u)),
                    Ok(d) => {
                        say!(self, "FAIL k={k}: decoded {}", render_vector(&d));
                        return Err(semantic("decoded vector differs from u"));
                    }
                    Err(e) => {
                        say!(self, "FAIL k={k}: {e}");
                        return Err(codec_failure(e));
                    }
                }
            }
        }
        Ok(())
    }

    fn simulate(
        &mut self,
        input: &Path,
        trials: u64,
        pattern: Pattern,
        erasure_prob: f64,
        k: Option<&str>,
        seed: u64,
    ) -> Outcome {
        let family = load_family(input)?;
        let source = match pattern {
            Pattern::Box => PatternSource::UniformBox,
            Pattern::Exact => PatternSource::UniformExact,
            Pattern::Geometric => PatternSource::TruncatedGeometric { erasure_prob },
            Pattern::Fixed => {
                let text = k.ok_or_else(|| usage("--pattern fixed needs --k"))?;
                PatternSource::Fixed(parse_tuple(text, &family)?.as_slice().to_vec())
            }
        };
        let stats = codec::simulate(&family, trials, &source, seed).map_err(codec_failure)?;
        say!(self, "trials: {}", stats.trials);
        say!(self, "successes: {}", stats.successes);
        say!(
            self,
            "failures (insufficient symbols): {}",
            stats.failures_insufficient
        );
        say!(self, "failures (rank deficient): {}", stats.failures_rank);
        say!(self, "wrong decodes: {}", stats.wrong_decodes);
        say!(self, "success rate: {:.6}", stats.success_rate());
        say!(self, "mean sum k: {:.4}", stats.mean_weight());
        for (w, c) in &stats.weight_histogram {
            say!(self, "  sum k = {w}: {c}");
        }
        if stats.wrong_decodes > 0 {
            return Err(semantic("decoder returned a wrong vector"));
        }
        Ok(())
    }

    fn oracle(&mut self, check: OracleCheck) -> Outcome {
        match check {
            OracleCheck::Hasse { q, channels, n } => {
                let field = field_of_order(q)?;
                let built = construct(&field, channels, n).map_err(usage)?;
                let oracle = construct_by_oracle(&field, channels, n).map_err(usage)?;
                let mismatches = count_mismatches(built.matrices(), oracle.matrices());
                self.oracle_line(mismatches, channels, n * n)
            }
            OracleCheck::Lucas { q, channels, n } => {
                let field = field_of_order(q)?;
                let built = construct(&field, channels, n).map_err(usage)?;
                let mut mismatches = 0;
                for l in 2..channels {
                    for i in 0..n {
                        for t in 0..n {
                            let e = lucas_entry(&field, channels, n, l - 2, i, t).map_err(usage)?;
                            if e != built.matrix(l).get(i, t) {
                                mismatches += 1;
                            }
                        }
                    }
                }
                self.oracle_line(mismatches, channels.saturating_sub(2), n * n)
            }
            OracleCheck::Delta { q, n } => {
                let field = field_of_order(q)?;
                let family = construct(&field, 3, n).map_err(usage)?;
                if pascal_inverse_check(&family).map_err(usage)? {
                    say!(self, "PASS: A_2 * Delta_0 * ... * Delta_{} = I_{n}", n - 1);
                    Ok(())
                } else {
                    say!(self, "FAIL: A_2 * Delta_0 * ... * Delta_{} != I_{n}", n - 1);
                    Err(semantic("Pascal inverse identity does not hold"))
                }
            }
            OracleCheck::Bound {
                q,
                n,
                channels,
                budget,
            } => {
                let field = field_of_order(q)?;
                let start = Instant::now();
                let report = match channels {
                    None if budget == DEFAULT_SEARCH_BUDGET => refute_bound(&field, n),
                    None => exhaustive_search(&field, q as usize + 2, n, budget),
                    Some(l) => exhaustive_search(&field, l, n, budget),
                }
                .map_err(usage)?;
                let secs = start.elapsed().as_secs_f64();
                let label = format!("({},{},{})", report.channels, report.n, report.q);
                if report.exists() {
                    say!(
                        self,
                        "{} {label}-UDMs found; {} candidates pruned to {}",
                        report.found,
                        report.candidates,
                        report.after_pruning
                    );
                    if let Some(first) = report.first_found() {
                        write!(self.out, "{}", render_family(first))
                            .map_err(|e| usage(format!("write failed: {e}")))?;
                    }
                } else {
                    say!(
                        self,
                        "no {label}-UDMs exist; {} candidates pruned to {}",
                        report.candidates,
                        report.after_pruning
                    );
                }
                say!(self, "search time: {:.3} s", secs);
                let expect_none = report.channels > report.q as usize + 1 && report.n >= 2;
                if expect_none && report.exists() {
                    return Err(semantic("found families beyond L = q + 1"));
                }
                Ok(())
            }
        }
    }

    fn oracle_line(&mut self, mismatches: usize, matrices: usize, per_matrix: usize) -> Outcome {
        let total = matrices * per_matrix;
        if mismatches == 0 {
            say!(self, "PASS: {total} entries compared ({matrices} matrices, {per_matrix} entries per matrix)");
            Ok(())
        } else {
            say!(self, "FAIL: {mismatches} of {total} entries differ");
            Err(semantic("oracle mismatch"))
        }
    }
}

fn count_mismatches(a: &[FieldMatrix], b: &[FieldMatrix]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let (xr, yr) = (x.to_rows(), y.to_rows());
            xr.iter()
                .flatten()
                .zip(yr.iter().flatten())
                .filter(|(u, v)| u != v)
                .count()
        })
        .sum()
}
