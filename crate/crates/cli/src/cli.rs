//! Command-line surface: argument types and the dispatcher.
//!
//! Exit codes: 0 when every asserted check passed, 1 when a verified
//! inequality failed (that is a finding, not a crash), 2 for usage, input,
//! or cap errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fqgeom::census::{
    simplex_census, simplex_census_sampled, threshold_report, SizeSpec,
};
use fqgeom::dds::dds_extract;
use fqgeom::motions::enumerate_orthogonal;
use fqgeom::pointset::{distance_distribution, parse_pointset, PointSet};
use fqgeom::specgraph::{build_er_graph, build_reflection_graph, mixing_trials, NdlGraph};
use fqgeom::{Caps, Error, PrimeField};

use crate::checks::{cell_label, run_check, run_suite, CheckParams};
use crate::output::{links_csv, Envelope};

#[derive(Parser)]
#[command(
    name = "fqgeom",
    version,
    about = "Exact distance, congruence-class, and spectral-graph statistics over prime-field coordinate spaces"
)]
pub struct Cli {
    /// Worker threads for parallel sweeps (0 = library default). Outputs
    /// do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Write the JSON report to this path instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Er,
    Reflection,
    Complete,
}

#[derive(Subcommand)]
pub enum Command {
    /// Pair-distance histogram of a point set.
    Nu {
        /// Point-set file (CSV with `# q=.. d=..` header, or product JSON).
        #[arg(long)]
        input: PathBuf,
    },
    /// Exact congruence-class census of ordered (k+1)-tuples.
    Census {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: u32,
        /// Heaviest classes to list in the JSON report.
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Optional full (key, count) table.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Sampled, clearly labeled non-exact mode for over-cap sets.
        #[arg(long)]
        sample: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Declared-vs-measured graph parameters with the exact spectrum.
    Spectrum {
        #[arg(long, value_enum)]
        graph: GraphKind,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        lam: Option<u64>,
        /// Order of the complete-graph fixture.
        #[arg(long)]
        n: Option<usize>,
        /// Edge list dump, one `i j` per line with i <= j.
        #[arg(long)]
        dump_edges: Option<PathBuf>,
        /// Negative-control override of the declared lambda^2.
        #[arg(long)]
        override_lambda_sq: Option<u64>,
    },
    /// Random multiset mixing trials on a spectrally verified graph.
    Mixing {
        #[arg(long, value_enum)]
        graph: GraphKind,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        lam: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 200)]
        trials: u32,
        #[arg(long, default_value_t = 3)]
        max_mult: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        override_lambda_sq: Option<u64>,
    },
    /// Orthogonal group orders by exhaustive enumeration; without --n the
    /// whole order table for dimensions 1..=3 is printed.
    Group {
        #[arg(long)]
        q: u64,
        /// Matrix dimension; 4 needs --allow-dim4.
        #[arg(long)]
        n: Option<usize>,
        /// Write every matrix as a JSON array of rows (needs --n).
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long, default_value_t = false)]
        allow_dim4: bool,
    },
    /// Run one named check (see the check-id table in the README).
    VerifyLemma {
        /// Check id: 2.1, 2.2, 2.3, 3.1, 4.1, 4.2, 4.3, remark-4.4,
        /// eq-2-chain.
        id: String,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        lam: Option<u64>,
        #[arg(long)]
        k: Option<u32>,
        /// Constant for the planar energy bound.
        #[arg(long)]
        c: Option<u32>,
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_mult: Option<u64>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        override_lambda_sq: Option<u64>,
    },
    /// Full counting-chain report on one set.
    Chain {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Use the full plane grid over F_q instead of a file.
        #[arg(long)]
        grid: Option<u64>,
        #[arg(long)]
        k: u32,
    },
    /// Distinct-distance subset extraction.
    Dds {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Size-threshold arithmetic, optionally paired with a measured census.
    Thresholds {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: u32,
        /// Comma-separated per-coordinate sizes.
        #[arg(long)]
        sizes: Option<String>,
        /// Total set size (alternative to --sizes).
        #[arg(long)]
        size: Option<u64>,
        /// Attach the measured census of this set.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run a matrix of checks from a JSON config (or the built-in matrix).
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Use the built-in desk-scale matrix.
        #[arg(long, default_value_t = false)]
        default: bool,
        /// Also write the flat CSV table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn load_set(path: &Path) -> Result<PointSet, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_pointset(&text)
}

fn build_graph(
    kind: GraphKind,
    q: Option<u64>,
    m: Option<usize>,
    lam: Option<u64>,
    n: Option<usize>,
    caps: &Caps,
) -> Result<(NdlGraph, Value), Error> {
    match kind {
        GraphKind::Er => {
            let q = q.ok_or_else(|| Error::invalid("er graph needs --q"))?;
            let m = m.ok_or_else(|| Error::invalid("er graph needs --m"))?;
            let er = build_er_graph(PrimeField::new(q)?, m, caps)?;
            Ok((er.graph, json!({"graph": "er", "q": q, "m": m})))
        }
        GraphKind::Reflection => {
            let q = q.ok_or_else(|| Error::invalid("reflection graph needs --q"))?;
            let lam = lam.ok_or_else(|| Error::invalid("reflection graph needs --lam"))?;
            let rg = build_reflection_graph(PrimeField::new(q)?, lam, caps)?;
            Ok((
                rg.graph,
                json!({"graph": "reflection", "q": q, "lam": lam}),
            ))
        }
        GraphKind::Complete => {
            let n = n.ok_or_else(|| Error::invalid("complete fixture needs --n"))?;
            Ok((NdlGraph::complete(n), json!({"graph": "complete", "n": n})))
        }
    }
}

/// Runs one parsed command. Returns the report envelope and whether every
/// asserted check passed.
pub fn execute(cli: &Cli) -> Result<(Envelope, bool), Error> {
    let caps = Caps::default();
    match &cli.command {
        Command::Nu { input } => {
            let set = load_set(input)?;
            let dist = distance_distribution(&set);
            let counts: BTreeMap<String, String> = (0..dist.q())
                .map(|t| (t.to_string(), dist.count(t).to_string()))
                .collect();
            let result = json!({
                "q": set.field().q(),
                "d": set.dim(),
                "set_size": set.len().to_string(),
                "total": dist.total().to_string(),
                "support_size": dist.support_size(),
                "counts": counts,
            });
            let config = json!({"input": input.display().to_string()});
            Ok((Envelope::new("nu", config, result), true))
        }
        Command::Census {
            input,
            k,
            top,
            csv,
            sample,
            seed,
        } => {
            let set = load_set(input)?;
            let config = json!({
                "input": input.display().to_string(),
                "k": k, "top": top, "sample": sample, "seed": seed,
            });
            let result = match sample {
                Some(samples) => {
                    let est = simplex_census_sampled(&set, *k, *samples, *seed);
                    serde_json::to_value(&est).expect("serializable")
                }
                None => {
                    let census = simplex_census(&set, *k, &caps)?;
                    if let Some(path) = csv {
                        let mut body = String::from("key,count\n");
                        for (key, count) in census.iter() {
                            body.push_str(&format!("\"{}\",{count}\n", key.key_string()));
                        }
                        std::fs::write(path, body)
                            .map_err(|e| Error::invalid(format!("cannot write csv: {e}")))?;
                    }
                    let top_classes: Vec<Value> = census
                        .top_classes(*top)
                        .into_iter()
                        .map(|(key, count)| {
                            json!({"key": key.key_string(), "count": count.to_string()})
                        })
                        .collect();
                    json!({
                        "k": k,
                        "set_size": set.len().to_string(),
                        "total": census.total().to_string(),
                        "support_size": census.support_size(),
                        "top_classes": top_classes,
                        "exact": true,
                    })
                }
            };
            Ok((Envelope::new("census", config, result), true))
        }
        Command::Spectrum {
            graph,
            q,
            m,
            lam,
            n,
            dump_edges,
            override_lambda_sq,
        } => {
            let (mut g, graph_cfg) = build_graph(*graph, *q, *m, *lam, *n, &caps)?;
            if let Some(forced) = override_lambda_sq {
                g.declared_lambda_sq = *forced as u128;
            }
            if let Some(path) = dump_edges {
                let mut body = String::new();
                for (i, j) in g.edge_list() {
                    body.push_str(&format!("{i} {j}\n"));
                }
                std::fs::write(path, body)
                    .map_err(|e| Error::invalid(format!("cannot write edges: {e}")))?;
            }
            let check = g.check_parameters(&caps)?;
            let result = json!({
                "declared": {
                    "n": check.declared_n,
                    "degree": check.declared_degree.to_string(),
                    "lambda": {"float": check.declared_lambda, "tol": "1e-6"},
                },
                "measured": {
                    "n": check.measured_n,
                    "degree_min": check.degree_min.to_string(),
                    "degree_max": check.degree_max.to_string(),
                    "lambda2": {"float": check.lambda2, "tol": "1e-6"},
                },
                "pass": check.pass,
            });
            let pass = check.pass;
            let mut config = graph_cfg;
            if let Some(forced) = override_lambda_sq {
                config["override_lambda_sq"] = json!(forced);
            }
            Ok((Envelope::new("spectrum", config, result), pass))
        }
        Command::Mixing {
            graph,
            q,
            m,
            lam,
            n,
            trials,
            max_mult,
            seed,
            override_lambda_sq,
        } => {
            let (mut g, graph_cfg) = build_graph(*graph, *q, *m, *lam, *n, &caps)?;
            if let Some(forced) = override_lambda_sq {
                g.declared_lambda_sq = *forced as u128;
            }
            let check = g.check_parameters(&caps)?;
            let t = mixing_trials(&g, *trials, *max_mult, *seed)?;
            let pass = check.pass && t.violations == 0;
            let result = json!({
                "parameters_pass": check.pass,
                "lambda2": {"float": check.lambda2, "tol": "1e-6"},
                "trials": t.trials,
                "violations": t.violations,
                "pass": pass,
            });
            let mut config = graph_cfg;
            config["trials"] = json!(trials);
            config["max_mult"] = json!(max_mult);
            config["seed"] = json!(seed);
            Ok((Envelope::new("mixing", config, result), pass))
        }
        Command::Group {
            q,
            n,
            dump,
            allow_dim4,
        } => {
            let mut local_caps = caps;
            local_caps.allow_orthogonal_dim4 = *allow_dim4;
            let field = PrimeField::new(*q)?;
            let result = match n {
                Some(n) => {
                    let group = enumerate_orthogonal(field, *n, &local_caps)?;
                    if let Some(path) = dump {
                        let rows: Vec<Value> = group
                            .iter()
                            .map(|mat| {
                                let rows: Vec<Vec<u64>> = (0..*n)
                                    .map(|r| (0..*n).map(|c| mat.entry(r, c)).collect())
                                    .collect();
                                json!(rows)
                            })
                            .collect();
                        let body =
                            serde_json::to_string_pretty(&rows).expect("serializable");
                        std::fs::write(path, body)
                            .map_err(|e| Error::invalid(format!("cannot write dump: {e}")))?;
                    }
                    let rotations = group.iter().filter(|g| g.det(field) == 1).count();
                    json!({
                        "q": q,
                        "n": n,
                        "order": group.len(),
                        "rotations": rotations,
                        "reflection_family": group.len() - rotations,
                    })
                }
                None => {
                    if dump.is_some() {
                        return Err(Error::invalid("--dump needs an explicit --n"));
                    }
                    let top = if *allow_dim4 { 4 } else { 3 };
                    let mut table = Vec::new();
                    for dim in 1..=top {
                        let order = enumerate_orthogonal(field, dim, &local_caps)?.len();
                        table.push(json!({"n": dim, "order": order}));
                    }
                    json!({"q": q, "orders": table})
                }
            };
            let config = json!({"q": q, "n": n, "allow_dim4": allow_dim4});
            Ok((Envelope::new("group", config, result), true))
        }
        Command::VerifyLemma {
            id,
            q,
            m,
            lam,
            k,
            c,
            trials,
            seed,
            max_mult,
            input,
            override_lambda_sq,
        } => {
            let params = CheckParams {
                check: id.clone(),
                q: *q,
                m: *m,
                lam: *lam,
                k: *k,
                c: *c,
                trials: *trials,
                seed: *seed,
                max_mult: *max_mult,
                input: input.as_ref().map(|p| p.display().to_string()),
                override_lambda_sq: *override_lambda_sq,
            };
            let report = run_check(&params, &caps)?;
            let pass = report.pass;
            let config = serde_json::to_value(&params).expect("serializable");
            let result = serde_json::to_value(&report).expect("serializable");
            Ok((Envelope::new("verify-lemma", config, result), pass))
        }
        Command::Chain { input, grid, k } => {
            let set = match (input, grid) {
                (Some(path), None) => load_set(path)?,
                (None, Some(q)) => crate::fixtures::full_grid(PrimeField::new(*q)?),
                _ => {
                    return Err(Error::invalid(
                        "chain needs exactly one of --input or --grid",
                    ))
                }
            };
            let report = fqgeom::census::theorem_chain_report(&set, *k, &caps)?;
            let pass = report.pass;
            let config = json!({
                "input": input.as_ref().map(|p| p.display().to_string()),
                "grid": grid,
                "k": k,
            });
            let result = serde_json::to_value(&report).expect("serializable");
            Ok((Envelope::new("chain", config, result), pass))
        }
        Command::Dds { input, seed } => {
            let set = load_set(input)?;
            let r = dds_extract(&set, *seed, &caps)?;
            let subset: Vec<Vec<u64>> = r.subset.iter().map(|p| p.coords().to_vec()).collect();
            let pass = r.verified && r.independent_by_scan;
            let result = json!({
                "n": r.n,
                "edges": r.edge_count,
                "hinge_edges": r.buckets.hinge,
                "zero_edges": r.buckets.zero,
                "disjoint_only_edges": r.buckets.disjoint_only,
                "spencer_floor": r.spencer.guarantee,
                "spencer": r.spencer,
                "subset": subset,
                "subset_size": r.subset.len(),
                "verified": r.verified,
                "independent_by_scan": r.independent_by_scan,
                "edge_constant": {"float": r.edge_constant_float, "tol": "reported"},
                "pigeonhole_threshold": r.pigeonhole_threshold,
            });
            let config = json!({"input": input.display().to_string(), "seed": seed});
            Ok((Envelope::new("dds", config, result), pass))
        }
        Command::Thresholds {
            q,
            d,
            k,
            sizes,
            size,
            input,
        } => {
            let spec = match (sizes, size) {
                (Some(list), None) => {
                    let parsed: Result<Vec<u64>, _> =
                        list.split(',').map(|t| t.trim().parse()).collect();
                    SizeSpec::PerCoordinate(parsed.map_err(|_| {
                        Error::invalid(format!("bad --sizes list `{list}`"))
                    })?)
                }
                (None, Some(total)) => SizeSpec::Total(*total),
                _ => {
                    return Err(Error::invalid(
                        "thresholds needs exactly one of --sizes or --size",
                    ))
                }
            };
            let report = threshold_report(*q, *d, *k, &spec)?;
            let mut result = serde_json::to_value(&report).expect("serializable");
            if let Some(path) = input {
                let set = load_set(path)?;
                let census = simplex_census(&set, *k, &caps)?;
                result["measured"] = json!({
                    "support_size": census.support_size(),
                    "total": census.total().to_string(),
                    "class_space": report.predicted_class_space,
                });
            }
            let config = json!({
                "q": q, "d": d, "k": k,
                "sizes": sizes, "size": size,
                "input": input.as_ref().map(|p| p.display().to_string()),
            });
            Ok((Envelope::new("thresholds", config, result), true))
        }
        Command::Suite {
            config,
            default,
            csv,
        } => {
            let cells: Vec<CheckParams> = match (config, default) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        Error::invalid(format!("cannot read {}: {e}", path.display()))
                    })?;
                    let parsed: SuiteConfig = serde_json::from_str(&text)
                        .map_err(|e| Error::invalid(format!("bad suite config: {e}")))?;
                    parsed.cells
                }
                (None, true) => crate::checks::default_suite(),
                (None, false) => {
                    return Err(Error::invalid("suite needs --config or --default"))
                }
            };
            let (reports, all_pass) = run_suite(&cells, &caps)?;
            let rows: Vec<(String, fqgeom::LinkCheck)> = reports
                .iter()
                .zip(&cells)
                .flat_map(|(report, cell)| {
                    let label = cell_label(cell);
                    report
                        .links
                        .iter()
                        .map(move |l| (label.clone(), l.clone()))
                })
                .collect();
            if let Some(path) = csv {
                std::fs::write(path, links_csv(&rows))
                    .map_err(|e| Error::invalid(format!("cannot write csv: {e}")))?;
            }
            let result = json!({
                "cells": reports,
                "cells_run": reports.len(),
                "pass": all_pass,
            });
            let config_v = json!({
                "config": config.as_ref().map(|p| p.display().to_string()),
                "default": default,
                "cells": cells.len(),
            });
            Ok((Envelope::new("suite", config_v, result), all_pass))
        }
    }
}

#[derive(serde::Deserialize)]
struct SuiteConfig {
    cells: Vec<CheckParams>,
}
