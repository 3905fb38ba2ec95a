//! Subcommands and their dispatch to the library.

use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cuspcount::counting::{route_crosscheck, ur_example, K3Model};
use cuspcount::discriminant::{discriminant_form, is_isogenus, DiscriminantGroup, FormTable};
use cuspcount::genus::{genus_representatives_rank2, GenusQuery};
use cuspcount::isotropic::{
    classify_i1_orbits, enumerate_isotropic, hyperbolic_completion, transvection, window_note,
    IsotropicVector,
};
use cuspcount::linalg::ZMatrix;
use cuspcount::registry::{aut_enumerator, counting_strategy, CountKind, CountRequest};
use cuspcount::{Budget, Error, EvenLattice, FqfIsometry, LatticeVector, RootSign};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::output::{Envelope, Format};
use crate::spec::load_lattice;

#[derive(Debug, Parser)]
#[command(
    name = "cuspcount",
    version,
    about = "Exact lattice computations for Fourier-Mukai partners and cusps of K3 surfaces"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Largest discriminant group enumerated (overrides CUSPCOUNT_BUDGET).
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Sign of the root lattices A(n), D(n), E8 in expressions.
    #[arg(long, global = true, value_enum, default_value_t = Roots::Negative)]
    pub roots: Roots,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Roots {
    Negative,
    Positive,
}

impl From<Roots> for RootSign {
    fn from(r: Roots) -> RootSign {
        match r {
            Roots::Negative => RootSign::Negative,
            Roots::Positive => RootSign::Positive,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discriminant form of a lattice.
    Disc {
        /// Lattice expression or Gram JSON file.
        lattice: String,
    },
    /// The automorphism group O(A_L).
    Aut {
        /// Lattice expression or Gram JSON file.
        lattice: String,
        /// Enumeration strategy: primary or direct.
        #[arg(long, default_value = "primary")]
        method: String,
        /// Also print every element.
        #[arg(long)]
        list: bool,
    },
    /// Whether two lattices lie in the same genus.
    Isogenus { first: String, second: String },
    /// Primitive isotropic vectors in a coordinate box.
    Isotropic {
        /// Lattice expression or Gram JSON file.
        lattice: String,
        /// Largest absolute coordinate searched.
        #[arg(long, default_value_t = 3)]
        bound: u64,
        /// Keep only vectors of this divisor.
        #[arg(long)]
        div: Option<u64>,
    },
    /// Classes in a rank-2 genus.
    Genus {
        /// Signature as p,q.
        #[arg(long, value_parser = parse_signature)]
        sign: (usize, usize),
        /// A lattice whose discriminant form is the target.
        #[arg(long)]
        disc: String,
        /// Largest Gram entry searched (default: the reduction bound).
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Fourier-Mukai partner counts.
    Fm {
        #[command(subcommand)]
        what: FmCommand,
    },
    /// Twisted classes / 0-dimensional cusps of a given divisor.
    Cusps {
        /// Order d of the isotropic elements.
        #[arg(long)]
        div: u64,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Brute-force check of the U(r) example against its closed forms.
    VerifyUr {
        /// The level r > 2.
        #[arg(long)]
        r: u64,
        /// Check every r up to this value.
        #[arg(long)]
        max_r: Option<u64>,
    },
    /// The transvection T_v for a divisor-one isotropic vector l.
    Transvect {
        /// Lattice expression or Gram JSON file.
        lattice: String,
        /// The isotropic vector, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        l: Vec<i64>,
        /// A vector of the complement of the hyperbolic plane through l
        /// (omit to print that complement).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        v: Option<Vec<i64>>,
    },
    /// Divisor-one isotropic vectors grouped by their quotient l^⊥/Zl.
    ClassifyI1 {
        /// Lattice expression or Gram JSON file.
        lattice: String,
        /// Largest absolute coordinate searched.
        #[arg(long, default_value_t = 3)]
        bound: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum FmCommand {
    /// #FM(S).
    Count(ModelArgs),
    /// Coarse twisted classes of order d.
    Twisted {
        /// Order of the isotropic elements.
        #[arg(long)]
        d: u64,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// #FM_ell(S), or #FM_ell,sec(S) with --section.
    Elliptic {
        /// Count only elliptic structures with a section.
        #[arg(long)]
        section: bool,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Partner count against cusp counts when U embeds in NS.
    Crosscheck(ModelArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Néron-Severi lattice.
    pub lattice: String,
    /// JSON file {"generators": [matrix, ...]} giving the Hodge image on
    /// the Smith generators of A (default ±id).
    #[arg(long)]
    pub hodge: Option<PathBuf>,
    /// Counting strategy (double-coset, orbit-on-a, ur-closed-form).
    #[arg(long)]
    pub strategy: Option<String>,
    /// Coordinate bound for isotropic vector searches.
    #[arg(long, default_value_t = 3)]
    pub bound: u64,
}

fn parse_signature(s: &str) -> Result<(usize, usize), String> {
    let (p, q) = s.split_once(',').ok_or("expected p,q")?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok((parse(p)?, parse(q)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HodgeFile {
    generators: Vec<Vec<Vec<i64>>>,
}

fn rows(m: &ZMatrix) -> anyhow::Result<Vec<Vec<i64>>> {
    m.to_i64_rows()
        .ok_or_else(|| Error::TooLarge("matrix entry".into()).into())
}

fn coords(v: &LatticeVector) -> anyhow::Result<Vec<i64>> {
    v.to_i64()
        .ok_or_else(|| Error::TooLarge("vector entry".into()).into())
}

#[derive(Serialize)]
struct LatticeInfo {
    gram: Vec<Vec<i64>>,
    rank: usize,
    signature: (usize, usize),
    det: String,
}

fn info(l: &EvenLattice) -> anyhow::Result<LatticeInfo> {
    Ok(LatticeInfo {
        gram: rows(l.gram())?,
        rank: l.rank(),
        signature: l.signature(),
        det: l.det().to_string(),
    })
}

fn model(args: &ModelArgs, budget: &Budget, roots: RootSign) -> anyhow::Result<K3Model> {
    let ns = load_lattice(&args.lattice, roots)?;
    let mut model = K3Model::generic(ns)?;
    if let Some(path) = &args.hodge {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: HodgeFile =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let form = model.form().clone();
        let k = form.min_generators();
        let gens = file
            .generators
            .iter()
            .map(|m| {
                if m.len() != k || m.iter().any(|r| r.len() != k) {
                    return Err(Error::DimensionMismatch {
                        expected: k,
                        got: m.len(),
                    });
                }
                Ok(FqfIsometry::from_matrix(&form, m))
            })
            .collect::<Result<Vec<_>, _>>()?;
        model = model.with_hodge_image(gens, budget)?;
    }
    Ok(model)
}

fn count(
    args: &ModelArgs,
    kind: CountKind,
    budget: &Budget,
    roots: RootSign,
) -> anyhow::Result<(Value, Value)> {
    let model = model(args, budget, roots)?;
    let name = args.strategy.as_deref().unwrap_or(kind.default_strategy());
    let strategy = counting_strategy(name)?;
    let request = CountRequest {
        model: &model,
        kind,
        bound: args.bound,
    };
    let report = strategy.count(&request, budget)?;
    let mut params = json!({
        "lattice": args.lattice,
        "count": kind.name(),
        "strategy": name,
        "bound": args.bound,
        "hodge_image_order": model.hodge_image().order(),
    });
    if let CountKind::Cusps(d) = kind {
        params["d"] = json!(d);
    }
    Ok((params, serde_json::to_value(report)?))
}

/// Runs a command; the boolean is false when a verification did not pass.
pub fn run(cli: &Cli) -> anyhow::Result<(Envelope, bool)> {
    let budget = cli
        .budget
        .map_or_else(Budget::from_env, Budget::with_max_order);
    let roots = RootSign::from(cli.roots);
    let mut ok = true;
    let (name, params, result): (&str, Value, Value) = match &cli.command {
        Command::Disc { lattice } => {
            let l = load_lattice(lattice, roots)?;
            let form = discriminant_form(&l)?;
            (
                "disc",
                json!({ "lattice": lattice }),
                json!({ "lattice": info(&l)?, "form": FormTable::from(&form) }),
            )
        }
        Command::Aut {
            lattice,
            method,
            list,
        } => {
            let l = load_lattice(lattice, roots)?;
            let form = discriminant_form(&l)?;
            let elements = aut_enumerator(method)?.enumerate(&form, &budget)?;
            let mut result =
                json!({ "order": elements.len(), "invariant_factors": form.invariant_factors() });
            if *list {
                result["elements"] =
                    json!(elements.iter().map(FqfIsometry::matrix).collect::<Vec<_>>());
            }
            (
                "aut",
                json!({ "lattice": lattice, "method": method }),
                result,
            )
        }
        Command::Isogenus { first, second } => {
            let (a, b) = (load_lattice(first, roots)?, load_lattice(second, roots)?);
            let witness = is_isogenus(&a, &b, &budget)?;
            (
                "isogenus",
                json!({ "first": first, "second": second }),
                json!({
                    "same_genus": witness.is_some(),
                    "witness": witness.map(|w| w.isomorphism.matrix()),
                }),
            )
        }
        Command::Isotropic {
            lattice,
            bound,
            div,
        } => {
            let l = load_lattice(lattice, roots)?;
            let found = enumerate_isotropic(&l, *bound)?;
            let vectors = found
                .iter()
                .filter(|v| div.is_none_or(|d| v.divisor == d.into()))
                .map(|v: &IsotropicVector| {
                    Ok(json!({ "vector": coords(&v.vector)?, "divisor": v.divisor.to_string() }))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            (
                "isotropic",
                json!({ "lattice": lattice, "bound": bound, "div": div }),
                json!({ "count": vectors.len(), "window_note": window_note(*bound), "vectors": vectors }),
            )
        }
        Command::Genus { sign, disc, bound } => {
            let l = load_lattice(disc, roots)?;
            let mut query = GenusQuery::of(&l, 0)?;
            query.signature = *sign;
            query.search_bound = bound.unwrap_or_else(|| query.required_bound());
            let reps = genus_representatives_rank2(&query, &budget)?;
            let grams = reps
                .iter()
                .map(|m| rows(m.gram()))
                .collect::<anyhow::Result<Vec<_>>>()?;
            (
                "genus",
                json!({ "signature": sign, "disc": disc, "bound": query.search_bound }),
                json!({ "count": grams.len(), "required_bound": query.required_bound(), "representatives": grams }),
            )
        }
        Command::Fm { what } => match what {
            FmCommand::Count(args) => {
                let (p, r) = count(args, CountKind::Fm, &budget, roots)?;
                ("fm count", p, r)
            }
            FmCommand::Twisted { d, model } => {
                let (p, r) = count(model, CountKind::Cusps(*d), &budget, roots)?;
                ("fm twisted", p, r)
            }
            FmCommand::Elliptic { section, model } => {
                let kind = if *section {
                    CountKind::FmEllipticSec
                } else {
                    CountKind::FmElliptic
                };
                let (p, r) = count(model, kind, &budget, roots)?;
                ("fm elliptic", p, r)
            }
            FmCommand::Crosscheck(args) => {
                let m = model(args, &budget, roots)?;
                let c = route_crosscheck(&m, args.bound, &budget)?;
                ok = c.passes;
                (
                    "fm crosscheck",
                    json!({ "lattice": args.lattice, "bound": args.bound }),
                    serde_json::to_value(c)?,
                )
            }
        },
        Command::Cusps { div, model } => {
            let (p, r) = count(model, CountKind::Cusps(*div), &budget, roots)?;
            ("cusps", p, r)
        }
        Command::VerifyUr { r, max_r } => {
            let top = max_r.unwrap_or(*r);
            if top < *r {
                return Err(anyhow!("--max-r {top} is below --r {r}"));
            }
            let reports = (*r..=top)
                .map(|r| ur_example(r, &budget))
                .collect::<Result<Vec<_>, _>>()?;
            ok = reports.iter().all(|x| x.passes);
            (
                "verify-ur",
                json!({ "r": r, "max_r": top }),
                json!({ "all_pass": ok, "reports": reports }),
            )
        }
        Command::Transvect { lattice, l, v } => {
            let lat = load_lattice(lattice, roots)?;
            let iv = IsotropicVector::new(&lat, LatticeVector::from_i64(l))?;
            let split = hyperbolic_completion(&lat, &iv)?;
            let mut result = json!({
                "l": coords(&split.l)?,
                "m": coords(&split.m)?,
                "complement_basis": rows(&split.complement_basis.transpose())?,
                "complement_gram": rows(split.complement.gram())?,
            });
            if let Some(v) = v {
                let v = LatticeVector::from_i64(v);
                let t = transvection(&split, &v)?;
                let disc = DiscriminantGroup::new(&lat)?;
                let on_a = disc.natural_map(&t)?;
                result["v"] = json!(coords(&v)?);
                result["matrix"] = json!(rows(&t.matrix)?);
                result["is_isometry"] = json!(t.preserves(&lat));
                result["fixes_l"] = json!(t.apply(&split.l) == split.l);
                result["trivial_on_discriminant"] =
                    json!(on_a == FqfIsometry::identity(disc.form()));
            }
            (
                "transvect",
                json!({ "lattice": lattice, "l": l, "v": v }),
                result,
            )
        }
        Command::ClassifyI1 { lattice, bound } => {
            let l = load_lattice(lattice, roots)?;
            let c = classify_i1_orbits(&l, *bound, &budget)?;
            (
                "classify-i1",
                json!({ "lattice": lattice, "bound": bound }),
                serde_json::to_value(c)?,
            )
        }
    };
    Ok((Envelope::new(name, params, result)?, ok))
}

/// 3 for an exhausted budget, 2 for any other failure.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded { .. }) => 3,
        _ => 2,
    }
}
