//! JSON code specifications and experiment plans.
//!
//! A code spec names the length, the information set and the pre-transform:
//!
//! ```json
//! {"n": 7,
//!  "info": {"minimal": [29, 43, 71]},
//!  "pretransform": {"kind": "conv", "poly_octal": "1047"}}
//! ```
//!
//! A plan lists the stages to run (`design`, `merge`, `enumerate`, `bound`,
//! `simulate`) and their parameters. Each stage writes one file into the
//! output directory, followed by `manifest.json`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decoder::{Algorithm, DecoderConfig};
use crate::design::{
    design_nondecreasing, ga_density_evolution, merge_rows, nr_ranking, ChannelRanking, DminBound,
    MergeMode,
};
use crate::error::{Error, Result};
use crate::polar::RateProfile;
use crate::pretransform::{crc_code, PolarCode, PreTransform, RowMergeSet, TransformKind};
use crate::sim::{monte_carlo, union_bound, write_csv, SimConfig, SimRecord};
use crate::weight_enum::{code_error_coefficient, MinWeightCount, Provenance, SpectrumRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingSpec {
    Ga { design_snr_db: f64 },
    Nr,
}

impl RankingSpec {
    pub fn ranking(&self, n: usize) -> Result<ChannelRanking> {
        match self {
            Self::Ga { design_snr_db } => ga_density_evolution(n, *design_snr_db),
            Self::Nr => nr_ranking(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoSpec {
    Minimal(Vec<usize>),
    Explicit(Vec<usize>),
    ReedMuller { r: usize },
    Ranked { ranking: RankingSpec, k: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformSpec {
    #[default]
    None,
    RowMerge {
        pairs: Vec<(usize, usize)>,
    },
    /// The last `q` information positions carry the CRC.
    Crc {
        poly: String,
        q: usize,
    },
    Conv {
        poly_octal: String,
    },
    Generic {
        rows: BTreeMap<usize, Vec<usize>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub n: usize,
    pub info: InfoSpec,
    #[serde(default)]
    pub pretransform: TransformSpec,
}

fn parse_hex(s: &str) -> Result<u64> {
    let digits = s.trim().trim_start_matches("0x").trim_start_matches("0X");
    u64::from_str_radix(digits, 16).map_err(|e| Error::Schema(format!("bad CRC polynomial {s:?}: {e}")))
}

impl CodeSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn profile(&self) -> Result<RateProfile> {
        match &self.info {
            InfoSpec::Minimal(set) => RateProfile::expand_minimal_set(set, self.n),
            InfoSpec::Explicit(set) => RateProfile::new(self.n, set.iter().copied()),
            InfoSpec::ReedMuller { r } => RateProfile::reed_muller(*r, self.n),
            InfoSpec::Ranked { ranking, k } => ranking.ranking(self.n)?.top(*k),
        }
    }

    pub fn build(&self) -> Result<PolarCode> {
        let profile = self.profile()?;
        match &self.pretransform {
            TransformSpec::None => Ok(PolarCode::plain(profile)),
            TransformSpec::RowMerge { pairs } => {
                PolarCode::row_merged(profile, &RowMergeSet::new(pairs.clone()))
            }
            TransformSpec::Crc { poly, q } => crc_code(&profile, parse_hex(poly)?, *q),
            TransformSpec::Conv { poly_octal } => PolarCode::convolutional(profile, poly_octal),
            TransformSpec::Generic { rows } => {
                let t = PreTransform::from_rows(&profile, rows.clone(), TransformKind::Generic)?;
                PolarCode::new(profile, t)
            }
        }
    }

    /// Spec of a row-merged code with an explicit information set.
    pub fn row_merged(profile: &RateProfile, merges: &RowMergeSet) -> Self {
        Self {
            n: profile.n(),
            info: InfoSpec::Explicit(profile.info().to_vec()),
            pretransform: TransformSpec::RowMerge {
                pairs: merges.pairs().to_vec(),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Design,
    Merge,
    Enumerate,
    Bound,
    Simulate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignStage {
    pub ranking: RankingSpec,
    pub k: usize,
    pub dmin_target: usize,
    #[serde(default = "full_mode")]
    pub mode: MergeMode,
}

fn full_mode() -> MergeMode {
    MergeMode::Full
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeStage {
    #[serde(default = "full_mode")]
    pub mode: MergeMode,
}

impl Default for MergeStage {
    fn default() -> Self {
        Self { mode: MergeMode::Full }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumTerm {
    pub weight: usize,
    pub count: u128,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundStage {
    pub ebn0_db: Vec<f64>,
    /// Extra spectrum terms above `w_min`; `A_{w_min}` is always enumerated.
    #[serde(default)]
    pub terms: Vec<SpectrumTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateStage {
    pub ebn0_db: Vec<f64>,
    #[serde(default = "default_min_errors")]
    pub min_errors: u64,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
    #[serde(default)]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub decoder: DecoderConfig,
}

fn default_min_errors() -> u64 {
    SimConfig::default().min_errors
}

fn default_max_frames() -> u64 {
    SimConfig::default().max_frames
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plan {
    #[serde(default)]
    pub stages: Vec<Stage>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Fill the `seconds` column of simulation CSVs.
    #[serde(default)]
    pub record_time: bool,
    #[serde(default)]
    pub design: Option<DesignStage>,
    #[serde(default)]
    pub merge: MergeStage,
    #[serde(default)]
    pub bound: Option<BoundStage>,
    #[serde(default)]
    pub simulate: Option<SimulateStage>,
}

impl Plan {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Run-level settings that override the plan.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub version: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DesignSummary {
    pub kappa: usize,
    pub w_min: usize,
    pub a_wmin: u128,
    pub dmin: DminBound,
    pub spec: CodeSpec,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub workers: usize,
    pub spec: CodeSpec,
    pub plan: Plan,
    /// Spec of the code after design/merge stages.
    pub final_spec: CodeSpec,
    pub k: usize,
    pub outputs: Vec<String>,
    pub design: Option<DesignSummary>,
    pub enumeration: Option<MinWeightCount>,
    pub simulation: Vec<SimRecord>,
}

fn stage_file(out: &Path, name: &str, files: &mut Vec<String>) -> Result<BufWriter<File>> {
    files.push(name.to_string());
    Ok(BufWriter::new(File::create(out.join(name))?))
}

/// Executes `plan` on `spec`, writing one file per stage and
/// `manifest.json` into `opts.out_dir`.
pub fn run_experiment(spec: &CodeSpec, plan: &Plan, opts: &RunOptions) -> Result<Manifest> {
    let seed = opts.seed.unwrap_or(plan.seed);
    let workers = opts.workers.or(plan.workers).unwrap_or(1);
    fs::create_dir_all(&opts.out_dir)?;
    let out = opts.out_dir.as_path();

    let mut current = spec.clone();
    let mut code = current.build()?;
    let mut files = Vec::new();
    let mut design = None;
    let mut enumeration: Option<MinWeightCount> = None;
    let mut simulation = Vec::new();

    for stage in &plan.stages {
        match stage {
            Stage::Design => {
                let params = plan
                    .design
                    .as_ref()
                    .ok_or_else(|| Error::Schema("design stage without \"design\" parameters".into()))?;
                let ranking = params.ranking.ranking(current.n)?;
                let result = design_nondecreasing(&ranking, params.k, params.dmin_target, params.mode)?;
                current = CodeSpec::row_merged(&result.profile, &result.merges);
                code = current.build()?;
                enumeration = None;
                let summary = DesignSummary {
                    kappa: result.kappa,
                    w_min: result.w_min,
                    a_wmin: result.a_wmin,
                    dmin: result.dmin,
                    spec: current.clone(),
                };
                serde_json::to_writer_pretty(stage_file(out, "design.json", &mut files)?, &summary)?;
                design = Some(summary);
            }
            Stage::Merge => {
                let result = merge_rows(code.profile(), plan.merge.mode)?;
                current = CodeSpec::row_merged(code.profile(), &result.merges);
                code = current.build()?;
                enumeration = None;
                serde_json::to_writer_pretty(stage_file(out, "merge.json", &mut files)?, &result)?;
            }
            Stage::Enumerate => {
                let count = code_error_coefficient(&code)?;
                let mut w = csv::Writer::from_writer(stage_file(out, "enumerate.csv", &mut files)?);
                w.write_record(["weight", "count", "provenance"])?;
                w.write_record([count.w_min.to_string(), count.count.to_string(), "enumerated".into()])?;
                w.flush()?;
                enumeration = Some(count);
            }
            Stage::Bound => {
                let params = plan
                    .bound
                    .as_ref()
                    .ok_or_else(|| Error::Schema("bound stage without \"bound\" parameters".into()))?;
                let count = match &enumeration {
                    Some(c) => c.clone(),
                    None => code_error_coefficient(&code)?,
                };
                let mut spectrum = vec![SpectrumRecord {
                    weight: count.w_min,
                    count: count.count,
                    provenance: Provenance::Enumerated,
                }];
                for t in &params.terms {
                    if t.weight <= count.w_min {
                        return Err(Error::Schema(format!(
                            "bound term weight {} must exceed w_min = {}",
                            t.weight, count.w_min
                        )));
                    }
                    spectrum.push(SpectrumRecord {
                        weight: t.weight,
                        count: t.count,
                        provenance: Provenance::Enumerated,
                    });
                }
                let rate = code.k() as f64 / code.len() as f64;
                let mut w = csv::Writer::from_writer(stage_file(out, "bound.csv", &mut files)?);
                w.write_record(["ebn0_db", "union_bound"])?;
                for &snr in &params.ebn0_db {
                    let ub = union_bound(&spectrum, rate, snr)?;
                    w.write_record([snr.to_string(), format!("{ub:e}")])?;
                }
                w.flush()?;
                enumeration = Some(count);
            }
            Stage::Simulate => {
                let params = plan
                    .simulate
                    .as_ref()
                    .ok_or_else(|| Error::Schema("simulate stage without \"simulate\" parameters".into()))?;
                let config = SimConfig {
                    min_errors: params.min_errors,
                    max_frames: params.max_frames,
                    seed,
                    workers,
                    algorithm: params.algorithm,
                    decoder: params.decoder,
                    noiseless: false,
                };
                let records = monte_carlo(&code, &params.ebn0_db, &config)?;
                write_csv(&records, stage_file(out, "simulate.csv", &mut files)?, plan.record_time)?;
                simulation = records;
            }
        }
    }

    let manifest = Manifest {
        version: opts.version.clone(),
        seed,
        workers,
        spec: spec.clone(),
        plan: plan.clone(),
        final_spec: current,
        k: code.k(),
        outputs: files,
        design,
        enumeration,
        simulation,
    };
    let file = BufWriter::new(File::create(out.join("manifest.json"))?);
    serde_json::to_writer_pretty(file, &manifest)?;
    Ok(manifest)
}
