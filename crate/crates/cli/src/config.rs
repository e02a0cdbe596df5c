//! Run and sweep configuration: flags, an optional JSON file with the same
//! field names, and the small grammars for faults and proposals.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use extba::sim_engine::{ProposalMode, Strategy};
use extba::{BuiltinValidity, Value};

use crate::CliError;

/// Flags shared by `run` and `sweep`.
#[derive(Args, Debug, Default, Clone)]
pub struct ConfigArgs {
    /// JSON file with any of the fields below; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of processes; a comma-separated list for sweeps.
    #[arg(long)]
    pub n: Option<String>,
    /// Fault threshold override.
    #[arg(long)]
    pub t: Option<usize>,
    /// Value length in bits; a comma-separated list for sweeps.
    #[arg(long = "L")]
    pub l: Option<String>,
    /// unanimous[:hex] | distinct | random[:seed]
    #[arg(long)]
    pub proposals: Option<String>,
    /// none | byz:<strategy>[:<arg>][@<count>],...
    #[arg(long)]
    pub faults: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Validity predicate: always-true, even-parity or magic-prefix.
    #[arg(long)]
    pub valid: Option<String>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seeds per (n, L) point in a sweep.
    #[arg(long)]
    pub trials: Option<u32>,
}

/// A number, a list of numbers, or a comma-separated string of them.
#[derive(Debug, Clone)]
enum NumList {
    Many(Vec<usize>),
    Text(String),
}

impl<'de> Deserialize<'de> for NumList {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> serde::de::Visitor<'de> for V {
            type Value = NumList;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a number, a list of numbers or a comma-separated string")
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<NumList, E> {
                Ok(NumList::Many(vec![v as usize]))
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<NumList, E> {
                Ok(NumList::Text(v.to_owned()))
            }

            fn visit_seq<A: serde::de::SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> Result<NumList, A::Error> {
                let mut out = Vec::new();
                while let Some(x) = seq.next_element::<usize>()? {
                    out.push(x);
                }
                Ok(NumList::Many(out))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<NumList>,
    t: Option<usize>,
    #[serde(rename = "L")]
    l: Option<NumList>,
    proposals: Option<String>,
    faults: Option<String>,
    seed: Option<u64>,
    valid: Option<String>,
    out: Option<PathBuf>,
    trials: Option<u32>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub ns: Vec<usize>,
    pub ls: Vec<usize>,
    pub t: Option<usize>,
    pub faults: Vec<(Strategy, usize)>,
    pub faults_text: String,
    pub proposals: ProposalMode,
    pub seed: u64,
    pub predicate: BuiltinValidity,
    pub out: Option<PathBuf>,
    pub trials: u32,
}

pub struct Defaults {
    pub ns: &'static str,
    pub ls: &'static str,
}

pub const RUN_DEFAULTS: Defaults = Defaults { ns: "4", ls: "64" };
pub const SWEEP_DEFAULTS: Defaults = Defaults {
    ns: "4,8,16,32,64",
    ls: "1024",
};

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Config {
        path: path.to_owned(),
        source,
    })
}

fn num_list(field: &str, text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Usage(format!("--{field}: `{s}` is not a number")))
        })
        .collect()
}

fn from_file_list(field: &str, v: NumList) -> Result<Vec<usize>, CliError> {
    match v {
        NumList::Many(xs) => Ok(xs),
        NumList::Text(s) => num_list(field, &s),
    }
}

impl ConfigArgs {
    pub fn resolve(&self, defaults: &Defaults) -> Result<Resolved, CliError> {
        let file = match &self.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let ns = match (&self.n, file.n) {
            (Some(s), _) => num_list("n", s)?,
            (None, Some(v)) => from_file_list("n", v)?,
            (None, None) => num_list("n", defaults.ns)?,
        };
        let ls = match (&self.l, file.l) {
            (Some(s), _) => Some(num_list("L", s)?),
            (None, Some(v)) => Some(from_file_list("L", v)?),
            (None, None) => None,
        };
        if ns.contains(&0) {
            return Err(CliError::Usage("--n must be at least 1".into()));
        }
        let seed = self.seed.or(file.seed).unwrap_or(1);
        let faults_text = self
            .faults
            .clone()
            .or(file.faults)
            .unwrap_or_else(|| "none".into());
        let proposals = self.proposals.clone().or(file.proposals);
        let valid = self.valid.clone().or(file.valid);
        let predicate = match valid.as_deref() {
            None => BuiltinValidity::AlwaysTrue,
            Some(name) => BuiltinValidity::from_name(name).ok_or_else(|| {
                CliError::Usage(format!(
                    "--valid: unknown predicate `{name}` (always-true, even-parity, magic-prefix)"
                ))
            })?,
        };
        let proposals = parse_proposals(proposals.as_deref().unwrap_or("unanimous"), seed)?;
        // an explicit unanimous value fixes L unless L is given
        let ls = match (ls, &proposals) {
            (Some(ls), _) => ls,
            (None, ProposalMode::Unanimous(Some(v))) => vec![v.bit_len()],
            (None, _) => num_list("L", defaults.ls)?,
        };
        Ok(Resolved {
            ns,
            ls,
            t: self.t.or(file.t),
            faults: parse_faults(&faults_text)?,
            faults_text,
            proposals,
            seed,
            predicate,
            out: self.out.clone().or(file.out),
            trials: self.trials.or(file.trials).unwrap_or(1),
        })
    }
}

/// `unanimous[:hex]`, `distinct` or `random[:seed]`; random without a seed
/// uses the run seed.
pub fn parse_proposals(text: &str, run_seed: u64) -> Result<ProposalMode, CliError> {
    let bad = |why: &str| CliError::Usage(format!("--proposals `{text}`: {why}"));
    let (kind, arg) = match text.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (text, None),
    };
    match (kind, arg) {
        ("unanimous", None) => Ok(ProposalMode::Unanimous(None)),
        ("unanimous", Some(h)) => {
            let bytes = hex::decode(h).map_err(|e| bad(&format!("bad hex value: {e}")))?;
            Ok(ProposalMode::Unanimous(Some(Value::from_bytes(bytes))))
        }
        ("distinct", None) => Ok(ProposalMode::Distinct),
        ("random", None) => Ok(ProposalMode::Random { seed: run_seed }),
        ("random", Some(s)) => s
            .parse()
            .map(|seed| ProposalMode::Random { seed })
            .map_err(|_| bad("seed must be a number")),
        _ => Err(bad("expected unanimous[:hex], distinct or random[:seed]")),
    }
}

fn parse_strategy(text: &str) -> Result<Strategy, String> {
    let (name, arg) = match text.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (text, None),
    };
    let number = |what: &str| -> Result<u64, String> {
        match arg {
            None => Ok(0),
            Some(a) => a
                .parse()
                .map_err(|_| format!("{what} `{a}` is not a number")),
        }
    };
    let s = match name {
        "silent" => Strategy::Silent,
        "impostor" => Strategy::Impostor,
        "crash" => {
            let a = arg.ok_or("crash needs a round, as in crash:5")?;
            Strategy::Crash {
                round: a
                    .parse()
                    .map_err(|_| format!("crash round `{a}` is not a number"))?,
            }
        }
        "equivocate" => Strategy::Equivocate {
            seed: number("seed")?,
        },
        "garbage" => Strategy::GarbageSymbols {
            seed: number("seed")?,
        },
        "indicator-liar" => Strategy::IndicatorLiar {
            seed: number("seed")?,
        },
        other => return Err(format!("unknown strategy `{other}`")),
    };
    if arg.is_some() && matches!(s, Strategy::Silent | Strategy::Impostor) {
        return Err(format!("{name} takes no argument"));
    }
    Ok(s)
}

/// `none`, or comma-separated `byz:<strategy>[:<arg>][@<count>]` entries.
pub fn parse_faults(text: &str) -> Result<Vec<(Strategy, usize)>, CliError> {
    let text = text.trim();
    if text == "none" || text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|entry| {
            let entry = entry.trim();
            let bad = |why: String| CliError::Usage(format!("--faults entry `{entry}`: {why}"));
            let body = entry
                .strip_prefix("byz:")
                .ok_or_else(|| bad("expected byz:<strategy>[:<arg>][@<count>]".into()))?;
            let (strategy, count) = match body.rsplit_once('@') {
                Some((s, c)) => (
                    s,
                    c.parse::<usize>()
                        .map_err(|_| bad(format!("count `{c}` is not a number")))?,
                ),
                None => (body, 1),
            };
            Ok((parse_strategy(strategy).map_err(bad)?, count))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fault_grammar() {
        assert!(parse_faults("none").unwrap().is_empty());
        assert_eq!(
            parse_faults("byz:equivocate@2").unwrap(),
            vec![(Strategy::Equivocate { seed: 0 }, 2)]
        );
        assert_eq!(
            parse_faults("byz:crash:12@1, byz:garbage:9, byz:impostor@3").unwrap(),
            vec![
                (Strategy::Crash { round: 12 }, 1),
                (Strategy::GarbageSymbols { seed: 9 }, 1),
                (Strategy::Impostor, 3),
            ]
        );
        for bad in [
            "equivocate@2",
            "byz:crash@1",
            "byz:mystery",
            "byz:silent:3",
            "byz:silent@x",
        ] {
            assert!(parse_faults(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn proposal_grammar() {
        assert_eq!(
            parse_proposals("distinct", 3).unwrap(),
            ProposalMode::Distinct
        );
        assert_eq!(
            parse_proposals("random", 3).unwrap(),
            ProposalMode::Random { seed: 3 }
        );
        assert_eq!(
            parse_proposals("random:8", 3).unwrap(),
            ProposalMode::Random { seed: 8 }
        );
        assert_eq!(
            parse_proposals("unanimous:a5ff", 3).unwrap(),
            ProposalMode::Unanimous(Some(Value::from_bytes(vec![0xA5, 0xFF])))
        );
        assert!(parse_proposals("unanimous:abc", 3).is_err());
        assert!(parse_proposals("some", 3).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("extba-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(
            &path,
            r#"{"n": [4, 8], "L": 128, "seed": 5, "valid": "even-parity"}"#,
        )
        .unwrap();
        let args = ConfigArgs {
            config: Some(path.clone()),
            seed: Some(9),
            ..Default::default()
        };
        let r = args.resolve(&RUN_DEFAULTS).unwrap();
        assert_eq!(r.ns, vec![4, 8]);
        assert_eq!(r.ls, vec![128]);
        assert_eq!(r.seed, 9);
        assert_eq!(r.predicate, BuiltinValidity::EvenParity);
        std::fs::write(&path, "{\n  \"n\": 4,\n  \"bogus\": 1\n}").unwrap();
        let err = args.resolve(&RUN_DEFAULTS).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        std::fs::remove_dir_all(dir).unwrap();
    }
}
