//! Plain-text model files.
//!
//! ```text
//! mvbeta-model v1
//! kind,mvbeta
//! priors,0.5,0.5
//! channel,12
//! criterion,variance
//! kept,2,1
//! positive_a,...
//! ```
//!
//! Every line after the header is `key,value,...`. Channel numbers and kept
//! indices are 1-based. Floats use Rust's shortest round-trip formatting, so a
//! written model reads back bit-identical.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{
    Classifier, ClassifierKind, GaussianComponent, MvBetaChannel, MvBetaModel, PcaChannel, PcaGaussModel, Priors,
    SuperDirichletModel,
};
use crate::dirstat::DirichletParams;
use crate::error::{Error, Result};
use crate::msignal::MdwtVector;
use crate::neutral::BetaParamVector;
use crate::selection::{Criterion, FeatureSelection};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const HEADER_PREFIX: &str = "mvbeta-model v";

/// Any trained classifier.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    MvBeta(MvBetaModel),
    SuperDirichlet(SuperDirichletModel),
    PcaGauss(PcaGaussModel),
}

impl Model {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Model::MvBeta(_) => ClassifierKind::MvBeta,
            Model::SuperDirichlet(_) => ClassifierKind::SuperDirichlet,
            Model::PcaGauss(_) => ClassifierKind::PcaGauss,
        }
    }

    fn classifier(&self) -> &dyn Classifier {
        match self {
            Model::MvBeta(m) => m,
            Model::SuperDirichlet(m) => m,
            Model::PcaGauss(m) => m,
        }
    }

    fn priors(&self) -> Priors {
        match self {
            Model::MvBeta(m) => m.priors,
            Model::SuperDirichlet(m) => m.priors,
            Model::PcaGauss(m) => m.priors,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER_PREFIX}{MODEL_FORMAT_VERSION}\n");
        line(&mut out, "kind", [self.kind().to_string()]);
        let p = self.priors();
        line(&mut out, "priors", floats(&[p.positive(), p.negative()]));
        match self {
            Model::MvBeta(m) => {
                for ch in &m.channels {
                    line(&mut out, "channel", [ch.channel.to_string()]);
                    line(&mut out, "criterion", [ch.selection.criterion.to_string()]);
                    line(&mut out, "kept", ch.selection.kept.iter().map(|k| (k + 1).to_string()));
                    for (key, params) in [("positive", &ch.positive), ("negative", &ch.negative)] {
                        let a: Vec<f64> = params.iter().map(|p| p.a).collect();
                        let b: Vec<f64> = params.iter().map(|p| p.b).collect();
                        line(&mut out, &format!("{key}_a"), floats(&a));
                        line(&mut out, &format!("{key}_b"), floats(&b));
                    }
                }
            }
            Model::SuperDirichlet(m) => {
                for (i, c) in m.channels.iter().enumerate() {
                    line(&mut out, "channel", [c.to_string()]);
                    line(&mut out, "positive_alpha", floats(m.positive[i].alpha()));
                    line(&mut out, "negative_alpha", floats(m.negative[i].alpha()));
                }
            }
            Model::PcaGauss(m) => {
                for ch in &m.channels {
                    line(&mut out, "channel", [ch.channel.to_string()]);
                    line(&mut out, "center", floats(&ch.center));
                    for dir in &ch.basis {
                        line(&mut out, "basis", floats(dir));
                    }
                    for (key, comps) in [("positive", &ch.positive), ("negative", &ch.negative)] {
                        for g in comps {
                            line(&mut out, "component", [key.to_string(), g.weight.to_string()]);
                            line(&mut out, "mean", floats(&g.mean));
                            line(&mut out, "cov", floats(&g.cov));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Format("empty model file".into()))?;
        let version = header
            .trim()
            .strip_prefix(HEADER_PREFIX)
            .and_then(|v| v.parse::<u32>().ok())
            .ok_or_else(|| Error::Format(format!("bad header {header:?}")))?;
        if version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported model format version {version}")));
        }
        let records: Vec<Record> = lines
            .map(|(no, l)| {
                let mut fields = l.trim().split(',').map(str::trim);
                let key = fields.next().unwrap_or_default().to_string();
                Record {
                    line: no + 1,
                    key,
                    values: fields.map(str::to_string).collect(),
                }
            })
            .collect();
        let mut cur = Cursor { records: &records, pos: 0 };
        let kind: ClassifierKind = cur.expect("kind")?.single()?.parse()?;
        let priors = cur.expect("priors")?.floats()?;
        if priors.len() != 2 || (priors[0] + priors[1] - 1.0).abs() > 1e-12 {
            return Err(Error::Format("priors must be two values summing to 1".into()));
        }
        let priors = Priors::new(priors[0])?;

        let model = match kind {
            ClassifierKind::MvBeta => {
                let mut channels = Vec::new();
                while !cur.done() {
                    let channel = cur.expect("channel")?.channel()?;
                    let criterion = Criterion::from_str(cur.expect("criterion")?.single()?)?;
                    let kept = cur
                        .expect("kept")?
                        .indices()?
                        .into_iter()
                        .map(|k| k - 1)
                        .collect::<Vec<_>>();
                    let positive = beta_block(&mut cur, "positive")?;
                    let negative = beta_block(&mut cur, "negative")?;
                    if positive.len() != negative.len() || kept.iter().any(|&k| k >= positive.len()) {
                        return Err(Error::Format(format!("channel {channel}: inconsistent block sizes")));
                    }
                    channels.push(MvBetaChannel {
                        channel,
                        selection: FeatureSelection { kept, criterion },
                        positive,
                        negative,
                    });
                }
                Model::MvBeta(MvBetaModel { channels, priors })
            }
            ClassifierKind::SuperDirichlet => {
                let mut m = SuperDirichletModel {
                    channels: Vec::new(),
                    positive: Vec::new(),
                    negative: Vec::new(),
                    priors,
                };
                while !cur.done() {
                    m.channels.push(cur.expect("channel")?.channel()?);
                    m.positive.push(DirichletParams::new(cur.expect("positive_alpha")?.floats()?)?);
                    m.negative.push(DirichletParams::new(cur.expect("negative_alpha")?.floats()?)?);
                }
                Model::SuperDirichlet(m)
            }
            ClassifierKind::PcaGauss => {
                let mut channels = Vec::new();
                while !cur.done() {
                    let channel = cur.expect("channel")?.channel()?;
                    let center = cur.expect("center")?.floats()?;
                    let mut basis = Vec::new();
                    while cur.peek_key() == Some("basis") {
                        basis.push(cur.expect("basis")?.floats()?);
                    }
                    let mut ch = PcaChannel {
                        channel,
                        center,
                        basis,
                        positive: Vec::new(),
                        negative: Vec::new(),
                    };
                    while cur.peek_key() == Some("component") {
                        let rec = cur.expect("component")?;
                        if rec.values.len() != 2 {
                            return Err(rec.error("expected class and weight"));
                        }
                        let weight = parse_float(rec, &rec.values[1])?;
                        let g = GaussianComponent {
                            weight,
                            mean: cur.expect("mean")?.floats()?,
                            cov: cur.expect("cov")?.floats()?,
                        };
                        let r = ch.basis.len();
                        if g.mean.len() != r || g.cov.len() != r * r {
                            return Err(rec.error("component size does not match basis"));
                        }
                        match rec.values[0].as_str() {
                            "positive" => ch.positive.push(g),
                            "negative" => ch.negative.push(g),
                            other => return Err(rec.error(&format!("unknown class {other:?}"))),
                        }
                    }
                    if ch.basis.is_empty()
                        || ch.basis.iter().any(|b| b.len() != ch.center.len())
                        || ch.positive.is_empty()
                        || ch.negative.is_empty()
                    {
                        return Err(Error::Format(format!("channel {channel}: incomplete block")));
                    }
                    channels.push(ch);
                }
                Model::PcaGauss(PcaGaussModel { channels, priors })
            }
        };
        if model.classifier().channel_list().is_empty() {
            return Err(Error::Format("model has no channels".into()));
        }
        Ok(model)
    }
}

impl Classifier for Model {
    fn log_posteriors(&self, channels: &[MdwtVector]) -> Result<(f64, f64)> {
        self.classifier().log_posteriors(channels)
    }

    fn channel_list(&self) -> Vec<usize> {
        self.classifier().channel_list()
    }
}

impl From<MvBetaModel> for Model {
    fn from(m: MvBetaModel) -> Self {
        Model::MvBeta(m)
    }
}

impl From<SuperDirichletModel> for Model {
    fn from(m: SuperDirichletModel) -> Self {
        Model::SuperDirichlet(m)
    }
}

impl From<PcaGaussModel> for Model {
    fn from(m: PcaGaussModel) -> Self {
        Model::PcaGauss(m)
    }
}

fn floats(v: &[f64]) -> impl Iterator<Item = String> + '_ {
    v.iter().map(|x| x.to_string())
}

fn line(out: &mut String, key: &str, values: impl IntoIterator<Item = String>) {
    out.push_str(key);
    for v in values {
        let _ = write!(out, ",{v}");
    }
    out.push('\n');
}

fn parse_float(rec: &Record, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| rec.error(&format!("bad number {s:?}")))
}

fn beta_block(cur: &mut Cursor<'_>, class: &str) -> Result<BetaParamVector> {
    let a = cur.expect(&format!("{class}_a"))?.floats()?;
    let b = cur.expect(&format!("{class}_b"))?.floats()?;
    BetaParamVector::new(a, b)
}

struct Record {
    line: usize,
    key: String,
    values: Vec<String>,
}

impl Record {
    fn error(&self, msg: &str) -> Error {
        Error::Format(format!("line {} ({}): {msg}", self.line, self.key))
    }

    fn single(&self) -> Result<&str> {
        match self.values.as_slice() {
            [v] => Ok(v),
            _ => Err(self.error("expected exactly one value")),
        }
    }

    fn floats(&self) -> Result<Vec<f64>> {
        if self.values.is_empty() {
            return Err(self.error("no values"));
        }
        self.values.iter().map(|s| parse_float(self, s)).collect()
    }

    fn indices(&self) -> Result<Vec<usize>> {
        if self.values.is_empty() {
            return Err(self.error("no values"));
        }
        self.values
            .iter()
            .map(|s| {
                s.parse::<usize>()
                    .ok()
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| self.error(&format!("bad index {s:?}")))
            })
            .collect()
    }

    fn channel(&self) -> Result<usize> {
        let c = self.single()?;
        c.parse::<usize>()
            .ok()
            .filter(|&c| c >= 1)
            .ok_or_else(|| self.error(&format!("bad channel {c:?}")))
    }
}

struct Cursor<'a> {
    records: &'a [Record],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn done(&self) -> bool {
        self.pos >= self.records.len()
    }

    fn peek_key(&self) -> Option<&str> {
        self.records.get(self.pos).map(|r| r.key.as_str())
    }

    fn expect(&mut self, key: &str) -> Result<&'a Record> {
        let rec = self
            .records
            .get(self.pos)
            .ok_or_else(|| Error::Format(format!("unexpected end of file, wanted {key:?}")))?;
        if rec.key != key {
            return Err(rec.error(&format!("expected {key:?}")));
        }
        self.pos += 1;
        Ok(rec)
    }
}
