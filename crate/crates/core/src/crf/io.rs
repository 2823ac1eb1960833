//! Text model format:
//!
//! ```text
//! glossa-crf 1
//! profile extended
//! max_affix_len 4
//! use_ngrams true
//! l2 0.1
//! tags D N V P+D
//! obs <feature> <w_0> ... <w_{K-1}>
//! trans <row a: K weights>
//! start <K weights>
//! end <K weights>
//! ```
//!
//! Features contain no whitespace (tokens are whitespace-split), and weights
//! are written in shortest round-trip form, so a save/load cycle is exact.

use std::fmt::Write as _;
use std::path::Path;

use indexmap::IndexMap;

use super::{CrfError, CrfModel, FeatureTemplateConfig, Profile};
use crate::corpus::parse_tag;

const MAGIC: &str = "glossa-crf 1";

fn join(ws: &[f64]) -> String {
    ws.iter().map(|w| format!("{w:?}")).collect::<Vec<_>>().join(" ")
}

impl CrfModel {
    pub fn to_text(&self) -> String {
        let k = self.num_tags();
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let profile = match self.template.profile {
            Profile::Basic => "basic",
            Profile::Extended => "extended",
        };
        let _ = writeln!(out, "profile {profile}");
        let _ = writeln!(out, "max_affix_len {}", self.template.max_affix_len);
        let _ = writeln!(out, "use_ngrams {}", self.template.use_ngrams);
        let _ = writeln!(out, "l2 {:?}", self.l2);
        let tags: Vec<String> = self.tagset.iter().map(|t| t.to_string()).collect();
        let _ = writeln!(out, "tags {}", tags.join(" "));
        for (f, &id) in &self.feature_index {
            let _ = writeln!(out, "obs {f} {}", join(&self.weights[id * k..(id + 1) * k]));
        }
        let to = self.trans_offset();
        for a in 0..k {
            let _ = writeln!(out, "trans {}", join(&self.weights[to + a * k..to + (a + 1) * k]));
        }
        let so = self.start_offset();
        let _ = writeln!(out, "start {}", join(&self.weights[so..so + k]));
        let _ = writeln!(out, "end {}", join(&self.weights[so + k..]));
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CrfError> {
        let mut lines = text.lines().enumerate();
        let mut next = |what: &str| {
            lines.next().ok_or(CrfError::Format {
                line: 0,
                msg: format!("missing {what}"),
            })
        };
        let (_, magic) = next("header")?;
        if magic != MAGIC {
            return Err(CrfError::Format {
                line: 1,
                msg: format!("unsupported header `{magic}`"),
            });
        }
        let mut field = |key: &str| -> Result<(usize, String), CrfError> {
            let (n, line) = next(key)?;
            let rest = line
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .ok_or(CrfError::Format {
                    line: n + 1,
                    msg: format!("expected `{key}`"),
                })?;
            Ok((n + 1, rest.to_string()))
        };
        let bad = |line: usize, msg: String| CrfError::Format { line, msg };

        let (n, profile) = field("profile")?;
        let profile = match profile.as_str() {
            "basic" => Profile::Basic,
            "extended" => Profile::Extended,
            other => return Err(bad(n, format!("unknown profile `{other}`"))),
        };
        let (n, affix) = field("max_affix_len")?;
        let max_affix_len = affix.parse().map_err(|_| bad(n, "bad max_affix_len".into()))?;
        let (n, ngrams) = field("use_ngrams")?;
        let use_ngrams = ngrams.parse().map_err(|_| bad(n, "bad use_ngrams".into()))?;
        let (n, l2) = field("l2")?;
        let l2 = l2.parse().map_err(|_| bad(n, "bad l2".into()))?;
        let (n, tags) = field("tags")?;
        let tagset = tags
            .split(' ')
            .map(|t| parse_tag(t).map_err(|e| bad(n, e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let k = tagset.len();
        let template = FeatureTemplateConfig {
            profile,
            max_affix_len,
            use_ngrams,
        };

        let parse_ws = |n: usize, s: &str| -> Result<Vec<f64>, CrfError> {
            let ws = s
                .split(' ')
                .map(|w| w.parse::<f64>().map_err(|_| bad(n, format!("bad weight `{w}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            if ws.len() != k {
                return Err(bad(n, format!("expected {k} weights, found {}", ws.len())));
            }
            Ok(ws)
        };

        let mut feature_index = IndexMap::new();
        let mut obs = Vec::new();
        let mut trans = Vec::new();
        let mut start = None;
        let mut end = None;
        for (i, line) in text.lines().enumerate().skip(6) {
            let n = i + 1;
            let (kind, rest) = line.split_once(' ').ok_or_else(|| bad(n, "empty line".into()))?;
            match kind {
                "obs" => {
                    let (feat, ws) = rest
                        .split_once(' ')
                        .ok_or_else(|| bad(n, "missing weights".into()))?;
                    let id = feature_index.len();
                    if feature_index.insert(feat.to_string(), id).is_some() {
                        return Err(bad(n, format!("duplicate feature `{feat}`")));
                    }
                    obs.extend(parse_ws(n, ws)?);
                }
                "trans" => trans.extend(parse_ws(n, rest)?),
                "start" => start = Some(parse_ws(n, rest)?),
                "end" => end = Some(parse_ws(n, rest)?),
                other => return Err(bad(n, format!("unknown record `{other}`"))),
            }
        }
        if trans.len() != k * k {
            return Err(bad(0, format!("expected {k} transition rows")));
        }
        let start = start.ok_or_else(|| bad(0, "missing start".into()))?;
        let end = end.ok_or_else(|| bad(0, "missing end".into()))?;
        let mut weights = obs;
        weights.extend(trans);
        weights.extend(start);
        weights.extend(end);
        Ok(CrfModel {
            tagset,
            feature_index,
            weights,
            template,
            l2,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CrfError> {
        Ok(std::fs::write(path, self.to_text())?)
    }

    pub fn load(path: &Path) -> Result<Self, CrfError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_tag, Sentence};
    use crate::crf::{train_crf, CrfConfig};

    #[test]
    fn exact_round_trip() {
        let t = |s: &str| parse_tag(s).unwrap();
        let data = vec![
            Sentence::from_pairs(&[("stì", t("P+D")), ("chòra", t("N")), (".", t("PUNCT"))]),
            Sentence::from_pairs(&[("ènna", t("V+C")), ("pào", t("V"))]),
        ];
        for cfg in [CrfConfig::basic(), CrfConfig::extended()] {
            let (model, _) = train_crf(&data, None, &cfg).unwrap();
            let text = model.to_text();
            let back = CrfModel::from_text(&text).unwrap();
            assert_eq!(back, model);
            assert_eq!(back.to_text(), text);
        }
    }

    #[test]
    fn rejects_corrupt_files() {
        assert!(CrfModel::from_text("nope").is_err());
        let t = |s: &str| parse_tag(s).unwrap();
        let data = vec![Sentence::from_pairs(&[("a", t("N")), ("b", t("V"))])];
        let (model, _) = train_crf(&data, None, &CrfConfig::basic()).unwrap();
        let text = model.to_text().replace("start ", "start 1.0 ");
        assert!(CrfModel::from_text(&text).is_err());
    }
}
