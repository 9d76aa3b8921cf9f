//! Binary policy files.
//!
//! Layout (little-endian): magic `GSPL`, format version `u16`, agent kind
//! `u8`, payload length `u64`, payload, CRC-32 of everything before it.

use std::fs;
use std::io::Read;
use std::path::Path;

use thiserror::Error;

use super::policy::{
    ActorCriticPolicy, AgentKind, AgentPolicy, DqnPolicy, GridPolicy, PriorityListPolicy, RandomPolicy, TabularPolicy,
};
use crate::deep::FeatureScales;
use crate::nn::Network;
use crate::tabular::{ActionTemplate, Bins, DiscretizationScheme, QTable, StorageMode};

pub const POLICY_MAGIC: &[u8; 4] = b"GSPL";
pub const POLICY_FORMAT_VERSION: u16 = 1;

const HEADER_LEN: usize = 4 + 2 + 1 + 8;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a policy file (bad magic)")]
    BadMagic,
    #[error("unsupported policy format version {0} (expected {POLICY_FORMAT_VERSION})")]
    Version(u16),
    #[error("checksum mismatch")]
    Checksum,
    #[error("corrupt policy file: {0}")]
    Corrupt(String),
}

fn corrupt(msg: impl Into<String>) -> PersistError {
    PersistError::Corrupt(msg.into())
}

#[derive(Default)]
struct Encoder(Vec<u8>);

impl Encoder {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }

    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn f64s(&mut self, vs: &[f64]) {
        self.u32(vs.len());
        for &v in vs {
            self.f64(v);
        }
    }

    fn templates(&mut self, ts: &[ActionTemplate]) {
        self.u32(ts.len());
        for t in ts {
            self.f64s(&t.gen_delta);
            self.u8(t.storage.code());
        }
    }

    fn scales(&mut self, s: &FeatureScales) {
        self.f64(s.demand);
        self.f64(s.solar);
        self.f64(s.wind);
        self.f64(s.soc_min);
        self.f64(s.soc_max);
        self.u32(s.steps_per_episode);
        self.f64s(&s.gen_max);
    }

    fn network(&mut self, n: &Network) {
        n.write_to(&mut self.0).expect("writing to a Vec cannot fail");
    }
}

struct Decoder<'a>(&'a [u8]);

impl<'a> Decoder<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], PersistError> {
        if self.0.len() < n {
            return Err(corrupt("unexpected end of data"));
        }
        let (head, rest) = self.0.split_at(n);
        self.0 = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, PersistError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize, PersistError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn u64(&mut self) -> Result<u64, PersistError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, PersistError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Element count, checked against the bytes that remain.
    fn count(&mut self, min_elem_bytes: usize) -> Result<usize, PersistError> {
        let n = self.u32()?;
        if n.saturating_mul(min_elem_bytes) > self.0.len() {
            return Err(corrupt("length field exceeds remaining data"));
        }
        Ok(n)
    }

    fn f64s(&mut self) -> Result<Vec<f64>, PersistError> {
        let n = self.count(8)?;
        (0..n).map(|_| self.f64()).collect()
    }

    fn templates(&mut self) -> Result<Vec<ActionTemplate>, PersistError> {
        let n = self.count(5)?;
        (0..n)
            .map(|_| {
                let gen_delta = self.f64s()?;
                let storage = StorageMode::from_code(self.u8()?).ok_or_else(|| corrupt("unknown storage mode"))?;
                Ok(ActionTemplate { gen_delta, storage })
            })
            .collect()
    }

    fn scales(&mut self) -> Result<FeatureScales, PersistError> {
        Ok(FeatureScales {
            demand: self.f64()?,
            solar: self.f64()?,
            wind: self.f64()?,
            soc_min: self.f64()?,
            soc_max: self.f64()?,
            steps_per_episode: self.u32()?,
            gen_max: self.f64s()?,
        })
    }

    fn network(&mut self) -> Result<Network, PersistError> {
        Network::read_from(&mut self.0).map_err(|e| corrupt(format!("network: {e}")))
    }

    fn bins(&mut self, name: &'static str) -> Result<Bins, PersistError> {
        Bins::new(self.f64s()?, name).map_err(|e| corrupt(e.to_string()))
    }

    fn finish(self) -> Result<(), PersistError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(corrupt("trailing bytes after payload"))
        }
    }
}

fn encode_payload(policy: &AgentPolicy, e: &mut Encoder) {
    match policy {
        AgentPolicy::Tabular(p) => {
            e.f64s(p.scheme.demand.edges());
            e.f64s(p.scheme.soc.edges());
            e.f64s(p.scheme.renewable.edges());
            e.u32(p.scheme.hours.unwrap_or(0));
            e.templates(&p.scheme.actions);
            e.u64(p.q.n_states() as u64);
            e.u32(p.q.n_actions());
            for &v in p.q.values() {
                e.f64(v);
            }
            for &n in p.q.visit_counts() {
                e.u32(n as usize);
            }
        }
        AgentPolicy::Dqn(p) => {
            e.templates(&p.templates);
            e.scales(&p.scales);
            e.network(&p.network);
        }
        AgentPolicy::ActorCritic(p) => {
            e.templates(&p.templates);
            e.scales(&p.scales);
            e.network(&p.actor);
            e.network(&p.critic);
        }
        AgentPolicy::PriorityList(_) => {}
        AgentPolicy::Random(p) => e.templates(&p.templates),
    }
}

fn decode_payload(kind: AgentKind, d: &mut Decoder) -> Result<AgentPolicy, PersistError> {
    Ok(match kind {
        AgentKind::Qlearning => {
            let demand = d.bins("demand")?;
            let soc = d.bins("soc")?;
            let renewable = d.bins("renewable")?;
            let hours = Some(d.u32()?).filter(|&h| h > 0);
            let actions = d.templates()?;
            let scheme = DiscretizationScheme::new(demand, soc, renewable, hours, actions)
                .map_err(|e| corrupt(e.to_string()))?;
            let n_states = usize::try_from(d.u64()?).map_err(|_| corrupt("state count overflow"))?;
            let n_actions = d.u32()?;
            let cells = n_states
                .checked_mul(n_actions)
                .filter(|c| c.saturating_mul(12) <= d.0.len())
                .ok_or_else(|| corrupt("Q-table size exceeds remaining data"))?;
            let values = (0..cells).map(|_| d.f64()).collect::<Result<Vec<_>, _>>()?;
            let visits = (0..cells).map(|_| d.u32().map(|v| v as u32)).collect::<Result<Vec<_>, _>>()?;
            let q = QTable::from_parts(n_states, n_actions, values, visits).ok_or_else(|| corrupt("Q-table shape"))?;
            AgentPolicy::Tabular(TabularPolicy { scheme, q })
        }
        AgentKind::Dqn => AgentPolicy::Dqn(DqnPolicy {
            templates: d.templates()?,
            scales: d.scales()?,
            network: d.network()?,
        }),
        AgentKind::ActorCritic => AgentPolicy::ActorCritic(ActorCriticPolicy {
            templates: d.templates()?,
            scales: d.scales()?,
            actor: d.network()?,
            critic: d.network()?,
        }),
        AgentKind::PriorityList => AgentPolicy::PriorityList(PriorityListPolicy),
        AgentKind::Random => AgentPolicy::Random(RandomPolicy { templates: d.templates()? }),
    })
}

pub fn encode_policy(policy: &AgentPolicy) -> Vec<u8> {
    let mut payload = Encoder::default();
    encode_payload(policy, &mut payload);
    let mut out = Vec::with_capacity(HEADER_LEN + payload.0.len() + 4);
    out.extend_from_slice(POLICY_MAGIC);
    out.extend_from_slice(&POLICY_FORMAT_VERSION.to_le_bytes());
    out.push(policy.kind().code());
    out.extend_from_slice(&(payload.0.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload.0);
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn decode_policy(bytes: &[u8]) -> Result<AgentPolicy, PersistError> {
    if bytes.len() < 4 || &bytes[..4] != POLICY_MAGIC {
        return Err(PersistError::BadMagic);
    }
    if bytes.len() < HEADER_LEN + 4 {
        return Err(corrupt("file too short"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != POLICY_FORMAT_VERSION {
        return Err(PersistError::Version(version));
    }
    let (body, crc) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(crc.try_into().unwrap()) {
        return Err(PersistError::Checksum);
    }
    let kind = AgentKind::from_code(bytes[6]).ok_or_else(|| corrupt(format!("unknown agent kind {}", bytes[6])))?;
    let len = u64::from_le_bytes(bytes[7..15].try_into().unwrap());
    if len != (body.len() - HEADER_LEN) as u64 {
        return Err(corrupt("payload length mismatch"));
    }
    let mut d = Decoder(&body[HEADER_LEN..]);
    let policy = decode_payload(kind, &mut d)?;
    d.finish()?;
    Ok(policy)
}

pub fn save_policy(policy: &AgentPolicy, path: &Path) -> Result<(), PersistError> {
    fs::write(path, encode_policy(policy)).map_err(|source| PersistError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_policy(path: &Path) -> Result<AgentPolicy, PersistError> {
    let io = |source| PersistError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut bytes = Vec::new();
    fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(io)?;
    decode_policy(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridConfig;
    use crate::nn::init_network;
    use crate::stochastic::make_rng;
    use crate::tabular::action_templates;

    fn tabular() -> AgentPolicy {
        let config = GridConfig::small_grid();
        let scheme = DiscretizationScheme::for_config(&config, 4, 3, 2, true, action_templates(&config, 0.1)).unwrap();
        let mut q = QTable::zeros(scheme.n_states(), scheme.n_actions());
        let mut rng = make_rng(3);
        for s in 0..q.n_states() {
            for a in 0..q.n_actions() {
                q.set(s, a, rng.normal(1.0));
                if rng.uniform() < 0.3 {
                    q.record_visit(s, a);
                }
            }
        }
        AgentPolicy::Tabular(TabularPolicy { scheme, q })
    }

    fn dqn() -> AgentPolicy {
        let config = GridConfig::small_grid();
        let templates = action_templates(&config, 0.1);
        let scales = FeatureScales::from_config(&config);
        AgentPolicy::Dqn(DqnPolicy {
            network: init_network(&[scales.len(), 5, templates.len()], 9).unwrap(),
            templates,
            scales,
        })
    }

    #[test]
    fn round_trips_are_exact() {
        for p in [tabular(), dqn(), AgentPolicy::PriorityList(PriorityListPolicy)] {
            let bytes = encode_policy(&p);
            assert_eq!(decode_policy(&bytes).unwrap(), p);
        }
    }

    #[test]
    fn truncation_is_a_clean_error() {
        let bytes = encode_policy(&tabular());
        for cut in [0, 3, 10, HEADER_LEN, bytes.len() / 2, bytes.len() - 1] {
            assert!(decode_policy(&bytes[..cut]).is_err(), "cut at {cut}");
        }
    }

    #[test]
    fn bit_flips_are_detected() {
        let bytes = encode_policy(&dqn());
        for i in (0..bytes.len()).step_by(7) {
            let mut bad = bytes.clone();
            bad[i] ^= 0x10;
            assert!(decode_policy(&bad).is_err(), "flip at {i}");
        }
    }

    #[test]
    fn version_mismatch_is_reported() {
        let mut bytes = encode_policy(&dqn());
        bytes[4] = 9;
        assert!(matches!(decode_policy(&bytes), Err(PersistError::Version(9))));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_policy(Path::new("/nonexistent/policy.bin")).unwrap_err();
        assert!(matches!(err, PersistError::Io { .. }));
    }
}
